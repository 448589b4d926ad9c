"""Client-side drivers for the framed TCP protocol; used by the CLI and tests."""

from __future__ import annotations

import socket
from typing import Optional

from . import wire
from .elgamal import PublicKey
from .group import GroupParams
from .localpr import PasswordSpec, RecoveryOutcome
from .protocols import (
    RecoveryRecord,
    cr_prove,
    cr_register,
    crpr_register,
    hpr_register,
    recover_from_partials,
)
from .ot import ot_choose, ot_common, ot_recover, OtResponse
from .substring import (
    SubstringAccount,
    substring_client_finish,
    substring_client_request,
    substring_register,
)


class ServerError(RuntimeError):
    def __init__(self, code: str, message: str, extra: dict = None):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.extra = extra or {}


class ServerConnection:
    def __init__(self, host: str, port: int, psk: bytes = None, timeout: float = 30.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self.psk = psk

    def call(self, request: dict) -> dict:
        wire.send_frame(self.sock, request, self.psk)
        response = wire.recv_frame(self.sock, self.psk)
        if response is None:
            raise ServerError("closed", "server closed the connection")
        if response["type"] == "error":
            raise ServerError(
                response.get("code", "unknown"),
                response.get("message", ""),
                {k: v for k, v in response.items() if k not in ("type", "code", "message")},
            )
        return response

    def close(self) -> None:
        self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def register_hash(
    conn: ServerConnection, spec: PasswordSpec, params: GroupParams, login: str, password: str, rng
) -> RecoveryRecord:
    record = hpr_register(spec, params, login, password, rng)
    conn.call({"type": "register_hash", "record": wire.record_to_wire(record)})
    return record


def register_cr(
    conn: ServerConnection, spec: PasswordSpec, params: GroupParams, login: str, password: str, rng
) -> RecoveryRecord:
    record = crpr_register(spec, params, login, password, rng)
    conn.call({"type": "register_cr", "record": wire.record_to_wire(record)})
    return record


def register_simple(conn: ServerConnection, spec: PasswordSpec, login: str, password: str) -> None:
    conn.call(
        {
            "type": "register_simple",
            "login": login,
            "password": password,
            "spec": wire.spec_to_wire(spec),
        }
    )


def register_substring(
    conn: ServerConnection, spec: PasswordSpec, params: GroupParams, login: str, password: str
) -> None:
    record = substring_register(spec, login, password)
    acct = SubstringAccount(record=record, params=params, d=cr_register(params, password).d)
    payload = wire.substring_account_to_wire(acct)
    conn.call({"type": "register_substring", **payload})


def login_hash(conn: ServerConnection, login: str, password: str) -> bool:
    response = conn.call({"type": "login_hash", "login": login, "password": password})
    return response["type"] == "ok"


def login_cr(conn: ServerConnection, login: str, password: str) -> bool:
    challenge = conn.call({"type": "login_cr_start", "login": login})
    params = wire.params_from_wire(challenge["params"])
    proof = cr_prove(params, wire.from_hex(challenge["b"]), password)
    response = conn.call(
        {
            "type": "login_cr_finish",
            "challenge": challenge["challenge"],
            "proof": wire.to_hex(proof),
        }
    )
    return response["type"] == "ok"


def recover_hash(conn: ServerConnection, login: str, guess: str) -> RecoveryOutcome:
    response = conn.call({"type": "recover_hash", "login": login, "guess": guess})
    resp = wire.response_from_wire(response)
    return recover_from_partials(resp.spec, resp.v1, resp.pk, resp.c, resp.partials, guess)


def recover_simple(conn: ServerConnection, login: str, guess: str) -> Optional[str]:
    response = conn.call({"type": "recover_simple", "login": login, "guess": guess})
    if response["type"] == "recover_simple_resp":
        return response["password"]
    return None


def recover_cr(conn: ServerConnection, login: str, guess: str, rng) -> RecoveryOutcome:
    """n oblivious transfers, one per guess character; the guess never leaves the client."""
    start = conn.call({"type": "recover_cr_start", "login": login})
    params = wire.params_from_wire(start["params"])
    spec = wire.spec_from_wire(start["spec"])
    spec.check_password(guess)
    sid = start["session"]
    common = ot_common(params, sid.encode())
    cprime = wire.ciphertext_from_wire(start["c"])
    v1 = bytes.fromhex(start["v1"])
    partials = []
    for i, ch in enumerate(guess):
        state, B = ot_choose(params, common, spec.m, spec.alphabet.index(ch), rng)
        reply = conn.call(
            {"type": "recover_cr_ot", "session": sid, "position": i, "B": wire.to_hex(B)}
        )
        slots = OtResponse(
            slots=tuple(wire.ciphertext_from_wire(s) for s in reply["slots"])
        )
        partials.append(ot_recover(params, state, slots))
    pk = PublicKey(params, wire.from_hex(start["h"]))
    return recover_from_partials(spec, v1, pk, cprime, partials, guess)


def recover_substring(
    conn: ServerConnection, spec: PasswordSpec, login: str, guess: str, rng, bits: int = 2048
) -> Optional[str]:
    keys, cts = substring_client_request(spec, guess, rng, bits)
    response = conn.call(
        {
            "type": "recover_substring",
            "login": login,
            "modulus": wire.to_hex(keys.pk.n),
            "windows": [wire.to_hex(c) for c in cts],
        }
    )
    out = [wire.from_hex(x) for x in response["windows"]]
    return substring_client_finish(spec, keys, out, guess)
