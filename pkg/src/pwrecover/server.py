"""TCP account-recovery service: registration, both login families, all recovery flows.

One thread per connection; the store, attempt counters, challenge table and
OT session table sit behind a single lock, while the crypto handlers run
per-session without shared mutable state. Responses never carry v2, masked
share values or secret keys; the recovery replies are built from the
transport-free protocol layer and serialized by wire.py.
"""

from __future__ import annotations

import logging
import os
import secrets
import socketserver
import threading
import time
from dataclasses import dataclass
from typing import Callable, Optional

from . import wire
from .group import GroupParams, exp_count, is_element
from .protocols import (
    ChalRespAuth,
    HashAuth,
    RecoveryRecord,
    SimpleAccount,
    cr_challenge,
    cr_verify,
    crpr_payloads,
    crpr_server_start,
    hpr_server_respond,
    password_hash,
    simple_recover,
    simple_register,
)
from .ot import ot_common, ot_respond
from .store import AccountStore, AttemptPolicy, DuplicateLoginError, UnknownLoginError
from .substring import SubstringAccount, substring_server_respond
from .vectors import REAL_2048

logger = logging.getLogger("pwrecover.server")
if os.environ.get("PWRECOVER_LOG"):
    logging.basicConfig(level=os.environ["PWRECOVER_LOG"].upper())


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 0
    store_path: Optional[str] = None
    params: GroupParams = REAL_2048
    max_attempts: int = 10
    lockout_seconds: float = 900.0
    psk: Optional[bytes] = None
    session_ttl: float = 300.0
    min_paillier_bits: int = 1024
    clock: Callable[[], float] = time.time
    frame_hook: Optional[Callable[[str, str, dict], None]] = None


class _Refuse(Exception):
    def __init__(self, code: str, message: str, **extra):
        super().__init__(message)
        self.code = code
        self.extra = extra

    def frame(self) -> dict:
        return {"type": "error", "code": self.code, "message": str(self), **self.extra}


RECOVERY_TYPES = {"recover_hash", "recover_simple", "recover_cr_start", "recover_substring"}


class RecoveryServer:
    def __init__(self, config: ServerConfig = None):
        self.config = config or ServerConfig()
        self.store = AccountStore(self.config.store_path)
        self.policy = AttemptPolicy(
            max_attempts=self.config.max_attempts,
            lockout=self.config.lockout_seconds,
            clock=self.config.clock,
        )
        self.lock = threading.RLock()
        self.challenges = {}
        self.ot_sessions = {}
        self.rng = secrets.SystemRandom()
        app = self

        class Handler(socketserver.BaseRequestHandler):
            def handle(self):
                app._serve_connection(self.request)

        class TCP(socketserver.ThreadingTCPServer):
            allow_reuse_address = True
            daemon_threads = True

        self._tcp = TCP((self.config.host, self.config.port), Handler)
        self._thread = None

    @property
    def address(self) -> tuple[str, int]:
        return self._tcp.server_address[:2]

    def serve_forever(self) -> None:
        logger.info("listening on %s:%d", *self.address)
        self._tcp.serve_forever()

    def start_background(self) -> tuple[str, int]:
        self._thread = threading.Thread(target=self._tcp.serve_forever, daemon=True)
        self._thread.start()
        return self.address

    def shutdown(self) -> None:
        self._tcp.shutdown()
        self._tcp.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    def _serve_connection(self, sock) -> None:
        session = secrets.token_hex(4)
        psk = self.config.psk
        logger.info("[%s] connected", session)
        while True:
            try:
                request = wire.recv_frame(sock, psk)
            except wire.FrameError as e:
                logger.warning("[%s] protocol error: %s", session, e)
                self._send(sock, session, {"type": "error", "code": "protocol_error", "message": str(e)})
                break
            if request is None:
                break
            if self.config.frame_hook:
                self.config.frame_hook("recv", session, request)
            before = exp_count()
            try:
                response = self._dispatch(session, request)
            except _Refuse as refuse:
                response = refuse.frame()
            except (ValueError, KeyError, TypeError) as e:
                response = {"type": "error", "code": "bad_request", "message": str(e)}
            logger.info(
                "[%s] %s -> %s (%d exps)",
                session,
                request.get("type"),
                response.get("type"),
                exp_count() - before,
            )
            self._send(sock, session, response)
        logger.info("[%s] closed", session)

    def _send(self, sock, session: str, frame: dict) -> None:
        if self.config.frame_hook:
            self.config.frame_hook("send", session, frame)
        try:
            wire.send_frame(sock, frame, self.config.psk)
        except OSError:
            pass

    def _dispatch(self, session: str, request: dict) -> dict:
        mtype = request["type"]
        handler = getattr(self, "_on_" + mtype, None)
        if handler is None:
            raise _Refuse("bad_request", f"unknown message type {mtype!r}")
        if mtype in RECOVERY_TYPES:
            self._rate_gate(request)
        return handler(request)

    def _rate_gate(self, request: dict) -> None:
        login = request.get("login")
        if not isinstance(login, str):
            raise _Refuse("bad_request", "missing login")
        with self.lock:
            allowed, until = self.policy.check(login)
        if not allowed:
            raise _Refuse("locked", "too many recovery attempts", until=until)

    def _lookup(self, login, want=None):
        if not isinstance(login, str):
            raise _Refuse("bad_request", "missing login")
        with self.lock:
            try:
                acct = self.store.lookup(login)
            except UnknownLoginError:
                raise _Refuse("unknown_login", f"no account {login!r}") from None
        if want is not None and not isinstance(acct, want):
            raise _Refuse("wrong_mode", "account was registered under a different mode")
        return acct

    def _add_account(self, acct) -> dict:
        with self.lock:
            try:
                self.store.add(acct)
            except DuplicateLoginError as e:
                raise _Refuse("duplicate_login", str(e)) from None
        return {"type": "ok"}

    # -- registration --

    def _on_register_hash(self, request: dict) -> dict:
        record = wire.record_from_wire(request["record"])
        if not isinstance(record.auth, HashAuth):
            raise _Refuse("bad_request", "hash registration needs a hash authenticator")
        self._validate_record(record)
        return self._add_account(record)

    def _on_register_cr(self, request: dict) -> dict:
        record = wire.record_from_wire(request["record"])
        if not isinstance(record.auth, ChalRespAuth):
            raise _Refuse("bad_request", "cr registration needs a challenge-response authenticator")
        self._validate_record(record)
        return self._add_account(record)

    def _validate_record(self, record: RecoveryRecord) -> None:
        params = record.pk.params.validate()
        elements = [record.pk.h, record.c.a, record.c.b]
        if isinstance(record.auth, ChalRespAuth):
            elements.append(record.auth.d)
        if not all(is_element(params, e) for e in elements):
            raise _Refuse("bad_request", "record contains a non-subgroup element")
        if record.spec.capacity() >= params.q:
            raise _Refuse("bad_request", "alphabet^n does not fit the group order")

    def _on_register_simple(self, request: dict) -> dict:
        spec = wire.spec_from_wire(request["spec"])
        account = simple_register(
            spec, self.config.params.q, request["login"], request["password"], self.rng
        )
        return self._add_account(account)

    def _on_register_substring(self, request: dict) -> dict:
        acct = wire.substring_account_from_wire(
            {k: request[k] for k in ("login", "params", "d", "tags", "blobs", "spec")}
        )
        acct.params.validate()
        return self._add_account(acct)

    # -- login --

    def _on_login_hash(self, request: dict) -> dict:
        acct = self._lookup(request["login"])
        if isinstance(acct, RecoveryRecord) and isinstance(acct.auth, HashAuth):
            q, expected = acct.pk.params.q, acct.auth.value
        elif isinstance(acct, SimpleAccount):
            q, expected = acct.blob.q, acct.auth.value
        else:
            raise _Refuse("wrong_mode", "account does not use hash login")
        if password_hash(request["password"], q) == expected:
            return {"type": "ok"}
        return {"type": "reject"}

    def _cr_login_data(self, acct) -> tuple[GroupParams, int]:
        if isinstance(acct, RecoveryRecord) and isinstance(acct.auth, ChalRespAuth):
            return acct.pk.params, acct.auth.d
        if isinstance(acct, SubstringAccount):
            return acct.params, acct.d
        raise _Refuse("wrong_mode", "account does not use challenge-response login")

    def _on_login_cr_start(self, request: dict) -> dict:
        acct = self._lookup(request["login"])
        params, _ = self._cr_login_data(acct)
        now = self.config.clock()
        challenge = cr_challenge(params, self.rng, expires_at=now + self.config.session_ttl)
        cid = secrets.token_hex(8)
        with self.lock:
            self.challenges[cid] = (request["login"], challenge)
            self._expire_tables(now)
        return {
            "type": "challenge",
            "challenge": cid,
            "b": wire.to_hex(challenge.b),
            "params": wire.params_to_wire(params),
        }

    def _on_login_cr_finish(self, request: dict) -> dict:
        with self.lock:
            entry = self.challenges.pop(request["challenge"], None)
        if entry is None:
            raise _Refuse("unknown_challenge", "challenge unknown, expired, or already used")
        login, challenge = entry
        if self.config.clock() > challenge.expires_at:
            raise _Refuse("expired_challenge", "challenge expired")
        acct = self._lookup(login)
        params, d = self._cr_login_data(acct)
        if cr_verify(params, challenge, d, wire.from_hex(request["proof"])):
            return {"type": "ok"}
        return {"type": "reject"}

    # -- recovery --

    def _on_recover_hash(self, request: dict) -> dict:
        acct = self._lookup(request["login"], want=RecoveryRecord)
        if not isinstance(acct.auth, HashAuth):
            raise _Refuse("wrong_mode", "account does not use hash recovery")
        with self.lock:
            self.policy.record_failure(request["login"])
        response = hpr_server_respond(acct, request["guess"], self.rng)
        return {"type": "recover_hash_resp", **wire.response_to_wire(response)}

    def _on_recover_simple(self, request: dict) -> dict:
        acct = self._lookup(request["login"], want=SimpleAccount)
        outcome = simple_recover(acct, request["guess"])
        with self.lock:
            if outcome:
                self.policy.reset(request["login"])
            else:
                self.policy.record_failure(request["login"])
        if outcome:
            return {"type": "recover_simple_resp", "password": outcome.password}
        return {"type": "refused"}

    def _on_recover_cr_start(self, request: dict) -> dict:
        acct = self._lookup(request["login"], want=RecoveryRecord)
        if not isinstance(acct.auth, ChalRespAuth):
            raise _Refuse("wrong_mode", "account does not use challenge-response recovery")
        now = self.config.clock()
        cprime = crpr_server_start(acct, self.rng)
        sid = secrets.token_hex(8)
        with self.lock:
            self.policy.record_failure(request["login"])
            self.ot_sessions[sid] = {
                "record": acct,
                "cprime": cprime,
                "expires": now + self.config.session_ttl,
            }
            self._expire_tables(now)
        return {
            "type": "recover_cr_start_resp",
            "session": sid,
            "v1": acct.v1.hex(),
            "params": wire.params_to_wire(acct.pk.params),
            "h": wire.to_hex(acct.pk.h),
            "c": wire.ciphertext_to_wire(cprime),
            "spec": wire.spec_to_wire(acct.spec),
        }

    def _on_recover_cr_ot(self, request: dict) -> dict:
        with self.lock:
            entry = self.ot_sessions.get(request["session"])
        if entry is None or self.config.clock() > entry["expires"]:
            raise _Refuse("unknown_session", "recovery session unknown or expired")
        record: RecoveryRecord = entry["record"]
        params = record.pk.params
        position = request["position"]
        if not isinstance(position, int) or not 0 <= position < record.spec.n:
            raise _Refuse("bad_request", "position out of range")
        B = wire.from_hex(request["B"])
        if not 0 < B < params.p:
            raise _Refuse("bad_request", "OT value out of range")
        common = ot_common(params, request["session"].encode())
        payloads = crpr_payloads(record, entry["cprime"].a, position)
        response = ot_respond(params, common, B, payloads, self.rng)
        return {
            "type": "recover_cr_ot_resp",
            "slots": [wire.ciphertext_to_wire(s) for s in response.slots],
        }

    def _on_recover_substring(self, request: dict) -> dict:
        acct = self._lookup(request["login"], want=SubstringAccount)
        with self.lock:
            self.policy.record_failure(request["login"])
        modulus = wire.from_hex(request["modulus"])
        ciphertexts = [wire.from_hex(x) for x in request["windows"]]
        try:
            out = substring_server_respond(
                acct.record, modulus, ciphertexts, self.rng,
                min_modulus_bits=self.config.min_paillier_bits,
            )
        except ValueError as e:
            raise _Refuse("bad_request", str(e)) from None
        return {"type": "recover_substring_resp", "windows": [wire.to_hex(x) for x in out]}

    def _expire_tables(self, now: float) -> None:
        # Called under the lock.
        for table in (self.challenges, self.ot_sessions):
            stale = [k for k, v in table.items() if _expiry(v) < now]
            for k in stale:
                del table[k]


def _expiry(entry) -> float:
    if isinstance(entry, dict):
        return entry["expires"]
    return entry[1].expires_at
