"""Wire format: length-prefixed JSON frames and hex codecs for every record type.

A frame is a 4-byte big-endian length followed by a UTF-8 JSON object with a
"type" field; every big integer travels as a lowercase hex string. With a
pre-shared key configured, each frame is wrapped in {"mac": ..., "body": ...}
where mac is HMAC-SHA256 over the canonical JSON of the body.
"""

from __future__ import annotations

import hmac
import hashlib
import json
import struct

from .elgamal import Ciphertext, PublicKey
from .group import GroupParams, MAC_KEY_BYTES
from .localpr import LocalBlob, PasswordSpec
from .protocols import (
    ChalRespAuth,
    HashAuth,
    RecoveryRecord,
    RecoveryResponse,
    SimpleAccount,
)
from .substring import SubstringAccount, SubstringRecord

MAX_FRAME = 1 << 24


class FrameError(Exception):
    pass


def to_hex(x: int) -> str:
    if x < 0:
        raise ValueError("negative integer on the wire")
    return format(x, "x")


def from_hex(s) -> int:
    if not isinstance(s, str) or s == "" or s.strip() != s:
        raise FrameError(f"bad hex field: {s!r}")
    try:
        return int(s, 16)
    except ValueError as e:
        raise FrameError(f"bad hex field: {s!r}") from e


def _canonical(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def encode_frame(obj: dict, psk: bytes = None) -> bytes:
    if psk is not None:
        body = obj
        obj = {"mac": hmac.new(psk, _canonical(body), hashlib.sha256).hexdigest(), "body": body}
    raw = json.dumps(obj, separators=(",", ":")).encode()
    if len(raw) > MAX_FRAME:
        raise FrameError("frame too large")
    return struct.pack("!I", len(raw)) + raw


def send_frame(sock, obj: dict, psk: bytes = None) -> None:
    sock.sendall(encode_frame(obj, psk))


def _recv_exact(sock, n: int):
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            return None
        buf += chunk
    return buf


def recv_frame(sock, psk: bytes = None):
    """Next frame as a dict, or None on a clean EOF before any header byte."""
    header = _recv_exact(sock, 4)
    if header is None:
        return None
    (length,) = struct.unpack("!I", header)
    if length > MAX_FRAME:
        raise FrameError("frame length exceeds limit")
    raw = _recv_exact(sock, length)
    if raw is None:
        raise FrameError("connection closed mid-frame")
    try:
        obj = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FrameError("malformed frame payload") from e
    if not isinstance(obj, dict):
        raise FrameError("frame is not an object")
    if psk is not None:
        try:
            mac, body = obj["mac"], obj["body"]
        except KeyError as e:
            raise FrameError("missing frame MAC") from e
        expect = hmac.new(psk, _canonical(body), hashlib.sha256).hexdigest()
        if not hmac.compare_digest(mac, expect):
            raise FrameError("frame MAC mismatch")
        obj = body
    if not isinstance(obj.get("type"), str):
        raise FrameError("frame missing type")
    return obj


def params_to_wire(params: GroupParams) -> dict:
    return {"p": to_hex(params.p), "q": to_hex(params.q), "g": to_hex(params.g)}


def params_from_wire(d) -> GroupParams:
    return GroupParams(p=from_hex(d["p"]), q=from_hex(d["q"]), g=from_hex(d["g"]))


def spec_to_wire(spec: PasswordSpec) -> dict:
    return {"n": spec.n, "t": spec.t, "alphabet": spec.alphabet}


def spec_from_wire(d) -> PasswordSpec:
    return PasswordSpec(n=int(d["n"]), t=int(d["t"]), alphabet=d["alphabet"])


def ciphertext_to_wire(c: Ciphertext) -> list:
    return [to_hex(c.a), to_hex(c.b)]


def ciphertext_from_wire(v) -> Ciphertext:
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise FrameError("ciphertext must be an [a, b] pair")
    return Ciphertext(a=from_hex(v[0]), b=from_hex(v[1]))


def _key_to_wire(key: bytes) -> str:
    return key.hex()


def _key_from_wire(s) -> bytes:
    key = bytes.fromhex(s)
    if len(key) != MAC_KEY_BYTES:
        raise FrameError("MAC key has wrong length")
    return key


def auth_to_wire(auth) -> dict:
    if isinstance(auth, HashAuth):
        return {"kind": "hash", "value": to_hex(auth.value)}
    return {"kind": "cr", "d": to_hex(auth.d)}


def auth_from_wire(d):
    if d["kind"] == "hash":
        return HashAuth(value=from_hex(d["value"]))
    if d["kind"] == "cr":
        return ChalRespAuth(d=from_hex(d["d"]))
    raise FrameError(f"unknown auth kind {d['kind']!r}")


def record_to_wire(record: RecoveryRecord) -> dict:
    return {
        "login": record.login,
        "params": params_to_wire(record.pk.params),
        "h": to_hex(record.pk.h),
        "v1": _key_to_wire(record.v1),
        "v2": _key_to_wire(record.v2),
        "c": ciphertext_to_wire(record.c),
        "ys": [to_hex(y) for y in record.ys],
        "auth": auth_to_wire(record.auth),
        "spec": spec_to_wire(record.spec),
    }


def record_from_wire(d) -> RecoveryRecord:
    params = params_from_wire(d["params"])
    spec = spec_from_wire(d["spec"])
    ys = tuple(from_hex(y) for y in d["ys"])
    if len(ys) != spec.n:
        raise FrameError("masked share count != n")
    return RecoveryRecord(
        login=d["login"],
        pk=PublicKey(params, from_hex(d["h"])),
        v1=_key_from_wire(d["v1"]),
        v2=_key_from_wire(d["v2"]),
        c=ciphertext_from_wire(d["c"]),
        ys=ys,
        auth=auth_from_wire(d["auth"]),
        spec=spec,
    )


def response_to_wire(resp: RecoveryResponse) -> dict:
    return {
        "v1": _key_to_wire(resp.v1),
        "params": params_to_wire(resp.pk.params),
        "h": to_hex(resp.pk.h),
        "c": ciphertext_to_wire(resp.c),
        "partials": [to_hex(x) for x in resp.partials],
        "spec": spec_to_wire(resp.spec),
    }


def response_from_wire(d) -> RecoveryResponse:
    return RecoveryResponse(
        v1=_key_from_wire(d["v1"]),
        pk=PublicKey(params_from_wire(d["params"]), from_hex(d["h"])),
        c=ciphertext_from_wire(d["c"]),
        partials=tuple(from_hex(x) for x in d["partials"]),
        spec=spec_from_wire(d["spec"]),
    )


def blob_to_wire(blob: LocalBlob) -> dict:
    return {
        "v": _key_to_wire(blob.v),
        "offsets": [to_hex(o) for o in blob.offsets],
        "spec": spec_to_wire(blob.spec),
        "q": to_hex(blob.q),
    }


def blob_from_wire(d) -> LocalBlob:
    spec = spec_from_wire(d["spec"])
    offsets = tuple(from_hex(o) for o in d["offsets"])
    if len(offsets) != spec.n:
        raise FrameError("offset count != n")
    return LocalBlob(v=_key_from_wire(d["v"]), offsets=offsets, spec=spec, q=from_hex(d["q"]))


def simple_account_to_wire(acct: SimpleAccount) -> dict:
    return {
        "login": acct.login,
        "auth": auth_to_wire(acct.auth),
        "blob": blob_to_wire(acct.blob),
    }


def simple_account_from_wire(d) -> SimpleAccount:
    auth = auth_from_wire(d["auth"])
    if not isinstance(auth, HashAuth):
        raise FrameError("simple accounts use hash login")
    return SimpleAccount(login=d["login"], auth=auth, blob=blob_from_wire(d["blob"]))


def substring_account_to_wire(acct: SubstringAccount) -> dict:
    return {
        "login": acct.record.login,
        "params": params_to_wire(acct.params),
        "d": to_hex(acct.d),
        "tags": [to_hex(t) for t in acct.record.tags],
        "blobs": [to_hex(b) for b in acct.record.blobs],
        "spec": spec_to_wire(acct.record.spec),
    }


def substring_account_from_wire(d) -> SubstringAccount:
    spec = spec_from_wire(d["spec"])
    tags = tuple(from_hex(t) for t in d["tags"])
    blobs = tuple(from_hex(b) for b in d["blobs"])
    if len(tags) != len(blobs) or len(tags) != spec.n - spec.t + 1:
        raise FrameError("window count mismatch")
    record = SubstringRecord(login=d["login"], tags=tags, blobs=blobs, spec=spec)
    return SubstringAccount(record=record, params=params_from_wire(d["params"]), d=from_hex(d["d"]))


ACCOUNT_KINDS = {
    "hash": (record_to_wire, record_from_wire),
    "cr": (record_to_wire, record_from_wire),
    "simple": (simple_account_to_wire, simple_account_from_wire),
    "substring": (substring_account_to_wire, substring_account_from_wire),
}


def account_kind(acct) -> str:
    if isinstance(acct, RecoveryRecord):
        return "hash" if isinstance(acct.auth, HashAuth) else "cr"
    if isinstance(acct, SimpleAccount):
        return "simple"
    if isinstance(acct, SubstringAccount):
        return "substring"
    raise TypeError(f"not an account type: {type(acct)!r}")


def account_to_wire(acct) -> dict:
    kind = account_kind(acct)
    return {"kind": kind, "account": ACCOUNT_KINDS[kind][0](acct)}


def account_from_wire(d):
    try:
        decoder = ACCOUNT_KINDS[d["kind"]][1]
    except KeyError as e:
        raise FrameError(f"unknown account kind {d.get('kind')!r}") from e
    return decoder(d["account"])
