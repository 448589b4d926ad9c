"""Client-server recovery protocol logic, transport-free.

Three families share the same account record shape:

* hash login + recovery by server-computed candidate partial decryptions,
* challenge-response login + recovery where the client fetches each partial
  through oblivious transfer, so the server never sees the guess,
* the simple variant where the server holds a local-recovery blob and runs the
  whole search itself on a cleartext guess.

A record stores a threshold public key whose shares sit at coordinates
h_i(p_i) (keyed by the public-after-first-contact v1), the password encrypted
under that key, and share values masked by g_i(p_i) (keyed by the never
revealed v2). Guessing a character right cancels its mask exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .elgamal import Ciphertext, PublicKey, encrypt, rerandomize
from .group import GroupParams, PUBLIC_MAC_KEY, elem_pow, g_pow, mac_to_scalar, new_mac_key
from .localpr import (
    COLLISION_RETRIES,
    CoordinateCollisionError,
    LocalBlob,
    PasswordSpec,
    RecoveryOutcome,
    coord_hash,
    decode_password,
    derive_coords,
    encode_password,
    local_recover,
    local_register,
    mask_hash,
    match,
)
from .ot import ot_choose, ot_common, ot_recover, ot_respond
from . import threshold
from .group import encode_message, decode_message


@dataclass(frozen=True)
class HashAuth:
    value: int


@dataclass(frozen=True)
class ChalRespAuth:
    d: int


@dataclass(frozen=True)
class RecoveryRecord:
    login: str
    pk: PublicKey
    v1: bytes
    v2: bytes
    c: Ciphertext
    ys: tuple[int, ...]
    auth: Union[HashAuth, ChalRespAuth]
    spec: PasswordSpec


@dataclass(frozen=True)
class RecoveryResponse:
    """What the server hands back on a hash-mode recovery request.

    Deliberately excludes v2, the masked share values and anything else
    secret: v1, the public key, a fresh encryption of the password, and one
    candidate partial decryption per position.
    """

    v1: bytes
    pk: PublicKey
    c: Ciphertext
    partials: tuple[int, ...]
    spec: PasswordSpec


@dataclass(frozen=True)
class Challenge:
    b: int
    c: int
    expires_at: float = 0.0


@dataclass(frozen=True)
class SimpleAccount:
    login: str
    auth: HashAuth
    blob: LocalBlob


def password_hash(p: str, q: int) -> int:
    """H: the unkeyed login hash stored by the hash-based family."""
    return mac_to_scalar(PUBLIC_MAC_KEY, b"pw-hash", p.encode(), q)


def password_hash_cr(p: str, q: int) -> int:
    """h: the unkeyed exponent hash of the challenge-response family."""
    return mac_to_scalar(PUBLIC_MAC_KEY, b"pw-cr", p.encode(), q)


def _register(
    spec: PasswordSpec, params: GroupParams, login: str, p: str, rng, cr: bool
) -> RecoveryRecord:
    spec.check_password(p)
    if spec.capacity() >= params.q:
        raise ValueError("alphabet^n must be smaller than the group order")
    for _ in range(COLLISION_RETRIES):
        v1 = new_mac_key(rng)
        xs = derive_coords(v1, p, params.q)
        if xs is not None:
            break
    else:
        raise CoordinateCollisionError("could not find collision-free v1")
    v2 = new_mac_key(rng)
    keypair, shares = threshold.keygen_threshold(params, spec.t, spec.n, xs, rng)
    c = encrypt(
        keypair.pk,
        encode_message(params, encode_password(spec, p)),
        rng.randrange(1, params.q),
    )
    ys = tuple(
        (share.alpha - mask_hash(v2, i, p[i], params.q)) % params.q
        for i, share in enumerate(shares.shares)
    )
    if cr:
        auth = ChalRespAuth(d=g_pow(params, password_hash_cr(p, params.q)))
    else:
        auth = HashAuth(value=password_hash(p, params.q))
    return RecoveryRecord(
        login=login, pk=keypair.pk, v1=v1, v2=v2, c=c, ys=ys, auth=auth, spec=spec
    )


def hpr_register(spec: PasswordSpec, params: GroupParams, login: str, p: str, rng) -> RecoveryRecord:
    return _register(spec, params, login, p, rng, cr=False)


def crpr_register(spec: PasswordSpec, params: GroupParams, login: str, p: str, rng) -> RecoveryRecord:
    return _register(spec, params, login, p, rng, cr=True)


def hpr_login_check(record: RecoveryRecord, p: str) -> bool:
    if not isinstance(record.auth, HashAuth):
        raise ValueError("record is not hash-authenticated")
    return password_hash(p, record.pk.params.q) == record.auth.value


def hpr_server_respond(record: RecoveryRecord, guess: str, rng) -> RecoveryResponse:
    """Fresh encryption plus one candidate partial per position: n + 2 exponentiations."""
    spec = record.spec
    spec.check_password(guess)
    params = record.pk.params
    cprime = rerandomize(record.pk, record.c, rng.randrange(1, params.q))
    partials = tuple(
        elem_pow(
            params,
            cprime.a,
            (record.ys[i] + mask_hash(record.v2, i, guess[i], params.q)) % params.q,
        )
        for i in range(spec.n)
    )
    return RecoveryResponse(v1=record.v1, pk=record.pk, c=cprime, partials=partials, spec=spec)


def recover_from_partials(
    spec: PasswordSpec,
    v1: bytes,
    pk: PublicKey,
    c: Ciphertext,
    partials: Sequence[int],
    guess: str,
) -> RecoveryOutcome:
    """Combiner run shared by the hash and challenge-response clients."""
    spec.check_password(guess)
    params = pk.params
    candidates = [
        (coord_hash(v1, i, guess[i], params.q), partials[i]) for i in range(spec.n)
    ]

    def accept(m: int) -> bool:
        try:
            candidate = decode_password(spec, decode_message(params, m))
        except ValueError:
            return False
        return match(candidate, guess, spec.t)

    result = threshold.combine(pk, c, candidates, spec.t, accept)
    if result.plaintext is None:
        return RecoveryOutcome(password=None, subsets_tried=result.subsets_tried)
    return RecoveryOutcome(
        password=decode_password(spec, decode_message(params, result.plaintext)),
        subsets_tried=result.subsets_tried,
    )


def hpr_client_recover(response: RecoveryResponse, guess: str) -> RecoveryOutcome:
    return recover_from_partials(
        response.spec, response.v1, response.pk, response.c, response.partials, guess
    )


def simple_register(spec: PasswordSpec, q: int, login: str, p: str, rng) -> SimpleAccount:
    """The server keeps a local-recovery blob and the login hash; it sees p in clear."""
    return SimpleAccount(
        login=login,
        auth=HashAuth(value=password_hash(p, q)),
        blob=local_register(spec, q, p, rng),
    )


def simple_recover(account: SimpleAccount, guess: str) -> RecoveryOutcome:
    return local_recover(account.blob, guess)


def cr_register(params: GroupParams, p: str) -> ChalRespAuth:
    return ChalRespAuth(d=g_pow(params, password_hash_cr(p, params.q)))


def cr_challenge(params: GroupParams, rng, expires_at: float = 0.0) -> Challenge:
    c = rng.randrange(1, params.q)
    return Challenge(b=g_pow(params, c), c=c, expires_at=expires_at)


def cr_prove(params: GroupParams, b: int, p: str) -> int:
    return elem_pow(params, b, password_hash_cr(p, params.q))


def cr_verify(params: GroupParams, challenge: Challenge, d: int, proof: int) -> bool:
    # (g^c)^{h(p)} == (g^{h(p)})^c
    return proof == elem_pow(params, d, challenge.c)


def crpr_payloads(record: RecoveryRecord, a: int, position: int) -> list[int]:
    """Candidate partial decryptions of a for every alphabet character at one position."""
    spec = record.spec
    params = record.pk.params
    return [
        elem_pow(
            params,
            a,
            (record.ys[position] + mask_hash(record.v2, position, ch, params.q)) % params.q,
        )
        for ch in spec.alphabet
    ]


def crpr_server_start(record: RecoveryRecord, rng) -> Ciphertext:
    params = record.pk.params
    return rerandomize(record.pk, record.c, rng.randrange(1, params.q))


def crpr_run_local(
    record: RecoveryRecord, guess: str, rng, session: bytes = b"local-session"
) -> RecoveryOutcome:
    """Both ends of the challenge-response recovery in one process (tests, games)."""
    spec = record.spec
    params = record.pk.params
    spec.check_password(guess)
    common = ot_common(params, session)
    cprime = crpr_server_start(record, rng)
    partials = []
    for i, ch in enumerate(guess):
        state, B = ot_choose(params, common, spec.m, spec.alphabet.index(ch), rng)
        resp = ot_respond(params, common, B, crpr_payloads(record, cprime.a, i), rng)
        partials.append(ot_recover(params, state, resp))
    return recover_from_partials(spec, record.v1, record.pk, cprime, partials, guess)
