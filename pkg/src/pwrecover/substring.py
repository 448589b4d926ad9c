"""Substring-knowledge recovery over an additively homomorphic cryptosystem.

Registration stores, per length-t window of the password, a public tag
h_i(window) and a keystream encryption of the whole password under a key
H_i(window). To recover, the client Paillier-encrypts the tags of its guess's
windows under a fresh session key; for each window the server homomorphically
computes (guess_tag - stored_tag) * r + blob, so a matching window hands the
blob through unchanged and every other window comes back uniformly blinded.
The client spots the matching window by the blob's verifier tag.

Registration tags are stored in clear, so offline dictionary attacks on
individual windows are possible by design; that trade-off is inherited, not
fixed here.
"""

from __future__ import annotations

import math
import secrets
from dataclasses import dataclass

import gmpy2

from .group import GroupParams, PUBLIC_MAC_KEY, index_tag, mac_bytes
from .localpr import PasswordSpec

TAG_BYTES = 16
VERIFIER_BYTES = 16
WINDOW_KEY_BYTES = 32

DEFAULT_PAILLIER_BITS = 2048
MIN_PAILLIER_BITS = 1024


@dataclass(frozen=True)
class PaillierPublicKey:
    n: int

    @property
    def nsq(self) -> int:
        return self.n * self.n


@dataclass(frozen=True)
class PaillierKeys:
    pk: PaillierPublicKey
    lam: int
    mu: int


def paillier_keys_from_primes(p: int, q: int) -> PaillierKeys:
    n = p * q
    lam = math.lcm(p - 1, q - 1)
    if math.gcd(n, lam) != 1:
        raise ValueError("gcd(n, lambda) != 1")
    # With generator fixed to n + 1, L(g^lam mod n^2) = lam mod n.
    mu = int(gmpy2.invert(lam % n, n))
    return PaillierKeys(pk=PaillierPublicKey(n=n), lam=lam, mu=mu)


def paillier_keygen(bits: int = DEFAULT_PAILLIER_BITS, rng=None) -> PaillierKeys:
    rng = rng or secrets.SystemRandom()
    half = bits // 2
    while True:
        p = int(gmpy2.next_prime(rng.randrange(1 << (half - 1), 1 << half)))
        q = int(gmpy2.next_prime(rng.randrange(1 << (half - 1), 1 << half)))
        if p == q:
            continue
        try:
            keys = paillier_keys_from_primes(p, q)
        except ValueError:
            continue
        if keys.pk.n.bit_length() >= bits:
            return keys


def paillier_encrypt(pk: PaillierPublicKey, m: int, rng=None) -> int:
    if not 0 <= m < pk.n:
        raise ValueError("plaintext out of range")
    rng = rng or secrets.SystemRandom()
    while True:
        r = rng.randrange(1, pk.n)
        if math.gcd(r, pk.n) == 1:
            break
    return (1 + m * pk.n) * int(gmpy2.powmod(r, pk.n, pk.nsq)) % pk.nsq


def paillier_decrypt(keys: PaillierKeys, c: int) -> int:
    u = int(gmpy2.powmod(c, keys.lam, keys.pk.nsq))
    return (u - 1) // keys.pk.n * keys.mu % keys.pk.n


def paillier_add(pk: PaillierPublicKey, c1: int, c2: int) -> int:
    return c1 * c2 % pk.nsq


def paillier_scale(pk: PaillierPublicKey, c: int, k: int) -> int:
    return int(gmpy2.powmod(c, k, pk.nsq))


def sym_encrypt(key: bytes, password_bytes: bytes) -> int:
    """Keystream-encrypt password || verifier(key, password) into an integer blob."""
    data = password_bytes + mac_bytes(key, b"vfy", password_bytes, VERIFIER_BYTES)
    stream = mac_bytes(key, b"keystream", b"", len(data))
    return int.from_bytes(bytes(a ^ b for a, b in zip(data, stream)), "big")


def sym_decrypt(key: bytes, blob: int, pw_len: int):
    """Inverse of sym_encrypt; None when the verifier tag does not check out."""
    length = pw_len + VERIFIER_BYTES
    if blob < 0 or blob.bit_length() > 8 * length:
        return None
    stream = mac_bytes(key, b"keystream", b"", length)
    data = bytes(a ^ b for a, b in zip(blob.to_bytes(length, "big"), stream))
    pw, tag = data[:pw_len], data[pw_len:]
    if mac_bytes(key, b"vfy", pw, VERIFIER_BYTES) != tag:
        return None
    return pw


def window_tag(index: int, window: str) -> int:
    """h_i: public per-window tag as a 128-bit integer."""
    return int.from_bytes(
        mac_bytes(PUBLIC_MAC_KEY, index_tag(b"sub-tag", index), window.encode(), TAG_BYTES),
        "big",
    )


def window_key(index: int, window: str) -> bytes:
    """H_i: per-window symmetric key."""
    return mac_bytes(PUBLIC_MAC_KEY, index_tag(b"sub-key", index), window.encode(), WINDOW_KEY_BYTES)


@dataclass(frozen=True)
class SubstringRecord:
    login: str
    tags: tuple[int, ...]
    blobs: tuple[int, ...]
    spec: PasswordSpec


@dataclass(frozen=True)
class SubstringAccount:
    """Server-side entry: the recovery record plus challenge-response login data."""

    record: SubstringRecord
    params: GroupParams
    d: int


def window_count(spec: PasswordSpec) -> int:
    return spec.n - spec.t + 1


def windows(spec: PasswordSpec, p: str) -> list[str]:
    return [p[i : i + spec.t] for i in range(window_count(spec))]


def substring_register(
    spec: PasswordSpec, login: str, p: str, min_modulus_bits: int = MIN_PAILLIER_BITS
) -> SubstringRecord:
    spec.check_password(p)
    blob_bits = 8 * (spec.n + VERIFIER_BYTES)
    if blob_bits >= min_modulus_bits:
        raise ValueError("password too long for the accepted Paillier modulus floor")
    tags = []
    blobs = []
    for i, window in enumerate(windows(spec, p)):
        tags.append(window_tag(i, window))
        blobs.append(sym_encrypt(window_key(i, window), p.encode()))
    return SubstringRecord(login=login, tags=tuple(tags), blobs=tuple(blobs), spec=spec)


def substring_client_request(
    spec: PasswordSpec, guess: str, rng, bits: int = DEFAULT_PAILLIER_BITS
) -> tuple[PaillierKeys, list[int]]:
    """Fresh session keys and one encrypted guess-window tag per window."""
    spec.check_password(guess)
    keys = paillier_keygen(bits, rng)
    cts = [
        paillier_encrypt(keys.pk, window_tag(i, window), rng)
        for i, window in enumerate(windows(spec, guess))
    ]
    return keys, cts


def substring_server_respond(
    record: SubstringRecord,
    modulus: int,
    ciphertexts: list[int],
    rng,
    min_modulus_bits: int = MIN_PAILLIER_BITS,
) -> list[int]:
    """Per window: (guess_tag - stored_tag) * r + blob under the client's key."""
    if len(ciphertexts) != len(record.tags):
        raise ValueError("window count mismatch")
    if modulus.bit_length() < min_modulus_bits:
        raise ValueError("client Paillier modulus below the accepted floor")
    pk = PaillierPublicKey(n=modulus)
    out = []
    for ct, tag, blob in zip(ciphertexts, record.tags, record.blobs):
        if blob >= pk.n or tag >= pk.n:
            raise ValueError("stored blob does not fit the client modulus")
        diff = paillier_add(pk, ct, paillier_encrypt(pk, (pk.n - tag) % pk.n, rng))
        blinded = paillier_scale(pk, diff, rng.randrange(1, pk.n))
        out.append(paillier_add(pk, blinded, paillier_encrypt(pk, blob, rng)))
    return out


def substring_client_finish(
    spec: PasswordSpec, keys: PaillierKeys, responses: list[int], guess: str
):
    """Try to open each response with the guess-window key; first verifier hit wins."""
    if len(responses) != window_count(spec):
        raise ValueError("window count mismatch")
    for i, window in enumerate(windows(spec, guess)):
        value = paillier_decrypt(keys, responses[i])
        pw = sym_decrypt(window_key(i, window), value, spec.n)
        if pw is None:
            continue
        try:
            return spec.check_password(pw.decode("ascii"))
        except (UnicodeDecodeError, ValueError):
            continue
    return None
