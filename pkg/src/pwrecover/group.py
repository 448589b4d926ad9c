"""Safe-prime group arithmetic and the keyed hash family shared by all protocols.

The group is the subgroup of quadratic residues modulo a safe prime p = 2q + 1,
so the subgroup has prime order q. Scalars are plain ints in [0, q-1], group
elements plain ints in [1, p-1] with Legendre symbol 1. Every modular
exponentiation mod p goes through elem_pow / g_pow and bumps a thread-local
counter, which the complexity tests read.
"""

from __future__ import annotations

import hashlib
import secrets
import threading
from dataclasses import dataclass

import gmpy2

# Extra Miller-Rabin rounds on top of gmpy2's BPSW; error below 2^-80.
PRIME_ROUNDS = 40

MAC_KEY_BYTES = 16

# Key for the unkeyed ("public") hash uses: login hashes and hash_to_group.
PUBLIC_MAC_KEY = bytes(MAC_KEY_BYTES)

MIN_PARAM_BITS = 4


class _ExpCounter(threading.local):
    value = 0


_exps = _ExpCounter()


def exp_count() -> int:
    """Modular exponentiations mod p performed by this thread so far."""
    return _exps.value


def reset_exp_count() -> None:
    _exps.value = 0


@dataclass(frozen=True)
class GroupParams:
    """Safe-prime group description: p = 2q + 1, g generates the order-q subgroup."""

    p: int
    q: int
    g: int

    def validate(self) -> "GroupParams":
        if self.p != 2 * self.q + 1:
            raise ValueError("p != 2q + 1")
        if not (is_probable_prime(self.p) and is_probable_prime(self.q)):
            raise ValueError("p or q fails primality")
        if not 1 < self.g < self.p:
            raise ValueError("generator out of range")
        if self.g == 1 or pow(self.g, self.q, self.p) != 1:
            raise ValueError("g does not generate the order-q subgroup")
        return self


def is_probable_prime(n: int) -> bool:
    return bool(gmpy2.is_prime(n, PRIME_ROUNDS))


def generate_params(bits: int, rng=None) -> GroupParams:
    """Generate a safe-prime group with p of the given bit length.

    bits >= 4 is accepted so tiny oracle-testable groups (p=23) can be produced;
    production use should stay at the 2048-bit default of the callers.
    """
    if bits < MIN_PARAM_BITS:
        raise ValueError(f"prime size {bits} below minimum {MIN_PARAM_BITS}")
    rng = rng or secrets.SystemRandom()
    while True:
        q = rng.randrange(1 << (bits - 2), 1 << (bits - 1)) | 1
        if not is_probable_prime(q):
            continue
        p = 2 * q + 1
        if p.bit_length() != bits or not is_probable_prime(p):
            continue
        while True:
            s = rng.randrange(2, p - 1)
            g = s * s % p
            if g != 1:
                break
        return GroupParams(p=p, q=q, g=g)


def is_element(params: GroupParams, x: int) -> bool:
    """Membership test for the quadratic-residue subgroup (includes 1)."""
    return 0 < x < params.p and gmpy2.jacobi(x, params.p) == 1


def check_element(params: GroupParams, x: int) -> int:
    if not is_element(params, x):
        raise ValueError(f"{x} is not in the order-{params.q} subgroup")
    return x


def elem_mul(params: GroupParams, a: int, b: int) -> int:
    return a * b % params.p


def elem_pow(params: GroupParams, base: int, e: int) -> int:
    _exps.value += 1
    return int(gmpy2.powmod(base, e, params.p))


def g_pow(params: GroupParams, e: int) -> int:
    return elem_pow(params, params.g, e)


def elem_inv(params: GroupParams, a: int) -> int:
    return int(gmpy2.invert(a, params.p))


def elem_div(params: GroupParams, a: int, b: int) -> int:
    return a * elem_inv(params, b) % params.p


def scalar_inv(q: int, a: int) -> int:
    # gmpy2 raises ZeroDivisionError for a == 0, the degenerate input.
    return int(gmpy2.invert(a % q, q))


def random_scalar(q: int, rng=None) -> int:
    rng = rng or secrets.SystemRandom()
    return rng.randrange(q)


def encode_message(params: GroupParams, m: int) -> int:
    """Embed a scalar m in [0, q-1] injectively into the subgroup.

    x = m + 1 lands in [1, q]; exactly one of x and p - x is a quadratic
    residue because -1 is a non-residue mod a safe prime.
    """
    if not 0 <= m < params.q:
        raise ValueError("message scalar out of range")
    x = m + 1
    if gmpy2.jacobi(x, params.p) == 1:
        return x
    return params.p - x


def decode_message(params: GroupParams, e: int) -> int:
    """Inverse of encode_message."""
    check_element(params, e)
    if e <= params.q:
        return e - 1
    return (params.p - e) - 1


def new_mac_key(rng=None) -> bytes:
    rng = rng or secrets.SystemRandom()
    return rng.getrandbits(8 * MAC_KEY_BYTES).to_bytes(MAC_KEY_BYTES, "big")


def _mac_block(key: bytes, tag: bytes, data: bytes, counter: int) -> bytes:
    frame = b"".join(
        len(part).to_bytes(4, "big") + part for part in (key, tag, data)
    )
    return hashlib.sha256(frame + counter.to_bytes(8, "big")).digest()


def mac_bytes(key: bytes, tag: bytes, data: bytes, nbytes: int) -> bytes:
    """Deterministic keyed byte stream: SHA-256 over a length-framed input in counter mode."""
    out = b""
    counter = 0
    while len(out) < nbytes:
        out += _mac_block(key, tag, data, counter)
        counter += 1
    return out[:nbytes]


def mac_to_scalar(key: bytes, tag: bytes, data: bytes, q: int) -> int:
    """Keyed hash into [0, q-1], unbiased via rejection sampling.

    Draws ceil(bitlen(q)/8) bytes per attempt from the counter-mode stream and
    rejects draws at or above the largest multiple of q that fits, so the
    reduction mod q is exactly uniform over the accepted region.
    """
    nbytes = (q.bit_length() + 7) // 8
    limit = ((1 << (8 * nbytes)) // q) * q
    counter = 0
    buf = b""
    while True:
        while len(buf) < nbytes:
            buf += _mac_block(key, tag, data, counter)
            counter += 1
        v = int.from_bytes(buf[:nbytes], "big")
        buf = buf[nbytes:]
        if v < limit:
            return v % q


def index_tag(prefix: bytes, i: int) -> bytes:
    """Domain tag for the i-th member of a hash family, e.g. h_1, h_2, ..."""
    return prefix + i.to_bytes(4, "big")


def hash_to_group(params: GroupParams, data: bytes) -> int:
    """Map arbitrary bytes to a subgroup element of unknown discrete log."""
    return encode_message(params, mac_to_scalar(PUBLIC_MAC_KEY, b"h2g", data, params.q))
