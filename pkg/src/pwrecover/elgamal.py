"""ElGamal over the safe-prime group: encrypt, decrypt, re-randomize, multiply.

Randomness r is drawn from the full range [0, q-1]; r = 0 gives the blinding
free pair (1, m), which is legal but worth flagging, so encrypt warns on it
instead of refusing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .group import GroupParams, elem_div, elem_mul, elem_pow, g_pow


@dataclass(frozen=True)
class PublicKey:
    params: GroupParams
    h: int


@dataclass(frozen=True)
class KeyPair:
    pk: PublicKey
    sk: int


@dataclass(frozen=True)
class Ciphertext:
    a: int
    b: int


def keygen(params: GroupParams, rng) -> KeyPair:
    """Draw sk uniform in [0, q-1] and publish h = g^sk."""
    sk = rng.randrange(params.q)
    if sk == 0:
        warnings.warn("degenerate ElGamal key sk = 0 (h = 1)", RuntimeWarning)
    return KeyPair(pk=PublicKey(params, g_pow(params, sk)), sk=sk)


def encrypt(pk: PublicKey, m: int, r: int) -> Ciphertext:
    """(a, b) = (g^r, m * h^r). Deterministic for a given r."""
    if r == 0:
        warnings.warn("ElGamal encryption with r = 0 leaves m unblinded", RuntimeWarning)
    params = pk.params
    return Ciphertext(
        a=g_pow(params, r),
        b=elem_mul(params, m, elem_pow(params, pk.h, r)),
    )


def decrypt(params: GroupParams, sk: int, c: Ciphertext) -> int:
    """m = b / a^sk."""
    return elem_div(params, c.b, elem_pow(params, c.a, sk))


def rerandomize(pk: PublicKey, c: Ciphertext, r: int) -> Ciphertext:
    """Fresh encryption of the same plaintext: (a * g^r, b * h^r)."""
    params = pk.params
    return Ciphertext(
        a=elem_mul(params, c.a, g_pow(params, r)),
        b=elem_mul(params, c.b, elem_pow(params, pk.h, r)),
    )


def hom_mul(params: GroupParams, c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    """Componentwise product; decrypts to the product of the plaintexts."""
    return Ciphertext(a=elem_mul(params, c1.a, c2.a), b=elem_mul(params, c1.b, c2.b))
