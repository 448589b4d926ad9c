"""Threshold ElGamal with caller-chosen public share coordinates and no validity proofs.

Key shares are points of a random degree-(t-1) polynomial f with f(0) = sk,
evaluated at nonzero coordinates the caller supplies (the recovery protocols
derive them from password characters). A partial decryption of (a, b) under
share alpha_i is a^alpha_i; t of them combine through Lagrange interpolation
in the exponent. Because shares come with no proofs, a combiner facing a mix
of genuine and junk partials can only try subsets and test each candidate
plaintext with a caller-supplied predicate.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Optional, Sequence

from .elgamal import Ciphertext, KeyPair, PublicKey, encrypt
from .group import GroupParams, elem_div, elem_mul, elem_pow, g_pow, scalar_inv


@dataclass(frozen=True)
class SharePoint:
    x: int
    alpha: int


@dataclass(frozen=True)
class ShareSet:
    params: GroupParams
    pk_h: int
    t: int
    n: int
    shares: tuple[SharePoint, ...]


@dataclass(frozen=True)
class PartialDecryption:
    x: int
    d: int


@dataclass(frozen=True)
class CombineResult:
    plaintext: Optional[int]
    subsets_tried: int


def poly_eval(coeffs: Sequence[int], x: int, q: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % q
    return acc


def keygen_threshold(
    params: GroupParams, t: int, n: int, xs: Sequence[int], rng
) -> tuple[KeyPair, ShareSet]:
    """Deal a (t, n) key: sk = f(0) for random degree-(t-1) f, share i = f(xs[i])."""
    if not 1 <= t <= n:
        raise ValueError("need 1 <= t <= n")
    if len(xs) != n:
        raise ValueError("coordinate count != n")
    if any(x % params.q == 0 for x in xs):
        raise ValueError("share coordinate 0 would expose the secret")
    if len({x % params.q for x in xs}) != n:
        raise ValueError("duplicate share coordinates")
    coeffs = [rng.randrange(params.q) for _ in range(t)]
    alpha = coeffs[0]
    shares = tuple(SharePoint(x=x, alpha=poly_eval(coeffs, x, params.q)) for x in xs)
    pk = PublicKey(params, g_pow(params, alpha))
    return KeyPair(pk=pk, sk=alpha), ShareSet(
        params=params, pk_h=pk.h, t=t, n=n, shares=shares
    )


def share_decrypt(params: GroupParams, share: SharePoint, c: Ciphertext) -> PartialDecryption:
    """d = a^alpha_i; no proof of correctness is produced."""
    return PartialDecryption(x=share.x, d=elem_pow(params, c.a, share.alpha))


def lagrange_coeff(xs_subset: Sequence[int], x0: int, i: int, q: int) -> int:
    """Lagrange coefficient at xs_subset[i] for evaluation point x0, mod q."""
    num = 1
    den = 1
    xi = xs_subset[i]
    for j, xj in enumerate(xs_subset):
        if j == i:
            continue
        num = num * ((x0 - xj) % q) % q
        den = den * ((xi - xj) % q) % q
    return num * scalar_inv(q, den) % q


def interpolate_exponent(
    params: GroupParams, points: Sequence[tuple[int, int]], x0: int
) -> int:
    """Given points (x_i, g^{r f(x_i)}), compute g^{r f(x0)} as prod d_i^lambda_i."""
    if not points:
        raise ValueError("no points to interpolate")
    xs = [x for x, _ in points]
    acc = 1
    for i, (_, d) in enumerate(points):
        lam = lagrange_coeff(xs, x0, i, params.q)
        acc = elem_mul(params, acc, elem_pow(params, d, lam))
    return acc


def combine(
    pk: PublicKey,
    c: Ciphertext,
    candidates: Sequence[tuple[int, int]],
    t: int,
    accept: Callable[[int], bool],
) -> CombineResult:
    """Try every t-subset of candidate partials in lexicographic index order.

    Each subset yields a candidate plaintext m = b / interp(subset, 0); the
    first one the predicate accepts wins. Subsets with repeated x coordinates
    (possible in tiny test fields) are counted but skipped.
    """
    params = pk.params
    tried = 0
    for subset in combinations(range(len(candidates)), t):
        tried += 1
        points = [candidates[i] for i in subset]
        if len({x for x, _ in points}) != t:
            continue
        m = elem_div(params, c.b, interpolate_exponent(params, points, 0))
        if accept(m):
            return CombineResult(plaintext=m, subsets_tried=tried)
    return CombineResult(plaintext=None, subsets_tried=tried)


class ShareOracle:
    """Decryption-share oracle over one fixed threshold key.

    Three response modes feed the distinguishing games: all partials genuine,
    genuine only at chosen indices with fresh random shares elsewhere, or all
    partials produced from fresh random shares.
    """

    def __init__(self, keypair: KeyPair, shares: ShareSet, rng):
        self.keypair = keypair
        self.shares = shares
        self.rng = rng

    @property
    def pk(self) -> PublicKey:
        return self.keypair.pk

    @property
    def xs(self) -> tuple[int, ...]:
        return tuple(s.x for s in self.shares.shares)

    def _encrypt(self, m: int) -> Ciphertext:
        return encrypt(self.pk, m, self.rng.randrange(1, self.pk.params.q))

    def _junk_partial(self, x: int, c: Ciphertext) -> PartialDecryption:
        r = self.rng.randrange(self.pk.params.q)
        return share_decrypt(self.pk.params, SharePoint(x=x, alpha=r), c)

    def respond_genuine(self, m: int) -> tuple[Ciphertext, list[PartialDecryption]]:
        c = self._encrypt(m)
        return c, [share_decrypt(self.pk.params, s, c) for s in self.shares.shares]

    def respond_mixed(
        self, m: int, genuine_indices: Sequence[int]
    ) -> tuple[Ciphertext, list[PartialDecryption]]:
        wanted = list(genuine_indices)
        idx = set(wanted)
        if len(idx) != len(wanted) or len(idx) != self.shares.t - 1:
            raise ValueError("need exactly t-1 distinct indices")
        if not idx <= set(range(self.shares.n)):
            raise ValueError("index out of range")
        c = self._encrypt(m)
        out = []
        for i, s in enumerate(self.shares.shares):
            if i in idx:
                out.append(share_decrypt(self.pk.params, s, c))
            else:
                out.append(self._junk_partial(s.x, c))
        return c, out

    def respond_random(self, m: int) -> tuple[Ciphertext, list[PartialDecryption]]:
        c = self._encrypt(m)
        return c, [self._junk_partial(s.x, c) for s in self.shares.shares]
