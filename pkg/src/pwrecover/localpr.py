"""Local password recovery: a self-contained blob from which the password can be
rebuilt from any guess that agrees in at least t of n positions.

Registration hides the packed password as the constant term of a random
degree-(t-1) polynomial over Z_q, evaluated at per-position keyed-hash
coordinates h_i(p_i); the stored offsets are those evaluations minus a second
keyed-hash mask g_i(p_i). A guess regenerates n candidate points; every
position where the guess is right lands back on the polynomial, so any t
correct positions reconstruct it.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional

from .group import MAC_KEY_BYTES, index_tag, mac_to_scalar
from .threshold import lagrange_coeff, poly_eval

PRINTABLE = "".join(chr(c) for c in range(0x20, 0x7F))

COLLISION_RETRIES = 64


class CoordinateCollisionError(RuntimeError):
    """Hash coordinates kept colliding; the field is too small for (n, alphabet)."""


@dataclass(frozen=True)
class PasswordSpec:
    n: int
    t: int
    alphabet: str = PRINTABLE

    def __post_init__(self):
        if not 1 <= self.t <= self.n:
            raise ValueError("need 1 <= t <= n")
        if len(set(self.alphabet)) != len(self.alphabet) or not self.alphabet:
            raise ValueError("alphabet must be non-empty without repeats")

    @property
    def m(self) -> int:
        return len(self.alphabet)

    def capacity(self) -> int:
        """Number of distinct passwords; must stay below q to pack into a scalar."""
        return self.m ** self.n

    def check_password(self, p: str) -> str:
        if len(p) != self.n:
            raise ValueError(f"password length {len(p)} != {self.n}")
        bad = set(p) - set(self.alphabet)
        if bad:
            raise ValueError(f"characters outside alphabet: {sorted(bad)!r}")
        return p


@dataclass(frozen=True)
class LocalBlob:
    v: bytes
    offsets: tuple[int, ...]
    spec: PasswordSpec
    q: int


@dataclass(frozen=True)
class RecoveryOutcome:
    password: Optional[str]
    subsets_tried: int = 0

    def __bool__(self) -> bool:
        return self.password is not None


def match(x: str, y: str, t: int) -> bool:
    """True when the equal-length strings agree in at least t positions."""
    if len(x) != len(y):
        raise ValueError("match compares equal-length strings")
    return sum(a == b for a, b in zip(x, y)) >= t


def encode_password(spec: PasswordSpec, p: str) -> int:
    """Pack into one integer, base |alphabet|, most significant character first."""
    spec.check_password(p)
    value = 0
    for ch in p:
        value = value * spec.m + spec.alphabet.index(ch)
    return value


def decode_password(spec: PasswordSpec, value: int) -> str:
    if not 0 <= value < spec.capacity():
        raise ValueError("scalar does not encode a password")
    chars = []
    for _ in range(spec.n):
        value, idx = divmod(value, spec.m)
        chars.append(spec.alphabet[idx])
    return "".join(reversed(chars))


def coord_hash(v: bytes, i: int, ch: str, q: int) -> int:
    """h_i: per-position coordinate hash keyed by v."""
    return mac_to_scalar(v, index_tag(b"h", i), ch.encode(), q)


def mask_hash(v: bytes, i: int, ch: str, q: int) -> int:
    """g_i: per-position masking hash keyed by v."""
    return mac_to_scalar(v, index_tag(b"g", i), ch.encode(), q)


def derive_coords(v: bytes, p: str, q: int) -> Optional[list[int]]:
    """All n coordinate hashes, or None when any collide or hit zero."""
    xs = [coord_hash(v, i, ch, q) for i, ch in enumerate(p)]
    if 0 in xs or len(set(xs)) != len(xs):
        return None
    return xs


def local_register(spec: PasswordSpec, q: int, p: str, rng, v: bytes = None) -> LocalBlob:
    spec.check_password(p)
    if spec.capacity() >= q:
        raise ValueError("alphabet^n must be smaller than q")
    if v is None:
        for _ in range(COLLISION_RETRIES):
            v = rng.getrandbits(8 * MAC_KEY_BYTES).to_bytes(MAC_KEY_BYTES, "big")
            if derive_coords(v, p, q) is not None:
                break
        else:
            raise CoordinateCollisionError("could not find collision-free MAC key")
    xs = derive_coords(v, p, q)
    if xs is None:
        raise CoordinateCollisionError("supplied MAC key collides on this password")
    coeffs = [encode_password(spec, p)] + [rng.randrange(q) for _ in range(spec.t - 1)]
    offsets = tuple(
        (poly_eval(coeffs, x, q) - mask_hash(v, i, p[i], q)) % q
        for i, x in enumerate(xs)
    )
    return LocalBlob(v=v, offsets=offsets, spec=spec, q=q)


def _interpolate_constant(points: list[tuple[int, int]], q: int) -> int:
    xs = [x for x, _ in points]
    acc = 0
    for i, (_, y) in enumerate(points):
        acc = (acc + y * lagrange_coeff(xs, 0, i, q)) % q
    return acc


def local_recover(blob: LocalBlob, guess: str) -> RecoveryOutcome:
    """Try every t-subset of the guess-derived points, lexicographically.

    A reconstruction is accepted when the constant term decodes to a valid
    password p'' that matches the guess in >= t positions and at least t of
    the n points re-derived from p'' itself lie on the interpolated
    polynomial.
    """
    spec = blob.spec
    q = blob.q
    spec.check_password(guess)
    points = [
        (coord_hash(blob.v, i, guess[i], q), (blob.offsets[i] + mask_hash(blob.v, i, guess[i], q)) % q)
        for i in range(spec.n)
    ]
    tried = 0
    for subset in combinations(range(spec.n), spec.t):
        tried += 1
        chosen = [points[i] for i in subset]
        if len({x for x, _ in chosen}) != spec.t:
            continue
        try:
            candidate = decode_password(spec, _interpolate_constant(chosen, q))
        except ValueError:
            continue
        if not match(candidate, guess, spec.t):
            continue
        if _points_on_curve(blob, candidate, chosen) >= spec.t:
            return RecoveryOutcome(password=candidate, subsets_tried=tried)
    return RecoveryOutcome(password=None, subsets_tried=tried)


def _points_on_curve(blob: LocalBlob, candidate: str, basis: list[tuple[int, int]]) -> int:
    """Count candidate-derived points lying on the polynomial through the basis."""
    q = blob.q
    xs = [x for x, _ in basis]
    hits = 0
    for i, ch in enumerate(candidate):
        x = coord_hash(blob.v, i, ch, q)
        y = (blob.offsets[i] + mask_hash(blob.v, i, ch, q)) % q
        if x in xs:
            expected = basis[xs.index(x)][1]
        else:
            expected = 0
            for j, (_, yj) in enumerate(basis):
                expected = (expected + yj * lagrange_coeff(xs, x, j, q)) % q
        hits += y == expected
    return hits


def sample_assumption_instance(
    n: int, m: int, t: int, alpha: int, q: int, rng, with_trace: bool = False
):
    """Sample n subsets of m field points, one per subset on a hidden polynomial.

    The polynomial has degree at most t with constant term alpha; the other
    n*m - n points are uniform chaff. Subsets are disjoint, each holding
    exactly one on-polynomial pair at a shuffled position. With with_trace the
    hidden structure (coefficients and planted pair per subset) is returned
    for structural tests.
    """
    if n * m >= q:
        raise ValueError("q too small for n*m distinct nonzero coordinates")
    coeffs = [alpha % q] + [rng.randrange(q) for _ in range(t)]
    xs: set[int] = set()
    while len(xs) < n * m:
        xs.add(rng.randrange(1, q))
    xs = list(xs)
    rng.shuffle(xs)
    planted = xs[:n]
    chaff = xs[n:]
    subsets = []
    trace = []
    for i in range(n):
        x_good = planted[i]
        pairs = [(x_good, poly_eval(coeffs, x_good, q))]
        for x in chaff[i * (m - 1) : (i + 1) * (m - 1)]:
            pairs.append((x, rng.randrange(q)))
        rng.shuffle(pairs)
        subsets.append(pairs)
        trace.append((x_good, poly_eval(coeffs, x_good, q)))
    if with_trace:
        return subsets, {"coeffs": coeffs, "planted": trace}
    return subsets
