"""Statistical smoke tests for the hiding properties, plus complexity counters.

Each game plays a choose-bit experiment against the real protocol code and
reports the empirical advantage of a fixed distinguisher with a 95% binomial
confidence interval. These runs can falsify the hiding claims (a planted leak
shows up as advantage well above zero) but cannot prove them; the underlying
guarantees are asymptotic and desk-scale trials only sanity-check them.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from itertools import combinations

from scipy.stats import chisquare

from .group import MAC_KEY_BYTES, decode_message, encode_message, exp_count, reset_exp_count
from .localpr import (
    LocalBlob,
    PasswordSpec,
    coord_hash,
    derive_coords,
    encode_password,
    local_register,
    sample_assumption_instance,
)
from .ot import ot_choose, ot_common, ot_recover, ot_respond
from .protocols import (
    crpr_payloads,
    crpr_register,
    crpr_server_start,
    hpr_client_recover,
    hpr_register,
    hpr_server_respond,
    recover_from_partials,
)
from .threshold import ShareOracle, combine, keygen_threshold, lagrange_coeff, poly_eval
from .vectors import TEST_P64, TOY_P23, TOY_P2027


@dataclass
class GameReport:
    name: str
    trials: int
    advantage: float
    ci_halfwidth: float
    detail: dict = field(default_factory=dict)

    @property
    def ci_contains_zero(self) -> bool:
        return abs(self.advantage) <= self.ci_halfwidth

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "advantage": self.advantage,
            "ci_halfwidth": self.ci_halfwidth,
            "ci_contains_zero": self.ci_contains_zero,
            "detail": self.detail,
        }


def _finish(name: str, wins: int, trials: int, detail: dict = None) -> GameReport:
    p_hat = wins / trials
    half = 1.96 * math.sqrt(max(p_hat * (1 - p_hat), 1.0 / trials) / trials)
    return GameReport(
        name=name,
        trials=trials,
        advantage=p_hat - 0.5,
        ci_halfwidth=half,
        detail=detail or {},
    )


def _random_xs(n: int, q: int, rng) -> list[int]:
    xs: set[int] = set()
    while len(xs) < n:
        xs.add(rng.randrange(1, q))
    return sorted(xs)


def _combine_for(oracle: ShareOracle, c, partials, targets):
    """First target plaintext any t-subset decodes to, else None."""

    def accept(m: int) -> bool:
        return m in targets

    result = combine(
        oracle.pk, c, [(p.x, p.d) for p in partials], oracle.shares.t, accept
    )
    return result.plaintext


def _chi2_guess(params, partials) -> int:
    """Null distinguisher: Pearson statistic of decoded partials vs uniform."""
    q = params.q
    counts = [0] * q
    for p in partials:
        counts[decode_message(params, p.d)] += 1
    expected = len(partials) / q
    stat = sum((c - expected) ** 2 / expected for c in counts)
    return 1 if stat > q - 1 else 0


def plaintext_secrecy_game(
    trials: int,
    rng,
    params=TOY_P2027,
    n: int = 4,
    t: int = 2,
    distinguisher: str = "combine",
) -> GameReport:
    """Failed combinings of one of two chosen plaintexts should not reveal which."""
    wins = 0
    for _ in range(trials):
        keypair, shares = keygen_threshold(params, t, n, _random_xs(n, params.q, rng), rng)
        oracle = ShareOracle(keypair, shares, rng)
        m0 = encode_message(params, rng.randrange(params.q))
        m1 = encode_message(params, rng.randrange(params.q))
        b = rng.randrange(2)
        indices = rng.sample(range(n), t - 1)
        c, partials = oracle.respond_mixed((m0, m1)[b], indices)
        if distinguisher == "combine":
            found = _combine_for(oracle, c, partials, {m0, m1})
            if found == m0 and m0 != m1:
                guess = 0
            elif found == m1 and m0 != m1:
                guess = 1
            else:
                guess = rng.randrange(2)
        else:
            guess = _chi2_guess(params, partials)
        wins += guess == b
    return _finish(f"plaintext_secrecy[{distinguisher}]", wins, trials)


def share_hiding_game(
    trials: int,
    rng,
    params=TOY_P23,
    n: int = 4,
    t: int = 2,
    distinguisher: str = "chi2",
    mutant: str = None,
) -> GameReport:
    """Mixed genuine/junk partials vs all-junk partials should look alike.

    mutant="reuse_genuine" plants the leak where the all-junk arm hands out
    genuine shares instead; the combine distinguisher must catch that.
    """
    wins = 0
    decoded = []
    for _ in range(trials):
        keypair, shares = keygen_threshold(params, t, n, _random_xs(n, params.q, rng), rng)
        oracle = ShareOracle(keypair, shares, rng)
        m = encode_message(params, rng.randrange(params.q))
        b = rng.randrange(2)
        indices = rng.sample(range(n), t - 1)
        if b == 0:
            c, partials = oracle.respond_mixed(m, indices)
        elif mutant == "reuse_genuine":
            c, partials = oracle.respond_genuine(m)
        else:
            c, partials = oracle.respond_random(m)
        if distinguisher == "combine":
            guess = 1 if _combine_for(oracle, c, partials, {m}) == m else 0
        else:
            guess = _chi2_guess(params, partials)
        decoded.extend(decode_message(params, p.d) for p in partials)
        wins += guess == b
    detail = {"partials_uniformity_p": _uniformity_p(decoded, params.q)}
    tag = f"share_hiding[{distinguisher}]" + (f"+{mutant}" if mutant else "")
    return _finish(tag, wins, trials, detail)


def _uniformity_p(values: list[int], q: int) -> float:
    counts = [0] * q
    for v in values:
        counts[v] += 1
    return float(chisquare(counts).pvalue)


def _consistent(blob: LocalBlob, p: str) -> bool:
    """Raw-offset polynomial consistency; fires on blobs missing the mask layer."""
    spec = blob.spec
    q = blob.q
    xs = [coord_hash(blob.v, i, ch, q) for i, ch in enumerate(p)]
    if len(set(xs)) != spec.n:
        return False
    points = list(zip(xs, blob.offsets))
    target = encode_password(spec, p)
    need = min(spec.n, spec.t + 1)
    for subset in combinations(range(spec.n), spec.t):
        chosen = [points[i] for i in subset]
        sub_xs = [x for x, _ in chosen]
        constant = 0
        for j, (_, y) in enumerate(chosen):
            constant = (constant + y * lagrange_coeff(sub_xs, 0, j, q)) % q
        if constant != target:
            continue
        hits = 0
        for x, y in points:
            if x in sub_xs:
                hits += chosen[sub_xs.index(x)][1] == y
                continue
            value = 0
            for j, (_, yj) in enumerate(chosen):
                value = (value + yj * lagrange_coeff(sub_xs, x, j, q)) % q
            hits += value == y
        if hits >= need:
            return True
    return False


def registration_hiding_game(
    trials: int,
    rng,
    p0: str,
    p1: str,
    spec: PasswordSpec,
    q: int = TOY_P2027.q,
    mutant: str = None,
) -> GameReport:
    """A registration blob for one of two chosen passwords should not reveal which.

    mutant="unmasked" stores the polynomial evaluations without their keyed
    masks, which the offset-consistency distinguisher then reconstructs.
    """
    if p0 == p1:
        return GameReport(
            name="registration_hiding[degenerate]",
            trials=trials,
            advantage=0.0,
            ci_halfwidth=0.0,
            detail={"note": "p0 == p1: the two registration distributions coincide"},
        )
    offsets_seen = []
    wins = 0
    for _ in range(trials):
        b = rng.randrange(2)
        p = (p0, p1)[b]
        if mutant == "unmasked":
            blob = _register_unmasked(spec, q, p, rng)
        else:
            blob = local_register(spec, q, p, rng)
        offsets_seen.extend(blob.offsets)
        if _consistent(blob, p0):
            guess = 0
        elif _consistent(blob, p1):
            guess = 1
        else:
            guess = rng.randrange(2)
        wins += guess == b
    detail = {"offsets_uniformity_p": _uniformity_p(offsets_seen, q)}
    tag = "registration_hiding" + (f"+{mutant}" if mutant else "")
    return _finish(tag, wins, trials, detail)


def _register_unmasked(spec: PasswordSpec, q: int, p: str, rng) -> LocalBlob:
    """Planted leak: polynomial evaluations stored raw, no g_i masking."""
    while True:
        v = rng.getrandbits(8 * MAC_KEY_BYTES).to_bytes(MAC_KEY_BYTES, "big")
        xs = derive_coords(v, p, q)
        if xs is not None:
            break
    coeffs = [encode_password(spec, p)] + [rng.randrange(q) for _ in range(spec.t - 1)]
    return LocalBlob(
        v=v, offsets=tuple(poly_eval(coeffs, x, q) for x in xs), spec=spec, q=q
    )


def chaff_hiding_game(
    trials: int,
    rng,
    n: int = 6,
    m: int = 8,
    t: int = 3,
    alpha0: int = None,
    alpha1: int = None,
    q: int = TOY_P2027.q,
) -> GameReport:
    """Chaff-point instances built around alpha0 vs alpha1 should look alike.

    Degenerate m=1 leaves no chaff, and the interpolation distinguisher then
    reads the hidden constant right off the points.
    """
    if t + 1 > n:
        raise ValueError("distinguisher needs t+1 subsets")
    alpha0 = rng.randrange(q) if alpha0 is None else alpha0
    alpha1 = rng.randrange(q) if alpha1 is None else alpha1
    if alpha0 == alpha1:
        return GameReport(
            name="chaff_hiding[degenerate]",
            trials=trials,
            advantage=0.0,
            ci_halfwidth=0.0,
            detail={"note": "alpha0 == alpha1: the two ensembles coincide"},
        )
    wins = 0
    for _ in range(trials):
        b = rng.randrange(2)
        subsets = sample_assumption_instance(n, m, t, (alpha0, alpha1)[b], q, rng)
        points = [subsets[i][rng.randrange(m)] for i in range(t + 1)]
        xs = [x for x, _ in points]
        constant = 0
        for j, (_, y) in enumerate(points):
            constant = (constant + y * lagrange_coeff(xs, 0, j, q)) % q
        if constant == alpha0:
            guess = 0
        elif constant == alpha1:
            guess = 1
        else:
            guess = rng.randrange(2)
        wins += guess == b
    return _finish(f"chaff_hiding[m={m}]", wins, trials)


def measure_complexity(
    protocol: str,
    n: int = 8,
    t: int = 5,
    alphabet: str = None,
    trials: int = 5,
    rng=None,
    params=TEST_P64,
) -> dict:
    """Server exponentiation counts and combiner subset counts on reference runs."""
    from .localpr import PRINTABLE

    rng = rng or random.Random(0)
    alphabet = alphabet or PRINTABLE
    spec = PasswordSpec(n=n, t=t, alphabet=alphabet)
    size = len(alphabet)
    server_exps = []
    subsets_exact = []
    subsets_partial = []
    for trial in range(trials):
        password = "".join(rng.choice(alphabet) for _ in range(n))
        partial = _perturb(password, t, alphabet, rng)
        if protocol == "hash":
            record = hpr_register(spec, params, f"bench{trial}", password, rng)
            reset_exp_count()
            response = hpr_server_respond(record, password, rng)
            server_exps.append(exp_count())
            subsets_exact.append(hpr_client_recover(response, password).subsets_tried)
            response = hpr_server_respond(record, partial, rng)
            subsets_partial.append(hpr_client_recover(response, partial).subsets_tried)
        elif protocol == "cr":
            record = crpr_register(spec, params, f"bench{trial}", password, rng)
            exps, outcome = _run_cr_counted(record, password, rng)
            server_exps.append(exps)
            subsets_exact.append(outcome.subsets_tried)
        else:
            raise ValueError(f"unknown protocol {protocol!r}")
    result = {
        "protocol": protocol,
        "n": n,
        "t": t,
        "alphabet_size": size,
        "server_exponentiations": server_exps,
        "combine_subsets_exact": subsets_exact,
        "bound": n + 2 if protocol == "hash" else 3 * n * size + 8,
    }
    if subsets_partial:
        result["combine_subsets_partial"] = subsets_partial
    return result


def _perturb(password: str, matches: int, alphabet: str, rng) -> str:
    """A guess agreeing with password in exactly `matches` positions."""
    out = list(password)
    for i in rng.sample(range(len(password)), len(password) - matches):
        out[i] = rng.choice([ch for ch in alphabet if ch != password[i]])
    return "".join(out)


def _run_cr_counted(record, guess, rng, session: bytes = b"bench-session"):
    """Challenge-response recovery loop, counting only the server-side work."""
    spec = record.spec
    params = record.pk.params
    reset_exp_count()
    common = ot_common(params, session)
    cprime = crpr_server_start(record, rng)
    server_exps = exp_count()
    partials = []
    for i, ch in enumerate(guess):
        state, B = ot_choose(params, common, spec.m, spec.alphabet.index(ch), rng)
        reset_exp_count()
        response = ot_respond(params, common, B, crpr_payloads(record, cprime.a, i), rng)
        server_exps += exp_count()
        partials.append(ot_recover(params, state, response))
    outcome = recover_from_partials(spec, record.v1, record.pk, cprime, partials, guess)
    return server_exps, outcome


def run_selftest(trials: int = 10000, seed: int = 2026, json_path: str = None) -> dict:
    """Full battery: four honest games, three planted leaks, complexity counters."""
    rng = random.Random(seed)
    spec = PasswordSpec(n=4, t=2, alphabet="abc")
    honest = [
        plaintext_secrecy_game(trials, rng, distinguisher="combine"),
        share_hiding_game(trials, rng, distinguisher="chi2"),
        registration_hiding_game(trials, rng, "abca", "bcab", spec),
        chaff_hiding_game(trials, rng),
    ]
    mutants = [
        share_hiding_game(
            trials, rng, params=TOY_P2027, distinguisher="combine", mutant="reuse_genuine"
        ),
        registration_hiding_game(trials, rng, "abca", "bcab", spec, mutant="unmasked"),
        chaff_hiding_game(trials, rng, m=1),
    ]
    complexity = [
        measure_complexity("hash", trials=3, rng=rng),
        measure_complexity("cr", trials=1, rng=rng),
    ]
    report = {
        "trials": trials,
        "seed": seed,
        "honest_games": [g.to_json() for g in honest],
        "planted_leaks": [g.to_json() for g in mutants],
        "complexity": complexity,
        "pass": all(g.ci_contains_zero for g in honest)
        and all(g.advantage > 0.4 for g in mutants),
    }
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
    return report


def format_selftest(report: dict) -> str:
    lines = ["statistical selftest (smoke checks, not proofs)", ""]
    for g in report["honest_games"]:
        verdict = "ok" if g["ci_contains_zero"] else "SUSPECT"
        lines.append(
            f"  honest {g['name']:<34} adv {g['advantage']:+.4f} "
            f"+/- {g['ci_halfwidth']:.4f}  [{verdict}]"
        )
    for g in report["planted_leaks"]:
        verdict = "detected" if g["advantage"] > 0.4 else "MISSED"
        lines.append(
            f"  leak   {g['name']:<34} adv {g['advantage']:+.4f}  [{verdict}]"
        )
    for c in report["complexity"]:
        lines.append(
            f"  cost   {c['protocol']:<6} server exps {c['server_exponentiations']} "
            f"(bound {c['bound']}), exact-guess subsets {c['combine_subsets_exact']}"
        )
    lines.append("")
    lines.append(f"overall: {'PASS' if report['pass'] else 'FAIL'}")
    return "\n".join(lines)
