"""Acceptance checks on the bundled examples, each against an independent oracle."""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .certify import barabanov_norm, cuneo_potential, extremal_residual, potential_defect
from .cocycle import OneStepCocycle, almost_multiplicativity_constant, beta_bracket, beta_lower, beta_upper
from .mather import (
    compare_maximizers,
    cross_ratio,
    entropy_scaling_curve,
    maximizing_orbits,
    optimal_pairs,
    verify_cross_ratio_certificate,
    verify_norm_monotonicity,
)
from .projcone import (
    Multicone,
    check_backward_noc,
    check_forward_noc,
    image_arc,
    is_strictly_forward_invariant,
)
from .certify.typicality import check_pinching
from .symbolics import TransitionMatrix, topological_entropy

LOG_SILVER = math.log(3 + 2 * math.sqrt(2))  # log of the top eigenvalue of [[5,2],[2,1]]


def noc_pair() -> OneStepCocycle:
    return OneStepCocycle((np.array([[5.0, 2.0], [2.0, 1.0]]), np.array([[1.0, 2.0], [2.0, 5.0]])))


def positive_quadrant() -> Multicone:
    return Multicone.from_list([[0.0, math.pi / 2]])


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number:>2}: {self.title} -- {self.detail}"


def criterion_1():
    A = OneStepCocycle((np.diag([2.0, 1.0]),))
    worst = 0.0
    for n in range(1, 21):
        up, (lo, _) = beta_upper(A, n), beta_lower(A, n)
        worst = max(worst, up - lo, abs(up - math.log(2)), abs(lo - math.log(2)))
    return worst <= 1e-12, f"max deviation {worst:.3g} over n <= 20 (tol 1e-12)"


def criterion_2():
    A, cp = noc_pair(), positive_quadrant()
    inv = is_strictly_forward_invariant(A, cp, 0.3)
    fwd, bwd = check_forward_noc(A, cp), check_backward_noc(A, cp)
    witness = check_pinching(A, 1)
    expected = [sorted([math.atan(2 / 5), math.atan(1 / 2)]), sorted([math.atan(2), math.atan(5 / 2)])]
    got = [sorted([a.start, a.end]) for a in (image_arc(g, cp.arcs[0]) for g in A.generators)]
    err = max(abs(x - y) for e, g in zip(expected, got) for x, y in zip(e, g))
    ok = inv and fwd.holds and fwd.gap >= 0.64 and bwd.holds and witness is not None and len(witness) == 1 and err <= 1e-9
    return ok, (f"invariant(0.3)={inv}, forward {fwd.status} gap {fwd.gap:.6f}, backward {bwd.status}, "
                f"pinching witness {witness}, endpoint error {err:.2g}")


def _brute_force_max_exponent(A, L):
    best, argbest = -math.inf, []
    for n in range(1, L + 1):
        for w in itertools.product(range(A.k), repeat=n):
            m = np.eye(2)
            for s in w:
                m = A.generators[s] @ m
            v = math.log(max(abs(np.linalg.eigvals(m)))) / n
            if v > best + 1e-9:
                best, argbest = v, [w]
            elif v >= best - 1e-9:
                argbest.append(w)
    return best, argbest


def criterion_3():
    A = noc_pair()
    orbits, value = maximizing_orbits(A, 8)
    oracle, words = _brute_force_max_exponent(A, 8)
    # every maximizing word of the oracle must be a power of a single symbol
    powers = all(len(set(w)) == 1 for w in words)
    got = sorted(c.symbols for c in orbits)
    ok = got == [(1,), (2,)] and abs(value - LOG_SILVER) <= 1e-9 and abs(oracle - value) <= 1e-9 and powers
    return ok, f"orbits {[str(c) for c in orbits]}, value {value:.12f}, brute force {oracle:.12f}"


def criterion_4():
    A = noc_pair()
    t0 = time.perf_counter()
    norm = barabanov_norm(A, beta_bracket(A, 8))
    table = entropy_scaling_curve(A, norm, [6, 8, 10, 12], [0.05, 0.02])
    dt = time.perf_counter() - t0
    cell = table.values[1][-1]
    ok = table.rows_nonincreasing() and cell <= 0.05 and dt <= 60
    return ok, f"rows {table.values}, (n=12, eps=0.02) = {cell:.3g}, {dt:.1f}s"


def criterion_5():
    A = OneStepCocycle((np.diag([2.0, 1.0]), np.diag([2.0, 1.0])))
    table = entropy_scaling_curve(A, None, [6, 8, 10, 12], [0.05, 0.02])
    err = max(abs(v - math.log(2)) for row in table.values for v in row)
    return err <= 1e-9, f"max |h - log 2| = {err:.3g} (tol 1e-9)"


def criterion_6():
    A = noc_pair()
    bracket = beta_bracket(A, 8)
    norm = barabanov_norm(A, bracket)
    res = extremal_residual(norm, A, 720)
    inside = bracket.lower - 1e-6 <= norm.beta_hat <= bracket.upper + 1e-6
    R = OneStepCocycle((rotation(0.3), rotation(0.7)))
    rnorm = barabanov_norm(R)
    rres = extremal_residual(rnorm, R, 720)
    ok = res <= 1e-3 and inside and rnorm.kind == "euclidean" and rres <= 1e-12 and abs(rnorm.beta_hat) <= 1e-12
    return ok, (f"NOC residual {res:.3g}, beta_hat {norm.beta_hat:.12f} in [{bracket.lower:.12f}, "
                f"{bracket.upper:.12f}]; rotation residual {rres:.3g}, beta_hat {rnorm.beta_hat:.3g}")


def criterion_7():
    A = noc_pair()
    norm = barabanov_norm(A, beta_bracket(A, 8))
    pairs = optimal_pairs(A, norm, mc=positive_quadrant())
    cert = verify_cross_ratio_certificate(A, norm, pairs)
    hand = cross_ratio((1, 0), (0, 1), (1, 1), (1, -1))
    ok = cert.min_abs >= 1 - 1e-6 and hand == -1.0
    return ok, f"min |cross ratio| {cert.min_abs:.12f} over {len(cert.values)} ordered pairs; hand example {hand}"


def criterion_8():
    A = noc_pair()
    norm = barabanov_norm(A, beta_bracket(A, 8))
    pairs = optimal_pairs(A, norm, mc=positive_quadrant())
    results = {str(p.orbit): [verify_norm_monotonicity(A, norm, p, p.v + t * p.e2) for t in (-0.5, -0.1, 0.1, 0.5)]
               for p in pairs}
    ok = len(results) == 2 and all(all(v) for v in results.values())
    return ok, f"results per fixed point {results}"


def criterion_9():
    A, cp = noc_pair(), positive_quadrant()
    defects, equal_at = {}, None
    for m in range(1, 7):
        f = cuneo_potential(A, cp, m)
        cmp = compare_maximizers(A, f, 6)
        defects[m] = cmp.defect
        if equal_at is None and cmp.verdict == "equal" and cmp.defect < cmp.gap / 2:
            equal_at = m
    decay = all(defects[m] >= 2 * defects[m + 2] for m in range(1, 5))
    ok = equal_at is not None and decay
    return ok, f"first 'equal' at m={equal_at}; defects {', '.join(f'{m}:{d:.3g}' for m, d in defects.items())}"


def criterion_10():
    golden = topological_entropy(TransitionMatrix([[1, 1], [1, 0]]))
    full = topological_entropy(TransitionMatrix.full(2))
    e1 = abs(golden - math.log((1 + math.sqrt(5)) / 2))
    e2 = abs(full - math.log(2))
    return e1 <= 1e-9 and e2 <= 1e-12, f"golden mean error {e1:.3g} (1e-9), full shift error {e2:.3g} (1e-12)"


def criterion_11():
    A = noc_pair()
    k5 = almost_multiplicativity_constant(A, 5)
    k6 = almost_multiplicativity_constant(A, 6)
    change = abs(k6 - k5) / k5 if k5 > 0 else math.inf
    return k5 > 0 and k6 > 0 and change < 0.1, f"kappa(5) {k5:.6f}, kappa(6) {k6:.6f}, relative change {change:.3g}"


CRITERIA: list[tuple[int, str, Callable]] = [
    (1, "exponent bracket exact for diag(2,1)", criterion_1),
    (2, "NOC pair certification", criterion_2),
    (3, "maximizing orbits of the NOC pair", criterion_3),
    (4, "entropy scaling for the NOC pair", criterion_4),
    (5, "equal pair keeps entropy log 2", criterion_5),
    (6, "extremal norm identity", criterion_6),
    (7, "cross-ratio certificate", criterion_7),
    (8, "norm monotonicity along the weak direction", criterion_8),
    (9, "maximizers of the additive potential", criterion_9),
    (10, "subshift entropy", criterion_10),
    (11, "almost multiplicativity constant", criterion_11),
]


def run_criterion(number: int) -> CriterionResult:
    for num, title, fn in CRITERIA:
        if num == number:
            t0 = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as exc:  # a crash is a failed criterion, reported as such
                ok, detail = False, f"raised {type(exc).__name__}: {exc}"
            return CriterionResult(num, title, bool(ok), detail, time.perf_counter() - t0)
    raise KeyError(number)


def run_all() -> list:
    return [run_criterion(num) for num, _, _ in CRITERIA]
