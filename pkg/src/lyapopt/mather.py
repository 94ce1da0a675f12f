"""Maximizing orbits, finite-scale Mather sets and the certificates living on them."""
from __future__ import annotations

import io
import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .certify.barabanov import EuclideanNorm
from .certify.cuneo import AdditivePotential, birkhoff_sum, potential_defect
from .certify.domination import compute_splitting, find_invariant_multicone
from .cocycle import (
    ExponentBracket,
    OneStepCocycle,
    WordProducts,
    _necklace_exponents,
    beta_bracket,
    extend_products,
    first_products,
    log_word_product,
)
from .errors import InputError
from .projcone import Multicone, angle_of, unit
from .symbolics import CyclicWord, TransitionMatrix, enumerate_cyclic_words, topological_entropy, word_str

TIE_TOL = 1e-9


# -- maximizing periodic orbits ------------------------------------------------------

def maximizing_orbits(A: OneStepCocycle, L_max: int, tie_tol: float = TIE_TOL) -> tuple[list, float]:
    """Necklaces of length <= L_max within ``tie_tol`` of the best periodic exponent."""
    if L_max < 1:
        raise InputError("L_max must be >= 1")
    scored = _necklace_exponents(A, L_max)
    if not scored:
        raise InputError(f"no cyclically admissible words of length <= {L_max}")
    best = max(v for _, v in scored)
    return [c for c, v in scored if v >= best - tie_tol], best


# -- finite-scale Mather set -----------------------------------------------------------

@dataclass
class MatherApprox:
    """Admissible n-words whose growth is within ``epsilon`` of the top rate.

    ``graph`` is the transition matrix on the surviving words that lie on a
    bi-infinite path (w -> w' when they overlap in n-1 symbols); ``states``
    lists those words in the graph's order. ``graph`` is None when no
    survivor lies on a cycle.
    """

    n: int
    epsilon: float
    beta_hat: float
    threshold: float
    survivors: list
    states: list
    graph: Optional[TransitionMatrix]
    entropy_estimate: float
    hereditary: bool = True

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "epsilon": self.epsilon,
            "beta_hat": self.beta_hat,
            "threshold": self.threshold,
            "hereditary": self.hereditary,
            "n_survivors": len(self.survivors),
            "survivors": [word_str(w) for w in self.survivors],
            "graph_states": len(self.states),
            "graph_edges": int(self.graph.entries.sum()) if self.graph is not None else 0,
            "entropy_estimate": self.entropy_estimate,
        }


def _take(wp: WordProducts, keep: np.ndarray) -> WordProducts:
    return WordProducts(wp.words[keep], wp.mats[keep], wp.log_scale[keep], wp.log_det[keep])


def _log_norms(norm, wp: WordProducts) -> np.ndarray:
    return np.log(norm.operator_norms(wp.mats)) + wp.log_scale


def _rate_and_threshold(A, norm, n, epsilon, bracket):
    if norm is not None:
        return norm.beta_hat, norm.beta_hat - epsilon, norm
    if bracket is None:
        bracket = beta_bracket(A, min(n, 8), n)
    # without an extremal norm the rate is only known up to the bracket width
    return bracket.midpoint, bracket.midpoint - epsilon - bracket.width, EuclideanNorm()


def _survivors(A, norm, n, threshold, hereditary) -> WordProducts:
    wp = first_products(A)
    for j in range(1, n + 1):
        if j > 1:
            previous = {tuple(w) for w in wp.words.tolist()}
            wp = extend_products(A, wp)
            if hereditary:
                # prefixes survived by construction; the suffix must have too
                wp = _take(wp, np.array([tuple(w[1:]) in previous for w in wp.words.tolist()], dtype=bool))
        if hereditary or j == n:
            wp = _take(wp, _log_norms(norm, wp) >= j * threshold)
        if len(wp.words) == 0:
            break
    return wp


def _overlap_core(words: list) -> tuple[list, Optional[np.ndarray]]:
    """Words on bi-infinite paths of the overlap graph, with its adjacency."""
    by_prefix: dict = {}
    for i, w in enumerate(words):
        by_prefix.setdefault(w[:-1], []).append(i)
    adj = np.zeros((len(words), len(words)), dtype=np.int8)
    for i, w in enumerate(words):
        for j in by_prefix.get(w[1:], ()):
            adj[i, j] = 1
    alive = np.ones(len(words), dtype=bool)
    while True:
        sub = adj[np.ix_(alive, alive)]
        ok = sub.any(axis=1) & sub.any(axis=0)
        if ok.all():
            break
        idx = np.flatnonzero(alive)
        alive[idx[~ok]] = False
        if not alive.any():
            return [], None
    keep = np.flatnonzero(alive)
    return [words[i] for i in keep], adj[np.ix_(keep, keep)]


def mather_word_set(
    A: OneStepCocycle,
    norm=None,
    n: int = 8,
    epsilon: float = 0.05,
    bracket: Optional[ExponentBracket] = None,
    hereditary: bool = True,
) -> MatherApprox:
    """Approximate the Mather set by near-optimal n-words.

    A word survives when ``(1/j) log nu(A_u) >= beta_hat - epsilon`` for the
    word itself and, with ``hereditary`` (the default), for every subword of
    every length ``j <= n``. The hereditary sets are nested in ``n``, which
    keeps the entropy estimate monotone; the single-scale filter is kept for
    comparison. ``nu`` is the operator norm of ``norm`` (an extremal norm,
    preferred) or the Euclidean one; in the latter case ``beta_hat`` is the
    bracket midpoint and the bracket width is added to ``epsilon``.
    """
    if n < 2:
        raise InputError("n must be >= 2")
    if not epsilon > 0:
        raise InputError("epsilon must be positive")
    beta_hat, threshold, nu = _rate_and_threshold(A, norm, n, epsilon, bracket)
    wp = _survivors(A, nu, n, threshold, hereditary)
    survivors = [tuple(int(s) for s in w) for w in wp.words]
    if not survivors:
        raise InputError(f"no {n}-word survives epsilon={epsilon}; try a larger epsilon")
    states, adj = _overlap_core(survivors)
    graph = TransitionMatrix(adj) if adj is not None else None
    entropy = topological_entropy(graph) if graph is not None else 0.0
    return MatherApprox(n, epsilon, beta_hat, threshold, survivors, states, graph, entropy, hereditary)


@dataclass
class EntropyTable:
    """Entropy estimates; ``values[i][j]`` is for ``eps_list[i]`` and ``n_list[j]``."""

    n_list: list
    eps_list: list
    values: list

    def rows_nonincreasing(self, tol: float = 1e-9) -> bool:
        return all(b <= a + tol for row in self.values for a, b in zip(row, row[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["epsilon"] + [f"n={n}" for n in self.n_list])
        for eps, row in zip(self.eps_list, self.values):
            writer.writerow([repr(eps)] + [repr(v) for v in row])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"n": list(self.n_list), "epsilon": list(self.eps_list), "entropy": [list(r) for r in self.values]}


def entropy_scaling_curve(
    A: OneStepCocycle,
    norm,
    n_list: Sequence[int],
    eps_list: Sequence[float],
    bracket: Optional[ExponentBracket] = None,
    hereditary: bool = True,
) -> EntropyTable:
    if not n_list or not eps_list:
        raise InputError("n_list and eps_list must be non-empty")
    if norm is None and bracket is None:
        bracket = beta_bracket(A, min(max(n_list), 8), max(n_list))
    values = [
        [mather_word_set(A, norm, n, eps, bracket=bracket, hereditary=hereditary).entropy_estimate for n in n_list]
        for eps in eps_list
    ]
    return EntropyTable(list(n_list), list(eps_list), values)


# -- cross ratios and optimal pairs ---------------------------------------------------------

def _cross(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def cross_ratio(a, b, c, d) -> float:
    """``[a, b; c, d] = (a x c)/(a x d) * (b x d)/(b x c)`` with x the 2-D cross product."""
    a, b, c, d = (np.asarray(v, float) for v in (a, b, c, d))
    den1, den2 = _cross(a, d), _cross(b, c)
    scale = np.linalg.norm(a) * np.linalg.norm(d), np.linalg.norm(b) * np.linalg.norm(c)
    if abs(den1) <= 1e-14 * scale[0] or abs(den2) <= 1e-14 * scale[1]:
        raise InputError("cross ratio undefined: a denominator vanishes (collinear arguments)")
    return (_cross(a, c) / den1) * (_cross(b, d) / den2)


@dataclass
class OptimalPair:
    """A maximizing periodic orbit with a vector realizing the extremal growth
    along it and the weak direction at the same point."""

    orbit: CyclicWord
    v: np.ndarray
    e2_dir: float
    defect: float = 0.0

    @property
    def e2(self) -> np.ndarray:
        return unit(self.e2_dir)

    def to_dict(self) -> dict:
        return {"orbit": str(self.orbit), "v": self.v.tolist(), "e2_dir": self.e2_dir, "defect": self.defect}


def _orbit_defect(A, norm, orbit, v) -> float:
    m, scale = log_word_product(A, orbit.symbols)
    grow = math.log(float(norm(m @ v))) + scale
    return abs(grow - len(orbit) * norm.beta_hat - math.log(float(norm(v))))


def optimal_pairs(
    A: OneStepCocycle,
    norm,
    orbits: Optional[Sequence[CyclicWord]] = None,
    mc: Optional[Multicone] = None,
    L_max: int = 8,
    window: int = 32,
    tol: float = 1e-6,
) -> list:
    """Build an :class:`OptimalPair` at each maximizing periodic orbit.

    ``v`` is the dominant eigenvector of the orbit product; ``e2`` comes from
    :func:`compute_splitting` along the periodic context.
    """
    if orbits is None:
        orbits, _ = maximizing_orbits(A, L_max)
    if mc is None:
        search = find_invariant_multicone(A)
        if not search.ok:
            raise InputError(f"no invariant multicone for the splitting: {search.reason}")
        mc = search.multicone
    pairs = []
    for c in orbits:
        m, _ = log_word_product(A, c.symbols)
        vals, vecs = np.linalg.eig(m)
        i = int(np.argmax(np.abs(vals)))
        if vals[i].imag != 0 or abs(vals[i]) <= abs(vals[1 - i]):
            raise InputError(f"orbit {c} has no dominant real eigendirection")
        v = unit(angle_of(vecs[:, i].real))
        reps = -(-window // len(c))
        ctx = c.symbols * (2 * reps)
        sample = compute_splitting(A, mc, reps * len(c), reps * len(c), ctx)
        if not sample.ok:
            raise InputError(f"splitting along {c} failed: {sample.reason}")
        defect = _orbit_defect(A, norm, c, v)
        if defect > tol:
            raise InputError(f"orbit {c} does not realize the extremal rate (defect {defect:.3g})")
        pairs.append(OptimalPair(c, v, sample.e2, defect))
    return pairs


@dataclass
class CrossRatioCertificate:
    min_abs: float
    passed: bool
    values: list
    skipped: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"min_abs": self.min_abs, "passed": self.passed,
                "values": [[a, b, v] for a, b, v in self.values],
                "skipped": [[a, b] for a, b in self.skipped]}


def verify_cross_ratio_certificate(A: OneStepCocycle, norm, pairs: Sequence[OptimalPair], tol: float = 1e-6) -> CrossRatioCertificate:
    """min |[v1, w1; v2, w2]| over ordered pairs of optimal pairs (self-pairs included).

    Each pair's extremal-growth defect is re-checked against ``norm`` first.
    """
    if not pairs:
        raise InputError("need at least one optimal pair")
    for p in pairs:
        if _orbit_defect(A, norm, p.orbit, p.v) > tol:
            raise InputError(f"pair at {p.orbit} is not optimal for this norm")
    values, skipped = [], []
    for p in pairs:
        for q in pairs:
            try:
                r = cross_ratio(p.v, q.v, p.e2, q.e2)
            except InputError:
                warnings.warn(f"skipping ({p.orbit}, {q.orbit}): weak and strong directions align")
                skipped.append((str(p.orbit), str(q.orbit)))
                continue
            values.append((str(p.orbit), str(q.orbit), r))
    if not values:
        raise InputError("every pair was degenerate")
    lo = min(abs(v) for _, _, v in values)
    return CrossRatioCertificate(lo, lo >= 1.0 - tol, values, skipped)


def verify_norm_monotonicity(
    A: OneStepCocycle,
    norm,
    sample: OptimalPair,
    u,
    tol: float = 1e-9,
    mc: Optional[Multicone] = None,
) -> bool:
    """Check ``|||v||| <= |||u|||`` when ``u - v`` is along the weak direction.

    With ``mc`` given, ``u`` must also point into it.
    """
    u = np.asarray(u, float)
    v = sample.v
    e2 = sample.e2
    d = u - v
    if abs(_cross(d, e2)) > 1e-9 * max(1.0, float(np.linalg.norm(d))):
        raise InputError("u - v is not parallel to the weak direction")
    if abs(_cross(u, e2)) <= 1e-12 * float(np.linalg.norm(u)):
        raise InputError("u lies on the weak direction")
    if mc is not None and not mc.contains(angle_of(u)):
        raise InputError("u is outside the multicone")
    return bool(norm(v) <= norm(u) + tol)


# -- maximizers of the cocycle versus the additive potential ------------------------------------

@dataclass
class MaximizerComparison:
    verdict: str  # "equal", "different" or "inconclusive"
    lyapunov_set: list
    potential_set: list
    defect: float
    gap: float

    @property
    def equal(self) -> bool:
        return self.verdict == "equal"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "lyapunov_set": [str(c) for c in self.lyapunov_set],
            "potential_set": [str(c) for c in self.potential_set],
            "defect": self.defect,
            "gap": self.gap if math.isfinite(self.gap) else None,
        }


def _argmax_set(scored, tie_tol):
    best = max(v for _, v in scored)
    top = [c for c, v in scored if v >= best - tie_tol]
    rest = [v for _, v in scored if v < best - tie_tol]
    return top, (best - max(rest)) if rest else math.inf


def compare_maximizers(
    A: OneStepCocycle,
    f: AdditivePotential,
    L_max: int = 6,
    tie_tol: float = TIE_TOL,
    defect_length: int = 8,
) -> MaximizerComparison:
    """Compare the necklaces maximizing the top exponent with those maximizing
    the periodic averages of ``f``.

    The verdict is "equal" or "different" only when the potential defect is
    below half the gap between the best and second-best periodic exponent;
    otherwise it is "inconclusive".
    """
    necklaces = list(enumerate_cyclic_words(A.transitions, L_max))
    lyap, gap = _argmax_set(_necklace_exponents(A, L_max), tie_tol)
    pot, _ = _argmax_set([(c, birkhoff_sum(f, c) / len(c)) for c in necklaces], tie_tol)
    defect = potential_defect(A, f, defect_length)
    if not defect < gap / 2:
        verdict = "inconclusive"
    else:
        verdict = "equal" if set(lyap) == set(pot) else "different"
    return MaximizerComparison(verdict, lyap, pot, defect, gap)
