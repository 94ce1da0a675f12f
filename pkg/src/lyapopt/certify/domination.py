"""Domination: invariant multicone search, singular-value gap rate, splitting."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..cocycle import OneStepCocycle, all_word_products, iter_word_products, log_abs_det, log_word_product, singular_values
from ..errors import InputError, NumericError
from ..projcone import (
    NOCResult,
    check_forward_noc,
    check_subshift_noc,
    Arc,
    Multicone,
    MulticoneFamily,
    TOL_ANGLE,
    act,
    angle_of,
    angular_distance,
    complementary,
    family_invariance_margin,
    image_arc,
    invariance_margin,
    union_arcs,
)
from ..symbolics import dual_subshift, is_admissible, word_str


@dataclass
class MulticoneSearch:
    """Result of an invariant multicone (or family) search.

    On failure ``multicone``/``family`` is None and ``reason`` says which
    step gave up.
    """

    ok: bool
    multicone: Optional[Multicone] = None
    family: Optional[MulticoneFamily] = None
    margin: Optional[float] = None
    iterations: int = 0
    reason: str = ""

    def __bool__(self):
        return self.ok

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "multicone": self.multicone.to_list() if self.multicone is not None else None,
            "family": self.family.to_list() if self.family is not None else None,
            "margin": self.margin,
            "iterations": self.iterations,
            "reason": self.reason,
        }


def _top_left_singular_angles(mats: np.ndarray) -> np.ndarray:
    u, _, _ = np.linalg.svd(mats)
    return np.arctan2(u[:, 1, 0], u[:, 0, 0]) % math.pi


def _fatten(arc: Arc, r: float) -> Arc:
    return Arc(arc.start - r, arc.length + 2 * r)


def _seed_arcs(angles, r: float) -> list[Arc]:
    return [Arc(float(t) - r, 2 * r) for t in angles]


def find_invariant_multicone(
    A: OneStepCocycle,
    N: int = 3,
    r: float = 0.05,
    delta: float = 1e-3,
    max_iter: int = 10**4,
    tol: float = 1e-13,
) -> MulticoneSearch:
    """Search for a multicone mapped strictly inside itself by every generator.

    Seeds arcs of radius ``r`` around the top left-singular directions of all
    admissible ``N``-word products, then iterates
    ``mc <- r-neighbourhood of U_i A_i(mc)`` until the arcs stop moving. A
    fixed point of that map has clearance ``r`` by construction; the result
    is nevertheless re-verified with margin ``delta``.
    """
    if N < 1 or r <= 0:
        raise InputError("need N >= 1 and r > 0")
    wp = all_word_products(A, N)
    try:
        arcs, _ = union_arcs(_seed_arcs(_top_left_singular_angles(wp.mats), r))
        mc = Multicone(tuple(arcs))
    except NumericError:
        return MulticoneSearch(False, reason="seed arcs already cover the projective line")
    for it in range(1, max_iter + 1):
        try:
            images = [_fatten(image_arc(g, a), r) for g in A.generators for a in mc.arcs]
            new = Multicone(tuple(union_arcs(images)[0]))
        except (NumericError, InputError):
            return MulticoneSearch(False, iterations=it, reason="iterated neighbourhoods cover the projective line")
        if new.close_to(mc, tol):
            mc = new
            break
        mc = new
    else:
        return MulticoneSearch(False, iterations=max_iter, reason="iteration budget exhausted before the arcs settled")
    margin = invariance_margin(A, mc)
    if margin < delta:
        return MulticoneSearch(False, margin=margin, iterations=it,
                               reason=f"image clearance {margin:.3g} below requested margin {delta:.3g}")
    return MulticoneSearch(True, multicone=mc, margin=margin, iterations=it)


def find_invariant_family(
    A: OneStepCocycle,
    N: int = 3,
    r: float = 0.05,
    delta: float = 1e-3,
    max_iter: int = 10**4,
    tol: float = 1e-13,
) -> MulticoneSearch:
    """Per-symbol version: ``M_b <- r-nbhd of U_{a -> b} A_b(M_a)``.

    ``M_b`` is seeded from products of admissible ``N``-words ending in ``b``.
    """
    q = A.transitions
    wp = all_word_products(A, N)
    angles = _top_left_singular_angles(wp.mats)
    cones = []
    try:
        for b in range(1, A.k + 1):
            sel = angles[wp.words[:, -1] == b]
            cones.append(Multicone(tuple(union_arcs(_seed_arcs(sel, r))[0])))
    except NumericError:
        return MulticoneSearch(False, reason="seed arcs already cover the projective line")
    preds = [[a for a in range(1, A.k + 1) if q.allows(a, b)] for b in range(1, A.k + 1)]
    for it in range(1, max_iter + 1):
        try:
            new = []
            for b in range(1, A.k + 1):
                imgs = [_fatten(image_arc(A[b], arc), r) for a in preds[b - 1] for arc in cones[a - 1].arcs]
                new.append(Multicone(tuple(union_arcs(imgs)[0])))
        except (NumericError, InputError):
            return MulticoneSearch(False, iterations=it, reason="iterated neighbourhoods cover the projective line")
        settled = all(x.close_to(y, tol) for x, y in zip(new, cones))
        cones = new
        if settled:
            break
    else:
        return MulticoneSearch(False, iterations=max_iter, reason="iteration budget exhausted before the arcs settled")
    family = MulticoneFamily(tuple(cones), q)
    margin = family_invariance_margin(A, family)
    if margin < delta:
        return MulticoneSearch(False, margin=margin, iterations=it,
                               reason=f"image clearance {margin:.3g} below requested margin {delta:.3g}")
    return MulticoneSearch(True, family=family, margin=margin, iterations=it)


def inverse_on_dual(A: OneStepCocycle) -> OneStepCocycle:
    """Inverse generators over the dual (reversed) subshift."""
    return OneStepCocycle(tuple(np.linalg.inv(g) for g in A.generators), dual_subshift(A.transitions))


def search_backward_noc(
    A: OneStepCocycle,
    N: int = 3,
    r: float = 0.05,
    delta: float = 1e-3,
    noc_margin: float = 1e-6,
    tol_angle: float = 1e-9,
) -> tuple[NOCResult, MulticoneSearch]:
    """Backward NOC through its own search: forward NOC of the inverse
    cocycle on the dual subshift, with a multicone (family) found for it.

    Complements of a forward family only give a sufficient test; this is the
    fallback when that test fails.
    """
    inv = inverse_on_dual(A)
    if inv.transitions.is_full():
        search = find_invariant_multicone(inv, N, r, delta)
        if not search.ok:
            return NOCResult("false", None, f"no invariant multicone for the inverse: {search.reason}",
                             tol_angle, noc_margin), search
        return check_forward_noc(inv, search.multicone, noc_margin, tol_angle), search
    search = find_invariant_family(inv, N, r, delta)
    if not search.ok:
        return NOCResult("false", None, f"no invariant family for the inverse: {search.reason}",
                         tol_angle, noc_margin), search
    return check_subshift_noc(inv, search.family, delta=noc_margin, tol_angle=tol_angle).forward, search


@dataclass
class DominationFit:
    """Least-squares fit ``log g(n) ~ log C + n log tau``.

    ``table`` holds ``(n, g(n))`` with g(n) the worst sigma_2/sigma_1 ratio
    over admissible n-words.
    """

    C: float
    tau: float
    table: list
    dominated: bool

    def to_dict(self) -> dict:
        return {"C": self.C, "tau": self.tau, "dominated": self.dominated,
                "table": [[n, g] for n, g in self.table]}


def check_domination_rate(A: OneStepCocycle, n_max: int = 10, tol: float = 1e-9) -> DominationFit:
    if n_max < 2:
        raise InputError("n_max must be >= 2")
    ns, logs = [], []
    for n, wp in enumerate(iter_word_products(A, n_max), 1):
        # log(sigma_2 / sigma_1) = log|det| - 2 log sigma_1
        log_ratio = wp.log_dets() - 2.0 * wp.log_norms()
        ns.append(n)
        logs.append(min(0.0, float(log_ratio.max())))
    slope, intercept = np.polyfit(np.array(ns, float), np.array(logs), 1)
    tau = math.exp(slope)
    half = len(logs) // 2
    tail = logs[half:]
    monotone = all(b <= a + tol for a, b in zip(tail, tail[1:]))
    return DominationFit(
        C=math.exp(intercept),
        tau=tau,
        table=[(n, math.exp(v)) for n, v in zip(ns, logs)],
        dominated=bool(tau < 1.0 - tol and monotone and tail[-1] < -tol),
    )


@dataclass
class SplittingSample:
    """Finite-window approximation of the dominated splitting at one point.

    ``context`` is the past window (``p`` symbols, oldest first) followed by
    the future window (``q`` symbols starting at the current one).
    """

    context: tuple
    p: int
    q: int
    e1: float
    e2: float
    residual_e1: float
    residual_e2: float
    ok: bool
    reason: str = ""

    @property
    def residual(self) -> float:
        return max(self.residual_e1, self.residual_e2)

    def to_dict(self) -> dict:
        return {
            "context": word_str(self.context), "p": self.p, "q": self.q,
            "e1": self.e1, "e2": self.e2,
            "residual_e1": self.residual_e1, "residual_e2": self.residual_e2,
            "ok": self.ok, "reason": self.reason,
        }


def _adjugate(m: np.ndarray) -> np.ndarray:
    # projectively the same as the inverse, without dividing by det
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def _push(A, word, theta):
    if not word:
        return theta
    m, _ = log_word_product(A, word)
    return act(m, theta)


def _pull(A, word, theta):
    if not word:
        return theta
    m, _ = log_word_product(A, word)
    return act(_adjugate(m), theta)


def compute_splitting(
    A: OneStepCocycle,
    mc: Multicone,
    p: int,
    q: int,
    context: Sequence[int],
    tol: float = 1e-8,
    tol_pinch: float = 1e-6,
) -> SplittingSample:
    """Approximate ``e1`` (from the past) and ``e2`` (from the future).

    e1 pushes the midpoint of the first arc of ``mc`` through the past window;
    e2 pulls the midpoint of the first complementary arc back through the
    future window. Residuals compare against the same construction one step
    along: for e1, ``A_{x0} e1(x)`` versus the window ending at ``x0``; for
    e2, the q-window versus the (q-1)-window.
    """
    context = tuple(context)
    if p < 1 or q < 2 or len(context) != p + q:
        raise InputError("need p >= 1, q >= 2 and a context of length p + q")
    if not is_admissible(context, A.transitions):
        raise InputError(f"context {context} is not admissible")
    past, future = context[:p], context[p:]
    seed1 = mc.arcs[0].midpoint
    seed2 = complementary(mc).arcs[0].midpoint

    e1 = _push(A, past, seed1)
    e1_next = _push(A, past[1:] + future[:1], seed1)
    res1 = angular_distance(act(A[future[0]], e1), e1_next)
    e2 = _pull(A, future, seed2)
    e2_short = _pull(A, future[:-1], seed2)
    res2 = angular_distance(e2, e2_short)

    reasons = []
    threshold = math.log1p(tol_pinch)
    for name, word in (("past", past), ("future", future)):
        m, scale = log_word_product(A, word)
        # log(sigma_1/sigma_2) = 2 log sigma_1 - log|det|
        gap = 2.0 * (math.log(singular_values(m)[0]) + scale) - log_abs_det(A, word)
        if gap <= threshold:
            reasons.append(f"no singular-value gap along the {name} window")
    if angular_distance(e1, e2) <= TOL_ANGLE:
        reasons.append("e1 and e2 coincide")
    if max(res1, res2) > tol:
        reasons.append(f"equivariance residual {max(res1, res2):.3g} above {tol:.3g}; windows too short")
    return SplittingSample(context, p, q, e1, e2, res1, res2, not reasons, "; ".join(reasons))
