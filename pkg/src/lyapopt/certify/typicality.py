"""Pinching and twisting witnesses."""
from __future__ import annotations

import math
from typing import Optional, Sequence

from ..cocycle import OneStepCocycle, iter_word_products
from ..errors import InputError
from ..projcone import TOL_ANGLE, act, angular_distance

TOL_PINCH = 1e-6


def check_pinching(A: OneStepCocycle, L_max: int, tol_pinch: float = TOL_PINCH) -> Optional[tuple]:
    """Shortest (then lexicographically first) word with sigma_1/sigma_2 > 1 + tol_pinch."""
    if L_max < 1:
        raise InputError("L_max must be >= 1")
    threshold = math.log1p(tol_pinch)
    for wp in iter_word_products(A, L_max):
        # log(sigma_1/sigma_2) = 2 log sigma_1 - log|det|
        gap = 2.0 * wp.log_norms() - wp.log_dets()
        hits = (gap > threshold).nonzero()[0]
        if len(hits):
            return tuple(int(s) for s in wp.words[hits[0]])
    return None


def _clearance(theta: float, G: Sequence[float]) -> float:
    return min(angular_distance(theta, g) for g in G)


def check_twisting(
    A: OneStepCocycle,
    F: float,
    G: Sequence[float],
    L_max: int,
    tol_angle: float = TOL_ANGLE,
) -> Optional[tuple]:
    """Find an admissible ``t`` moving direction ``F`` off every direction in ``G``.

    A greedy walk goes first: at each step the first symbol that already
    works is returned, otherwise the one maximizing the clearance is applied.
    Then all words up to ``L_max`` are tried in order. ``None`` means
    inconclusive, not a refutation of twisting.
    """
    if not G:
        raise InputError("G must be non-empty")
    q = A.transitions
    word: tuple = ()
    theta = F
    for _ in range(L_max):
        options = range(1, A.k + 1) if not word else q.successors(word[-1])
        scored = []
        for s in options:
            img = act(A[s], theta)
            c = _clearance(img, G)
            if c > tol_angle:
                return word + (s,)
            scored.append((c, -s, img))
        c, neg_s, theta = max(scored)
        word = word + (-neg_s,)
    for wp in iter_word_products(A, L_max):
        for w, m in zip(wp.words, wp.mats):
            if _clearance(act(m, F), G) > tol_angle:
                return tuple(int(s) for s in w)
    return None
