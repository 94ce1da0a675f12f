"""Additive potentials that reproduce the top exponent of a dominated cocycle."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from ..cocycle import OneStepCocycle, all_word_products, log_word_product, periodic_exponent
from ..errors import InputError
from ..projcone import DEFAULT_MARGIN, Multicone, act, image_arc, is_strictly_forward_invariant, unit
from ..symbolics import CyclicWord, enumerate_cyclic_words, enumerate_words, word_str


@dataclass
class AdditivePotential:
    """A locally constant potential depending on ``window`` consecutive symbols.

    ``table[w]`` is the value at any point whose symbols ``x_{-m+1} .. x_0``
    spell ``w`` (oldest first, current symbol last). ``contraction`` is the
    measured projective contraction rate per step; the window error decays
    like ``contraction ** window``.
    """

    window: int
    table: dict
    contraction: float = math.nan

    def __call__(self, w: Sequence[int]) -> float:
        try:
            return self.table[tuple(w)]
        except KeyError:
            raise InputError(f"no potential value for window {tuple(w)}") from None

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "contraction": self.contraction,
            "table": {word_str(w): v for w, v in sorted(self.table.items())},
        }


def _reference_direction(A: OneStepCocycle, symbol: int, mc: Multicone) -> float:
    vals, vecs = np.linalg.eig(A[symbol])
    i = int(np.argmax(np.abs(vals)))
    if abs(vals[i].imag) == 0 and abs(vals[i]) > abs(vals[1 - i]):
        theta = math.atan2(vecs[1, i].real, vecs[0, i].real)
        if mc.contains(theta):
            return theta
    return mc.arcs[0].midpoint


def _contraction(A: OneStepCocycle, mc: Multicone, L: int) -> float:
    wp = all_word_products(A, L)
    widest = max(a.length for a in mc.arcs)
    worst = max(image_arc(m, a).length for m in wp.mats for a in mc.arcs)
    return (worst / widest) ** (1.0 / L)


def cuneo_potential(A: OneStepCocycle, mc: Multicone, m: int, delta: float = DEFAULT_MARGIN) -> AdditivePotential:
    """Potential ``f(w) = log |A_{w_m} v| / |v|`` with ``v`` the direction
    reached by pushing a reference direction through ``w_1 .. w_{m-1}``.

    The reference is the dominant eigendirection of ``A_{w_1}`` when it is
    real and lies in ``mc``; otherwise the midpoint of the first arc.
    """
    if m < 1:
        raise InputError("window length must be >= 1")
    if not is_strictly_forward_invariant(A, mc, delta):
        raise InputError("cocycle is not dominated with respect to this multicone")
    table = {}
    refs = {s: _reference_direction(A, s, mc) for s in range(1, A.k + 1)}
    for w in enumerate_words(A.transitions, m):
        theta = refs[w[0]]
        if m > 1:
            p, _ = log_word_product(A, w[:-1])
            theta = act(p, theta)
        table[w] = math.log(float(np.linalg.norm(A[w[-1]] @ unit(theta))))
    return AdditivePotential(m, table, _contraction(A, mc, max(m - 1, 1)))


def _windows(f: AdditivePotential, w: Union[CyclicWord, Sequence[int]], start: int, length: Optional[int]):
    m = f.window
    if isinstance(w, CyclicWord):
        s = w.symbols
        n = len(s)
        count = n if length is None else length
        for t in range(start, start + count):
            yield tuple(s[(t - m + 1 + j) % n] for j in range(m))
    else:
        s = tuple(w)
        if len(s) < m:
            raise InputError(f"word of length {len(s)} is shorter than the window {m}")
        first = m - 1 + start
        last = len(s) if length is None else first + length
        if last > len(s) or first < m - 1:
            raise InputError("requested range runs past the word")
        for t in range(first, last):
            yield s[t - m + 1 : t + 1]


def birkhoff_sum(
    f: AdditivePotential,
    w: Union[CyclicWord, Sequence[int]],
    start: int = 0,
    length: Optional[int] = None,
) -> float:
    """Sum of ``f`` along ``length`` consecutive positions starting at ``start``.

    For a :class:`CyclicWord` positions wrap around, so the default sums one
    full period. For a plain word the positions are those whose whole window
    fits in the word (``len(w) - window + 1`` of them by default).
    """
    return math.fsum(f(u) for u in _windows(f, w, start, length))


def potential_defect(A: OneStepCocycle, f: AdditivePotential, L: int = 8) -> float:
    """max over necklaces of length <= L of |periodic exponent - periodic average of f|."""
    worst = 0.0
    for c in enumerate_cyclic_words(A.transitions, L):
        worst = max(worst, abs(periodic_exponent(A, c) - birkhoff_sum(f, c) / len(c)))
    return worst
