"""One-step GL(2,R) cocycles: word products, singular values, exponent brackets.

A word ``w = (w_1, ..., w_n)`` acts by ``A_w = A_{w_n} ... A_{w_1}``: the first
symbol is applied first, so appending a symbol multiplies on the left.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InputError
from .symbolics import (
    CyclicWord,
    TransitionMatrix,
    enumerate_cyclic_words,
    is_admissible,
)

DET_TOL = 1e-14
TIE_TOL = 1e-12


def as_mat2(m) -> np.ndarray:
    """Coerce a 2x2 nested list or a row-major 4-vector into a float matrix."""
    a = np.asarray(m, dtype=float)
    if a.shape == (4,):
        a = a.reshape(2, 2)
    if a.shape != (2, 2):
        raise InputError(f"expected a 2x2 matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix entries must be finite")
    return a


def is_invertible(m: np.ndarray) -> bool:
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return abs(det) > DET_TOL * float(np.sum(m * m))


@dataclass(frozen=True, eq=False)
class OneStepCocycle:
    """Generators ``A_1..A_k`` over the subshift given by ``transitions``."""

    generators: tuple
    transitions: TransitionMatrix = None

    def __post_init__(self):
        gens = tuple(as_mat2(g) for g in self.generators)
        if not gens:
            raise InputError("a cocycle needs at least one generator")
        for i, g in enumerate(gens, 1):
            if not is_invertible(g):
                raise InputError(f"generator {i} is singular")
            g.setflags(write=False)
        object.__setattr__(self, "generators", gens)
        q = self.transitions
        if q is None:
            q = TransitionMatrix.full(len(gens))
        elif not isinstance(q, TransitionMatrix):
            q = TransitionMatrix(q)
        if q.k != len(gens):
            raise InputError(f"transition matrix is {q.k}x{q.k} but there are {len(gens)} generators")
        object.__setattr__(self, "transitions", q)

    @property
    def k(self) -> int:
        return len(self.generators)

    def __getitem__(self, symbol: int) -> np.ndarray:
        return self.generators[symbol - 1]

    def inverse(self) -> "OneStepCocycle":
        """Inverse generators over the same transition matrix."""
        return OneStepCocycle(tuple(np.linalg.inv(g) for g in self.generators), self.transitions)

    def scaled(self, s: float) -> "OneStepCocycle":
        return OneStepCocycle(tuple(s * g for g in self.generators), self.transitions)

    def __repr__(self):
        gens = ", ".join(str(g.tolist()) for g in self.generators)
        return f"OneStepCocycle([{gens}], transitions={self.transitions.tolist()})"


# -- products -----------------------------------------------------------------

def _renormalized_product(A: OneStepCocycle, w: Sequence[int]) -> tuple[np.ndarray, float]:
    # Returns (M, s) with A_w = exp(s) * M and max|M_ij| = 1.
    m = np.eye(2)
    log_scale = 0.0
    for s in w:
        m = A[s] @ m
        top = np.abs(m).max()
        m = m / top
        log_scale += math.log(top)
    return m, log_scale


def word_product(A: OneStepCocycle, w: Sequence[int]) -> np.ndarray:
    if len(w) == 0:
        raise InputError("empty word")
    if not is_admissible(w, A.transitions):
        raise InputError(f"word {tuple(w)} is not admissible")
    m = np.eye(2)
    for s in w:
        m = A[s] @ m
    return m


def log_word_product(A: OneStepCocycle, w: Sequence[int]) -> tuple[np.ndarray, float]:
    """``(M, s)`` with ``A_w = e^s M``; safe for arbitrarily long words."""
    if len(w) == 0:
        raise InputError("empty word")
    if not is_admissible(w, A.transitions):
        raise InputError(f"word {tuple(w)} is not admissible")
    return _renormalized_product(A, w)


def log_abs_det(A: OneStepCocycle, w: Sequence[int]) -> float:
    """log|det A_w| as a sum over symbols, exact up to rounding of each term."""
    return math.fsum(math.log(abs(float(np.linalg.det(A[s])))) for s in w)


def singular_values(m) -> tuple[float, float]:
    """``(sigma_1, sigma_2)`` of a 2x2 matrix in closed form.

    sigma_1 = (|z1| + |z2|)/2 where M = [[a, b], [c, d]] and
    z1 = (a + d) + i(c - b), z2 = (a - d) + i(c + b); sigma_2 = |det|/sigma_1.
    """
    a, b, c, d = float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1])
    s1 = 0.5 * (math.hypot(a + d, c - b) + math.hypot(a - d, c + b))
    if s1 == 0.0:
        return 0.0, 0.0
    return s1, abs(a * d - b * c) / s1


def operator_norm(m) -> float:
    return singular_values(m)[0]


def spectral_radius2(m) -> float:
    tr = float(m[0, 0] + m[1, 1])
    det = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    # tr^2/4 - det written without the cancellation near a double eigenvalue
    half_gap = 0.5 * float(m[0, 0] - m[1, 1])
    disc = half_gap * half_gap + float(m[0, 1] * m[1, 0])
    if disc >= 0:
        return 0.5 * abs(tr) + math.sqrt(disc)
    return math.sqrt(det)  # complex pair: |lambda|^2 = det


def periodic_exponent(A: OneStepCocycle, c) -> float:
    """Top Lyapunov exponent of the periodic orbit of ``c``: log rho(A_c) / |c|.

    The value depends only on the orbit, so it is evaluated on the canonical
    necklace; rotations and powers of ``c`` give bit-identical results even
    near a double eigenvalue, where the spectral radius is ill-conditioned.
    """
    word = tuple(c)
    if not is_admissible(word + word[:1], A.transitions):
        raise InputError(f"{word} is not cyclically admissible")
    word = CyclicWord.of(word).symbols
    m, log_scale = _renormalized_product(A, word)
    return (math.log(spectral_radius2(m)) + log_scale) / len(word)


# -- batched products over all admissible words ------------------------------

@dataclass
class WordProducts:
    """All admissible words of one length with their renormalized products.

    ``mats[j]`` times ``exp(log_scale[j])`` is the product of ``words[j]``.
    Rows are in lexicographic order of the words.
    """

    words: np.ndarray  # (N, n) int, symbols 1..k
    mats: np.ndarray  # (N, 2, 2)
    log_scale: np.ndarray  # (N,)
    log_det: np.ndarray  # (N,) log|det|, summed per symbol (no cancellation)

    def log_norms(self) -> np.ndarray:
        return _batched_log_sigma1(self.mats) + self.log_scale

    def log_dets(self) -> np.ndarray:
        return self.log_det


def _batched_log_sigma1(m: np.ndarray) -> np.ndarray:
    a, b, c, d = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
    return np.log(0.5 * (np.hypot(a + d, c - b) + np.hypot(a - d, c + b)))


def _generator_log_dets(A: OneStepCocycle) -> np.ndarray:
    return np.array([math.log(abs(float(np.linalg.det(g)))) for g in A.generators])


def first_products(A: OneStepCocycle) -> WordProducts:
    gens = np.stack(A.generators)
    top = np.abs(gens).reshape(A.k, -1).max(axis=1)
    return WordProducts(
        words=np.arange(1, A.k + 1).reshape(-1, 1),
        mats=gens / top[:, None, None],
        log_scale=np.log(top),
        log_det=_generator_log_dets(A),
    )


def extend_products(A: OneStepCocycle, prev: WordProducts) -> WordProducts:
    """Append every admissible symbol to every word, keeping lexicographic order."""
    gens = np.stack(A.generators)
    q = A.transitions.entries.astype(bool)
    last = prev.words[:, -1] - 1
    allowed = q[last]  # (N, k)
    rows, syms = np.nonzero(allowed)  # row-major: lexicographic
    mats = np.einsum("nij,njk->nik", gens[syms], prev.mats[rows])
    top = np.abs(mats).reshape(len(rows), -1).max(axis=1)
    return WordProducts(
        words=np.hstack([prev.words[rows], (syms + 1).reshape(-1, 1)]),
        mats=mats / top[:, None, None],
        log_scale=prev.log_scale[rows] + np.log(top),
        log_det=prev.log_det[rows] + _generator_log_dets(A)[syms],
    )


def iter_word_products(A: OneStepCocycle, n_max: int):
    """Yield :class:`WordProducts` for lengths 1..n_max."""
    wp = first_products(A)
    yield wp
    for _ in range(n_max - 1):
        wp = extend_products(A, wp)
        yield wp


def all_word_products(A: OneStepCocycle, n: int) -> WordProducts:
    if n < 1:
        raise InputError("word length must be >= 1")
    for wp in iter_word_products(A, n):
        pass
    return wp


# -- brackets -----------------------------------------------------------------

def beta_upper(A: OneStepCocycle, n: int) -> float:
    """(1/n) log of the largest norm among admissible n-words; >= beta(A)."""
    return float(all_word_products(A, n).log_norms().max()) / n


def _necklace_exponents(A: OneStepCocycle, L: int) -> list[tuple[CyclicWord, float]]:
    return [(c, periodic_exponent(A, c.symbols)) for c in enumerate_cyclic_words(A.transitions, L)]


def beta_lower(A: OneStepCocycle, n: int) -> tuple[float, CyclicWord]:
    """Best periodic exponent over necklaces of length <= n, with its orbit.

    The witness is the first maximizer in (length, lexicographic) order; use
    :func:`lyapopt.mather.maximizing_orbits` for every tied orbit.
    """
    if n < 1:
        raise InputError("length must be >= 1")
    scored = _necklace_exponents(A, n)
    if not scored:
        raise InputError(f"no cyclically admissible words of length <= {n}")
    best = max(v for _, v in scored)
    witness = next(c for c, v in scored if v >= best - TIE_TOL)
    return best, witness


@dataclass(frozen=True)
class ExponentBracket:
    lower: float
    upper: float
    n_lower: int
    n_upper: int
    witness: Optional[CyclicWord] = None

    def __post_init__(self):
        if self.lower > self.upper + 1e-12:
            raise InputError(f"bracket lower {self.lower} exceeds upper {self.upper}")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "n_lower": self.n_lower,
            "n_upper": self.n_upper,
            "witness": str(self.witness) if self.witness is not None else None,
        }


def beta_bracket(A: OneStepCocycle, n_lower: int, n_upper: Optional[int] = None) -> ExponentBracket:
    """Bracket beta(A) using necklaces up to ``n_lower`` and words up to ``n_upper``.

    The upper end is the running minimum of :func:`beta_upper` over 1..n_upper.
    """
    n_upper = n_lower if n_upper is None else n_upper
    lower, witness = beta_lower(A, n_lower)
    best_up, best_n = math.inf, 0
    for n, wp in enumerate(iter_word_products(A, n_upper), 1):
        up = float(wp.log_norms().max()) / n
        if up < best_up:
            best_up, best_n = up, n
    # the two ends come from different formulas; clip rounding-level crossings
    upper = lower if lower - 1e-12 <= best_up < lower else best_up
    return ExponentBracket(lower, upper, n_lower, best_n, witness)


@dataclass(frozen=True)
class AlphaEstimate:
    """Two-sided information about the minimal exponent alpha(A).

    ``periodic_upper`` is a certified upper bound (alpha <= every periodic
    exponent). ``norm_heuristic`` is (1/n) log min_w ||A_w||, which is only a
    heuristic: it is not a certified lower bound.
    """

    periodic_upper: float
    norm_heuristic: float
    n: int
    witness: CyclicWord

    def to_dict(self) -> dict:
        return {
            "periodic_upper": self.periodic_upper,
            "norm_heuristic": self.norm_heuristic,
            "n": self.n,
            "witness": str(self.witness),
        }


def alpha_bounds(A: OneStepCocycle, n: int) -> AlphaEstimate:
    if n < 1:
        raise InputError("length must be >= 1")
    scored = _necklace_exponents(A, n)
    low = min(v for _, v in scored)
    witness = next(c for c, v in scored if v <= low + TIE_TOL)
    heuristic = float(all_word_products(A, n).log_norms().min()) / n
    return AlphaEstimate(low, heuristic, n, witness)


# -- almost multiplicativity ---------------------------------------------------

def almost_multiplicativity_constant(
    A: OneStepCocycle,
    n: int,
    max_pairs: int = 2**22,
    seed: int = 0,
) -> float:
    """min ||A_{uv}|| / (||A_u|| ||A_v||) over admissible u, v with |u|, |v| <= n.

    ``uv`` is u followed by v, so ``A_{uv} = A_v A_u``. Exhaustive while the
    number of pairs is at most ``max_pairs``; beyond that a fixed-seed uniform
    sample of ``max_pairs`` pairs is used.
    """
    if n < 1:
        raise InputError("length must be >= 1")
    levels = list(iter_word_products(A, n))
    mats = np.concatenate([wp.mats for wp in levels])
    scale = np.concatenate([wp.log_scale for wp in levels])
    first = np.concatenate([wp.words[:, 0] for wp in levels]) - 1
    last = np.concatenate([wp.words[:, -1] for wp in levels]) - 1
    log_norm = _batched_log_sigma1(mats) + scale
    q = A.transitions.entries.astype(bool)
    size = len(mats)
    total = size * size
    best = math.inf
    if total <= max_pairs:
        chunk = max(1, 2**20 // size)
        for start in range(0, size, chunk):
            iu = np.arange(start, min(size, start + chunk))
            ui, vi = np.meshgrid(iu, np.arange(size), indexing="ij")
            ui, vi = ui.ravel(), vi.ravel()
            ok = q[last[ui], first[vi]]
            best = min(best, _pair_ratio_min(mats, scale, log_norm, ui[ok], vi[ok]))
    else:
        rng = np.random.default_rng(seed)
        ui = rng.integers(0, size, max_pairs)
        vi = rng.integers(0, size, max_pairs)
        ok = q[last[ui], first[vi]]
        best = _pair_ratio_min(mats, scale, log_norm, ui[ok], vi[ok])
    return float(math.exp(best))


def _pair_ratio_min(mats, scale, log_norm, ui, vi) -> float:
    if len(ui) == 0:
        return math.inf
    prod = np.einsum("nij,njk->nik", mats[vi], mats[ui])
    log_uv = _batched_log_sigma1(prod) + scale[ui] + scale[vi]
    return float(np.min(log_uv - log_norm[ui] - log_norm[vi]))
