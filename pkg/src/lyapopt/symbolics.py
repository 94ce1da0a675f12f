"""Subshifts of finite type: admissible words, necklaces and entropy.

Symbols are the integers ``1..k``. A word is a plain tuple of symbols; a
:class:`CyclicWord` is a primitive necklace stored as its lexicographically
least rotation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy.sparse import csr_matrix, identity
from scipy.sparse.csgraph import connected_components

from .errors import InputError, NumericError

Word = tuple  # tuple[int, ...]

ENTROPY_TOL = 1e-12
ENTROPY_MAX_ITER = 10**6
DENSE_LIMIT = 256  # graphs up to this size use dense storage in the Perron iteration


class TransitionMatrix:
    """A k x k 0/1 matrix of allowed transitions ``i -> j``.

    Every row and every column must contain a 1, i.e. every symbol can be
    preceded and followed by something.
    """

    __slots__ = ("_q",)

    def __init__(self, entries):
        q = np.array(entries, dtype=np.int8)
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] < 1:
            raise InputError(f"transition matrix must be square and non-empty, got shape {q.shape}")
        if not np.array_equal(np.asarray(entries, dtype=float), q.astype(float)) or np.any((q != 0) & (q != 1)):
            raise InputError("transition matrix entries must be exactly 0 or 1")
        if not q.any(axis=1).all() or not q.any(axis=0).all():
            raise InputError("every symbol needs at least one successor and one predecessor")
        q.setflags(write=False)
        self._q = q

    @classmethod
    def full(cls, k: int) -> "TransitionMatrix":
        return cls(np.ones((k, k), dtype=np.int8))

    @property
    def k(self) -> int:
        return self._q.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._q

    def allows(self, i: int, j: int) -> bool:
        return bool(self._q[i - 1, j - 1])

    def successors(self, i: int) -> list[int]:
        return [j + 1 for j in np.flatnonzero(self._q[i - 1])]

    def is_full(self) -> bool:
        return bool(self._q.all())

    def tolist(self) -> list[list[int]]:
        return self._q.astype(int).tolist()

    def __eq__(self, other):
        return isinstance(other, TransitionMatrix) and np.array_equal(self._q, other._q)

    def __hash__(self):
        return hash(self._q.tobytes())

    def __repr__(self):
        return f"TransitionMatrix({self.tolist()})"


def _check_symbols(w: Sequence[int], k: int) -> None:
    for s in w:
        if not 1 <= s <= k:
            raise InputError(f"symbol {s} out of range 1..{k}")


def is_admissible(w: Sequence[int], Q: TransitionMatrix) -> bool:
    _check_symbols(w, Q.k)
    q = Q.entries
    return all(q[a - 1, b - 1] for a, b in zip(w, w[1:]))


def is_cyclically_admissible(w: Sequence[int], Q: TransitionMatrix) -> bool:
    """Admissible including the wrap-around transition ``w[-1] -> w[0]``."""
    return is_admissible(w, Q) and bool(Q.entries[w[-1] - 1, w[0] - 1])


def enumerate_words(Q: TransitionMatrix, n: int) -> Iterator[Word]:
    """Yield every admissible word of length ``n`` in lexicographic order."""
    if n < 1:
        raise InputError("word length must be >= 1")
    succ = [Q.successors(i) for i in range(1, Q.k + 1)]
    word = [0] * n

    def extend(pos):
        if pos == n:
            yield tuple(word)
            return
        for s in (range(1, Q.k + 1) if pos == 0 else succ[word[pos - 1] - 1]):
            word[pos] = s
            yield from extend(pos + 1)

    yield from extend(0)


def word_count(Q: TransitionMatrix, n: int) -> int:
    """Number of admissible words of length n (sum of entries of Q^(n-1))."""
    q = Q.entries.astype(object)
    v = np.ones(Q.k, dtype=object)
    for _ in range(n - 1):
        v = q.dot(v)
    return int(sum(v))


def least_rotation(w: Sequence[int]) -> Word:
    w = tuple(w)
    return min(w[i:] + w[:i] for i in range(len(w)))


def primitive_root(w: Sequence[int]) -> Word:
    w = tuple(w)
    n = len(w)
    for p in range(1, n + 1):
        if n % p == 0 and w[:p] * (n // p) == w:
            return w[:p]
    return w


@dataclass(frozen=True, order=True)
class CyclicWord:
    """A periodic orbit of the shift, as a primitive necklace.

    Build instances with :meth:`of`, which rotates to the least
    representative and strips repetitions, so ``CyclicWord.of((2, 1, 2, 1))``
    equals ``CyclicWord.of((1, 2))``.
    """

    symbols: Word

    @classmethod
    def of(cls, symbols: Sequence[int]) -> "CyclicWord":
        if len(symbols) == 0:
            raise InputError("cyclic word must be non-empty")
        return cls(least_rotation(primitive_root(tuple(int(s) for s in symbols))))

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def rotations(self) -> list[Word]:
        s = self.symbols
        return [s[i:] + s[:i] for i in range(len(s))]

    def __str__(self):
        return word_str(self.symbols)


def word_str(w: Sequence[int]) -> str:
    """Compact text form: ``"121"`` for small alphabets, ``"1.12.3"`` otherwise."""
    if all(s < 10 for s in w):
        return "".join(str(s) for s in w)
    return ".".join(str(s) for s in w)


def parse_word(text: str) -> Word:
    if "." in text:
        return tuple(int(t) for t in text.split("."))
    return tuple(int(ch) for ch in text)


def _lyndon_words(k: int, n: int) -> Iterator[Word]:
    # Duval's generation: all Lyndon words of length <= n in lexicographic order.
    w = [0]
    while w:
        yield tuple(s + 1 for s in w)
        m = len(w)
        while len(w) < n:
            w.append(w[len(w) - m])
        while w and w[-1] == k - 1:
            w.pop()
        if w:
            w[-1] += 1


def enumerate_cyclic_words(Q: TransitionMatrix, n: int) -> Iterator[CyclicWord]:
    """Yield the cyclically admissible primitive necklaces of length 1..n.

    Ordered by length, then lexicographically.
    """
    if n < 1:
        raise InputError("necklace length must be >= 1")
    by_length: dict[int, list[Word]] = {}
    for w in _lyndon_words(Q.k, n):
        if is_cyclically_admissible(w, Q):
            by_length.setdefault(len(w), []).append(w)
    for length in range(1, n + 1):
        for w in by_length.get(length, ()):
            yield CyclicWord(w)


def dual_subshift(Q: TransitionMatrix) -> TransitionMatrix:
    """Reverse every arrow: ``a -> b`` becomes ``b -> a``."""
    return TransitionMatrix(Q.entries.T)


def _perron_root_irreducible(m: csr_matrix, tol: float, max_iter: int) -> float:
    # Power iteration on I + M, which is primitive when M is irreducible.
    # Collatz-Wielandt: min(Bx/x) <= rho(B) <= max(Bx/x) for positive x.
    size = m.shape[0]
    b = m + np.eye(size) if isinstance(m, np.ndarray) else (identity(size, format="csr") + m).tocsr()
    x = np.ones(size)
    lo = hi = float("nan")
    for _ in range(max_iter):
        y = b @ x
        ratios = y / x
        lo, hi = ratios.min(), ratios.max()
        if hi - lo <= tol * hi:
            return 0.5 * (lo + hi) - 1.0
        x = y / y.max()
    raise NumericError(
        f"Perron eigenvalue did not converge in {max_iter} iterations "
        f"(bracket [{lo - 1}, {hi - 1}])",
        last=x,
    )


def spectral_radius(adjacency, tol: float = ENTROPY_TOL, max_iter: int = ENTROPY_MAX_ITER) -> float:
    """Spectral radius of a non-negative square matrix.

    The radius of the whole matrix is the largest radius among its strongly
    connected components, so each component is iterated separately; this
    keeps power iteration geometric even when the matrix is reducible.
    """
    if isinstance(adjacency, TransitionMatrix):
        adjacency = adjacency.entries
    m = csr_matrix(np.asarray(adjacency, dtype=float)) if not hasattr(adjacency, "tocsr") else adjacency.tocsr().astype(float)
    if m.shape[0] == 0:
        return 0.0
    ncomp, labels = connected_components(m, directed=True, connection="strong")
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(ncomp + 1))
    # small graphs iterate faster as dense arrays than through sparse slicing
    dense = m.toarray() if m.shape[0] <= DENSE_LIMIT else None
    rho = 0.0
    for c in range(ncomp):
        idx = order[bounds[c]:bounds[c + 1]]
        sub = dense[np.ix_(idx, idx)] if dense is not None else m[idx][:, idx]
        nnz = int(np.count_nonzero(sub)) if dense is not None else sub.nnz
        if nnz == 0:
            continue
        if nnz == len(idx) and np.all(np.asarray(sub.sum(axis=1)) == 1):
            rho = max(rho, 1.0)  # a single cycle
            continue
        rho = max(rho, _perron_root_irreducible(sub, tol, max_iter))
    return rho


def topological_entropy(Q, tol: float = ENTROPY_TOL, max_iter: int = ENTROPY_MAX_ITER) -> float:
    """Entropy in nats: log of the Perron root of the transition graph.

    Graphs without cycles (empty shift) get entropy 0.
    """
    rho = spectral_radius(Q, tol, max_iter)
    if rho <= 1.0:
        return 0.0
    return math.log(rho)
