"""Brute-force reference computations, written without the package's own helpers."""
import itertools
import math

import numpy as np


def all_words(k, n):
    return list(itertools.product(range(1, k + 1), repeat=n))


def admissible_words(q, n):
    q = np.asarray(q)
    return [w for w in all_words(len(q), n) if all(q[a - 1, b - 1] for a, b in zip(w, w[1:]))]


def necklaces(q, n):
    """Primitive cyclically admissible necklaces of exact length n, as least rotations."""
    q = np.asarray(q)
    out = set()
    for w in all_words(len(q), n):
        if not all(q[a - 1, b - 1] for a, b in zip(w, w[1:] + w[:1])):
            continue
        rots = [w[i:] + w[:i] for i in range(n)]
        if len(set(rots)) < n:
            continue  # a power of a shorter word
        out.add(min(rots))
    return sorted(out)


def entropy(q):
    rho = max(abs(np.linalg.eigvals(np.asarray(q, dtype=float))))
    return math.log(rho) if rho > 1 + 1e-12 else 0.0


def entropy_accuracy(q, base=1e-9):
    """How far :func:`entropy` can be off: an eigenvalue in a j-fold cluster
    (a Jordan block, typically) is only eps**(1/j)-accurate."""
    vals = np.linalg.eigvals(np.asarray(q, dtype=float))
    rho = max(abs(vals))
    j = int(np.sum(abs(vals - rho) <= 1e-3 * max(rho, 1.0)))
    return base if j <= 1 else max(base, 10 * np.finfo(float).eps ** (1.0 / j))


def product(mats, w):
    p = np.eye(2)
    for s in w:
        p = np.asarray(mats[s - 1], dtype=float) @ p
    return p


def spectral_radius(m):
    return max(abs(np.linalg.eigvals(m)))


def beta_upper(mats, n, q=None):
    q = np.ones((len(mats), len(mats))) if q is None else q
    return max(math.log(np.linalg.norm(product(mats, w), 2)) / n for w in admissible_words(q, n))


def beta_lower(mats, n, q=None):
    q = np.ones((len(mats), len(mats))) if q is None else q
    best = -math.inf
    for length in range(1, n + 1):
        for w in necklaces(q, length):
            best = max(best, math.log(spectral_radius(product(mats, w))) / length)
    return best


def direction(theta):
    return np.array([math.cos(theta), math.sin(theta)])


def proj_angle(v):
    return math.atan2(v[1], v[0]) % math.pi


def in_arc(theta, start, length, slack=0.0):
    return (theta - start + slack) % math.pi <= length + 2 * slack


def sampled_image(m, start, length, samples=2001):
    """Angles of m applied to directions sampled along the arc."""
    return [proj_angle(m @ direction(start + length * t)) for t in np.linspace(0.0, 1.0, samples)]


def kappa(mats, n):
    """min ||A_uv|| / (||A_u|| ||A_v||) over all words u, v of length <= n."""
    norm = lambda w: np.linalg.norm(product(mats, w), 2)
    words = [w for m in range(1, n + 1) for w in all_words(len(mats), m)]
    norms = {w: norm(w) for w in words}
    return min(norm(u + v) / (norms[u] * norms[v]) for u in words for v in words)


def polygon_gauge(vertices):
    """Gauge of the convex hull of ``vertices`` as a max over its facets."""
    from scipy.spatial import ConvexHull

    eq = ConvexHull(np.asarray(vertices, float)).equations
    normals = eq[:, :2] / -eq[:, 2:3]  # facet n.x = 1
    return lambda x: float(np.max(normals @ np.asarray(x, float)))


def overlap_entropy(words):
    """Entropy of the graph on ``words`` with u -> v when u[1:] == v[:-1]."""
    words = list(words)
    index = {w: i for i, w in enumerate(words)}
    adj = np.zeros((len(words), len(words)))
    for w in words:
        for s in {x[-1] for x in words}:
            nxt = w[1:] + (s,)
            if nxt in index:
                adj[index[w], index[nxt]] = 1
    return entropy(adj), entropy_accuracy(adj)
