"""Extremal (Barabanov) norms for 2x2 cocycles on the full shift.

The unit ball is a centrally symmetric polygon. It is stored through its
vertices; the gauge is evaluated by locating the edge hit by the ray through
the query vector. The iteration works on the polar body, whose support
function is the gauge: pulling back the unit ball by all generators is the
same as taking the hull of ``A_i^T`` applied to the polar.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull

from ..cocycle import ExponentBracket, OneStepCocycle
from ..errors import InputError, NumericError
from ..projcone import angular_distance, act

DEFAULT_VERTICES = 720
DEFAULT_TOL = 1e-6
PLAIN_STEPS = 50


def _polygon_from_points(points: np.ndarray) -> np.ndarray:
    """Counter-clockwise hull vertices of ``points`` together with ``-points``."""
    pts = np.vstack([points, -points])
    verts = pts[ConvexHull(pts).vertices]
    # qhull may keep only one of a nearly collinear antipodal pair, so fold
    # every vertex into the upper half plane, merge near-duplicates, and
    # mirror back
    flip = (verts[:, 1] < 0) | ((verts[:, 1] == 0) & (verts[:, 0] < 0))
    verts = np.where(flip[:, None], -verts, verts) + 0.0  # drop signed zeros
    ang = np.arctan2(verts[:, 1], verts[:, 0])
    order = np.argsort(ang, kind="stable")
    verts, ang = verts[order], ang[order]
    eps = 1e-12 * np.abs(verts).max()
    keep = [0]
    for i in range(1, len(verts)):
        if np.abs(verts[i] - verts[keep[-1]]).max() > eps:
            keep.append(i)
    half = verts[keep]
    if len(half) > 1 and np.abs(half[-1] + half[0]).max() <= eps:
        half = half[:-1]
    return np.vstack([-half, half])


class _Gauge:
    """Minkowski functional of a polygon containing the origin in its interior."""

    def __init__(self, vertices: np.ndarray):
        v = np.asarray(vertices, float)
        nxt = np.roll(v, -1, axis=0)
        cross = v[:, 0] * nxt[:, 1] - v[:, 1] * nxt[:, 0]
        if np.any(cross <= 0):
            raise InputError("polygon must contain the origin strictly inside, vertices ordered counter-clockwise")
        self.angles = np.arctan2(v[:, 1], v[:, 0])
        if np.any(np.diff(self.angles) <= 0):
            raise InputError("vertices must be sorted by angle")
        # facet normal n_i with n_i . v_i = n_i . v_{i+1} = 1
        self.normals = np.column_stack([nxt[:, 1] - v[:, 1], v[:, 0] - nxt[:, 0]]) / cross[:, None]

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        phi = np.arctan2(x[..., 1], x[..., 0])
        idx = (np.searchsorted(self.angles, phi, side="right") - 1) % len(self.angles)
        n = self.normals[idx]
        return n[..., 0] * x[..., 0] + n[..., 1] * x[..., 1]


class PolygonalNorm:
    """Norm with a centrally symmetric polygonal unit ball."""

    kind = "polygon"

    def __init__(self, vertices, beta_hat: float = math.nan, iterations: int = 0,
                 converged: bool = True, residual_change: float = 0.0):
        v = np.asarray(vertices, float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 4 or len(v) % 2:
            raise InputError("need an even number (>= 4) of planar vertices")
        half = len(v) // 2
        scale = np.abs(v).max()
        if not np.allclose(v[half:], -v[:half], atol=1e-12 * scale, rtol=0):
            raise InputError("unit ball must be centrally symmetric")
        self._gauge = _Gauge(v)
        self.vertices = v
        self.beta_hat = float(beta_hat)
        self.iterations = iterations
        self.converged = converged
        self.residual_change = residual_change

    @classmethod
    def from_points(cls, points, **kw) -> "PolygonalNorm":
        """Unit ball = convex hull of ``points`` and their negatives."""
        return cls(_polygon_from_points(np.asarray(points, float)), **kw)

    def __call__(self, x) -> np.ndarray:
        return self._gauge(x)

    def operator_norms(self, mats) -> np.ndarray:
        """Induced norms of a stack of 2x2 matrices (max over ball vertices)."""
        mats = np.asarray(mats, float).reshape(-1, 2, 2)
        img = np.einsum("nij,vj->nvi", mats, self.vertices)
        return self._gauge(img).max(axis=1)

    def operator_norm(self, m) -> float:
        return float(self.operator_norms(m)[0])

    @property
    def r_max(self) -> float:
        return float(np.hypot(self.vertices[:, 0], self.vertices[:, 1]).max())

    @property
    def r_min(self) -> float:
        return float(1.0 / np.hypot(self._gauge.normals[:, 0], self._gauge.normals[:, 1]).max())

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "beta_hat": self.beta_hat,
            "iterations": self.iterations,
            "converged": self.converged,
            "n_vertices": len(self.vertices),
            "vertices": self.vertices.tolist(),
        }


class EuclideanNorm:
    """Exact extremal norm for cocycles whose generators are all conformal."""

    kind = "euclidean"
    r_min = 1.0
    r_max = 1.0

    def __init__(self, beta_hat: float = math.nan):
        self.beta_hat = float(beta_hat)
        self.iterations = 0
        self.converged = True
        self.residual_change = 0.0

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        return np.hypot(x[..., 0], x[..., 1])

    def operator_norms(self, mats) -> np.ndarray:
        return np.linalg.norm(np.asarray(mats, float).reshape(-1, 2, 2), ord=2, axis=(1, 2))

    def operator_norm(self, m) -> float:
        return float(self.operator_norms(m)[0])

    def to_dict(self) -> dict:
        return {"kind": self.kind, "beta_hat": self.beta_hat}


def common_eigendirection(A: OneStepCocycle, tol: float = 1e-9) -> Optional[float]:
    """A real direction fixed by every generator, if there is one."""
    candidates = None
    for g in A.generators:
        a, b, c, d = g.ravel()
        if abs(b) <= 1e-14 * np.abs(g).max() and abs(c) <= 1e-14 * np.abs(g).max() and math.isclose(a, d):
            continue  # scalar: fixes everything
        vals, vecs = np.linalg.eig(g)
        real = [math.atan2(vecs[1, i].real, vecs[0, i].real) % math.pi
                for i in range(2) if abs(vals[i].imag) <= 1e-14 * abs(vals[i])]
        candidates = real
        break
    if candidates is None:
        return 0.0  # all generators scalar
    for theta in candidates:
        if all(angular_distance(act(g, theta), theta) <= tol for g in A.generators):
            return theta
    return None


def _is_conformal(g: np.ndarray, tol: float = 1e-12) -> bool:
    gtg = g.T @ g
    c2 = 0.5 * np.trace(gtg)
    return bool(np.abs(gtg - c2 * np.eye(2)).max() <= tol * c2)


def _radial(gauge: _Gauge, dirs: np.ndarray) -> np.ndarray:
    return 1.0 / gauge(dirs)


def barabanov_norm(
    A: OneStepCocycle,
    bracket: Optional[ExponentBracket] = None,
    m_vertices: int = DEFAULT_VERTICES,
    tol: float = DEFAULT_TOL,
    max_iter: int = 10**4,
    require_irreducible: bool = True,
):
    """Approximate an extremal norm by normalized iteration on the polar body.

    Each step replaces the polar ``P`` by the hull of ``U_i A_i^T P``,
    rescales it to unit maximal radius and decimates it to its
    ``m_vertices`` sharpest corners. After a run of plain steps each new polar
    is averaged (Minkowski) with the previous one to damp oscillation. The
    loop stops once the radial
    functions of two consecutive unit balls differ by at most ``tol`` (this
    bounds their Hausdorff distance).

    The returned ``beta_hat`` is then the value minimizing the extremal
    residual of the final polygon over a fine grid. If a ``bracket`` is given
    and ``beta_hat`` falls outside it by more than ``tol`` plus the
    resampling error, a :class:`NumericError` is raised.
    """
    if not A.transitions.is_full():
        raise InputError("extremal norms are only built for the full shift")
    if m_vertices < 8 or m_vertices % 2:
        raise InputError("m_vertices must be an even number >= 8")
    if require_irreducible and common_eigendirection(A) is not None:
        raise InputError("generators share a real eigendirection (reducible); no extremal norm is built")
    if all(_is_conformal(g) for g in A.generators):
        beta = max(0.5 * math.log(abs(np.linalg.det(g))) for g in A.generators)
        norm = EuclideanNorm(beta)
        _check_bracket(norm.beta_hat, bracket, tol)
        return norm

    phis = 2.0 * math.pi * np.arange(m_vertices) / m_vertices
    dirs = np.column_stack([np.cos(phis), np.sin(phis)])
    polar = _polygon_from_points(dirs)
    prev_ball = np.ones(m_vertices)
    change = math.inf
    plain_budget = min(max_iter, PLAIN_STEPS)
    it = 0
    for it in range(1, max_iter + 1):
        image = _polygon_from_points(np.vstack([polar @ g for g in A.generators]))  # rows a^T A_i
        image /= np.hypot(image[:, 0], image[:, 1]).max()
        if it > plain_budget:
            # averaging with the previous polar (i.e. averaging the two norms)
            # keeps the fixed point and damps period-2 oscillations
            image = _polygon_from_points(0.5 * _minkowski_sum(polar, image))
            image /= np.hypot(image[:, 0], image[:, 1]).max()
        polar = _decimate(image, m_vertices)
        ball = _radial(_Gauge(_polar_vertices(polar)), dirs)
        change = float(np.abs(ball - prev_ball).max())
        prev_ball = ball
        if change <= tol:
            break
    norm = PolygonalNorm(_polar_vertices(polar), iterations=it, converged=change <= tol, residual_change=change)
    lo, hi = _log_ratio_range(norm, A, 4 * m_vertices)
    norm.beta_hat = 0.5 * (lo + hi)
    _check_bracket(norm.beta_hat, bracket, tol + (2.0 * math.pi / m_vertices) ** 2)
    return norm


def _decimate(verts: np.ndarray, m: int) -> np.ndarray:
    """Keep the ``m`` sharpest corners of a symmetric polygon (output of
    :func:`_polygon_from_points`); the result is inscribed in the input."""
    if len(verts) <= m:
        return verts
    h = len(verts) // 2
    e_in = verts - np.roll(verts, 1, axis=0)
    e_out = np.roll(verts, -1, axis=0) - verts
    turn = np.arctan2(e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0], (e_in * e_out).sum(axis=1))
    keep = np.sort(np.argsort(-turn[h:], kind="stable")[: m // 2]) + h
    half = verts[keep]
    return np.vstack([-half, half])


def _minkowski_sum(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Vertices of P + Q for convex counter-clockwise polygons (edge merge)."""
    def edges_from_bottom(v):
        i = np.lexsort((v[:, 0], v[:, 1]))[0]
        v = np.roll(v, -i, axis=0)
        e = np.roll(v, -1, axis=0) - v
        return v[0], e, np.arctan2(e[:, 1], e[:, 0]) % (2.0 * math.pi)

    p0, ep, ap = edges_from_bottom(p)
    q0, eq, aq = edges_from_bottom(q)
    e = np.vstack([ep, eq])
    order = np.argsort(np.concatenate([ap, aq]), kind="stable")
    pts = p0 + q0 + np.vstack([np.zeros((1, 2)), np.cumsum(e[order], axis=0)[:-1]])
    return pts


def _polar_vertices(polar: np.ndarray) -> np.ndarray:
    """Vertices of the body whose polar has the given (ccw, symmetric) vertices."""
    g = _Gauge(_polygon_from_points(polar))
    n = g.normals
    return _polygon_from_points(n)


def _check_bracket(beta_hat: float, bracket: Optional[ExponentBracket], slack: float) -> None:
    if bracket is None:
        return
    if not (bracket.lower - slack <= beta_hat <= bracket.upper + slack):
        raise NumericError(
            f"beta_hat {beta_hat!r} outside the bracket [{bracket.lower!r}, {bracket.upper!r}]",
            last=beta_hat,
        )


def _grid_unit_vectors(norm, n_grid: int) -> np.ndarray:
    phis = math.pi * np.arange(n_grid) / n_grid
    d = np.column_stack([np.cos(phis), np.sin(phis)])
    return d / norm(d)[:, None]


def _log_ratio_range(norm, A: OneStepCocycle, n_grid: int) -> tuple[float, float]:
    u = _grid_unit_vectors(norm, n_grid)
    best = np.max([norm(u @ g.T) for g in A.generators], axis=0)
    logs = np.log(best)
    return float(logs.min()), float(logs.max())


def extremal_residual(norm, A: OneStepCocycle, n_grid: int = DEFAULT_VERTICES) -> float:
    """max over unit vectors u of | log max_i |||A_i u||| - beta_hat |."""
    lo, hi = _log_ratio_range(norm, A, n_grid)
    return max(abs(lo - norm.beta_hat), abs(hi - norm.beta_hat))


def norm_equivalence_constant(norm) -> float:
    """Smallest C with |x|/C <= |||x||| <= C |x|."""
    return max(norm.r_max, 1.0 / norm.r_min)
