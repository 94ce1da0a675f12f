"""Geometry of the projective line: directions, arcs, multicones, NOC checks.

A direction is an angle in [0, pi); theta and theta + pi are the same line.
An :class:`Arc` runs counter-clockwise from ``start`` for ``length`` radians
and may wrap past pi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InputError, NumericError
from .symbolics import TransitionMatrix, dual_subshift

PI = math.pi
TOL_ANGLE = 1e-9
DEFAULT_MARGIN = 1e-6
MERGE_TOL = 1e-12


def normalize_angle(theta: float) -> float:
    t = math.fmod(theta, PI)
    if t < 0:
        t += PI
    if t >= PI:
        t = 0.0
    return t


def angle_of(v) -> float:
    return normalize_angle(math.atan2(float(v[1]), float(v[0])))


def unit(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def angular_distance(a: float, b: float) -> float:
    d = abs(a - b) % PI
    return min(d, PI - d)


def ccw_offset(frm: float, to: float) -> float:
    """Counter-clockwise travel from ``frm`` to ``to`` on the circle of length pi."""
    d = (to - frm) % PI
    return 0.0 if d >= PI else d


def act(M, theta: float) -> float:
    """Projective action: the direction of ``M (cos theta, sin theta)``."""
    c, s = math.cos(theta), math.sin(theta)
    return normalize_angle(math.atan2(M[1, 0] * c + M[1, 1] * s, M[0, 0] * c + M[0, 1] * s))


@dataclass(frozen=True)
class Arc:
    start: float
    length: float

    def __post_init__(self):
        if not (0.0 < self.length < PI):
            raise InputError(f"arc length must lie in (0, pi), got {self.length}")
        object.__setattr__(self, "start", normalize_angle(self.start))

    @classmethod
    def between(cls, a: float, b: float) -> "Arc":
        """The arc from ``a`` counter-clockwise to ``b``."""
        return cls(a, ccw_offset(a, b))

    @property
    def end(self) -> float:
        return self.start + self.length

    @property
    def midpoint(self) -> float:
        return normalize_angle(self.start + 0.5 * self.length)

    def contains(self, theta: float, margin: float = 0.0) -> bool:
        off = ccw_offset(self.start, theta)
        return margin <= off <= self.length - margin

    def clearance_inside(self, inner: "Arc") -> float:
        """Smallest gap between ``inner`` and the ends of this arc.

        Negative when ``inner`` is not contained.
        """
        off = ccw_offset(self.start, inner.start)
        # inner starting just before self.start shows up with off close to pi
        if off > self.length:
            off -= PI
        return min(off, self.length - off - inner.length)

    def to_list(self) -> list[float]:
        return [self.start, self.length]


def arc_separation(a: Arc, b: Arc) -> float:
    """Angular gap between two arcs; negative when their closures intersect."""
    g1 = ccw_offset(a.start, b.start) - a.length
    g2 = ccw_offset(b.start, a.start) - b.length
    return min(g1, g2)


def image_arc(M, a: Arc, tol: float = TOL_ANGLE) -> Arc:
    """Image of an arc under the projective action of ``M``.

    The image is the arc between the endpoint images that contains the image
    of the midpoint; this also handles orientation-reversing ``M``.
    """
    p = act(M, a.start)
    q = act(M, a.end)
    mid = act(M, a.start + 0.5 * a.length)
    forward = ccw_offset(p, q)
    if ccw_offset(p, mid) <= forward:
        start, length = p, forward
    else:
        start, length = q, PI - forward
    if length >= PI - tol or length <= 0.0:
        raise NumericError(f"degenerate arc image (length {length})", last=(start, length))
    return Arc(start, length)


def union_arcs(arcs: Iterable[Arc], merge_tol: float = MERGE_TOL) -> tuple[list[Arc], bool]:
    """Merge overlapping or touching arcs.

    Returns the disjoint arcs sorted by start and whether any merge happened.
    Raises :class:`NumericError` if the union covers the whole circle.
    """
    spans = sorted((a.start, a.end) for a in arcs)
    if not spans:
        return [], False
    merged_any = False
    out = [list(spans[0])]
    for s, e in spans[1:]:
        if s <= out[-1][1] + merge_tol:
            out[-1][1] = max(out[-1][1], e)
            merged_any = True
        else:
            out.append([s, e])
    # wrap-around: the last span may reach into the first ones
    while len(out) > 1 and out[-1][1] + merge_tol >= out[0][0] + PI:
        s0, e0 = out.pop(0)
        out[-1][1] = max(out[-1][1], e0 + PI)
        merged_any = True
    result = []
    for s, e in out:
        if e - s >= PI - merge_tol:
            raise NumericError("arcs cover the whole projective line", last=out)
        result.append(Arc(s, e - s))
    result.sort(key=lambda a: a.start)
    return result, merged_any


@dataclass(frozen=True)
class Multicone:
    """Finitely many arcs with pairwise disjoint closures, sorted by start."""

    arcs: tuple
    merged: bool = field(default=False, compare=False)

    def __post_init__(self):
        arcs = tuple(sorted(self.arcs, key=lambda a: a.start))
        if not arcs:
            raise InputError("a multicone needs at least one arc")
        if len(arcs) > 1:
            gaps = _consecutive_gaps(arcs)
            if min(gaps) <= 0.0:
                raise InputError("multicone arcs must have disjoint closures")
        elif arcs[0].length >= PI:
            raise InputError("a multicone cannot be the whole projective line")
        object.__setattr__(self, "arcs", arcs)

    @classmethod
    def from_list(cls, pairs: Sequence[Sequence[float]]) -> "Multicone":
        """Build from ``[[start, length], ...]`` in radians."""
        return cls(tuple(Arc(float(s), float(l)) for s, l in pairs))

    @classmethod
    def from_endpoints(cls, pairs: Sequence[Sequence[float]]) -> "Multicone":
        """Build from ``[[start, end], ...]``; arcs run counter-clockwise."""
        return cls(tuple(Arc.between(float(s), float(e)) for s, e in pairs))

    def to_list(self) -> list[list[float]]:
        return [a.to_list() for a in self.arcs]

    def contains(self, theta: float, margin: float = 0.0) -> bool:
        return any(a.contains(theta, margin) for a in self.arcs)

    @property
    def total_length(self) -> float:
        return sum(a.length for a in self.arcs)

    def __len__(self):
        return len(self.arcs)

    def close_to(self, other: "Multicone", tol: float) -> bool:
        if len(self) != len(other):
            return False
        return all(
            angular_distance(a.start, b.start) <= tol and abs(a.length - b.length) <= tol
            for a, b in zip(self.arcs, other.arcs)
        )


def _consecutive_gaps(arcs: Sequence[Arc]) -> list[float]:
    gaps = [arcs[i + 1].start - arcs[i].end for i in range(len(arcs) - 1)]
    gaps.append(arcs[0].start + PI - arcs[-1].end)
    return gaps


def image_multicone(M, mc: Multicone) -> Multicone:
    images = [image_arc(M, a) for a in mc.arcs]
    for i in range(len(images)):
        for j in range(i + 1, len(images)):
            if arc_separation(images[i], images[j]) < -MERGE_TOL:
                raise NumericError("images of disjoint arcs overlap; tolerance breakdown")
    arcs, merged = union_arcs(images)
    return Multicone(tuple(arcs), merged=merged)


def complementary(mc: Multicone) -> Multicone:
    """Closure of the complement of ``mc`` in the projective line."""
    arcs = mc.arcs
    out = []
    for i, a in enumerate(arcs):
        nxt = arcs[(i + 1) % len(arcs)]
        out.append(Arc(a.end, ccw_offset(a.end, nxt.start)))
    return Multicone(tuple(out))


# -- invariance ------------------------------------------------------------------

def containment_margin(images: Iterable[Arc], target: Multicone) -> float:
    """Smallest clearance of the image arcs inside ``target`` (negative if outside)."""
    worst = math.inf
    for img in images:
        worst = min(worst, max(a.clearance_inside(img) for a in target.arcs))
    return worst


def invariance_margin(A, mc: Multicone) -> float:
    """Clearance of ``U_i A_i(mc)`` inside ``mc``."""
    return containment_margin((image_arc(g, a) for g in A.generators for a in mc.arcs), mc)


def is_strictly_forward_invariant(A, mc: Multicone, delta: float = DEFAULT_MARGIN) -> bool:
    if delta <= 0:
        raise InputError("margin must be positive")
    try:
        return invariance_margin(A, mc) >= delta
    except NumericError:
        return False


# -- NOC ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NOCResult:
    """Outcome of a non-overlap check.

    ``status`` is ``"true"``, ``"false"`` or ``"indeterminate"`` (gap within
    ``tol_angle`` of zero); ``holds`` is True only for ``"true"``.
    """

    status: str
    gap: Optional[float]
    reason: str = ""
    tol_angle: float = TOL_ANGLE
    margin: float = DEFAULT_MARGIN

    @property
    def holds(self) -> bool:
        return self.status == "true"

    def __bool__(self):
        return self.holds

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "status": self.status,
            "gap": self.gap,
            "reason": self.reason,
            "tol_angle": self.tol_angle,
            "margin": self.margin,
        }


def _verdict(gap: float, tol_angle: float, margin: float, reason: str = "") -> NOCResult:
    if gap is None or gap > tol_angle:
        status = "true"
    elif gap < -tol_angle:
        status = "false"
    else:
        status = "indeterminate"
    return NOCResult(status, gap, reason, tol_angle, margin)


def _min_separation(groups: dict) -> Optional[float]:
    # groups: label -> list of arcs; separation only between different labels
    labels = sorted(groups)
    best = None
    for x in range(len(labels)):
        for y in range(x + 1, len(labels)):
            for a in groups[labels[x]]:
                for b in groups[labels[y]]:
                    s = arc_separation(a, b)
                    best = s if best is None else min(best, s)
    return best


def check_forward_noc(A, mc: Multicone, delta: float = DEFAULT_MARGIN, tol_angle: float = TOL_ANGLE) -> NOCResult:
    """Pairwise disjointness of ``A_i(mc)`` for a strictly invariant ``mc``."""
    if not is_strictly_forward_invariant(A, mc, delta):
        return NOCResult("false", None, "multicone is not strictly forward-invariant", tol_angle, delta)
    groups = {i: [image_arc(g, a) for a in mc.arcs] for i, g in enumerate(A.generators, 1)}
    return _verdict(_min_separation(groups), tol_angle, delta)


def check_backward_noc(A, mc: Multicone, delta: float = DEFAULT_MARGIN, tol_angle: float = TOL_ANGLE) -> NOCResult:
    """Forward NOC of the inverse generators on the complementary multicone."""
    return check_forward_noc(A.inverse(), complementary(mc), delta, tol_angle)


# -- subshift families --------------------------------------------------------------

@dataclass(frozen=True)
class MulticoneFamily:
    """One multicone per symbol; ``cones[a - 1]`` belongs to symbol ``a``.

    Invariance means ``a -> b`` allowed implies ``A_b(M_a)`` lies inside
    ``M_b`` with positive clearance.
    """

    cones: tuple
    transitions: TransitionMatrix

    def __post_init__(self):
        if len(self.cones) != self.transitions.k:
            raise InputError("one multicone per symbol is required")
        object.__setattr__(self, "cones", tuple(self.cones))

    @classmethod
    def constant(cls, mc: Multicone, transitions: TransitionMatrix) -> "MulticoneFamily":
        return cls(tuple([mc] * transitions.k), transitions)

    def __getitem__(self, symbol: int) -> Multicone:
        return self.cones[symbol - 1]

    def to_list(self) -> list:
        return [mc.to_list() for mc in self.cones]


def family_invariance_margin(A, family: MulticoneFamily) -> float:
    q = family.transitions
    worst = math.inf
    for a in range(1, q.k + 1):
        for b in q.successors(a):
            imgs = [image_arc(A[b], arc) for arc in family[a].arcs]
            worst = min(worst, containment_margin(imgs, family[b]))
    return worst


def backward_family_margin(A, family: MulticoneFamily) -> float:
    """Clearance of ``A_b^{-1}(M_b^co)`` inside ``M_c^co`` for every dual arrow ``b -> c``."""
    dual = dual_subshift(family.transitions)
    co = [complementary(mc) for mc in family.cones]
    worst = math.inf
    for b in range(1, dual.k + 1):
        inv = np.linalg.inv(A[b])
        imgs = [image_arc(inv, arc) for arc in co[b - 1].arcs]
        for c in dual.successors(b):
            worst = min(worst, containment_margin(imgs, co[c - 1]))
    return worst


@dataclass(frozen=True)
class SubshiftNOCResult:
    forward: NOCResult
    backward: NOCResult

    @property
    def holds(self) -> bool:
        return self.forward.holds and self.backward.holds

    def __bool__(self):
        return self.holds

    def to_dict(self) -> dict:
        return {"holds": self.holds, "forward": self.forward.to_dict(), "backward": self.backward.to_dict()}


def check_subshift_noc(
    A,
    family: MulticoneFamily,
    transitions: Optional[TransitionMatrix] = None,
    delta: float = DEFAULT_MARGIN,
    tol_angle: float = TOL_ANGLE,
) -> SubshiftNOCResult:
    """NOC for a subshift cocycle with a per-symbol multicone family.

    Forward: ``A_i(M_a)`` and ``A_j(M_b)`` are disjoint whenever ``a -> i``
    and ``b -> j`` are allowed and ``i != j``. Backward: the inverse
    generators run over the dual subshift on the complementary cones, and
    ``A_i^{-1}(M_i^co)``, ``A_j^{-1}(M_j^co)`` must be disjoint for ``i != j``.
    With the full shift and one shared multicone this is exactly
    :func:`check_forward_noc` and :func:`check_backward_noc` together.
    """
    q = transitions if transitions is not None else family.transitions
    if q != family.transitions:
        family = MulticoneFamily(family.cones, q)
    try:
        fwd_margin = family_invariance_margin(A, family)
    except NumericError as exc:
        fwd_margin, fwd_reason = -math.inf, str(exc)
    else:
        fwd_reason = ""
    if fwd_margin < delta:
        forward = NOCResult("false", None, fwd_reason or "family is not strictly invariant", tol_angle, delta)
    else:
        groups = {}
        for a in range(1, q.k + 1):
            for i in q.successors(a):
                groups.setdefault(i, []).extend(image_arc(A[i], arc) for arc in family[a].arcs)
        forward = _verdict(_min_separation(groups), tol_angle, delta)

    try:
        bwd_margin = backward_family_margin(A, family)
    except NumericError:
        bwd_margin = -math.inf
    if bwd_margin < delta:
        backward = NOCResult("false", None, "complementary family is not strictly invariant under the dual subshift", tol_angle, delta)
    else:
        groups = {}
        for i in range(1, q.k + 1):
            inv = np.linalg.inv(A[i])
            groups[i] = [image_arc(inv, arc) for arc in complementary(family[i]).arcs]
        backward = _verdict(_min_separation(groups), tol_angle, delta)
    return SubshiftNOCResult(forward, backward)
