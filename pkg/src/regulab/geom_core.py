"""Lines, reguli, twisted strips and their R^4 dual tubes.

Non-horizontal lines in R^3 are parameterized by four numbers:
``line(a,b,c,d)`` is the line (a,b,0) + span(c,d,1).  Lines with a == d
("l-lines") are identified with points (a,b,c) of R^3; the breve map sends
such a line to (a,b,c,a) in R^4.  A (delta, rho) strip is built on an
l-line core: the points (a+ct, b+at, t) + u(1,-t,0) for t in [0,1],
|u| <= rho, thickened by delta and clipped to the unit cube.  Its breve
image is a delta-tube of length rho along (1,0,0,-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLine

EPS_MIN = 1e-6

#: allowed relative overshoot of rho above sqrt(delta) in family files
RHO_SLACK = 1e-9


@dataclass(frozen=True)
class Line:
    """Line (a,b,0) + span(c,d,1)."""

    a: float
    b: float
    c: float
    d: float

    def point_at(self, t: float) -> np.ndarray:
        return np.array([self.a + self.c * t, self.b + self.d * t, t])

    def breve(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])


@dataclass(frozen=True)
class LLine:
    """Line with equal first and fourth parameters, i.e. line(a,b,c,a)."""

    a: float
    b: float
    c: float

    def point_at(self, t: float) -> np.ndarray:
        return np.array([self.a + self.c * t, self.b + self.a * t, t])

    def breve(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.a])

    def as_line(self) -> Line:
        return Line(self.a, self.b, self.c, self.a)


@dataclass(frozen=True)
class Regulus:
    """Doubly-ruled surface swept by the horizontal ruling of an l-line."""

    core: LLine

    def point_at(self, t: float, u: float) -> np.ndarray:
        p = self.core.point_at(t)
        return p + u * np.array([1.0, -t, 0.0])


@dataclass(frozen=True)
class RegulusStrip:
    """(delta, rho) strip on an l-line core, clipped to [0,1]^3."""

    core: LLine
    delta: float
    rho: float

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0,1), got {self.delta}")
        if not self.delta <= self.rho <= math.sqrt(self.delta) * (1.0 + RHO_SLACK):
            raise ValueError(
                f"rho must be in [delta, sqrt(delta)], got rho={self.rho} delta={self.delta}"
            )


@dataclass(frozen=True)
class DualTube:
    """delta-tube of length rho along (1,0,0,-1) in parameter space R^4."""

    center: np.ndarray
    axis: np.ndarray
    half_length: float
    radius: float

    def spine_point(self, u: float) -> np.ndarray:
        return self.center + u * np.array([1.0, 0.0, 0.0, -1.0])

    def distance(self, q: np.ndarray) -> float:
        """Euclidean distance from q to the spine segment."""
        d = np.asarray(q, dtype=float) - self.center
        # spine direction (1,0,0,-1) has squared norm 2
        u = (d[0] - d[3]) / 2.0
        u = min(max(u, -self.half_length), self.half_length)
        r = d - u * np.array([1.0, 0.0, 0.0, -1.0])
        return float(np.linalg.norm(r))

    def contains(self, q: np.ndarray) -> bool:
        return self.distance(q) <= self.radius


def line_point(line: Line, t: float) -> np.ndarray:
    """Intersection of the line with the horizontal plane at height t."""
    return line.point_at(t)


def sl2_check(line: Line, tol: float = 1e-9) -> bool:
    """True iff ad - bc = 1 within tol."""
    return abs(line.a * line.d - line.b * line.c - 1.0) <= tol


def sl2_reparameterize(line: Line) -> LLine:
    """Rewrite an SL2 line (ad - bc = 1, ad != 0) as an l-line.

    The returned line traces the same point set as the input after the
    second and third physical coordinates are swapped.  Raises
    DegenerateLine when ad or 1 + bc is within EPS_MIN of zero, i.e. when
    this chart does not cover the line.
    """
    a, b, c, d = line.a, line.b, line.c, line.d
    if abs(a * d) <= EPS_MIN:
        raise DegenerateLine(f"ad = {a * d} too close to 0")
    s = 1.0 + b * c
    if abs(s) <= EPS_MIN:
        raise DegenerateLine(f"1 + bc = {s} too close to 0")
    return LLine(a / s, -a * b / s, a * c / s)


def strip_membership(strip: RegulusStrip, p) -> tuple[bool, tuple[float, float] | None]:
    """Test p against the strip; return (inside, witness (t,u) or None).

    t ranges over the net {p3} u {p3 +- k*delta/4 : k=1..4} intersected
    with [0,1]; for each t the optimal u along (1,-t,0) is solved in closed
    form and clamped to [-rho, rho].  Accept when the best residual is at
    most delta and p lies in the unit cube.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p < 0.0) or np.any(p > 1.0):
        return False, None
    delta, rho = strip.delta, strip.rho
    a, b, c = strip.core.a, strip.core.b, strip.core.c
    t3 = p[2]
    ts = [t3] + [t3 + k * delta / 4.0 for k in (-4, -3, -2, -1, 1, 2, 3, 4)]
    best = (math.inf, 0.0, 0.0)
    for t in ts:
        if t < 0.0 or t > 1.0:
            continue
        bx, by = a + c * t, b + a * t
        dx, dy = p[0] - bx, p[1] - by
        dz = p[2] - t
        u = (dx - t * dy) / (1.0 + t * t)
        u = min(max(u, -rho), rho)
        rx, ry = dx - u, dy + u * t
        resid = math.sqrt(rx * rx + ry * ry + dz * dz)
        if resid < best[0]:
            best = (resid, t, u)
    if best[0] <= delta:
        return True, (best[1], best[2])
    return False, None


def dual_tube(strip: RegulusStrip) -> DualTube:
    """R^4 dual of the strip: breve(core) + u(1,0,0,-1), |u| <= rho, + B_delta."""
    axis = np.array([1.0, 0.0, 0.0, -1.0]) / math.sqrt(2.0)
    return DualTube(
        center=strip.core.breve(),
        axis=axis,
        half_length=strip.rho,
        radius=strip.delta,
    )


def _horizontal_regulus_distance(ell: LLine, q: np.ndarray, n_net: int = 2001) -> float:
    """Distance from q to the surface swept by the horizontal ruling of ell.

    The surface through ell consists of the horizontal lines
    p + span(p1, p2, 0) over p on ell.  For each t' on a fine net the
    optimal slide u along (p1, p2, 0) is closed form; the minimum over the
    net approximates the true distance.
    """
    tp = np.linspace(0.0, 1.0, n_net)
    # the slice at the query's own height decides exact-membership cases
    tp = np.append(tp, min(max(q[2], 0.0), 1.0))
    bx = ell.a + ell.c * tp
    by = ell.b + ell.a * tp
    # ruling direction at height t' is (bx, by, 0)
    w2 = bx * bx + by * by
    w2 = np.where(w2 < 1e-30, 1e-30, w2)
    dx = q[0] - bx
    dy = q[1] - by
    dz = q[2] - tp
    u = (dx * bx + dy * by) / w2
    rx = dx - u * bx
    ry = dy - u * by
    return float(np.sqrt(np.min(rx * rx + ry * ry + dz * dz)))


def ruling_defect(ell: LLine, s: float, n_samples: int) -> float:
    """Max distance of the scaled line (breve' = s * breve ell) to R(ell).

    Lines whose breve image lies in span(breve ell) form the second ruling
    of the regulus of ell, so the defect vanishes for any s != 0; a line
    off the span has defect bounded away from zero.
    """
    if s == 0.0:
        raise ValueError("s must be nonzero")
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    scaled = LLine(s * ell.a, s * ell.b, s * ell.c)
    worst = 0.0
    for t in np.linspace(0.0, 1.0, n_samples):
        q = scaled.point_at(t)
        worst = max(worst, _horizontal_regulus_distance(ell, q))
    return worst


def line_defect_to_regulus(ell: LLine, other: Line, n_samples: int) -> float:
    """Max distance of an arbitrary line's sample points to R(ell)."""
    worst = 0.0
    for t in np.linspace(0.0, 1.0, n_samples):
        q = other.point_at(t)
        worst = max(worst, _horizontal_regulus_distance(ell, q))
    return worst
