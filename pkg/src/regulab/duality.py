"""Point-line duality, the moving frame, wave-packet planks, and the
generalized curve apparatus.

The dual-ray direction at height t is d(t) = (-t, t^2, 1): it is the cross
product of e1 = (1,0,t) with e2 = (t,1,0) and is the direction obtained by
solving the incidence equations a + ct = p1, b + at = p2 with a free.  A
published variant of this tuple with reversed component order fails the
orthogonality e1 . e3 = 0 and is kept here only as a transcription fixture
(``printed_xi_prime``); all geometry uses the derived d(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateCurve, DegenerateHeight
from .geom_core import EPS_MIN, RegulusStrip


def dual_direction(t: float) -> np.ndarray:
    """d(t) = (-t, t^2, 1)."""
    return np.array([-t, t * t, 1.0])


@dataclass(frozen=True)
class Frame:
    """Dual-ray frame at height t.

    xi is the unit dual direction, xi_prime its closed-form t-derivative,
    v the second-axis vector of the wave-packet plank; v is parallel to
    xi_prime (v = -(1+t^2+t^4)^(1/2) * xi_prime).
    """

    t: float
    d: np.ndarray
    xi: np.ndarray
    xi_prime: np.ndarray
    v: np.ndarray


def frame_at(t: float) -> Frame:
    d = dual_direction(t)
    n2 = 1.0 + t * t + t ** 4
    xi = d / math.sqrt(n2)
    xi_prime = np.array([t ** 4 - 1.0, 2.0 * t + t ** 3, -t - 2.0 * t ** 3]) / n2 ** 1.5
    v = np.array([1.0 - t ** 4, -2.0 * t - t ** 3, 2.0 * t ** 3 + t]) / n2
    return Frame(t=t, d=d, xi=xi, xi_prime=xi_prime, v=v)


def printed_xi_prime(t: float) -> np.ndarray:
    """The xi' tuple exactly as printed; kept as a transcription fixture."""
    n2 = 1.0 + t * t + t ** 4
    return np.array([2.0 * t ** 3 + t, -t ** 3 - 2.0 * t, t ** 4 - 1.0]) / n2 ** 1.5


def dual_ray(p) -> tuple[np.ndarray, np.ndarray]:
    """Parameter-space ray of all l-lines through the physical point p.

    Returns (base, direction).  Solving a + ct = p1, b + at = p2 with a as
    the free parameter gives base (0, p2, p1/t) and direction (-t, t^2, 1);
    at t = 0 the free parameter is c, the base is (p1, p2, 0) and the
    direction degenerates to (0, 0, 1).
    """
    p = np.asarray(p, dtype=float)
    t = p[2]
    if abs(t) <= EPS_MIN:
        return np.array([p[0], p[1], 0.0]), np.array([0.0, 0.0, 1.0])
    return np.array([0.0, p[1], p[0] / t]), dual_direction(t)


def pi_t_basis(t: float) -> tuple[np.ndarray, np.ndarray]:
    """Ordered orthonormal basis (xi'/|xi'|, xi ^ xi'/|xi'|) of d(t)-perp."""
    fr = frame_at(t)
    b1 = fr.xi_prime / np.linalg.norm(fr.xi_prime)
    b2 = np.cross(fr.xi, b1)
    return b1, b2


def project_pi_t(y, t: float) -> np.ndarray:
    """Coordinates of the projection of y onto d(t)-perp in the pi_t basis."""
    y = np.asarray(y, dtype=float)
    b1, b2 = pi_t_basis(t)
    return np.array([y @ b1, y @ b2])


@dataclass(frozen=True)
class Plank:
    """1 x rho x delta box: long axis xi, mid axis xi'/|xi'|, short their cross."""

    center: np.ndarray
    axes: np.ndarray  # rows: long, mid, short
    half_extents: tuple[float, float, float]

    def contains(self, p) -> bool:
        d = self.axes @ (np.asarray(p, dtype=float) - self.center)
        return bool(np.all(np.abs(d) <= np.asarray(self.half_extents)))


def plank_for(x, t: float, rho: float, delta: float) -> Plank:
    if delta > rho:
        raise ValueError("need delta <= rho")
    fr = frame_at(t)
    long_ax = fr.xi
    mid_ax = fr.xi_prime / np.linalg.norm(fr.xi_prime)
    short_ax = np.cross(long_ax, mid_ax)
    return Plank(
        center=np.asarray(x, dtype=float),
        axes=np.vstack([long_ax, mid_ax, short_ax]),
        half_extents=(1.0, rho, delta),
    )


@dataclass(frozen=True)
class SliceTube:
    """2D tube in the plane z3 = t: segment center +- half_length * direction,
    thickened by thickness."""

    t: float
    center: np.ndarray
    direction: np.ndarray
    half_length: float
    thickness: float

    def distance(self, q) -> float:
        d = np.asarray(q, dtype=float) - self.center
        u = float(d @ self.direction)
        u = min(max(u, -self.half_length), self.half_length)
        return float(np.linalg.norm(d - u * self.direction))

    def contains(self, q) -> bool:
        return self.distance(q) <= self.thickness

    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        e = self.half_length * self.direction
        return self.center - e, self.center + e


def slice_tube(strip: RegulusStrip, t: float) -> SliceTube:
    """Intersection of the strip with the plane z3 = t, as a 2D tube."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must be in [0,1]")
    a, b, c = strip.core.a, strip.core.b, strip.core.c
    center = np.array([a + c * t, b + a * t])
    direction = np.array([1.0, -t]) / math.sqrt(1.0 + t * t)
    # half-length rho measured in the u parameter: endpoints center +- rho*(1,-t)
    return SliceTube(
        t=t,
        center=center,
        direction=direction,
        half_length=strip.rho * math.sqrt(1.0 + t * t),
        thickness=strip.delta,
    )


@dataclass(frozen=True)
class Segment2D:
    p0: np.ndarray
    p1: np.ndarray

    def length(self) -> float:
        return float(np.linalg.norm(self.p1 - self.p0))

    def neighborhood_area(self, delta: float) -> float:
        return 2.0 * delta * self.length() + math.pi * delta * delta


def projected_segment(x, t: float, rho: float) -> Segment2D:
    """pi_t image of {x + u(0,-t,1/t) : |u| <= rho} as a 2D segment."""
    if abs(t) <= EPS_MIN:
        raise DegenerateHeight("projected_segment is singular at t = 0")
    x = np.asarray(x, dtype=float)
    w = np.array([0.0, -t, 1.0 / t])
    return Segment2D(project_pi_t(x - rho * w, t), project_pi_t(x + rho * w, t))


class CurveSystem:
    """Smooth curve gamma: [0,1] -> R^3 with gamma1 bounded away from 0.

    gamma_prime may be supplied in closed form; otherwise central
    differences with h = 1e-5 are used.
    """

    _H = 1e-5

    def __init__(self, gamma: Callable[[float], np.ndarray],
                 gamma_prime: Callable[[float], np.ndarray] | None = None):
        self.gamma = lambda t: np.asarray(gamma(t), dtype=float)
        self._prime = gamma_prime

    def prime(self, t: float) -> np.ndarray:
        if self._prime is not None:
            return np.asarray(self._prime(t), dtype=float)
        h = self._H
        return (self.gamma(t + h) - self.gamma(t - h)) / (2.0 * h)


def curve_frames(cs: CurveSystem, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Spanning vectors e1 = (g3, 0, -g1), e2 = (g2, -g1, 0) of gamma(t)-perp."""
    g = cs.gamma(t)
    if abs(g[0]) <= EPS_MIN:
        raise DegenerateCurve(f"gamma1({t}) = {g[0]} too close to 0")
    e1 = np.array([g[2], 0.0, -g[0]])
    e2 = np.array([g[1], -g[0], 0.0])
    return e1, e2


def curve_projection(cs: CurveSystem, x, t: float) -> np.ndarray:
    """Affine-modified projection (x1*g3 - x3*g1, x1*g2 - x2*g1)."""
    x = np.asarray(x, dtype=float)
    g = cs.gamma(t)
    return np.array([x[0] * g[2] - x[2] * g[0], x[0] * g[1] - x[1] * g[0]])


def curve_point(cs: CurveSystem, x, t: float) -> np.ndarray:
    """Point of the physical-space curve C_x at height t."""
    q = curve_projection(cs, x, t)
    return np.array([q[0], q[1], t])


def curve_normal(cs: CurveSystem, t: float) -> np.ndarray:
    """In-plane normal n = g1^-1 (-g1 g2' + g2 g1', g1 g3' - g3 g1', 0)."""
    g = cs.gamma(t)
    if abs(g[0]) <= EPS_MIN:
        raise DegenerateCurve(f"gamma1({t}) = {g[0]} too close to 0")
    gp = cs.prime(t)
    return np.array([
        (-g[0] * gp[1] + g[1] * gp[0]) / g[0],
        (g[0] * gp[2] - g[2] * gp[0]) / g[0],
        0.0,
    ])


def curve_tangent_v1(cs: CurveSystem, t: float) -> np.ndarray:
    """In-plane direction v1 = (g1 g3' - g3 g1', g1 g2' - g2 g1')."""
    g = cs.gamma(t)
    gp = cs.prime(t)
    return np.array([g[0] * gp[2] - g[2] * gp[0], g[0] * gp[1] - g[1] * gp[0]])


def coplanarity_defect(cs: CurveSystem, t: float) -> float:
    """|det[gamma, gamma', (gamma/|gamma|)']|; zero for every smooth curve."""
    g = cs.gamma(t)
    norm = np.linalg.norm(g)
    if norm <= EPS_MIN:
        raise DegenerateCurve(f"|gamma({t})| = {norm} too close to 0")
    gp = cs.prime(t)
    unit_prime = gp / norm - g * float(g @ gp) / norm ** 3
    return abs(float(np.linalg.det(np.column_stack([g, gp, unit_prime]))))


class GeneralizedStrip:
    """delta x sqrt(delta) x 1 strip attached to the curve C_x."""

    def __init__(self, cs: CurveSystem, x, delta: float):
        for t in np.linspace(0.0, 1.0, 33):
            if abs(cs.gamma(t)[0]) <= EPS_MIN:
                raise DegenerateCurve(f"gamma1 vanishes near t = {t}")
        self.cs = cs
        self.x = np.asarray(x, dtype=float)
        self.delta = delta
        self.width = math.sqrt(delta)

    def _inplane_unit(self, t: float) -> np.ndarray:
        n = curve_normal(self.cs, t)
        m = math.hypot(n[0], n[1])
        if m <= EPS_MIN:
            raise DegenerateCurve(f"normal vanishes at t = {t}")
        return np.array([-n[1] / m, n[0] / m, 0.0])

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        delta = self.delta
        ts = [p[2]] + [p[2] + k * delta / 4.0 for k in (-4, -3, -2, -1, 1, 2, 3, 4)]
        for t in ts:
            if t < 0.0 or t > 1.0:
                continue
            z = curve_point(self.cs, self.x, t)
            w = self._inplane_unit(t)
            d = p - z
            u = float(d @ w)
            u = min(max(u, -self.width), self.width)
            if np.linalg.norm(d - u * w) <= delta:
                return True
        return False


def generalized_strip(cs: CurveSystem, x, delta: float) -> GeneralizedStrip:
    return GeneralizedStrip(cs, x, delta)
