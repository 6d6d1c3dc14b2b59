"""First Heisenberg group arithmetic, horizontal lines and their gauge
tubes, the Nikodym maximal operator on grid functions, and the comparison
between regulus strips and gauge tubes.

Conventions (fixed here once): group law
(x,y,z)*(x',y',z') = (x+x', y+y', z+z'+(xy'-x'y)/2), gauge
|(x,y,z)| = ((x^2+y^2)^2 + 16 z^2)^(1/4).

The strip geometry works in coordinates where the second and third
physical axes are swapped relative to the coordinates in which l-lines
are horizontal.  Under the map (x, y, z) -> (x, z, y/2) the physical
line (a+ct, b+at, t) of an l-line with a^2 - bc = 1 becomes exactly a
horizontal line of the above convention, and so does every ruling
segment of its strip; line_embedding applies that map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .errors import ZeroFunction
from .geom_core import LLine
from .rng import make_rng


def h_mul(p, q) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return np.array([
        p[0] + q[0],
        p[1] + q[1],
        p[2] + q[2] + 0.5 * (p[0] * q[1] - q[0] * p[1]),
    ])


def h_inv(p) -> np.ndarray:
    return -np.asarray(p, dtype=float)


def koranyi_norm(p) -> float:
    p = np.asarray(p, dtype=float)
    r2 = p[0] * p[0] + p[1] * p[1]
    return (r2 * r2 + 16.0 * p[2] * p[2]) ** 0.25


def koranyi_distance(p, q) -> float:
    """Left-invariant gauge distance |q^-1 * p|."""
    return koranyi_norm(h_mul(h_inv(q), p))


@dataclass(frozen=True)
class HLine:
    """Horizontal line through base with unit horizontal direction (u, v)."""

    base: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float))
        d = np.asarray(self.direction, dtype=float)
        n = math.hypot(d[0], d[1])
        if n <= 0.0:
            raise ValueError("direction must be a nonzero 2-vector")
        object.__setattr__(self, "direction", d / n)

    def point_at(self, t: float) -> np.ndarray:
        x0, y0, z0 = self.base
        u, v = self.direction
        return np.array([x0 + u * t, y0 + v * t,
                         z0 + t * (x0 * v - y0 * u) / 2.0])

    def points_at(self, ts: np.ndarray) -> np.ndarray:
        x0, y0, z0 = self.base
        u, v = self.direction
        ts = np.asarray(ts, dtype=float)
        return np.stack([x0 + u * ts, y0 + v * ts,
                         z0 + ts * (x0 * v - y0 * u) / 2.0], axis=1)


def htube_membership(line: HLine, delta: float, p,
                     t_window=(0.0, 1.0)) -> bool:
    """p lies within gauge distance delta of the line, the spine discretized
    on a t-net of step delta/4 over t_window."""
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    t0, t1 = t_window
    n = max(int(math.ceil((t1 - t0) / (delta / 4.0))) + 1, 2)
    spine = line.points_at(np.linspace(t0, t1, n))
    p = np.asarray(p, dtype=float)
    d = p[None, :] - spine
    # group difference spine^-1 * p has twist (s_y p_x - s_x p_y)/2
    z = p[2] - spine[:, 2] + 0.5 * (spine[:, 1] * p[0] - spine[:, 0] * p[1])
    r2 = d[:, 0] ** 2 + d[:, 1] ** 2
    gauges = (r2 * r2 + 16.0 * z * z) ** 0.25
    return bool(np.min(gauges) <= delta)


@dataclass
class GridFunction:
    """Nonnegative function sampled at cell centers of a uniform grid."""

    window: tuple
    resolution: float
    values: np.ndarray

    @property
    def origin(self) -> np.ndarray:
        return np.array([w[0] for w in self.window])

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.values.shape

    def cell_centers(self) -> np.ndarray:
        o = self.origin
        h = self.resolution
        axes = [o[i] + (np.arange(self.dims[i]) + 0.5) * h for i in range(3)]
        gx, gy, gz = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])

    def lp_norm(self, p: float) -> float:
        h = self.resolution
        return float((h ** 3 * np.sum(np.abs(self.values) ** p)) ** (1.0 / p))


UNIT_WINDOW = ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))


def _grid_dims(window, h: float) -> tuple[int, int, int]:
    return tuple(max(int(round((w[1] - w[0]) / h)), 1) for w in window)


def const_function(h: float, window=UNIT_WINDOW, value: float = 1.0) -> GridFunction:
    dims = _grid_dims(window, h)
    return GridFunction(window=window, resolution=h,
                        values=np.full(dims, value))


def tube_indicator(line: HLine, delta: float, h: float,
                   t_window=(0.0, 1.0), pad: float | None = None) -> GridFunction:
    """Rasterized gauge delta-tube: a cell is marked when its center is
    within delta horizontally and within max(delta^2/4, h/2) vertically of
    the spine (the tube is delta x delta x delta^2 anisotropic, so the
    vertical tolerance is widened to the cell size)."""
    t0, t1 = t_window
    n = max(int(math.ceil((t1 - t0) / (delta / 4.0))) + 1, 2)
    spine = line.points_at(np.linspace(t0, t1, n))
    if pad is None:
        pad = 4.0 * delta + 2.0 * h
    lo = spine.min(axis=0) - pad
    hi = spine.max(axis=0) + pad
    window = tuple((float(lo[i]), float(hi[i])) for i in range(3))
    dims = _grid_dims(window, h)
    f = GridFunction(window=window, resolution=h, values=np.zeros(dims))
    pts = f.cell_centers()
    vert_tol = max(delta * delta / 4.0, h / 2.0)
    marked = np.zeros(len(pts), dtype=bool)
    for s in spine:
        d = pts - s
        z = pts[:, 2] - s[2] + 0.5 * (-s[0] * pts[:, 1] + s[1] * pts[:, 0])
        horiz = np.hypot(d[:, 0], d[:, 1])
        marked |= (horiz <= delta) & (np.abs(z) <= vert_tol)
    f.values = marked.astype(float).reshape(dims)
    return f


def ball_indicator(center, radius: float, h: float, window=None) -> GridFunction:
    """Rasterized gauge ball, with the same vertical widening as tubes."""
    center = np.asarray(center, dtype=float)
    if window is None:
        pad = 2.0 * radius + 2.0 * h
        window = tuple((float(center[i] - pad), float(center[i] + pad))
                       for i in range(3))
    dims = _grid_dims(window, h)
    f = GridFunction(window=window, resolution=h, values=np.zeros(dims))
    pts = f.cell_centers()
    d = pts - center
    z = pts[:, 2] - center[2] + 0.5 * (-center[0] * pts[:, 1] + center[1] * pts[:, 0])
    horiz = np.hypot(d[:, 0], d[:, 1])
    vert_tol = max(radius * radius / 4.0, h / 2.0)
    marked = (horiz <= radius) & (np.abs(z) <= vert_tol)
    f.values = marked.astype(float).reshape(dims)
    return f


def family_indicator(family, h: float, window=UNIT_WINDOW) -> GridFunction:
    """Indicator of the strip union of a family, sampled at cell centers."""
    from ._kernels import mc_membership

    dims = _grid_dims(window, h)
    f = GridFunction(window=window, resolution=h, values=np.zeros(dims))
    pts = f.cell_centers()
    p = family.parameter_points
    hits = mc_membership(np.ascontiguousarray(pts),
                         np.ascontiguousarray(p[:, 0]),
                         np.ascontiguousarray(p[:, 1]),
                         np.ascontiguousarray(p[:, 2]),
                         family.delta, family.rho)
    f.values = hits.astype(float).reshape(dims)
    return f


@njit(cache=True, parallel=True)
def _nikodym_kernel(values, ox, oy, oz, h, nx, ny, nz, pts, delta,
                    net_step, n_angles, n_spine, out):
    n_pts = pts.shape[0]
    cross = delta / 2.0
    for idx in prange(n_pts):
        x1 = pts[idx, 0]
        x2 = pts[idx, 1]
        x3 = pts[idx, 2]
        best = 0.0
        for ia in range(n_angles):
            th = math.pi * ia / n_angles
            wx = math.cos(th)
            wy = math.sin(th)
            px = -wy
            py = wx
            for k in range(-1, 2):
                for j in range(-1, 2):
                    bx = x1 + k * net_step * px + 3.0 * j * net_step * wx
                    by = x2 + k * net_step * py + 3.0 * j * net_step * wy
                    bz = x3
                    zslope = 0.5 * (bx * wy - by * wx)
                    acc = 0.0
                    cnt = 0
                    total = 3 * n_spine
                    for si in range(n_spine):
                        s = -0.5 + (si + 0.5) / n_spine
                        sx = bx + s * wx
                        sy = by + s * wy
                        sz = bz + s * zslope
                        for ci in range(-1, 2):
                            c = ci * cross
                            qx = sx + c * px
                            qy = sy + c * py
                            qz = sz + 0.5 * (sx * c * py - sy * c * px)
                            ix = int(math.floor((qx - ox) / h))
                            iy = int(math.floor((qy - oy) / h))
                            iz = int(math.floor((qz - oz) / h))
                            if 0 <= ix < nx and 0 <= iy < ny and 0 <= iz < nz:
                                acc += values[ix, iy, iz]
                                cnt += 1
                    if 2 * cnt >= total:
                        # mostly in-window: honest average over the window
                        avg = acc / cnt
                    else:
                        # grazing tube: count out-of-window samples as zero
                        avg = acc / total
                    if avg > best:
                        best = avg
        out[idx] = best


def nikodym_maximal(f: GridFunction, delta: float, net_step: float,
                    angle_step: float | None = None,
                    n_spine: int = 12) -> GridFunction:
    """Discretized Nikodym maximal function on f's own grid.

    For each cell center x the sup runs over unit-length horizontal gauge
    delta-tubes through x: directions on an angular net of the given step
    (default delta) over [0, pi), base points on a net of step net_step
    around x.  Tube averages use n_spine spine samples with 3 cross-section
    samples each.  When at least half the samples fall in f's window the
    average runs over those alone (so the maximal function of a constant
    is that constant exactly); grazing tubes count out-of-window samples
    as zero, which prevents one-sample averages on thin windows.
    """
    if net_step > delta:
        raise ValueError("net_step must be <= delta")
    if angle_step is None:
        angle_step = delta
    n_angles = max(int(math.ceil(math.pi / angle_step)), 1)
    pts = f.cell_centers()
    out = np.zeros(len(pts))
    o = f.origin
    nx, ny, nz = f.dims
    _nikodym_kernel(f.values, o[0], o[1], o[2], f.resolution, nx, ny, nz,
                    np.ascontiguousarray(pts), delta, net_step, n_angles,
                    n_spine, out)
    return GridFunction(window=f.window, resolution=f.resolution,
                        values=out.reshape(f.dims))


def lp_ratio(f: GridFunction, p: float, delta: float,
             net_step: float | None = None) -> float:
    """||Mf||_p / ||f||_p for the discretized maximal operator."""
    if p < 1.0:
        raise ValueError("p must be >= 1")
    fnorm = f.lp_norm(p)
    if fnorm == 0.0:
        raise ZeroFunction("f vanishes identically on its grid")
    if net_step is None:
        net_step = delta
    mf = nikodym_maximal(f, delta, net_step)
    return mf.lp_norm(p) / fnorm


def line_embedding(p) -> np.ndarray:
    """Coordinate map (x, y, z) -> (x, z, y/2) sending the physical lines of
    l-lines with a^2 - bc = 1 (and their ruling segments) onto horizontal
    lines of the fixed group convention, exactly."""
    p = np.asarray(p, dtype=float)
    return np.array([p[0], p[2], p[1] / 2.0])


def hline_of(ell: LLine) -> HLine:
    """The horizontal line carrying the embedded physical line of ell.

    The embedded line is t -> (a+ct, t, (b+at)/2); its group z-slope from
    base (a, 0, b/2) with direction (c, 1) is a/2, matching (b+at)/2
    exactly."""
    return HLine(base=np.array([ell.a, 0.0, ell.b / 2.0]),
                 direction=np.array([ell.c, 1.0]))


def strip_vs_htube(ell: LLine, delta: float, n_samples: int,
                   seed: int) -> tuple[float, float]:
    """Measured two-sided containment constants between the regulus strip
    of ell (with rho = sqrt(delta)) and the gauge delta-tube of its
    horizontal line.

    c_out: smallest C with every sampled strip point inside the gauge
    C*delta-tube.  c_in: smallest C with every sampled tube point inside
    the C*delta-thickened, C*sqrt(delta)-widened strip.
    """
    rng = make_rng(seed)
    a, b, c = ell.a, ell.b, ell.c
    rho = math.sqrt(delta)
    # dense spine of the embedded line, physical heights [-0.2, 1.2]
    ts = np.arange(-0.2, 1.2 + delta / 8.0, delta / 8.0)
    spine = np.stack([a + c * ts, ts, (b + a * ts) / 2.0], axis=1)

    t = rng.uniform(0.0, 1.0, size=n_samples)
    u = rng.uniform(-rho, rho, size=n_samples)
    g = rng.standard_normal((n_samples, 3))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    g *= delta * rng.uniform(0.0, 1.0, size=n_samples)[:, None] ** (1.0 / 3.0)
    pts = np.stack([a + c * t + u, b + a * t - u * t, t], axis=1) + g
    emb = np.stack([pts[:, 0], pts[:, 2], pts[:, 1] / 2.0], axis=1)
    c_out = 0.0
    for q in emb:
        d = q[None, :] - spine
        z = q[2] - spine[:, 2] + 0.5 * (-spine[:, 0] * q[1] + spine[:, 1] * q[0])
        r2 = d[:, 0] ** 2 + d[:, 1] ** 2
        gauge = float(np.min((r2 * r2 + 16.0 * z * z) ** 0.25))
        c_out = max(c_out, gauge / delta)

    # gauge-ball offsets around spine points, by rejection
    c_in = 0.0
    accepted = 0
    while accepted < n_samples:
        m = 2 * (n_samples - accepted)
        w = rng.uniform(-delta, delta, size=(m, 2))
        zeta = rng.uniform(-delta ** 2 / 4.0, delta ** 2 / 4.0, size=m)
        gsq = w[:, 0] ** 2 + w[:, 1] ** 2
        ok = (gsq * gsq + 16.0 * zeta ** 2) ** 0.25 <= delta
        w, zeta = w[ok], zeta[ok]
        s = rng.uniform(0.0, 1.0, size=len(w))
        p1 = a + c * s
        p2 = s
        p3 = (b + a * s) / 2.0
        q1 = p1 + w[:, 0]
        q2 = p2 + w[:, 1]
        q3 = p3 + zeta + 0.5 * (p1 * w[:, 1] - p2 * w[:, 0])
        # back to strip coordinates: x = q1, y = 2*q3, z = q2
        tq = np.clip(q2, 0.0, 1.0)
        dx = q1 - (a + c * tq)
        dy = 2.0 * q3 - (b + a * tq)
        dz = q2 - tq
        uu = (dx - tq * dy) / (1.0 + tq * tq)
        rx = dx - uu
        ry = dy + uu * tq
        res = np.sqrt(rx * rx + ry * ry + dz * dz)
        cand = np.maximum(np.abs(uu) / rho, res / delta)
        if len(cand):
            c_in = max(c_in, float(np.max(cand)))
        accepted += len(w)
    return c_in, c_out
