"""Union measures, shadings, horizontal-tube decompositions, and the
regular-shading refinement.

Rasterization is slab-by-slab: a voxel is set iff its center lies within
delta of some strip's slice tube at the voxel's own height.  Shadings
select horizontal delta x rho x delta tubes (delta-slabs of a strip, with
geometry frozen at the slab midheight).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import (
    mc_membership,
    raster_family,
    raster_shading,
    raster_slice,
    splat_planks,
)
from .duality import frame_at, pi_t_basis, slice_tube
from .errors import GridTooLarge
from .family import StripFamily
from .geom_core import strip_membership
from .rng import make_rng

MAX_CELLS = 2 ** 30


@dataclass
class OccupancyGrid:
    origin: np.ndarray
    h: float
    dims: tuple[int, int, int]
    bits: np.ndarray

    def measure(self) -> float:
        return self.h ** 3 * float(np.count_nonzero(self.bits))


def _param_arrays(family: StripFamily):
    pts = family.parameter_points
    return (np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]),
            np.ascontiguousarray(pts[:, 2]))


def _unit_grid(h: float) -> tuple[int, OccupancyGrid]:
    n = int(round(1.0 / h))
    if n ** 3 > MAX_CELLS:
        raise GridTooLarge(f"{n}^3 cells exceed the budget; coarsen h")
    bits = np.zeros((n, n, n), dtype=np.bool_)
    return n, OccupancyGrid(origin=np.zeros(3), h=h, dims=(n, n, n), bits=bits)


def rasterize(family: StripFamily, h: float) -> OccupancyGrid:
    """Occupancy of the strip union over [0,1]^3 at resolution h <= delta/2."""
    if h > family.delta / 2.0 + 1e-15:
        raise ValueError("h must be <= delta/2")
    n, grid = _unit_grid(h)
    if len(family) == 0:
        return grid
    pa, pb, pc = _param_arrays(family)
    raster_family(grid.bits, pa, pb, pc, family.delta, family.rho, h, n, n, n)
    return grid


def mc_union_measure(family: StripFamily, n: int, seed: int) -> tuple[float, float]:
    """Monte Carlo estimate (value, stderr) of the union measure."""
    if n < 10 ** 4:
        raise ValueError("n must be >= 1e4")
    if len(family) == 0:
        return 0.0, 0.0
    rng = make_rng(seed)
    samples = rng.uniform(0.0, 1.0, size=(n, 3))
    pa, pb, pc = _param_arrays(family)
    hits = mc_membership(samples, pa, pb, pc, family.delta, family.rho)
    p_hat = float(np.mean(hits))
    return p_hat, math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n)


def slice_measure(family: StripFamily, t: float, h2: float,
                  clip: bool = True) -> float:
    """Area of the slice of the strip union at height t, by 2D rasterization.

    clip=True restricts to the unit square (consistent with rasterize);
    clip=False rasters the full slice over its own bounding box.
    """
    if h2 > family.delta / 2.0 + 1e-15:
        raise ValueError("h2 must be <= delta/2")
    if len(family) == 0:
        return 0.0
    delta, rho = family.delta, family.rho
    pa, pb, pc = _param_arrays(family)
    if clip:
        ox = oy = 0.0
        nx = ny = int(round(1.0 / h2))
    else:
        cx = pa + pc * t
        cy = pb + pa * t
        pad = rho * (1.0 + abs(t)) + delta + 2.0 * h2
        ox, oy = float(cx.min() - pad), float(cy.min() - pad)
        nx = int(math.ceil((float(cx.max() + pad) - ox) / h2))
        ny = int(math.ceil((float(cy.max() + pad) - oy) / h2))
    if nx * ny > MAX_CELLS:
        raise GridTooLarge(f"{nx}x{ny} slice cells exceed the budget")
    bits2 = np.zeros((nx, ny), dtype=np.bool_)
    # the kernel forms cy = pb + pa*t, so shifting pa by ox must be
    # compensated in pb to translate the slice plane by (-ox, -oy)
    raster_slice(bits2, t, np.ascontiguousarray(pa - ox),
                 np.ascontiguousarray(pb - oy + ox * t), pc,
                 delta, rho, h2, nx, ny)
    return h2 ** 2 * float(np.count_nonzero(bits2))


def strip_volumes(family: StripFamily, nt: int = 65, nu: int = 33) -> np.ndarray:
    """Per-strip clipped volumes |S cap [0,1]^3|, estimated analytically.

    The slice at height t is a capsule of width 2*delta along the segment
    of length 2*rho*sqrt(1+t^2); its clipped area is approximated by the
    in-square fraction of nu points on the segment.
    """
    delta, rho = family.delta, family.rho
    pts = family.parameter_points
    if len(pts) == 0:
        return np.zeros(0)
    ts = np.linspace(0.0, 1.0, nt)
    us = np.linspace(-rho, rho, nu)
    vols = np.zeros(len(pts))
    for i, (a, b, c) in enumerate(pts):
        cx = a + c * ts
        cy = b + a * ts
        x = cx[:, None] + us[None, :]
        y = cy[:, None] - ts[:, None] * us[None, :]
        inside = (x >= -delta) & (x <= 1.0 + delta) & (y >= -delta) & (y <= 1.0 + delta)
        frac = np.mean(inside, axis=1)
        area = 4.0 * delta * rho * np.sqrt(1.0 + ts * ts) * frac
        vols[i] = float(np.trapezoid(area, ts))
    return vols


def brute_force_strip_volume(family: StripFamily, strip_index: int,
                             h: float) -> float:
    """Reference volume of one strip via the membership predicate on a fine
    subgrid restricted to the strip's bounding slab."""
    strip = family.strips[strip_index]
    delta, rho = strip.delta, strip.rho
    a, b, c = strip.core.a, strip.core.b, strip.core.c
    ts = np.linspace(0.0, 1.0, 9)
    cx = a + c * ts
    cy = b + a * ts
    pad = rho * math.sqrt(2.0) + 2.0 * delta
    x0 = max(float(np.min(cx)) - pad, 0.0)
    x1 = min(float(np.max(cx)) + pad, 1.0)
    y0 = max(float(np.min(cy)) - pad, 0.0)
    y1 = min(float(np.max(cy)) + pad, 1.0)
    xs = np.arange(x0 + h / 2.0, x1, h)
    ys = np.arange(y0 + h / 2.0, y1, h)
    zs = np.arange(h / 2.0, 1.0, h)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    gx, gy = gx.ravel(), gy.ravel()
    count = 0
    # same t-net as strip_membership, vectorized over the (x, y) plane
    for z in zs:
        best = np.full(gx.shape, np.inf)
        for k in range(-4, 5):
            t = z + k * delta / 4.0
            if t < 0.0 or t > 1.0:
                continue
            dx = gx - (a + c * t)
            dy = gy - (b + a * t)
            u = np.clip((dx - t * dy) / (1.0 + t * t), -rho, rho)
            rx = dx - u
            ry = dy + u * t
            resid = np.sqrt(rx * rx + ry * ry + (z - t) ** 2)
            np.minimum(best, resid, out=best)
        count += int(np.count_nonzero(best <= delta))
    return count * h ** 3


@dataclass(frozen=True)
class HTube:
    """Horizontal delta x rho x delta tube: slab-restricted slice tube."""

    strip_index: int
    t_index: int
    t: float
    center: np.ndarray
    direction: np.ndarray
    half_length: float
    thickness: float

    def center3(self) -> np.ndarray:
        return np.array([self.center[0], self.center[1], self.t])


def n_slabs(delta: float) -> int:
    return int(math.ceil(1.0 / delta - 1e-12))


def decompose_htubes(strip_index: int, family: StripFamily) -> list[HTube]:
    """The ceil(1/delta) horizontal tubes of one strip, one per delta-slab."""
    delta = family.delta
    strip = family.strips[strip_index]
    out = []
    for k in range(n_slabs(delta)):
        t = (k + 0.5) * delta
        st = slice_tube(strip, min(t, 1.0))
        out.append(HTube(strip_index=strip_index, t_index=k, t=t,
                         center=st.center, direction=st.direction,
                         half_length=st.half_length, thickness=st.thickness))
    return out


@dataclass
class Shading:
    """Per-strip selections of horizontal-tube slab indices."""

    selected: dict[int, set[int]] = field(default_factory=dict)

    def density(self, strip_index: int, delta: float) -> float:
        return len(self.selected.get(strip_index, ())) * delta

    def min_density(self, family: StripFamily) -> float:
        if len(family) == 0:
            return 0.0
        return min(self.density(i, family.delta) for i in range(len(family)))

    def total_count(self) -> int:
        return sum(len(v) for v in self.selected.values())

    def mask(self, n_strips: int, slabs: int) -> np.ndarray:
        m = np.zeros((n_strips, slabs), dtype=np.bool_)
        for i, ks in self.selected.items():
            for k in ks:
                m[i, k] = True
        return m

    def to_json(self) -> str:
        payload = {"selected": {str(i): sorted(v) for i, v in self.selected.items()}}
        return json.dumps(payload, separators=(",", ":"))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def from_json(cls, text: str) -> "Shading":
        payload = json.loads(text)
        sel = {int(i): set(int(k) for k in ks)
               for i, ks in payload["selected"].items()}
        return cls(selected=sel)

    @classmethod
    def load(cls, path) -> "Shading":
        with open(path) as fh:
            return cls.from_json(fh.read())


def make_shading(family: StripFamily, mode: str, lam: float | None = None,
                 seed: int = 0, box=None) -> Shading:
    """full: every slab; random: each slab kept with probability lam;
    region: slabs whose tube center falls inside box."""
    slabs = n_slabs(family.delta)
    sel: dict[int, set[int]] = {}
    if mode == "full":
        for i in range(len(family)):
            sel[i] = set(range(slabs))
    elif mode == "random":
        if lam is None or not 0.0 < lam <= 1.0:
            raise ValueError("random mode needs lam in (0,1]")
        rng = make_rng(seed)
        keep = rng.uniform(0.0, 1.0, size=(len(family), slabs)) < lam
        for i in range(len(family)):
            sel[i] = set(np.nonzero(keep[i])[0].tolist())
    elif mode == "region":
        if box is None:
            raise ValueError("region mode needs a box")
        (x0, x1), (y0, y1), (z0, z1) = box
        for i in range(len(family)):
            ks = set()
            for tube in decompose_htubes(i, family):
                cx, cy = tube.center
                if x0 <= cx <= x1 and y0 <= cy <= y1 and z0 <= tube.t <= z1:
                    ks.add(tube.t_index)
            sel[i] = ks
    else:
        raise ValueError(f"unknown shading mode {mode!r}")
    return Shading(selected=sel)


def _saturate(family: StripFamily, sel: np.ndarray) -> np.ndarray:
    """Add every slab of every strip whose tube center is within 2*delta of
    some selected tube (of any strip)."""
    delta = family.delta
    slabs = sel.shape[1]
    pts = family.parameter_points
    ts = (np.arange(slabs) + 0.5) * delta
    # centers[i, k] = slice-tube center of strip i in slab k
    cx = pts[:, 0:1] + pts[:, 2:3] * ts[None, :]
    cy = pts[:, 1:2] + pts[:, 0:1] * ts[None, :]
    out = sel.copy()
    dirs = np.stack([np.ones_like(ts), -ts], axis=1)
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    half = family.rho * np.sqrt(1.0 + ts * ts)
    for k in range(slabs):
        cand = np.stack([cx[:, k], cy[:, k]], axis=1)
        for kp in range(max(0, k - 1), min(slabs, k + 2)):
            dz = (k - kp) * delta
            lim2 = 4.0 * delta * delta - dz * dz
            rows = np.nonzero(sel[:, kp])[0]
            if len(rows) == 0:
                continue
            segc = np.stack([cx[rows, kp], cy[rows, kp]], axis=1)
            d = cand[:, None, :] - segc[None, :, :]
            u = d @ dirs[kp]
            np.clip(u, -half[kp], half[kp], out=u)
            res = d - u[:, :, None] * dirs[kp][None, None, :]
            dist2 = np.min(np.sum(res * res, axis=2), axis=1)
            out[:, k] |= dist2 <= lim2
    return out


def regularize(family: StripFamily, shading: Shading
               ) -> tuple[StripFamily, Shading, int]:
    """Saturate the shading against its own union, then keep the dominant
    dyadic class of per-strip tube counts.

    Returns (subfamily, reindexed shading, representative tube count).  The
    kept class has max/min count ratio <= 2 and retains at least a
    1/(2*log2(1/delta)) fraction of the saturated (hence of the input)
    selected mass.
    """
    slabs = n_slabs(family.delta)
    sel = shading.mask(len(family), slabs)
    if not sel.any():
        raise ValueError("shading is empty")
    sat = _saturate(family, sel)
    counts = sat.sum(axis=1)
    classes = np.full(len(family), -1, dtype=np.int64)
    nz = counts > 0
    classes[nz] = np.floor(np.log2(counts[nz])).astype(np.int64)
    best_class, best_mass = -1, -1
    for j in np.unique(classes[nz]):
        mass = int(counts[classes == j].sum())
        if mass > best_mass:
            best_class, best_mass = int(j), mass
    keep = np.nonzero(classes == best_class)[0]
    sub = StripFamily.from_points(family.delta, family.rho,
                                  family.parameter_points[keep])
    new_sel = {new_i: set(np.nonzero(sat[old_i])[0].tolist())
               for new_i, old_i in enumerate(keep)}
    mu = int(counts[keep].max())
    return sub, Shading(selected=new_sel), mu


def rasterize_shading(family: StripFamily, shading: Shading,
                      h: float) -> OccupancyGrid:
    """Occupancy of the union of the shading's selected horizontal tubes."""
    if h > family.delta / 2.0 + 1e-15:
        raise ValueError("h must be <= delta/2")
    n, grid = _unit_grid(h)
    if len(family) == 0:
        return grid
    sel = shading.mask(len(family), n_slabs(family.delta))
    pa, pb, pc = _param_arrays(family)
    raster_shading(grid.bits, pa, pb, pc, sel, family.delta, family.rho,
                   h, n, n, n)
    return grid


def kakeya_ratio(family: StripFamily, shading: Shading, h: float
                 ) -> tuple[float, float, float]:
    """ratio = |union of selected tubes| / (lambda^6 * sum |S|), with
    lambda the minimum shading density.  Returns (ratio, lhs, rhs_basis)."""
    lhs = rasterize_shading(family, shading, h).measure()
    lam = shading.min_density(family)
    total = float(np.sum(strip_volumes(family)))
    rhs = lam ** 6 * total
    if rhs == 0.0:
        return math.inf, lhs, rhs
    return lhs / rhs, lhs, rhs


def plank_union_measure(family: StripFamily, t: float, h: float
                        ) -> tuple[float, float]:
    """Volume of the union of wave-packet planks at the family's parameter
    points, and the area of its pi_t projection."""
    if h > family.delta / 2.0 + 1e-15:
        raise ValueError("h must be <= delta/2")
    if len(family) == 0:
        return 0.0, 0.0
    delta, rho = family.delta, family.rho
    fr = frame_at(t)
    long_ax = fr.xi
    mid_ax = fr.xi_prime / np.linalg.norm(fr.xi_prime)
    short_ax = np.cross(long_ax, mid_ax)
    centers = np.ascontiguousarray(family.parameter_points)
    reach = (np.abs(long_ax) + rho * np.abs(mid_ax)
             + delta * np.abs(short_ax) + h)
    lo = centers.min(axis=0) - reach
    hi = centers.max(axis=0) + reach
    dims = np.maximum(np.ceil((hi - lo) / h).astype(int), 1)
    if int(np.prod(dims)) > MAX_CELLS:
        raise GridTooLarge("plank grid exceeds the cell budget")
    bits = np.zeros(tuple(dims), dtype=np.bool_)
    b1, b2 = pi_t_basis(t)
    pc = centers @ np.stack([b1, b2], axis=1)
    h2 = h
    plo = pc.min(axis=0) - (rho + delta + h2)
    phi = pc.max(axis=0) + (rho + delta + h2)
    pdims = np.maximum(np.ceil((phi - plo) / h2).astype(int), 1)
    proj = np.zeros(tuple(pdims), dtype=np.bool_)
    axes_flat = np.concatenate([long_ax, mid_ax, short_ax])
    splat_planks(bits, proj, centers, axes_flat, rho, delta, h / 2.0,
                 lo[0], lo[1], lo[2], h, dims[0], dims[1], dims[2],
                 b1[0], b1[1], b1[2], b2[0], b2[1], b2[2],
                 plo[0], plo[1], h2, pdims[0], pdims[1])
    volume3d = h ** 3 * float(np.count_nonzero(bits))
    projected_area = h2 ** 2 * float(np.count_nonzero(proj))
    return volume3d, projected_area

def slice_correspondence(family: StripFamily, t: float, h: float
                         ) -> tuple[float, float, float]:
    """Compare the slice of the strip union at height t with the projected
    area of the plank union.  Returns (ratio, slice_area, projected_area);
    ratio uses unit normalization (no constant rescaling).  Both sides are
    unclipped: the correspondence is translation invariant, so the unit
    cube plays no role here."""
    slice_area = slice_measure(family, t, h, clip=False)
    _, projected_area = plank_union_measure(family, t, h)
    if projected_area == 0.0:
        return math.inf, slice_area, projected_area
    return slice_area / projected_area, slice_area, projected_area
