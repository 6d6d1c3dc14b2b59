"""Numba kernels for rasterization and Monte Carlo membership.

All kernels treat a strip's slab cross-section as the 2D tube
(a + c*t, b + a*t) + u*(1, -t), |u| <= rho, thickened by delta; a grid
cell is set iff its center lies in some cross-section.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange


@njit(cache=True)
def _mark_slab(bits, k, t, pa, pb, pc, delta, rho, h, nx, ny):
    """Set cells of slab k whose centers are delta-close to some slice tube."""
    n = pa.shape[0]
    inv = 1.0 / (1.0 + t * t)
    margin = delta + 0.75 * h
    for i in range(n):
        cx = pa[i] + pc[i] * t
        cy = pb[i] + pa[i] * t
        ex0 = cx - rho
        ex1 = cx + rho
        ey0 = cy - rho * t
        ey1 = cy + rho * t
        if ey0 > ey1:
            ey0, ey1 = ey1, ey0
        ix0 = int((ex0 - margin) / h)
        ix1 = int((ex1 + margin) / h) + 1
        iy0 = int((ey0 - margin) / h)
        iy1 = int((ey1 + margin) / h) + 1
        if ix0 < 0:
            ix0 = 0
        if iy0 < 0:
            iy0 = 0
        if ix1 > nx:
            ix1 = nx
        if iy1 > ny:
            iy1 = ny
        d2 = delta * delta
        for ix in range(ix0, ix1):
            px = (ix + 0.5) * h
            dx = px - cx
            for iy in range(iy0, iy1):
                if bits[ix, iy, k]:
                    continue
                py = (iy + 0.5) * h
                dy = py - cy
                u = (dx - t * dy) * inv
                if u > rho:
                    u = rho
                elif u < -rho:
                    u = -rho
                rx = dx - u
                ry = dy + u * t
                if rx * rx + ry * ry <= d2:
                    bits[ix, iy, k] = True


@njit(cache=True, parallel=True)
def raster_family(bits, pa, pb, pc, delta, rho, h, nx, ny, nz):
    """Voxel occupancy of the strip union over [0,1]^3 at resolution h."""
    for k in prange(nz):
        t = (k + 0.5) * h
        _mark_slab(bits, k, t, pa, pb, pc, delta, rho, h, nx, ny)


@njit(cache=True, parallel=True)
def raster_shading(bits, pa, pb, pc, sel, delta, rho, h, nx, ny, nz):
    """Voxel occupancy of a union of selected horizontal tubes.

    sel is an (n_strips, n_slabs) boolean mask over delta-slabs; tube
    geometry is frozen at the slab midheight t_k = (slab + 1/2) * delta.
    """
    n_slabs = sel.shape[1]
    for k in prange(nz):
        z = (k + 0.5) * h
        slab = int(z / delta)
        if slab >= n_slabs:
            slab = n_slabs - 1
        t = (slab + 0.5) * delta
        pa_s = pa[sel[:, slab]]
        pb_s = pb[sel[:, slab]]
        pc_s = pc[sel[:, slab]]
        _mark_slab(bits, k, t, pa_s, pb_s, pc_s, delta, rho, h, nx, ny)


@njit(cache=True)
def raster_slice(bits2, t, pa, pb, pc, delta, rho, h, nx, ny):
    """2D occupancy of the slice of the strip union at height t."""
    tmp = bits2.reshape(nx, ny, 1)
    _mark_slab(tmp, 0, t, pa, pb, pc, delta, rho, h, nx, ny)


@njit(cache=True)
def mc_membership(samples, pa, pb, pc, delta, rho):
    """For each sample point in [0,1]^3, 1 if inside some strip slice."""
    m = samples.shape[0]
    n = pa.shape[0]
    out = np.zeros(m, dtype=np.uint8)
    d2 = delta * delta
    for j in range(m):
        px, py, t = samples[j, 0], samples[j, 1], samples[j, 2]
        inv = 1.0 / (1.0 + t * t)
        reach2 = (rho * np.sqrt(1.0 + t * t) + delta) ** 2
        for i in range(n):
            cx = pa[i] + pc[i] * t
            cy = pb[i] + pa[i] * t
            dx = px - cx
            dy = py - cy
            if dx * dx + dy * dy > reach2:
                continue
            u = (dx - t * dy) * inv
            if u > rho:
                u = rho
            elif u < -rho:
                u = -rho
            rx = dx - u
            ry = dy + u * t
            if rx * rx + ry * ry <= d2:
                out[j] = 1
                break
    return out


@njit(cache=True)
def splat_planks(bits, proj, centers, axes_flat, rho, delta, step,
                 ox, oy, oz, h, nx, ny, nz,
                 b1x, b1y, b1z, b2x, b2y, b2z, pox, poy, h2, mx, my):
    """Splat 1 x rho x delta planks into a 3D grid and their pi_t image
    into a 2D grid.

    axes_flat holds the shared orthonormal frame rows (long, mid, short);
    plank points are center + y1*long + y2*mid + y3*short sampled at
    spacing step along each axis.
    """
    lx, ly, lz = axes_flat[0], axes_flat[1], axes_flat[2]
    mx_, my_, mz_ = axes_flat[3], axes_flat[4], axes_flat[5]
    sx, sy, sz = axes_flat[6], axes_flat[7], axes_flat[8]
    n1 = int(2.0 / step) + 1
    n2 = int(2.0 * rho / step) + 1
    n3 = int(2.0 * delta / step) + 1
    n = centers.shape[0]
    for i in range(n):
        cx, cy, cz = centers[i, 0], centers[i, 1], centers[i, 2]
        for a1 in range(n1):
            y1 = -1.0 + a1 * (2.0 / max(n1 - 1, 1))
            qx = cx + y1 * lx
            qy = cy + y1 * ly
            qz = cz + y1 * lz
            for a2 in range(n2):
                y2 = -rho + a2 * (2.0 * rho / max(n2 - 1, 1))
                wx = qx + y2 * mx_
                wy = qy + y2 * my_
                wz = qz + y2 * mz_
                for a3 in range(n3):
                    y3 = -delta + a3 * (2.0 * delta / max(n3 - 1, 1))
                    px = wx + y3 * sx
                    py = wy + y3 * sy
                    pz = wz + y3 * sz
                    ix = int((px - ox) / h)
                    iy = int((py - oy) / h)
                    iz = int((pz - oz) / h)
                    if 0 <= ix < nx and 0 <= iy < ny and 0 <= iz < nz:
                        bits[ix, iy, iz] = True
                    u = px * b1x + py * b1y + pz * b1z
                    v = px * b2x + py * b2y + pz * b2z
                    ju = int((u - pox) / h2)
                    jv = int((v - poy) / h2)
                    if 0 <= ju < mx and 0 <= jv < my:
                        proj[ju, jv] = True

@njit(cache=True)
def tube_hits4(samples, centers, rho, delta):
    """For each 4D sample, 1 if inside some dual tube among centers."""
    m = samples.shape[0]
    n = centers.shape[0]
    out = np.zeros(m, dtype=np.uint8)
    d2 = delta * delta
    for j in range(m):
        s0, s1, s2, s3 = samples[j, 0], samples[j, 1], samples[j, 2], samples[j, 3]
        for i in range(n):
            e0 = s0 - centers[i, 0]
            e1 = s1 - centers[i, 1]
            e2 = s2 - centers[i, 2]
            e3 = s3 - centers[i, 3]
            u = (e0 - e3) / 2.0
            if u > rho:
                u = rho
            elif u < -rho:
                u = -rho
            rx = e0 - u
            rw = e3 + u
            if rx * rx + e1 * e1 + e2 * e2 + rw * rw <= d2:
                out[j] = 1
                break
    return out
