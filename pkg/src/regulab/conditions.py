"""The two-dimensional ball condition, in counting and volume form, plus
essential-disjointness diagnostics.

The union W of the family's dual delta-tubes must satisfy, for every
radius r in [delta, 1] and every 4-ball B_r,
|W cap B_r| * delta^-4 <= C (r/delta)^2; equivalently the dual centers
obey dyadic counting bounds r/delta (for r <= rho) and r^2/(delta*rho)
(for r >= rho).  Candidate ball centers are the data points themselves
with doubled radius: any r-ball holding k points sits inside some 2r-ball
centered at one of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ._kernels import tube_hits4
from .errors import InsufficientSamples
from .family import StripFamily, _counting_bound
from .rng import make_rng


def dyadic_radii(delta: float) -> list[float]:
    """Radii delta, 2*delta, ..., up to 1."""
    out = []
    r = delta
    while r <= 1.0 + 1e-12:
        out.append(min(r, 1.0))
        r *= 2.0
    return out


@dataclass
class RadiusRecord:
    r: float
    worst_center: np.ndarray
    observed: float
    bound: float
    passes: bool
    stderr: float = 0.0

    @property
    def ratio(self) -> float:
        return self.observed / self.bound if self.bound > 0 else math.inf


@dataclass
class BallConditionReport:
    form: str
    records: list[RadiusRecord] = field(default_factory=list)

    @property
    def overall_pass(self) -> bool:
        return all(rec.passes for rec in self.records)

    @property
    def worst_ratio(self) -> float:
        return max((rec.ratio for rec in self.records), default=0.0)

    def record_at(self, r: float) -> RadiusRecord:
        return min(self.records, key=lambda rec: abs(rec.r - r))


def ball_condition_count(family: StripFamily, constant: float = 100.0) -> BallConditionReport:
    """Dyadic counting check over the dual centers.

    For each dyadic r the maximum number of centers in any 2r-ball around a
    data point is compared against constant * (counting bound at r).
    """
    if constant < 1.0:
        raise ValueError("constant must be >= 1")
    centers = family.dual_centers
    report = BallConditionReport(form="count")
    if len(centers) == 0:
        for r in dyadic_radii(family.delta):
            bound = constant * _counting_bound(r, family.delta, family.rho)
            report.records.append(RadiusRecord(r, np.zeros(4), 0.0, bound, True))
        return report
    tree = cKDTree(centers)
    for r in dyadic_radii(family.delta):
        counts = tree.query_ball_point(centers, 2.0 * r, return_length=True)
        worst = int(np.argmax(counts))
        observed = float(counts[worst])
        bound = constant * _counting_bound(r, family.delta, family.rho)
        report.records.append(
            RadiusRecord(r, centers[worst], observed, bound, observed <= bound)
        )
    return report


def _tube_hits(samples: np.ndarray, centers: np.ndarray, rho: float,
               delta: float) -> np.ndarray:
    """Boolean mask: sample lies in some dual tube among centers."""
    if len(centers) == 0:
        return np.zeros(len(samples), dtype=bool)
    hits = tube_hits4(np.ascontiguousarray(samples),
                      np.ascontiguousarray(centers), rho, delta)
    return hits.astype(bool)


def _ball_volume4(r: float) -> float:
    return math.pi ** 2 / 2.0 * r ** 4


def ball_condition_volume(family: StripFamily, n_mc: int, seed: int,
                          constant: float = 100.0,
                          top_k: int = 12) -> BallConditionReport:
    """Monte Carlo volume check of |W cap B_r| delta^-4 <= constant (r/delta)^2.

    The constant matches the counting form: one dual tube contributes about
    (4pi/3) 2 sqrt(2) rho delta^3 of volume, i.e. ~1.5 counting units after
    the (r/delta)^2 vs r^2/(delta rho) bound rescaling, so a shared constant
    keeps the two forms' verdicts aligned.

    Candidate centers are the dual centers ranked by their 2r count; only
    the top_k per radius are sampled (the count is a monotone surrogate for
    the trapped volume, so the max is among them).  Raises
    InsufficientSamples when the standard error at the decision boundary
    exceeds a quarter of the bound.
    """
    if n_mc < 10 ** 4:
        raise ValueError("n_mc must be >= 1e4")
    delta, rho = family.delta, family.rho
    centers = family.dual_centers
    report = BallConditionReport(form="volume")
    if len(centers) == 0:
        for r in dyadic_radii(delta):
            bound = constant * (r / delta) ** 2
            report.records.append(RadiusRecord(r, np.zeros(4), 0.0, bound, True))
        return report
    tree = cKDTree(centers)
    for ridx, r in enumerate(dyadic_radii(delta)):
        counts = tree.query_ball_point(centers, 2.0 * r, return_length=True)
        order = np.argsort(counts)[::-1][:top_k]
        bound = constant * (r / delta) ** 2
        best = RadiusRecord(r, centers[order[0]], 0.0, bound, True)
        for rank, ci in enumerate(order):
            c = centers[ci]
            rng = make_rng(seed, stream=ridx * 10007 + int(ci))
            g = rng.standard_normal((n_mc, 4))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            radii = r * rng.uniform(0.0, 1.0, size=n_mc) ** 0.25
            samples = c + g * radii[:, None]
            near = tree.query_ball_point(c, r + rho * 1.5 + delta)
            hits = _tube_hits(samples, centers[near], rho, delta)
            p_hat = float(np.mean(hits))
            vol = p_hat * _ball_volume4(r)
            observed = vol / delta ** 4
            stderr = math.sqrt(max(p_hat * (1.0 - p_hat), 1e-300) / n_mc)
            stderr_obs = stderr * _ball_volume4(r) / delta ** 4
            if observed > best.observed:
                best = RadiusRecord(r, c, observed, bound, observed <= bound,
                                    stderr=stderr_obs)
        if abs(best.observed - best.bound) < 2.0 * best.stderr and \
                best.stderr > 0.25 * best.bound:
            raise InsufficientSamples(
                f"stderr {best.stderr:.3g} too large near bound {best.bound:.3g} at r={r}"
            )
        report.records.append(best)
    return report


def disjointness_ratio(family: StripFamily, grid_resolution: float) -> float:
    """|union of strips| divided by the sum of per-strip volumes.

    Near 1 for essentially disjoint families, small for concentrated ones.
    """
    from .measure import rasterize, strip_volumes

    if grid_resolution > family.delta / 2.0 + 1e-15:
        raise ValueError("grid_resolution must be <= delta/2")
    grid = rasterize(family, grid_resolution)
    total = float(np.sum(strip_volumes(family)))
    if total == 0.0:
        return 0.0
    return grid.measure() / total
