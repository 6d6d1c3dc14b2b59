"""Strip families: the SL2 example, random and clustered generators, the
random-sampling refinement, and the family JSON format.

Family file schema::

    {"delta": D, "rho": R, "strips": [{"a":..., "b":..., "c":...}, ...]}

Readers reject files with rho outside [delta, sqrt(delta)*(1+1e-9)].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadScale, GenerationExhausted
from .geom_core import RHO_SLACK, LLine, RegulusStrip
from .rng import make_rng

#: parameter box used by gen_random_family
RANDOM_BOX = ((0.5, 2.0), (-1.0, 0.0), (-1.0, 0.0))


@dataclass
class StripFamily:
    delta: float
    rho: float
    strips: list[RegulusStrip] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.strips)

    @property
    def parameter_points(self) -> np.ndarray:
        """The set E(S): one (a,b,c) point per strip, shape (n, 3)."""
        if not self.strips:
            return np.zeros((0, 3))
        return np.array([[s.core.a, s.core.b, s.core.c] for s in self.strips])

    @property
    def dual_centers(self) -> np.ndarray:
        """breve images of the cores, shape (n, 4)."""
        if not self.strips:
            return np.zeros((0, 4))
        pts = self.parameter_points
        return np.column_stack([pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 0]])

    @classmethod
    def from_points(cls, delta: float, rho: float, points) -> "StripFamily":
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        strips = [RegulusStrip(LLine(*p), delta, rho) for p in points]
        return cls(delta=delta, rho=rho, strips=strips)

    def to_json(self) -> str:
        payload = {
            "delta": self.delta,
            "rho": self.rho,
            "strips": [
                {"a": s.core.a, "b": s.core.b, "c": s.core.c} for s in self.strips
            ],
        }
        return json.dumps(payload, indent=None, separators=(",", ":"))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def from_json(cls, text: str) -> "StripFamily":
        payload = json.loads(text)
        delta = float(payload["delta"])
        rho = float(payload["rho"])
        if not delta <= rho <= math.sqrt(delta) * (1.0 + RHO_SLACK):
            raise ValueError(
                f"family file has rho={rho} outside [delta, sqrt(delta)] for delta={delta}"
            )
        pts = [(s["a"], s["b"], s["c"]) for s in payload["strips"]]
        return cls.from_points(delta, rho, pts)

    @classmethod
    def load(cls, path) -> "StripFamily":
        with open(path) as fh:
            return cls.from_json(fh.read())


def gen_sl2_example(delta: float, box, seed: int) -> StripFamily:
    """Jittered sqrt(delta)-grid of parameter points inside box.

    One strip per sqrt(delta)-cell, so each sqrt(delta)-ball of the
    parameter region holds about one strip.  Grid points are k*sqrt(delta)
    in [lo, hi) per axis, each jittered by at most sqrt(delta)/10.
    """
    if delta > 1.0 / 16.0:
        raise BadScale(f"delta = {delta} too coarse for the grid example")
    step = math.sqrt(delta)
    axes = []
    for lo, hi in box:
        k0 = math.ceil(lo / step - 1e-12)
        k1 = math.ceil(hi / step - 1e-12)
        axes.append(step * np.arange(k0, k1))
    ga, gb, gc = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([ga.ravel(), gb.ravel(), gc.ravel()])
    rng = make_rng(seed)
    pts = pts + rng.uniform(-step / 10.0, step / 10.0, size=pts.shape)
    return StripFamily.from_points(delta, step, pts)


def _counting_bound(r: float, delta: float, rho: float) -> float:
    """Discrete ball-condition bound: r/delta below rho, r^2/(delta*rho) above."""
    if r <= rho:
        return r / delta
    return r * r / (delta * rho)


def _counting_ok(points: np.ndarray, candidate: np.ndarray, delta: float,
                 rho: float) -> bool:
    """Greedy acceptance test: candidate keeps all dyadic counts within the
    plain (constant-1) counting bounds, which is stricter than the checker."""
    if len(points) == 0:
        return True
    d = np.linalg.norm(points - candidate, axis=1)
    r = delta
    while r <= 1.0 + 1e-12:
        if 1 + int(np.sum(d <= r)) > _counting_bound(r, delta, rho):
            return False
        r *= 2.0
    return True


def gen_random_family(delta: float, rho: float, n: int, seed: int,
                      max_rejects: int = 10000) -> StripFamily:
    """Greedy rejection sampler over RANDOM_BOX.

    A candidate is kept only while the family stays delta-separated and the
    discrete dyadic ball-condition counts stay within the plain bounds.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not delta <= rho <= math.sqrt(delta) * (1.0 + RHO_SLACK):
        raise ValueError("need delta <= rho <= sqrt(delta)")
    rng = make_rng(seed)
    lows = np.array([b[0] for b in RANDOM_BOX])
    highs = np.array([b[1] for b in RANDOM_BOX])
    kept: list[np.ndarray] = []
    centers4: list[np.ndarray] = []
    rejects = 0
    while len(kept) < n:
        if rejects >= max_rejects:
            raise GenerationExhausted(
                f"{rejects} consecutive rejections at n={len(kept)} (target {n})"
            )
        p = rng.uniform(lows, highs)
        c4 = np.array([p[0], p[1], p[2], p[0]])
        arr = np.array(kept) if kept else np.zeros((0, 3))
        c4s = np.array(centers4) if centers4 else np.zeros((0, 4))
        separated = len(arr) == 0 or np.min(np.linalg.norm(arr - p, axis=1)) >= delta
        if separated and _counting_ok(c4s, c4, delta, rho):
            kept.append(p)
            centers4.append(c4)
            rejects = 0
        else:
            rejects += 1
    return StripFamily.from_points(delta, rho, np.array(kept))


def gen_clustered_family(delta: float, rho: float, r: float, n: int,
                         seed: int) -> StripFamily:
    """n strips whose dual centers all fall in one 4-ball of radius r.

    The cluster sits on the {x1 = x4} hyperplane (cores are l-lines), so
    only the 3 free coordinates are sampled; with n above the counting
    bound the family violates the ball condition at radius r.
    """
    if not delta <= rho <= math.sqrt(delta) * (1.0 + RHO_SLACK):
        raise ValueError("need delta <= rho <= sqrt(delta)")
    if not delta <= r <= 1.0:
        raise ValueError("need delta <= r <= 1")
    rng = make_rng(seed)
    center = np.array([1.0, -0.4, -0.1])
    # keep the 4D breve offsets inside radius r: |(da,db,dc,da)| <= r
    offs = rng.uniform(-1.0, 1.0, size=(n, 3))
    norms = np.sqrt(2.0 * offs[:, 0] ** 2 + offs[:, 1] ** 2 + offs[:, 2] ** 2)
    scale = r * rng.uniform(0.0, 1.0, size=n) ** (1.0 / 3.0)
    pts = center + offs * (scale / np.maximum(norms, 1e-12))[:, None]
    return StripFamily.from_points(delta, rho, pts)


def sample_refine(family: StripFamily, delta_new: float, rho_new: float,
                  seed: int) -> StripFamily:
    """Bernoulli thinning to a coarser (delta', rho') family.

    Each strip is kept independently with probability
    min(1, (delta/delta')*(rho/rho') / log2(1/delta)); kept cores are
    re-emitted as (delta', rho') strips.
    """
    if delta_new < family.delta or rho_new < family.rho:
        raise ValueError("need delta' >= delta and rho' >= rho")
    p = keep_probability(family.delta, family.rho, delta_new, rho_new)
    if p >= 1.0:
        return StripFamily.from_points(delta_new, rho_new, family.parameter_points)
    rng = make_rng(seed)
    mask = rng.uniform(0.0, 1.0, size=len(family)) < p
    pts = family.parameter_points[mask]
    return StripFamily.from_points(delta_new, rho_new, pts)


def keep_probability(delta: float, rho: float, delta_new: float,
                     rho_new: float) -> float:
    """The thinning probability of sample_refine, clamped to 1."""
    p = (delta / delta_new) * (rho / rho_new) / math.log2(1.0 / delta)
    return min(1.0, p)
