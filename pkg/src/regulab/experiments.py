"""Scaling experiments over delta, log-log exponent fitting, and corpus
regression checks.

Config schema (JSON)::

    {"experiment": name, "kind": "sl2|random|clustered|single",
     "deltas": [...], "rho": "auto"|value, "box": [[lo,hi],...]|null,
     "lambda": value|null, "method": "grid"|"mc", "res_factor": 0.5,
     "samples": N, "seeds": [...], "n": N|null, "r": "auto"|value|null}

"rho": "auto" means rho = sqrt(delta); "r": "auto" means r = sqrt(delta)
for clustered runs.  Fits are least squares of log2(value) against
log2(delta); rows with stderr/value > 0.1 stay in the CSV but are
excluded from the fit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .conditions import ball_condition_count
from .errors import ConfigError, InsufficientData, InvariantFailure
from .family import (
    StripFamily,
    gen_clustered_family,
    gen_random_family,
    gen_sl2_example,
)
from .geom_core import LLine
from .measure import make_shading, mc_union_measure, rasterize, rasterize_shading

#: default parameter box for sl2 runs
DEFAULT_SL2_BOX = ((0.0, 1.0), (-1.0, 0.5), (-0.5, 0.5))

#: core of the kind=single reference strip
SINGLE_CORE = LLine(0.5, 0.2, 0.0)

SCALING_COLUMNS = ("experiment_name", "delta", "rho", "n_strips",
                   "lambda", "value", "stderr")


@dataclass
class ScalingResult:
    rows: list[tuple] = field(default_factory=list)
    fitted_slope: float = math.nan
    slope_stderr: float = math.nan

    def to_csv(self) -> str:
        lines = [",".join(SCALING_COLUMNS)]
        for name, delta, rho, n, lam, value, stderr in self.rows:
            lam_s = "" if lam is None else f"{lam:.10g}"
            lines.append(f"{name},{delta:.12g},{rho:.12g},{n},{lam_s},"
                         f"{value:.10g},{stderr:.4g}")
        return "\n".join(lines) + "\n"

    def save_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())


def fit_exponent(rows) -> tuple[float, float]:
    """Least-squares slope of log2(value) vs log2(delta) and its stderr.

    rows: iterable of (delta, value, stderr); rows with value <= 0 or
    stderr/value > 0.1 are unusable.  Needs >= 3 usable rows.
    """
    usable = [(d, v) for d, v, se in rows if v > 0 and se / v <= 0.1]
    if len(usable) < 3:
        raise InsufficientData(f"{len(usable)} usable rows, need >= 3")
    x = np.log2([d for d, _ in usable])
    y = np.log2([v for _, v in usable])
    n = len(x)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean())) / sxx
    resid = y - (y.mean() + slope * xc)
    if n > 2:
        sigma2 = float(resid @ resid) / (n - 2)
        stderr = math.sqrt(sigma2 / sxx)
    else:
        stderr = 0.0
    return slope, stderr


_VALID_KINDS = ("sl2", "random", "clustered", "single")


def load_config(source) -> dict:
    """Parse and validate an experiment config (dict, JSON text, or path)."""
    if isinstance(source, dict):
        cfg = dict(source)
    else:
        text = source
        p = Path(str(source))
        if p.exists():
            text = p.read_text()
        try:
            cfg = json.loads(text)
        except (json.JSONDecodeError, TypeError) as exc:
            raise ConfigError(f"config does not parse as JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("experiment", "kind", "deltas"):
        if key not in cfg:
            raise ConfigError(f"config is missing {key!r}")
    if cfg["kind"] not in _VALID_KINDS:
        raise ConfigError(f"unknown kind {cfg['kind']!r}")
    deltas = cfg["deltas"]
    if not isinstance(deltas, list) or not deltas:
        raise ConfigError("deltas must be a nonempty list")
    for d in deltas:
        if not isinstance(d, (int, float)) or not 2 ** -10 <= d < 1:
            raise ConfigError(f"delta {d} outside [2^-10, 1)")
    cfg.setdefault("rho", "auto")
    cfg.setdefault("box", None)
    cfg.setdefault("lambda", None)
    cfg.setdefault("method", "grid")
    if cfg["method"] not in ("grid", "mc"):
        raise ConfigError(f"unknown method {cfg['method']!r}")
    cfg.setdefault("res_factor", 0.5)
    if not 0.0 < cfg["res_factor"] <= 0.5:
        raise ConfigError("res_factor must be in (0, 0.5]")
    cfg.setdefault("samples", 10 ** 5)
    cfg.setdefault("seeds", [0])
    if not isinstance(cfg["seeds"], list) or not cfg["seeds"]:
        raise ConfigError("seeds must be a nonempty list")
    cfg.setdefault("n", None)
    cfg.setdefault("r", None)
    return cfg


def _rho_for(cfg: dict, delta: float) -> float:
    if cfg["rho"] == "auto":
        return math.sqrt(delta)
    return float(cfg["rho"])


def _family_for(cfg: dict, delta: float, seed: int) -> StripFamily:
    kind = cfg["kind"]
    rho = _rho_for(cfg, delta)
    if kind == "sl2":
        box = cfg["box"] if cfg["box"] is not None else DEFAULT_SL2_BOX
        return gen_sl2_example(delta, box, seed)
    if kind == "single":
        return StripFamily.from_points(
            delta, rho, [[SINGLE_CORE.a, SINGLE_CORE.b, SINGLE_CORE.c]])
    if kind == "random":
        n = cfg["n"] if cfg["n"] is not None else 100
        return gen_random_family(delta, rho, int(n), seed)
    r = cfg["r"]
    if r is None or r == "auto":
        r = math.sqrt(delta)
    n = cfg["n"] if cfg["n"] is not None else \
        int(4 * (float(r) / delta) ** 2 * delta / rho) + 8
    return gen_clustered_family(delta, rho, float(r), int(n), seed)


def _measure_value(cfg: dict, family: StripFamily, seed: int
                   ) -> tuple[float, float]:
    lam = cfg["lambda"]
    if lam is not None:
        shading = make_shading(family, "random", lam=float(lam), seed=seed)
        h = cfg["res_factor"] * family.delta
        return rasterize_shading(family, shading, h).measure(), 0.0
    if cfg["method"] == "mc":
        return mc_union_measure(family, int(cfg["samples"]), seed)
    h = cfg["res_factor"] * family.delta
    return rasterize(family, h).measure(), 0.0


def run_scaling(config) -> ScalingResult:
    """Execute a scaling experiment: one row per (delta, seed).

    For sl2 runs the counting ball condition is checked per delta and an
    InvariantFailure is raised if it fails.
    """
    cfg = load_config(config)
    result = ScalingResult()
    fit_rows = []
    for delta in cfg["deltas"]:
        for seed in cfg["seeds"]:
            family = _family_for(cfg, float(delta), int(seed))
            if cfg["kind"] == "sl2":
                report = ball_condition_count(family)
                if not report.overall_pass:
                    raise InvariantFailure(
                        "conditions.ball_condition_count",
                        f"delta={delta} seed={seed} "
                        f"worst ratio {report.worst_ratio:.3g}")
            value, stderr = _measure_value(cfg, family, int(seed))
            result.rows.append((cfg["experiment"], float(delta), family.rho,
                                len(family), cfg["lambda"], value, stderr))
            fit_rows.append((float(delta), value, stderr))
    try:
        slope, sstderr = fit_exponent(fit_rows)
        result.fitted_slope, result.slope_stderr = slope, sstderr
    except InsufficientData:
        pass
    return result


def _label_of(path: Path) -> str:
    return path.stem.split("-")[0].split("_")[0]


def run_regression(corpus_dir) -> dict:
    """Invariant suite over a corpus of committed family files.

    File labels (name up to the first - or _) set expectations: sl2 and
    random families must pass the counting ball condition, clustered
    families must be flagged by it.  Returns a report dict; the caller
    maps report["pass"] to the exit code.
    """
    corpus = Path(corpus_dir)
    if not corpus.is_dir():
        raise ConfigError(f"{corpus} is not a directory")
    files = sorted(corpus.glob("*.json"))
    if not files:
        raise ConfigError(f"no family files in {corpus}")
    checks = []

    def record(path, name, ok, detail=""):
        checks.append({"file": path.name, "check": name,
                       "pass": bool(ok), "detail": detail})

    first_failure = None
    for path in files:
        label = _label_of(path)
        try:
            family = StripFamily.load(path)
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            record(path, "family.load", False, str(exc))
            first_failure = first_failure or "family.load"
            continue
        record(path, "family.load", True)

        pts = family.parameter_points
        sep_ok = True
        if len(pts) > 1:
            from scipy.spatial import cKDTree
            d, _ = cKDTree(pts).query(pts, k=2)
            sep_ok = bool(np.min(d[:, 1]) >= family.delta * (1 - 1e-9))
        if label != "clustered":
            record(path, "family.delta_separated", sep_ok)
            if not sep_ok and first_failure is None:
                first_failure = "family.delta_separated"

        report = ball_condition_count(family)
        expected_pass = label != "clustered"
        ok = report.overall_pass == expected_pass
        record(path, "conditions.ball_condition_count", ok,
               f"overall_pass={report.overall_pass} expected={expected_pass}")
        if not ok and first_failure is None:
            first_failure = "conditions.ball_condition_count"

        from .geom_core import strip_membership
        member_ok = True
        for s in family.strips[: min(len(family), 16)]:
            for t in np.linspace(0.0, 1.0, 11):
                p = s.core.point_at(t)
                if np.all(p >= 0.0) and np.all(p <= 1.0):
                    member_ok = member_ok and strip_membership(s, p)[0]
                    break
        record(path, "geom_core.strip_membership", member_ok)
        if not member_ok and first_failure is None:
            first_failure = "geom_core.strip_membership"

    return {
        "pass": first_failure is None,
        "first_failure": first_failure,
        "n_files": len(files),
        "checks": checks,
    }
