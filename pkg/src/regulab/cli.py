"""Command line entry point.

Subcommands: gen, check-ball, measure, slice-verify, duality-verify,
shading, kakeya, nikodym, scaling, regress.  Exit codes: 0 success,
1 invariant or acceptance failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .conditions import ball_condition_count, ball_condition_volume
from .duality import coplanarity_defect, dual_ray, frame_at, CurveSystem
from .duality import curve_normal, curve_tangent_v1
from .errors import ConfigError, InvariantFailure, RegulabError
from .experiments import (
    DEFAULT_SL2_BOX,
    SINGLE_CORE,
    run_regression,
    run_scaling,
)
from .family import (
    StripFamily,
    gen_clustered_family,
    gen_random_family,
    gen_sl2_example,
)
from .geom_core import EPS_MIN, LLine, Line, line_point, sl2_reparameterize
from .geom_core import ruling_defect
from .heisenberg import (
    ball_indicator,
    const_function,
    family_indicator,
    hline_of,
    lp_ratio,
    tube_indicator,
)
from .measure import (
    Shading,
    kakeya_ratio,
    make_shading,
    mc_union_measure,
    rasterize,
    regularize,
    slice_correspondence,
)
from .rng import make_rng

SLICE_BAND = (1.0 / 16.0, 16.0)


def _info(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def _parse_box(text: str):
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 6:
        raise ConfigError("box must be 6 comma-separated numbers")
    return tuple((parts[2 * i], parts[2 * i + 1]) for i in range(3))


def _load_family(path) -> StripFamily:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"family file {p} does not exist")
    try:
        return StripFamily.load(p)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad family file {p}: {exc}")


def cmd_gen(args) -> int:
    delta = args.delta
    rho = math.sqrt(delta) if args.rho == "auto" else float(args.rho)
    if args.kind == "sl2":
        box = _parse_box(args.box) if args.box else DEFAULT_SL2_BOX
        family = gen_sl2_example(delta, box, args.seed)
    elif args.kind == "random":
        n = args.n if args.n is not None else 100
        family = gen_random_family(delta, rho, n, args.seed)
    else:
        r = args.r if args.r is not None else math.sqrt(delta)
        n = args.n if args.n is not None else \
            int(4 * (r / delta) ** 2 * delta / rho) + 8
        family = gen_clustered_family(delta, rho, r, n, args.seed)
    family.save(args.out)
    _info(args, f"wrote {len(family)} strips (delta={delta:g}, "
                f"rho={family.rho:g}) to {args.out}")
    return 0


def cmd_check_ball(args) -> int:
    family = _load_family(args.family)
    reports = []
    if args.form in ("count", "both"):
        reports.append(ball_condition_count(family, constant=args.constant))
    if args.form in ("volume", "both"):
        reports.append(ball_condition_volume(
            family, args.samples, args.seed, constant=args.constant))
    lines = ["r,form,observed,bound,ratio,pass"]
    ok = True
    for report in reports:
        for rec in report.records:
            ok = ok and rec.passes
            lines.append(f"{rec.r:.10g},{report.form},{rec.observed:.10g},"
                         f"{rec.bound:.10g},{rec.ratio:.6g},{rec.passes}")
    csv = "\n".join(lines) + "\n"
    if args.report:
        Path(args.report).write_text(csv)
        _info(args, f"wrote {args.report}")
    else:
        sys.stdout.write(csv)
    _info(args, "ball condition: " + ("pass" if ok else "FAIL"))
    return 0 if ok else 1


def _measure_rows(args, family, name) -> list[str]:
    rows = []
    if args.method in ("grid", "both"):
        h = args.res if args.res is not None else family.delta / 2.0
        value = rasterize(family, h).measure()
        rows.append((name, "grid", value, 0.0))
    if args.method in ("mc", "both"):
        value, stderr = mc_union_measure(family, args.samples, args.seed)
        rows.append((name, "mc", value, stderr))
    return [f"{n},{family.delta:.12g},{family.rho:.12g},{len(family)},,"
            f"{m},{v:.10g},{se:.4g}" for n, m, v, se in rows]


def cmd_measure(args) -> int:
    family = _load_family(args.family)
    name = Path(args.family).stem
    lines = ["name,delta,rho,n_strips,lambda,method,value,stderr"]
    lines += _measure_rows(args, family, name)
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def cmd_slice_verify(args) -> int:
    family = _load_family(args.family)
    h = args.res if args.res is not None else family.delta / 2.0
    k = args.t_samples
    lines = ["t,slice_area,projected_area,ratio,pass"]
    ok = True
    for j in range(1, k + 1):
        t = j / (k + 1.0)
        ratio, sa, pa = slice_correspondence(family, t, h)
        passes = SLICE_BAND[0] <= ratio <= SLICE_BAND[1]
        ok = ok and passes
        lines.append(f"{t:.10g},{sa:.10g},{pa:.10g},{ratio:.6g},{passes}")
    csv = "\n".join(lines) + "\n"
    if args.report:
        Path(args.report).write_text(csv)
        _info(args, f"wrote {args.report}")
    else:
        sys.stdout.write(csv)
    _info(args, "slice correspondence: " + ("pass" if ok else "FAIL"))
    return 0 if ok else 1


def _duality_checks(n: int, seed: int, tol: float):
    """Exact-lemma residual checks; yields (name, worst_residual, tol)."""
    rng = make_rng(seed)

    worst = 0.0
    for _ in range(n):
        a, b = rng.uniform(-2.0, 2.0, size=2)
        c = rng.uniform(0.2, 2.0)
        d = (1.0 + b * c) / a if abs(a) > 0.1 else None
        if d is None:
            continue
        line = Line(a=a, b=b, c=c, d=d)
        if abs(1.0 + b * c) <= EPS_MIN:
            continue
        ell = sl2_reparameterize(line)
        for t in np.linspace(-1.0, 1.0, 101):
            p = line_point(line, t)
            q = ell.point_at(p[1])
            worst = max(worst, abs(q[0] - p[0]), abs(q[1] - p[2]))
    yield "sl2-roundtrip", worst, tol

    worst = 0.0
    for _ in range(n):
        x = rng.uniform(-1.0, 1.0, size=2)
        t = rng.uniform(0.05, 1.0)
        p = np.array([x[0], x[1], t])
        base, direction = dual_ray(p)
        for s in (-0.5, 0.0, 0.7):
            a, b, c = base + s * direction
            q = np.array([a + c * t, b + a * t, t])
            worst = max(worst, float(np.linalg.norm(q - p)))
    yield "dual-ray-incidence", worst, tol

    worst = 0.0
    for _ in range(max(n // 50, 2)):
        coeffs = rng.uniform(-1.0, 1.0, size=(3, 3))
        coeffs[0, 0] = 2.5

        def gamma(t, c=coeffs):
            return c[:, 0] + c[:, 1] * t + c[:, 2] * t * t

        cs = CurveSystem(gamma=gamma)
        for t in np.linspace(0.05, 0.95, 100):
            worst = max(worst, coplanarity_defect(cs, t))
    yield "coplanarity", worst, tol

    worst = 0.0
    for t in np.linspace(0.0, 1.0, 101):
        fr = frame_at(t)
        scale = math.sqrt(1.0 + t * t + t ** 4)
        worst = max(worst, float(np.linalg.norm(fr.v + scale * fr.xi_prime)))
    yield "v-parallel-xi-prime", worst, tol

    worst = 0.0
    for _ in range(max(n // 10, 10)):
        coeffs = rng.uniform(-1.0, 1.0, size=(3, 3))
        coeffs[0, 0] = 2.5

        def gamma(t, c=coeffs):
            return c[:, 0] + c[:, 1] * t + c[:, 2] * t * t

        cs = CurveSystem(gamma=gamma)
        t = rng.uniform(0.1, 0.9)
        nvec = curve_normal(cs, t)
        v1 = curve_tangent_v1(cs, t)
        worst = max(worst, abs(float(nvec[:2] @ v1[:2])))
    yield "normal-tangent-orthogonality", worst, 1e-9

    worst = 0.0
    for _ in range(max(n // 100, 5)):
        a = rng.uniform(0.3, 1.5)
        b = rng.uniform(-1.0, 1.0)
        c = rng.uniform(-1.0, 1.0)
        worst = max(worst, ruling_defect(LLine(a, b, c), 0.3, 25))
    yield "ruling-defect", worst, max(tol, 1e-6)


def cmd_duality_verify(args) -> int:
    ok = True
    for name, residual, tol in _duality_checks(args.n, args.seed, args.tol):
        passes = residual <= tol
        ok = ok and passes
        status = "pass" if passes else "FAIL"
        print(f"{name}: residual {residual:.3e} (tol {tol:g}) {status}")
    return 0 if ok else 1


def cmd_shading(args) -> int:
    family = _load_family(args.family)
    box = _parse_box(args.box) if args.box else None
    shading = make_shading(family, args.mode, lam=args.lam, seed=args.seed,
                           box=box)
    if args.regularize:
        sub, shading, mu = regularize(family, shading)
        out = Path(args.out)
        fam_out = out.with_name(out.stem + "-family.json")
        sub.save(fam_out)
        _info(args, f"regularized: {len(sub)} strips kept, mu={mu}; "
                    f"wrote matching family to {fam_out}")
    shading.save(args.out)
    _info(args, f"wrote shading ({shading.total_count()} tubes) to {args.out}")
    return 0


def cmd_kakeya(args) -> int:
    family = _load_family(args.family)
    try:
        shading = Shading.load(args.shading)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad shading file {args.shading}: {exc}")
    h = args.res if args.res is not None else family.delta / 2.0
    ratio, lhs, rhs = kakeya_ratio(family, shading, h)
    lam = shading.min_density(family)
    sys.stdout.write("lambda,lhs,rhs_basis,ratio\n"
                     f"{lam:.10g},{lhs:.10g},{rhs:.10g},{ratio:.10g}\n")
    return 0


def _nikodym_function(kind: str, delta: float, h: float):
    if kind == "const":
        return const_function(h)
    if kind == "tube":
        return tube_indicator(hline_of(SINGLE_CORE), delta, h)
    if kind == "ball":
        return ball_indicator((0.5, 0.5, 0.5), delta, h)
    if kind.startswith("family:"):
        family = _load_family(kind.split(":", 1)[1])
        return family_indicator(family, h)
    raise ConfigError(f"unknown f kind {kind!r}")


def cmd_nikodym(args) -> int:
    h = args.res if args.res is not None else args.delta
    net_step = args.net_step if args.net_step is not None else args.delta
    if net_step > args.delta:
        raise ConfigError("net-step must be <= delta")
    f = _nikodym_function(args.f, args.delta, h)
    ratio = lp_ratio(f, args.p, args.delta, net_step)
    csv = ("delta,p,f_kind,lp_ratio,net_step\n"
           f"{args.delta:.12g},{args.p:.10g},{args.f},"
           f"{ratio:.10g},{net_step:.12g}\n")
    if args.out:
        Path(args.out).write_text(csv)
        _info(args, f"wrote {args.out}")
    else:
        sys.stdout.write(csv)
    return 0


def cmd_scaling(args) -> int:
    result = run_scaling(args.config)
    if args.out:
        result.save_csv(args.out)
        _info(args, f"wrote {args.out}")
    else:
        sys.stdout.write(result.to_csv())
    if not math.isnan(result.fitted_slope):
        _info(args, f"fitted slope {result.fitted_slope:.4f} "
                    f"+- {result.slope_stderr:.4f}")
    return 0


def cmd_regress(args) -> int:
    report = run_regression(args.corpus)
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
        _info(args, f"wrote {args.report}")
    if report["pass"]:
        _info(args, f"regression: pass ({report['n_files']} files)")
        return 0
    print(f"regression: FAIL at {report['first_failure']}")
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regulab",
        description="Regulus-strip and Nikodym maximal experiments.")
    parser.add_argument("--threads", type=int, default=None,
                        help="numba thread count")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress informational output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a strip family")
    p.add_argument("--kind", required=True,
                   choices=["sl2", "random", "clustered"])
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--rho", default="auto")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--box", default=None,
                   help='"a0,a1,b0,b1,c0,c1" parameter box (sl2 only)')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check-ball", help="two-dimensional ball condition")
    p.add_argument("--family", required=True)
    p.add_argument("--form", default="count",
                   choices=["count", "volume", "both"])
    p.add_argument("--constant", type=float, default=100.0)
    p.add_argument("--samples", type=int, default=10 ** 5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_check_ball)

    p = sub.add_parser("measure", help="union measure of a family")
    p.add_argument("--family", required=True)
    p.add_argument("--method", default="grid",
                   choices=["grid", "mc", "both"])
    p.add_argument("--res", type=float, default=None)
    p.add_argument("--samples", type=int, default=10 ** 5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("slice-verify",
                       help="slice vs plank-projection correspondence")
    p.add_argument("--family", required=True)
    p.add_argument("--t-samples", type=int, default=7)
    p.add_argument("--res", type=float, default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_slice_verify)

    p = sub.add_parser("duality-verify",
                       help="exact-lemma residual checks")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_duality_verify)

    p = sub.add_parser("shading", help="build (optionally regularize) a shading")
    p.add_argument("--family", required=True)
    p.add_argument("--mode", default="full",
                   choices=["full", "random", "region"])
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--box", default=None,
                   help='"x0,x1,y0,y1,z0,z1" spatial box (region mode)')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--regularize", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_shading)

    p = sub.add_parser("kakeya", help="shaded-union ratio")
    p.add_argument("--family", required=True)
    p.add_argument("--shading", required=True)
    p.add_argument("--res", type=float, default=None)
    p.set_defaults(func=cmd_kakeya)

    p = sub.add_parser("nikodym", help="Nikodym maximal Lp ratio")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--p", type=float, default=6.0)
    p.add_argument("--f", default="const",
                   help="const | tube | ball | family:FILE")
    p.add_argument("--res", type=float, default=None)
    p.add_argument("--net-step", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_nikodym)

    p = sub.add_parser("scaling", help="scaling experiment from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("regress", help="invariant suite over a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_regress)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if args.threads is not None:
        import numba

        numba.set_num_threads(args.threads)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantFailure as exc:
        print(f"invariant failure: {exc.check}: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RegulabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
