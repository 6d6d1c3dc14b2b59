"""Acceptance gate: one test (and one printed pass/fail line) per criterion.

Tolerances are pinned; do not loosen them.  The printed-derivative fixture
check is a faithful transcription test that is expected to stay red (the
printed tuple is not the derivative of the unit dual direction).
"""

import math
from pathlib import Path

import numpy as np
import pytest

from regulab import (
    CurveSystem,
    Line,
    LLine,
    StripFamily,
    ball_condition_count,
    ball_condition_volume,
    brute_force_strip_volume,
    const_function,
    coplanarity_defect,
    dual_ray,
    family_indicator,
    frame_at,
    gen_clustered_family,
    gen_sl2_example,
    hline_of,
    kakeya_ratio,
    keep_probability,
    lp_ratio,
    make_shading,
    mc_union_measure,
    nikodym_maximal,
    printed_xi_prime,
    rasterize,
    regularize,
    ruling_defect,
    run_scaling,
    sample_refine,
    sl2_reparameterize,
    slice_correspondence,
    slice_measure,
    tube_indicator,
)
from regulab.experiments import DEFAULT_SL2_BOX, fit_exponent
from regulab.rng import make_rng

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
SMALL_BOX = ((0.5, 1.0), (-0.5, 0.0), (-0.5, 0.0))


def report(name, ok):
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}")
    assert ok, name


# -- exact-lemma suite (runtime < 1 min) ------------------------------------

def test_a_sl2_reparameterization_roundtrip():
    rng = make_rng(0)
    worst = 0.0
    n = 0
    while n < 1000:
        a = rng.uniform(0.3, 2.0) * rng.choice([-1.0, 1.0])
        b, c = rng.uniform(-2.0, 2.0, size=2)
        d = (1.0 + b * c) / a
        if abs(a * d) < 1e-3 or abs(1.0 + b * c) < 1e-3:
            continue
        n += 1
        line = Line(a, b, c, d)
        ell = sl2_reparameterize(line)
        for t in np.linspace(-1.0, 1.0, 101):
            p = line.point_at(t)
            q = ell.point_at(p[1])
            worst = max(worst, abs(q[0] - p[0]), abs(q[1] - p[2]))
    report("exact-lemma (a) sl2 roundtrip <= 1e-9", worst <= 1e-9)


def test_b_duality_incidence():
    rng = make_rng(1)
    worst = 0.0
    for _ in range(1000):
        p = np.array([rng.uniform(-1, 1), rng.uniform(-1, 1),
                      rng.uniform(0.01, 1.0)])
        base, direction = dual_ray(p)
        for s in (-1.0, -0.3, 0.0, 0.6):
            a, b, c = base + s * direction
            q = np.array([a + c * p[2], b + a * p[2], p[2]])
            worst = max(worst, float(np.linalg.norm(q - p)))
    report("exact-lemma (b) duality incidence <= 1e-9", worst <= 1e-9)


def _random_curve(rng):
    coeffs = rng.uniform(-1.0, 1.0, size=(3, 4))
    coeffs[0, 0] = 3.0

    def gamma(t, c=coeffs):
        return c[:, 0] + c[:, 1] * t + c[:, 2] * t ** 2 + c[:, 3] * t ** 3

    return CurveSystem(gamma=gamma)


def test_c_coplanarity_defect():
    rng = make_rng(2)
    worst = 0.0
    for _ in range(20):
        cs = _random_curve(rng)
        for t in np.linspace(0.05, 0.95, 100):
            worst = max(worst, coplanarity_defect(cs, t))
    report("exact-lemma (c) coplanarity <= 1e-9", worst <= 1e-9)


def test_d_v_parallel_xi_prime():
    worst = 0.0
    for t in np.linspace(0.0, 1.0, 101):
        fr = frame_at(t)
        scale = math.sqrt(1.0 + t * t + t ** 4)
        worst = max(worst, float(np.linalg.norm(fr.v + scale * fr.xi_prime)))
    report("exact-lemma (d) v parallel xi' <= 1e-9", worst <= 1e-9)


def test_e_printed_xi_prime_matches_derivative():
    # transcription fixture vs numerical derivative of the unit direction
    worst = 0.0
    h = 1e-6
    for t in np.linspace(0.05, 0.95, 101):
        num = (frame_at(t + h).xi - frame_at(t - h).xi) / (2 * h)
        worst = max(worst, float(np.max(np.abs(printed_xi_prime(t) - num))))
    report("exact-lemma (e) printed xi' vs derivative <= 1e-6", worst <= 1e-6)


def test_f_normal_tangent_orthogonality():
    rng = make_rng(3)
    from regulab.duality import curve_normal, curve_tangent_v1

    worst = 0.0
    for _ in range(100):
        cs = _random_curve(rng)
        t = rng.uniform(0.1, 0.9)
        n = curve_normal(cs, t)
        v1 = curve_tangent_v1(cs, t)
        worst = max(worst, abs(float(n[:2] @ v1[:2])))
    report("exact-lemma (f) n.v1 orthogonality <= 1e-9", worst <= 1e-9)


def test_g_ruling_defect():
    rng = make_rng(4)
    worst = 0.0
    for _ in range(10):
        ell = LLine(rng.uniform(0.3, 1.5), rng.uniform(-1, 1),
                    rng.uniform(-1, 1))
        s = rng.uniform(0.2, 2.0) * rng.choice([-1.0, 1.0])
        worst = max(worst, ruling_defect(ell, s, 25))
    report("exact-lemma (g) ruling defect <= 1e-6", worst <= 1e-6)


# -- slice correspondence (runtime < 5 min) ----------------------------------

def test_slice_correspondence_band():
    ok = True
    for path in sorted(CORPUS.glob("*.json")):
        family = StripFamily.load(path)
        for k in range(1, 8):
            ratio, _, _ = slice_correspondence(family, k / 8.0,
                                               family.delta / 2.0)
            ok = ok and 1.0 / 16.0 <= ratio <= 16.0
    report("slice correspondence in [1/16, 16] on corpus", ok)


# -- ball-condition checker (runtime < 5 min) --------------------------------

def test_ball_condition_checker():
    verdicts = {}
    ok = True
    for path in sorted(CORPUS.glob("*.json")):
        family = StripFamily.load(path)
        count = ball_condition_count(family, constant=100.0)
        volume = ball_condition_volume(family, 3 * 10 ** 4, seed=0)
        verdicts[path.stem] = count.overall_pass
        ok = ok and (count.overall_pass == volume.overall_pass)
    ok = ok and verdicts["sl2-small"] and verdicts["random-medium"]
    # the committed cluster is designed to fail at its radius sqrt(delta)
    family = StripFamily.load(CORPUS / "clustered-tight.json")
    rec = ball_condition_count(family).record_at(math.sqrt(family.delta))
    ok = ok and not verdicts["clustered-tight"] and not rec.passes
    report("ball condition: sl2 passes, cluster fails, forms agree", ok)


# -- sampling lemma (runtime < 1 min) ----------------------------------------

def test_sampling_lemma():
    delta, rho = 2 ** -6, 2 ** -3
    family = gen_sl2_example(delta, DEFAULT_SL2_BOX, seed=0)
    d2, r2 = 4 * delta, 2 * rho
    expect = keep_probability(delta, rho, d2, r2) * len(family)
    good = 0
    for seed in range(20):
        refined = sample_refine(family, d2, r2, seed=seed)
        count_ok = 0.5 * expect <= len(refined) <= 2.0 * expect
        bound_ok = ball_condition_count(refined).overall_pass
        good += int(count_ok and bound_ok)
    report("sampling lemma holds in >= 18/20 runs", good >= 18)


# -- regularization lemma (runtime < 2 min) ----------------------------------

def test_regularization_lemma():
    family = StripFamily.load(CORPUS / "sl2-small.json")
    delta = family.delta
    ok = True
    for seed in range(100):
        sh = make_shading(family, "random", lam=0.5, seed=seed)
        sub, reg, mu = regularize(family, sh)
        counts = [len(reg.selected[i]) for i in range(len(sub))]
        ok = ok and max(counts) <= 2 * min(counts)
        ok = ok and reg.total_count() >= \
            sh.total_count() / (2.0 * math.log2(1.0 / delta))
    report("regularization: dyadic uniformity and mass retention", ok)


# -- measure-engine consistency (runtime < 10 min) ---------------------------

def test_measure_consistency():
    ok = True
    for path in sorted(CORPUS.glob("*.json")):
        family = StripFamily.load(path)
        h = family.delta / 2.0
        grid = rasterize(family, h).measure()
        mc, stderr = mc_union_measure(family, 10 ** 5, seed=0)
        ok = ok and abs(grid - mc) <= max(3.0 * stderr, 0.05 * grid)
        slices = [slice_measure(family, (k + 0.5) / 64.0, h)
                  for k in range(64)]
        fubini = float(np.mean(slices))
        ok = ok and abs(fubini - grid) <= 0.10 * grid
    single = StripFamily.from_points(2 ** -8, 2 ** -4, [[0.5, 0.2, 0.0]])
    grid = rasterize(single, 2 ** -9).measure()
    brute = brute_force_strip_volume(single, 0, 2 ** -9)
    ok = ok and abs(grid - brute) <= 0.15 * brute
    report("measure consistency: grid/MC, Fubini, single strip", ok)


# -- SL2 measure scaling (runtime < 20 min) ----------------------------------

def test_sl2_measure_scaling():
    cfg = {"experiment": "sl2-union", "kind": "sl2",
           "deltas": [2 ** -4, 2 ** -5, 2 ** -6, 2 ** -7, 2 ** -8],
           "method": "mc", "samples": 10 ** 5, "seeds": [0]}
    result = run_scaling(cfg)
    slope = result.fitted_slope
    finest = [row for row in result.rows if row[1] == 2 ** -8][0]
    ok = -0.2 <= slope <= 0.05 and finest[5] >= 10.0 * math.sqrt(2 ** -8)
    report("sl2 union scaling: slope in [-0.2, 0.05], above trivial bound", ok)


# -- kakeya ratio surrogate (runtime < 10 min) -------------------------------

def test_kakeya_ratio_surrogate():
    delta = 2 ** -6
    family = gen_sl2_example(delta, SMALL_BOX, seed=0)
    h = delta / 2.0
    floor = delta ** 0.2
    ratios = []
    full = make_shading(family, "full")
    ratios.append(kakeya_ratio(family, full, h)[0])
    for lam, seed in ((0.5, 1), (0.25, 2)):
        sh = make_shading(family, "random", lam=lam, seed=seed)
        ratios.append(kakeya_ratio(family, sh, h)[0])
    ok = all(r >= floor for r in ratios)
    ok = ok and ratios[0] <= ratios[1] <= ratios[2]
    report("kakeya ratio >= delta^0.2 and grows as lambda shrinks", ok)


# -- essential-disjointness dichotomy (runtime < 5 min) ----------------------

def test_disjointness_dichotomy():
    delta, rho = 2 ** -6, 2 ** -3
    ok = True
    for r, n in ((math.sqrt(delta), 1200), (2 * math.sqrt(delta), 5000)):
        family = gen_clustered_family(delta, rho, r, n, seed=2)
        ok = ok and not ball_condition_count(family).overall_pass
        union = rasterize(family, delta / 2.0).measure()
        ok = ok and union <= 16.0 * r * r
    report("dichotomy: ball-condition violators have |union| <= 16 r^2", ok)


# -- Nikodym diagnostics (runtime < 15 min) ----------------------------------

NIK_DELTAS = [2 ** -4, 2 ** -5, 2 ** -6, 2 ** -7]


def _nik_f(kind, delta):
    if kind == "const":
        return const_function(1.0 / 16.0)
    if kind == "tube":
        return tube_indicator(hline_of(LLine(1.0, 0.0, 0.0)), delta, delta)
    family = gen_sl2_example(delta, SMALL_BOX, seed=0)
    return family_indicator(family, 1.0 / 16.0)


def test_nikodym_lp_slopes():
    ok = True
    for kind in ("const", "tube", "sl2"):
        rows = [(d, lp_ratio(_nik_f(kind, d), 6.0, d), 0.0)
                for d in NIK_DELTAS]
        slope, _ = fit_exponent(rows)
        ok = ok and abs(slope) <= 0.3
    report("nikodym L6 ratio slopes <= 0.3 for const/tube/sl2", ok)


def test_nikodym_net_refinement_stability():
    # delta = 2^-6 so the grid resolves the tube (coarser grids alias it)
    delta = 2 ** -6
    ok = True
    for kind in ("const", "tube"):
        f = _nik_f(kind, delta)
        coarse = nikodym_maximal(f, delta, delta).lp_norm(6.0)
        fine = nikodym_maximal(f, delta, delta / 2.0).lp_norm(6.0)
        ok = ok and abs(fine - coarse) <= 0.10 * coarse
    report("nikodym net refinement changes ||Mf||_6 by <= 10%", ok)
