import json
import math

import numpy as np
import pytest

from regulab import (
    GridTooLarge,
    Shading,
    StripFamily,
    brute_force_strip_volume,
    decompose_htubes,
    gen_random_family,
    kakeya_ratio,
    make_shading,
    mc_union_measure,
    plank_union_measure,
    rasterize,
    rasterize_shading,
    regularize,
    slice_correspondence,
    slice_measure,
    strip_volumes,
)
from regulab.measure import n_slabs

DELTA = 2 ** -6
RHO = 2 ** -3


def single():
    return StripFamily.from_points(DELTA, RHO, [[0.5, 0.2, 0.0]])


def test_rasterize_monotone_and_subadditive():
    fam2 = gen_random_family(DELTA, RHO, 2, seed=0)
    one = StripFamily.from_points(DELTA, RHO, fam2.parameter_points[:1])
    other = StripFamily.from_points(DELTA, RHO, fam2.parameter_points[1:])
    h = DELTA / 2
    m_one = rasterize(one, h).measure()
    m_other = rasterize(other, h).measure()
    m_both = rasterize(fam2, h).measure()
    assert m_both >= m_one
    assert m_both <= m_one + m_other + 1e-12


def test_rasterize_rejects_coarse_grid():
    with pytest.raises(ValueError):
        rasterize(single(), DELTA)


def test_grid_vs_mc():
    family = gen_random_family(DELTA, RHO, 30, seed=1)
    grid = rasterize(family, DELTA / 2).measure()
    mc, stderr = mc_union_measure(family, 10 ** 5, seed=0)
    assert abs(grid - mc) <= max(3 * stderr, 0.05 * grid)


def test_strip_volume_vs_brute_force():
    family = single()
    brute = brute_force_strip_volume(family, 0, DELTA / 4)
    grid = rasterize(family, DELTA / 2).measure()
    assert abs(grid - brute) / brute < 0.15
    # the analytic slice-area integral omits the delta-ball end caps
    analytic = strip_volumes(family)[0]
    assert abs(analytic - brute) / brute < 0.25


def test_strip_volumes_clip_to_unit_cube():
    inside = strip_volumes(single())[0]
    outside = strip_volumes(
        StripFamily.from_points(DELTA, RHO, [[5.0, 5.0, 0.0]]))[0]
    assert inside > 0
    assert outside == 0.0


def test_slice_measure_single_strip():
    family = single()
    t = 0.5
    area = slice_measure(family, t, DELTA / 2)
    expected = 4.0 * DELTA * RHO * math.sqrt(1 + t * t)
    assert 0.5 * expected < area < 2.0 * expected


def test_slice_unclipped_at_least_clipped():
    family = gen_random_family(DELTA, RHO, 20, seed=2)
    for t in (0.25, 0.75):
        clipped = slice_measure(family, t, DELTA / 2)
        full = slice_measure(family, t, DELTA / 2, clip=False)
        assert full >= clipped - 1e-12


def test_htube_decomposition_covers_strip():
    # tube union covers most strip cells and stays in a 2delta-thickened strip
    family = single()
    strip = family.strips[0]
    h = DELTA / 2
    grid_strip = rasterize(family, h)
    full = make_shading(family, "full")
    grid_tubes = rasterize_shading(family, full, h)
    inter = np.logical_and(grid_strip.bits, grid_tubes.bits)
    covered = np.count_nonzero(inter) / max(np.count_nonzero(grid_strip.bits), 1)
    assert covered >= 0.8
    # every tube cell is within 2delta of the strip
    wide = StripFamily.from_points(2 * DELTA, RHO,
                                   [[strip.core.a, strip.core.b, strip.core.c]])
    grid_wide = rasterize(wide, h)
    outside = np.logical_and(grid_tubes.bits, ~grid_wide.bits)
    assert np.count_nonzero(outside) / max(np.count_nonzero(grid_tubes.bits), 1) < 0.02


def test_htube_count():
    tubes = decompose_htubes(0, single())
    assert len(tubes) == n_slabs(DELTA) == 64
    assert all(t.thickness == DELTA for t in tubes)


def test_shading_modes_and_density():
    family = gen_random_family(DELTA, RHO, 40, seed=3)
    full = make_shading(family, "full")
    assert full.min_density(family) == pytest.approx(1.0)
    lam = 0.5
    densities = []
    for seed in range(20):
        sh = make_shading(family, "random", lam=lam, seed=seed)
        densities += [sh.density(i, DELTA) for i in range(len(family))]
    densities = np.array(densities)
    assert np.mean((densities >= 0.3) & (densities <= 0.7)) >= 0.95


def test_shading_region_mode():
    family = gen_random_family(DELTA, RHO, 40, seed=3)
    box = ((0.0, 1.0), (0.0, 1.0), (0.0, 0.5))
    sh = make_shading(family, "region", box=box)
    for i, ks in sh.selected.items():
        for k in ks:
            assert (k + 0.5) * DELTA <= 0.5


def test_shading_json_roundtrip(tmp_path):
    family = gen_random_family(DELTA, RHO, 10, seed=4)
    sh = make_shading(family, "random", lam=0.4, seed=1)
    path = tmp_path / "sh.json"
    sh.save(path)
    text = path.read_text()
    assert set(json.loads(text)) == {"selected"}
    loaded = Shading.load(path)
    assert loaded.selected == sh.selected


def test_regularize_uniform_and_retains_mass():
    family = gen_random_family(DELTA, RHO, 40, seed=5)
    sh = make_shading(family, "random", lam=0.5, seed=2)
    sub, reg, mu = regularize(family, sh)
    counts = [len(reg.selected[i]) for i in range(len(sub))]
    assert max(counts) <= 2 * min(counts)
    assert mu == max(counts)
    assert reg.total_count() >= sh.total_count() / (2 * math.log2(1 / DELTA))


def test_kakeya_ratio_single_strip_full():
    family = single()
    full = make_shading(family, "full")
    ratio, lhs, rhs = kakeya_ratio(family, full, DELTA / 2)
    assert 0.8 <= ratio <= 1.2


def test_rasterize_shading_full_matches_family_union():
    family = gen_random_family(DELTA, RHO, 10, seed=6)
    h = DELTA / 2
    full = rasterize_shading(family, make_shading(family, "full"), h).measure()
    union = rasterize(family, h).measure()
    assert abs(full - union) / union < 0.05


def test_plank_union_measure_single():
    family = single()
    vol, area = plank_union_measure(family, 0.5, DELTA / 2)
    # one 2 x 2rho x 2delta plank
    expected = 2.0 * 2 * RHO * 2 * DELTA
    assert 0.5 * expected < vol < 2.0 * expected
    assert 0.5 * (4 * RHO * DELTA) < area < 2.0 * (4 * RHO * DELTA)


def test_slice_correspondence_single():
    ratio, sa, pa = slice_correspondence(single(), 0.5, DELTA / 2)
    assert 1 / 16 <= ratio <= 16


def test_grid_too_large():
    with pytest.raises(GridTooLarge):
        rasterize(StripFamily.from_points(2 ** -11, 2 ** -6, [[0.5, 0.2, 0.0]]),
                  2 ** -12)
