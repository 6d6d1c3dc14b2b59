import math
from pathlib import Path

import numpy as np
import pytest

from regulab import (
    StripFamily,
    ball_condition_count,
    ball_condition_volume,
    disjointness_ratio,
    dyadic_radii,
    gen_clustered_family,
)

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

DELTA = 2 ** -6
RHO = 2 ** -3


def test_dyadic_radii():
    radii = dyadic_radii(2 ** -4)
    assert radii == [2 ** -4, 2 ** -3, 2 ** -2, 2 ** -1, 1.0]


def test_count_checker_single_strip_passes():
    family = StripFamily.from_points(DELTA, RHO, [[0.5, 0.2, 0.0]])
    report = ball_condition_count(family)
    assert report.form == "count"
    assert report.overall_pass
    assert all(rec.observed >= 1 for rec in report.records)


def test_count_checker_flags_concentration():
    family = gen_clustered_family(DELTA, RHO, math.sqrt(DELTA), 1200, seed=2)
    report = ball_condition_count(family)
    assert not report.overall_pass
    rec = report.record_at(math.sqrt(DELTA))
    assert not rec.passes
    assert rec.ratio > 1.0


def test_count_checker_monotone_in_constant():
    family = gen_clustered_family(DELTA, RHO, math.sqrt(DELTA), 1200, seed=2)
    loose = ball_condition_count(family, constant=10 ** 6)
    assert loose.overall_pass


def test_volume_checker_single_strip_constant():
    # observed/bound stays within a constant band for one dual tube at r=rho
    family = StripFamily.from_points(DELTA, RHO, [[0.5, 0.2, 0.0]])
    report = ball_condition_volume(family, 10 ** 5, seed=0)
    assert report.form == "volume"
    assert report.overall_pass
    rec = report.record_at(RHO)
    # |W cap B_rho| ~ rho * delta^3 up to constants, far below the bound
    assert 1e-5 < rec.ratio < 1.0


def test_volume_checker_rejects_small_sample():
    family = StripFamily.from_points(DELTA, RHO, [[0.5, 0.2, 0.0]])
    with pytest.raises(ValueError):
        ball_condition_volume(family, 100, seed=0)


def test_forms_agree_on_corpus():
    for path in sorted(CORPUS.glob("*.json")):
        family = StripFamily.load(path)
        count = ball_condition_count(family)
        volume = ball_condition_volume(family, 2 * 10 ** 4, seed=0)
        assert count.overall_pass == volume.overall_pass, path.name


def test_disjointness_ratio_single_strip():
    family = StripFamily.from_points(DELTA, RHO, [[0.5, 0.2, 0.0]])
    ratio = disjointness_ratio(family, DELTA / 2)
    assert 0.5 < ratio < 2.0


def test_disjointness_ratio_detects_duplication():
    pts = np.tile([[0.5, 0.2, 0.0]], (8, 1))
    pts += np.arange(8)[:, None] * 1e-5
    family = StripFamily.from_points(DELTA, RHO, pts)
    ratio = disjointness_ratio(family, DELTA / 2)
    assert ratio < 0.3
