import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from typhoon_resilience.errors import DomainError, ValidationError
from typhoon_resilience.scenarios import (
    ParamBins,
    ParamDistribution,
    ScenarioGrid,
    bin_probabilities,
    bin_probability,
    default_distributions,
    scenario_set,
    write_manifest,
)
from typhoon_resilience.windfield import TyphoonTrack

BASE = TyphoonTrack(21.8, 112.7, 40.0, 6.0, 315.0, 720.0)
STD_LOGNORMAL = ParamDistribution.lognormal(1.0, 1.0)


def test_tiling_sums_to_one():
    d = ParamDistribution.mixture((1.0,), (0.0,), (1.0,))
    p = bin_probabilities(d, ParamBins.spanning(-40.0, 40.0, 16))
    assert p.sum() == pytest.approx(1.0, abs=1e-6)


def test_centered_bin_is_largest():
    d = ParamDistribution.mixture((1.0,), (0.0,), (2.0,))
    p = bin_probabilities(d, ParamBins(-5.5, 1.0, 11))
    assert int(np.argmax(p)) == 5


def test_standard_lognormal_bin():
    # CDF(1.5) - CDF(0.5) for the standard log-normal, written out with the normal CDF
    expected = stats.norm.cdf(math.log(1.5)) - stats.norm.cdf(math.log(0.5))
    assert bin_probability(STD_LOGNORMAL, 1.0, 1.0) == pytest.approx(expected, abs=1e-12)
    assert bin_probability(STD_LOGNORMAL, 1.0, 1.0) == pytest.approx(0.4133, abs=1e-4)


def test_bin_below_support_starts_at_zero():
    assert bin_probability(STD_LOGNORMAL, 0.0, 2.0) == pytest.approx(stats.norm.cdf(0.0))


def test_step_must_be_positive():
    with pytest.raises(DomainError):
        bin_probability(STD_LOGNORMAL, 1.0, 0.0)


def test_single_scenario_covering_everything():
    wide = ScenarioGrid(ParamBins(0.0, 1e6, 1), ParamBins(0.0, 1e6, 1), ParamBins(-2000.0, 4000.0, 1))
    s = scenario_set(default_distributions(), wide, BASE)
    assert len(s) == 1 and s[0].p_w == pytest.approx(1.0, abs=1e-9)


def test_three_cubed_grid():
    s = scenario_set(default_distributions(), ScenarioGrid.default(3), BASE)
    assert len(s) + s.pruned_count == 27
    assert s.probabilities.sum() + s.pruned_mass == pytest.approx(s.coverage, abs=1e-12)
    assert s.coverage <= 1.0


def test_default_grid():
    s = scenario_set(default_distributions(), ScenarioGrid.default(), BASE)
    assert len(s) + s.pruned_count == 125
    assert s.coverage == pytest.approx(0.968, abs=1e-3)


def test_refinement_keeps_total():
    d = default_distributions()
    coarse = scenario_set(d, ScenarioGrid.default(4), BASE, prune_floor=0.0)
    fine = scenario_set(d, ScenarioGrid.default(8), BASE, prune_floor=0.0)
    assert fine.probabilities.sum() == pytest.approx(coarse.probabilities.sum(), abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(median=st.floats(1, 100), sd=st.floats(0.05, 1.5), start=st.floats(0, 50), step=st.floats(0.1, 20),
       n=st.integers(1, 10))
def test_merging_adjacent_bins(median, sd, start, step, n):
    d = ParamDistribution.lognormal(median, sd)
    fine = bin_probabilities(d, ParamBins(start, step / 2, 2 * n))
    coarse = bin_probabilities(d, ParamBins(start, step, n))
    np.testing.assert_allclose(fine[0::2] + fine[1::2], coarse, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(b1=st.integers(1, 5), b2=st.integers(1, 5), b3=st.integers(1, 5))
def test_independence_structure(b1, b2, b3):
    d = default_distributions()
    g = ScenarioGrid(ParamBins.spanning(10, 90, b1), ParamBins.spanning(2, 12, b2),
                     ParamBins.spanning(225, 405, b3))
    s = scenario_set(d, g, BASE, prune_floor=0.0)
    masses = [bin_probabilities(d[n], g[n]).sum() for n in ("delta_p0", "v_t", "heading")]
    assert s.probabilities.sum() == pytest.approx(math.prod(masses), rel=1e-12)


def test_lexicographic_order_and_tracks():
    g = ScenarioGrid.default(3)
    s = scenario_set(default_distributions(), g, BASE, prune_floor=0.0)
    assert [sc.index for sc in s] == sorted(sc.index for sc in s)
    last = s[len(s) - 1]
    assert last.label == "s2-2-2"
    assert last.track.delta_p0 == pytest.approx(g.delta_p0.centers[2])
    assert 0.0 <= last.track.heading < 360.0
    assert last.track.landfall_lat == BASE.landfall_lat


def test_pruning_records_mass():
    s = scenario_set(default_distributions(), ScenarioGrid.default(), BASE, prune_floor=1e-3)
    assert s.pruned_count > 0
    assert all(p >= 1e-3 for p in s.probabilities)


def test_everything_pruned_is_an_error():
    with pytest.raises(ValidationError):
        scenario_set(default_distributions(), ScenarioGrid.default(), BASE, prune_floor=2.0)


def test_distribution_validation_and_round_trip():
    with pytest.raises(ValidationError):
        ParamDistribution.lognormal(-1.0, 0.4)
    with pytest.raises(ValidationError):
        ParamDistribution.mixture((0.5, 0.4), (0, 1), (1, 1))
    with pytest.raises(ValidationError):
        ParamDistribution("gamma")
    for d in default_distributions().values():
        assert ParamDistribution.from_dict(d.to_dict()) == d


def test_manifest(tmp_path):
    s = scenario_set(default_distributions(), ScenarioGrid.default(2), BASE)
    write_manifest(s, tmp_path / "m.csv", ["hdr"])
    lines = (tmp_path / "m.csv").read_text().splitlines()
    assert lines[0] == "# hdr" and lines[2].startswith("scenario,")
    assert len(lines) == 3 + len(s)
