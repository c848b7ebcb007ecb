import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import synthetic_dataset
from rankdyn.arwu import (
    DUMMY_FTE,
    FIXED_GAINS,
    SOCSCI_WEIGHTS,
    STANDARD_WEIGHTS,
    GainSet,
    Indicator,
    InstitutionClass,
    InstitutionRecord,
    Mode,
    Provenance,
    annual_gains,
    arwu_total,
    band_label,
    compute_pcp_raw,
    compute_ws,
    estimate_k,
    indicator_score_fixed,
    invert_published,
    invert_with_error,
    pcp_score_annual,
    recover_dummy_fte,
    rescore,
    scale_to_best,
    score_annual,
    score_fixed_gain,
    weighted_squares,
)
from rankdyn.errors import ComputationError, DegenerateIndicatorError, EstimationError, InputError

STD = InstitutionClass.STANDARD
SOC = InstitutionClass.SOCIAL_SCIENCE


def record(ident="x", raw=(0, 0, 0, 0, 0), cls=STD, fte=None):
    return InstitutionRecord(ident, ident, cls, dict(zip(Indicator, raw)), fte)


# --- scale_to_best ---------------------------------------------------------


def test_scale_to_best_examples():
    assert scale_to_best([4, 1, 0]) == [10000.0, 2500.0, 0.0]
    assert scale_to_best([10000]) == [10000.0]
    scaled = scale_to_best([31.2915, 15.6458])
    assert scaled[0] == 10000.0
    assert scaled[1] == pytest.approx(5000.0, rel=1e-4)


def test_scale_to_best_all_zero_names_indicator():
    with pytest.raises(DegenerateIndicatorError, match="AWARD"):
        scale_to_best([0, 0], "AWARD")


@given(st.lists(st.floats(min_value=0, max_value=1e6), min_size=1).filter(lambda v: max(v) > 0))
def test_scale_to_best_peak_is_exact(values):
    assert max(scale_to_best(values)) == 10000.0


# --- fixed-gain indicator scores ----------------------------------------


def test_defaults_match_averaged_gains():
    g = GainSet()
    assert g.gains == (17.875, 16.975, 7.225, 4.775, 0.850, 9.325)
    assert g.dummy_fte == 890
    assert g.provenance is Provenance.FIXED


def test_indicator_score_fixed_examples():
    g = GainSet()
    assert indicator_score_fixed(record(), g, Indicator.ALUMNI) == 0.0
    assert indicator_score_fixed(record(raw=(25, 0, 0, 0, 0)), g, Indicator.ALUMNI) == 89.375
    # 0.85 * sqrt(13000) evaluated with mpmath at 30 digits.
    rec = record(raw=(0, 0, 0, 0, 13000))
    assert indicator_score_fixed(rec, g, Indicator.PUB) == pytest.approx(96.9149111334, abs=1e-9)


def test_fixed_scores_can_exceed_100():
    rec = record(raw=(4 * (100 / 17.875) ** 2, 0, 0, 0, 0))
    assert indicator_score_fixed(rec, GainSet(), Indicator.ALUMNI) == pytest.approx(200.0)


def test_socsci_ns_is_ignored():
    rec = record(raw=(1, 1, 1, 50, 1), cls=SOC)
    assert indicator_score_fixed(rec, GainSet(), Indicator.SN) == 0.0


# --- PCP ------------------------------------------------------------------


def test_pcp_raw_examples():
    g = GainSet()
    assert compute_pcp_raw(record(fte=100.0), g) == 0.0
    std = compute_pcp_raw(record(raw=(1, 0, 0, 0, 0), fte=100.0), g)
    assert std == pytest.approx(17.875**2 / 100, rel=1e-15)
    assert std == pytest.approx(3.19515625, abs=1e-12)
    soc = compute_pcp_raw(record(raw=(1, 0, 0, 0, 0), cls=SOC, fte=100.0), g)
    assert soc == pytest.approx(9 / 7 * 3.19515625, rel=1e-15)
    assert soc == pytest.approx(4.1080580357, abs=1e-9)


def test_pcp_raw_uses_dummy_fte():
    g = GainSet()
    with_dummy = compute_pcp_raw(record(raw=(1, 2, 3, 4, 5)), g)
    explicit = compute_pcp_raw(record(raw=(1, 2, 3, 4, 5), fte=DUMMY_FTE), g)
    assert with_dummy == explicit


def test_pcp_raw_by_hand_all_indicators():
    a = FIXED_GAINS
    m = (1.0, 2.0, 3.0, 4.0, 5.0)
    expected = (a[0] ** 2 * m[0] + 2 * sum(a[i] ** 2 * m[i] for i in range(1, 5))) / 250.0
    assert compute_pcp_raw(record(raw=m, fte=250.0), GainSet()) == pytest.approx(expected, rel=1e-15)
    soc_expected = (9 * a[0] ** 2 * m[0] + 14 * sum(a[i] ** 2 * m[i] for i in (1, 2, 4))) / (7 * 250.0)
    assert compute_pcp_raw(record(raw=m, cls=SOC, fte=250.0), GainSet()) == pytest.approx(soc_expected, rel=1e-15)


def test_compute_ws_examples():
    assert compute_ws([100] * 5) == pytest.approx(9000.0)
    assert compute_ws([0] * 5) == 0.0
    assert compute_ws([100, 0, 0, 0, 0]) == pytest.approx(1000.0)


def test_weighted_squares_links_to_pcp_raw():
    g = GainSet()
    for cls in InstitutionClass:
        rec = record(raw=(3, 1, 20, 15, 4000), cls=cls, fte=700.0)
        scores = [indicator_score_fixed(rec, g, ind) for ind in list(Indicator)[:5]]
        assert 10 * weighted_squares(scores, cls) / 700.0 == pytest.approx(compute_pcp_raw(rec, g), rel=1e-12)


def test_pcp_score_annual_examples():
    assert pcp_score_annual(5000.0, 800.0, 5000.0 / 800.0, 1.0) == pytest.approx(100.0)
    assert pcp_score_annual(1.075, None, 3.0, 1.075) == 1.0
    with pytest.raises(InputError):
        pcp_score_annual(10.0, 0.0, 3.0, 1.0)
    with pytest.raises(InputError):
        pcp_score_annual(10.0, None, 3.0, None)


def test_recover_dummy_fte():
    assert recover_dummy_fte(1.0, 12.5) == 800.0
    assert recover_dummy_fte(2.0, 12.5) == 1600.0


def test_published_dummy_ftes_are_consistent():
    # K = 0.94 gives 822 and K = 1.075 gives 955; both imply a CAL near 11.3-11.4.
    cal_2011 = 1e4 * 0.94 / 822
    cal_2012 = 1e4 * 1.075 / 955
    assert recover_dummy_fte(0.94, cal_2011) == pytest.approx(822)
    assert recover_dummy_fte(1.075, cal_2012) == pytest.approx(955)
    assert abs(cal_2011 - cal_2012) / cal_2012 < 0.02


@given(
    ws=st.floats(min_value=0, max_value=1e5),
    k=st.floats(min_value=0.1, max_value=10),
    cal=st.floats(min_value=0.1, max_value=100),
)
def test_pcp_branches_agree_at_recovered_fte(ws, k, cal):
    fte = recover_dummy_fte(k, cal)
    assert pcp_score_annual(ws, fte, cal, k) == pytest.approx(pcp_score_annual(ws, None, cal, k), abs=1e-9, rel=1e-12)


# --- K estimation ------------------------------------------------------------


@pytest.mark.parametrize("k", [0.94, 1.075])
def test_estimate_k_exact(k):
    rng = np.random.default_rng(7)
    ws = rng.uniform(50, 5000, 30)
    pcp = np.sqrt(ws / k)
    assert estimate_k(ws, pcp) == pytest.approx(k, abs=1e-9)


def test_estimate_k_single_record():
    assert estimate_k([400.0], [20.0]) == pytest.approx(1.0)


def test_estimate_k_noisy():
    rng = np.random.default_rng(11)
    ws = rng.uniform(50, 5000, 100)
    pcp = np.sqrt(ws / 1.075) * (1 + rng.uniform(-0.05, 0.05, 100))
    assert estimate_k(ws, pcp) == pytest.approx(1.075, abs=0.02)


def test_estimate_k_errors():
    with pytest.raises(EstimationError):
        estimate_k([], [])
    with pytest.raises(EstimationError):
        estimate_k([10.0, 20.0], [0.0, 0.0])
    with pytest.raises(InputError):
        estimate_k([1.0], [1.0, 2.0])


# --- totals ------------------------------------------------------------------


def test_arwu_total_examples():
    assert arwu_total([100] * 6, STD) == pytest.approx(100.0)
    assert arwu_total([100, 100, 100, 0, 100, 100], SOC) == pytest.approx(100.0)
    assert arwu_total([0, 0, 0, 0, 100, 0], STD) == pytest.approx(20.0)


def test_arwu_total_socsci_requires_zero_ns():
    with pytest.raises(InputError):
        arwu_total([1, 1, 1, 1, 1, 1], SOC)


def test_weights_are_normalised():
    assert sum(STANDARD_WEIGHTS) == pytest.approx(1.0)
    assert sum(SOCSCI_WEIGHTS) == pytest.approx(1.0)
    rng = np.random.default_rng(3)
    for _ in range(50):
        s = rng.uniform(0, 100, 6)
        assert arwu_total(s, STD) == pytest.approx(float(np.dot(STANDARD_WEIGHTS, s)))
        s[3] = 0
        assert arwu_total(s, SOC) == pytest.approx(float(np.dot(SOCSCI_WEIGHTS, s)))


# --- annual mode ----------------------------------------------------------------


def test_single_institution_scores_100():
    table = score_annual([record("solo", (3, 4, 5, 6, 7), fte=900.0)])
    row = table.rows[0]
    assert row.indicator_scores == pytest.approx((100.0,) * 6)
    assert row.total == pytest.approx(100.0)
    assert row.rank == 1


def test_quarter_raw_scores_half():
    big = record("big", (40, 40, 40, 40, 40), fte=500.0)
    small = record("small", (10, 10, 10, 10, 10), fte=500.0)
    table = score_annual([small, big]).by_id()
    assert table["big"].indicator_scores == pytest.approx((100.0,) * 6)
    assert table["small"].indicator_scores == pytest.approx((50.0,) * 6)


def test_annual_anchoring():
    data = synthetic_dataset(np.random.default_rng(5), 60)
    table = score_annual(data, k=1.075)
    assert max(r.total for r in table.rows) == pytest.approx(100.0, abs=1e-12)
    scores = np.array([r.indicator_scores for r in table.rows])
    for i in range(5):
        assert scores[:, i].max() == pytest.approx(100.0, abs=1e-12)
    with_fte = [r for r in table.rows if next(d for d in data if d.id == r.id).fte is not None]
    assert max(r.indicator_scores[5] for r in with_fte) == pytest.approx(100.0, abs=1e-12)
    assert table.mode is Mode.ANNUAL


def test_annual_ranks_descending_with_id_tiebreak():
    a = record("b", (1, 1, 1, 1, 1), fte=10.0)
    b = record("a", (1, 1, 1, 1, 1), fte=10.0)
    rows = score_annual([a, b]).rows
    assert [r.id for r in rows] == ["a", "b"]
    assert [r.rank for r in rows] == [1, 2]


def test_annual_degenerate_indicator():
    recs = [record("a", (0, 1, 1, 1, 1), fte=10.0), record("b", (0, 2, 1, 1, 1), fte=10.0)]
    with pytest.raises(DegenerateIndicatorError, match="ALUMNI"):
        score_annual(recs)


def test_annual_needs_k_for_missing_fte():
    recs = [record("a", (1, 1, 1, 1, 1), fte=10.0), record("b", (2, 1, 1, 1, 1))]
    with pytest.raises(InputError, match="k is required"):
        score_annual(recs)


def test_annual_needs_some_fte():
    with pytest.raises(ComputationError):
        score_annual([record("a", (1, 1, 1, 1, 1))], k=1.0)


def _check_mode_equivalence(data, k):
    annual = score_annual(data, k=k)
    gains = annual_gains(data, k)
    assert gains.provenance is Provenance.ANNUAL_BEST_PERFORMER
    fixed = score_fixed_gain(data, gains.frozen())
    a, f = annual.by_id(), fixed.by_id()
    for ident in a:
        assert np.allclose(a[ident].indicator_scores, f[ident].indicator_scores, rtol=0, atol=1e-9)
    assert [r.id for r in annual.rows] == [r.id for r in fixed.rows]


@pytest.mark.parametrize("seed", range(10))
def test_mode_equivalence(seed):
    rng = np.random.default_rng(seed)
    _check_mode_equivalence(synthetic_dataset(rng, int(rng.integers(2, 80))), float(rng.uniform(0.5, 1.5)))


def test_annual_gains_reproduce_calibration():
    data = synthetic_dataset(np.random.default_rng(9), 30)
    gains = annual_gains(data, 1.0)
    for i in range(5):
        best = max(d.effective_raw()[i] for d in data)
        assert gains.gains[i] * math.sqrt(best) == pytest.approx(100.0, rel=1e-12)


# --- fixed mode ------------------------------------------------------------------


def test_fixed_mode_reference_record_scores_100():
    raw = tuple((100 / a) ** 2 for a in FIXED_GAINS[:5])
    rec = record("ref", raw, fte=1.0)
    row = score_fixed_gain([rec]).rows[0]
    assert row.indicator_scores[:5] == pytest.approx((100.0,) * 5)


def test_fixed_mode_zero_record_last():
    zero = record("zero", fte=100.0)
    other = record("other", (1, 1, 1, 1, 1), fte=100.0)
    rows = score_fixed_gain([zero, other]).rows
    assert rows[-1].id == "zero"
    assert rows[-1].total == 0.0


def test_fixed_mode_requires_fixed_provenance():
    g = GainSet(FIXED_GAINS, Provenance.ANNUAL_BEST_PERFORMER)
    with pytest.raises(InputError):
        score_fixed_gain([record("a", (1, 1, 1, 1, 1))], g)


def test_fixed_mode_no_rescaling():
    rec = record("a", (1, 1, 1, 1, 1), fte=DUMMY_FTE)
    row = score_fixed_gain([rec]).rows[0]
    assert row.total < 100


raw_values = st.floats(min_value=0, max_value=5000)
rows_strategy = st.lists(
    st.tuples(raw_values, raw_values, raw_values, raw_values, raw_values, st.booleans(), st.booleans()),
    min_size=2,
    max_size=8,
)


def _records(rows):
    # Column-wise +1 keeps every indicator non-degenerate; the first row always has an FTE.
    out = []
    for j, (a, b, c, d, e, soc, has_fte) in enumerate(rows):
        fte = 300.0 + 50 * j if (has_fte or j == 0) else None
        out.append(record(f"r{j}", (a + 1, b + 1, c + 1, d + 1, e + 1), SOC if soc and j else STD, fte))
    return out


def _bump(rec, which, amount):
    raw = list(rec.effective_raw())
    raw[which] += amount
    return InstitutionRecord(rec.id, rec.name, rec.cls, dict(zip(Indicator, raw)), rec.fte)


@settings(max_examples=80, deadline=None)
@given(rows=rows_strategy, who=st.integers(0, 7), which=st.integers(0, 4), amount=st.floats(0.0, 10000.0))
def test_monotonicity_both_modes(rows, who, which, amount):
    data = _records(rows)
    j = who % len(data)
    bumped = data[:j] + [_bump(data[j], which, amount)] + data[j + 1 :]
    ident = data[j].id

    before = score_fixed_gain(data).by_id()[ident].total
    after = score_fixed_gain(bumped).by_id()[ident].total
    assert after >= before - 1e-9

    before = score_annual(data, k=1.0).by_id()[ident].total
    after = score_annual(bumped, k=1.0).by_id()[ident].total
    assert after >= before - 1e-9


@given(scale=st.floats(min_value=0.1, max_value=10), which=st.integers(0, 4))
def test_rescaling_one_gain_keeps_order(scale, which):
    rng = np.random.default_rng(1)
    data = synthetic_dataset(rng, 25)
    base = GainSet()
    gains = list(base.gains)
    gains[which] *= scale
    tweaked = GainSet(tuple(gains))
    ind = Indicator(which + 1)
    s0 = [indicator_score_fixed(d, base, ind) for d in data]
    s1 = [indicator_score_fixed(d, tweaked, ind) for d in data]
    assert np.allclose(np.array(s1), np.array(s0) * scale)
    assert list(np.argsort(s0, kind="stable")) == list(np.argsort(s1, kind="stable"))


# --- inversion -------------------------------------------------------------------


def test_invert_examples():
    assert invert_published(100.0) == 10000.0
    assert invert_published(50.0) == 2500.0
    assert invert_published(89.375, 17.875) == pytest.approx(25.0)


def test_invert_rejects_bad_scores():
    with pytest.raises(InputError):
        invert_published(-1.0)
    with pytest.raises(InputError):
        invert_published(100.5)
    assert invert_published(120.0, 10.0) == pytest.approx(144.0)


@given(st.floats(min_value=0, max_value=100))
def test_invert_round_trip(s):
    assert rescore(invert_published(s)) == pytest.approx(s, abs=1e-9)
    assert rescore(invert_published(s, 7.225), 7.225) == pytest.approx(s, abs=1e-9)


def test_invert_with_error_bars():
    point, lo, hi = invert_with_error(50.0)
    assert point == 2500.0
    assert lo == pytest.approx(10000 * 0.4995**2)
    assert hi == pytest.approx(10000 * 0.5005**2)
    point, lo, hi = invert_with_error(100.0)
    assert hi == 10000.0
    _, lo, _ = invert_with_error(0.0)
    assert lo == 0.0


# --- bands -------------------------------------------------------------------------


@pytest.mark.parametrize(
    "rank,label",
    [(1, None), (100, None), (101, "101-150"), (150, "101-150"), (151, "151-200"), (500, "451-500"), (501, None)],
)
def test_band_labels(rank, label):
    assert band_label(rank) == label


def test_band_width_configurable():
    assert band_label(250, width=100) == "201-300"
    assert band_label(480, width=100) == "401-500"


def test_record_validation():
    with pytest.raises(InputError):
        record(raw=(-1, 0, 0, 0, 0))
    with pytest.raises(InputError):
        record(fte=0.0)
    with pytest.raises(InputError):
        GainSet((1, 2, 3))
    with pytest.raises(InputError):
        GainSet((1, 2, 3, 4, 5, 0))
