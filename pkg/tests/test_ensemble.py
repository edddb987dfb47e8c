import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddpce.basis import MultiIndexSet, PceModel
from ddpce.ensemble import (
    EnsembleModel,
    ErrorStats,
    FitSettings,
    SplitPlan,
    error_stats,
    mape,
    max_ape,
    predict_with_uncertainty,
    read_error_stats,
    relative_error,
    train_ensemble,
    write_error_stats,
)
from ddpce.features import Dataset, sample_uniform
from ddpce.thermal import synthetic_oracle

ZERO = (0,) * 9
PLAN = SplitPlan(1, 1, 10, 0)
SETTINGS = FitSettings()


@pytest.fixture(scope="module")
def oracle_data():
    y = sample_uniform(300, seed=7)
    return Dataset(y, synthetic_oracle(y))


def constant(c):
    return PceModel(MultiIndexSet([ZERO]), [c])


def test_relative_error_examples():
    assert relative_error(100, 100) == 0.0
    assert relative_error(100, 90) == pytest.approx(0.1)
    assert relative_error(50, 55) == pytest.approx(0.1)
    with pytest.raises(ZeroDivisionError):
        relative_error(0.0, 1.0)


def test_mape_examples():
    assert (mape([60, 70], [60, 70]), max_ape([60, 70], [60, 70])) == (0.0, 0.0)
    assert mape([100, 100], [90, 110]) == pytest.approx(0.1)
    assert max_ape([100, 100], [90, 110]) == pytest.approx(0.1)
    assert mape([100, 200], [110, 100]) == pytest.approx(0.3)
    assert max_ape([100, 200], [110, 100]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        mape([1, 2], [1])


@given(st.lists(st.floats(1, 1e3), min_size=1, max_size=20), st.data())
def test_mape_bounded_by_max(truths, data):
    preds = data.draw(st.lists(st.floats(-1e3, 1e3), min_size=len(truths), max_size=len(truths)))
    assert 0 <= mape(truths, preds) <= max_ape(truths, preds) + 1e-15


def test_split_plan_checks():
    with pytest.raises(ValueError, match="M=800 \\+ J=135"):
        SplitPlan(0, 1, 800, 135).check(900)
    with pytest.raises(ValueError):
        SplitPlan(0, 0, 10, 5).check(100)


@given(st.integers(0, 2**63 - 1), st.integers(0, 500), st.integers(1, 50), st.integers(0, 50))
def test_split_disjoint_and_deterministic(seed, member, M, J):
    plan = SplitPlan(seed, member + 1, M, J)
    tr, te = plan.split(member, 120)
    assert len(tr) == M and len(te) == J
    assert not set(tr.tolist()) & set(te.tolist())
    tr2, te2 = plan.split(member, 120)
    assert np.array_equal(tr, tr2) and np.array_equal(te, te2)


def test_single_member_equals_direct_fit(oracle_data):
    plan = SplitPlan(3, 1, 300 - 100, 100)
    ens = train_ensemble(oracle_data, plan)
    tr, te = plan.split(0, 300)
    direct, _ = SETTINGS.fit(oracle_data.subset(tr))
    m = ens.members[0]
    assert m.basis == direct.basis and np.array_equal(m.coefficients, direct.coefficients)
    test = oracle_data.subset(te)
    assert ens.member_errors[0] == (mape(test.responses, direct.predict(test.points)),
                                    max_ape(test.responses, direct.predict(test.points)))
    s = error_stats(ens)
    assert s.sigma_mean == s.sigma_max == 0.0 and s.mu_mean == ens.member_errors[0][0]


def test_duplicate_rows_give_identical_members():
    y = np.repeat(sample_uniform(1, seed=2), 40, axis=0)
    ds = Dataset(y, synthetic_oracle(y))
    ens = train_ensemble(ds, SplitPlan(0, 4, 20, 10))
    mean, std = predict_with_uncertainty(ens, sample_uniform(10, seed=3))
    assert np.all(std == 0.0)
    s = error_stats(ens)
    assert s.sigma_mean == 0.0 and s.worst == s.mu_max


def test_error_stats_two_members():
    ens = EnsembleModel((constant(1.0), constant(2.0)), ((0.1, 0.2), (0.3, 0.5)), PLAN, SETTINGS)
    s = error_stats(ens)
    assert s.mu_mean == pytest.approx(0.2) and s.sigma_mean == pytest.approx(0.1)
    assert s.worst == 0.5 and s.worst >= s.mu_max


def test_predict_two_members():
    ens = EnsembleModel((constant(60.0), constant(62.0)), ((0, 0), (0, 0)), PLAN, SETTINGS)
    assert predict_with_uncertainty(ens, sample_uniform(1, seed=0)[0]) == (61.0, 1.0)


def test_ensemble_rejects_mixed_specs():
    from ddpce.features import DEFAULT_SPECS, FeatureSpec
    specs = list(DEFAULT_SPECS)
    specs[0] = FeatureSpec("l", "l_mm", "mm", 60.0, 200.0)
    other = PceModel(MultiIndexSet([ZERO]), [1.0], tuple(specs))
    with pytest.raises(ValueError):
        EnsembleModel((constant(1.0), other), ((0, 0), (0, 0)), PLAN, SETTINGS)


@settings(max_examples=20)
@given(st.lists(st.floats(40, 120), min_size=1, max_size=6), st.integers(0, 1000))
def test_prediction_mean_within_member_range(values, seed):
    ens = EnsembleModel(tuple(constant(v) for v in values), tuple((0, 0) for _ in values), PLAN, SETTINGS)
    mean, std = predict_with_uncertainty(ens, sample_uniform(3, seed=seed))
    assert np.all(mean >= min(values) - 1e-9) and np.all(mean <= max(values) + 1e-9)
    assert np.all(std >= 0)


def test_threads_do_not_change_results(oracle_data):
    plan = SplitPlan(11, 6, 120, 60)
    a = train_ensemble(oracle_data, plan, threads=1)
    b = train_ensemble(oracle_data, plan, threads=4)
    assert a.member_errors == b.member_errors
    for ma, mb in zip(a.members, b.members):
        assert ma.basis == mb.basis and np.array_equal(ma.coefficients, mb.coefficients)


def test_member_depends_only_on_seed_and_index(oracle_data):
    small = train_ensemble(oracle_data, SplitPlan(5, 2, 80, 40))
    big = train_ensemble(oracle_data, SplitPlan(5, 4, 80, 40))
    for ma, mb in zip(small.members, big.members):
        assert np.array_equal(ma.coefficients, mb.coefficients)


def test_other_solvers(oracle_data):
    for fs in (FitSettings(solver="ols", degree=2), FitSettings(solver="lar", degree=2, max_active=30)):
        ens = train_ensemble(oracle_data, SplitPlan(0, 2, 100, 50), fs)
        assert error_stats(ens).mu_mean < 0.2


def test_save_load_round_trip(tmp_path, oracle_data):
    ens = train_ensemble(oracle_data, SplitPlan(2, 3, 100, 50))
    ens.save(tmp_path / "ens")
    back = EnsembleModel.load(tmp_path / "ens")
    pts = sample_uniform(20, seed=4)
    assert np.array_equal(back.member_predictions(pts), ens.member_predictions(pts))
    assert back.plan == ens.plan and back.settings == ens.settings and back.member_errors == ens.member_errors
    # saving a smaller ensemble into the same directory leaves no stale members
    EnsembleModel(ens.members[:1], ens.member_errors[:1], ens.plan, ens.settings).save(tmp_path / "ens")
    assert len(EnsembleModel.load(tmp_path / "ens")) == 1


def test_error_stats_csv_round_trip(tmp_path):
    rows = [(100, ErrorStats(0.1, 0.01, 0.3, 0.02, 0.5)), (200, ErrorStats(0.05, 0.005, 0.2, 0.01, 0.3))]
    write_error_stats(rows, tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text().splitlines()[0] == "M,mu_mean,sigma_mean,mu_max,sigma_max,worst"
    assert read_error_stats(tmp_path / "e.csv") == rows
