import numpy as np
import pytest

from corrshift import (
    BadRho,
    DetectorConfig,
    DistanceMetricKind,
    ExperimentResult,
    NoSolution,
    NormComparisonRow,
    Regime,
    SyntheticSpec,
    block_exchangeable_sigma,
    calibrate_rho_for_power,
    detection_frequency,
    fig2_csv,
    fig3_csv,
    fig4_csv,
    generate_ar1_panel,
    generate_panel,
    log_returns,
    multiple_cp_experiment,
    power_experiment,
    segment_covariance,
    standardize,
    synthetic_market_prices,
)
from corrshift._streams import stream


def test_block_exchangeable_entries():
    sigma = block_exchangeable_sigma(5, 3, 0.5).values
    assert np.allclose(np.diag(sigma), 1.0)
    for i in range(3):
        for j in range(3):
            if i != j:
                assert sigma[i, j] == 0.5
    assert sigma[0, 3] == 0.0 and sigma[3, 4] == 0.0 and sigma[2, 4] == 0.0
    full = block_exchangeable_sigma(4, 4, 0.9).values
    assert np.allclose(full, 0.9 * np.ones((4, 4)) + 0.1 * np.eye(4))
    # negative rho is fine as long as the block stays positive definite
    tiny = block_exchangeable_sigma(6, 2, -0.4).values
    assert tiny[0, 1] == -0.4
    assert np.all(np.linalg.eigvalsh(tiny) > 0)


def test_block_exchangeable_validation():
    with pytest.raises(BadRho):
        block_exchangeable_sigma(5, 3, 1.0)
    with pytest.raises(BadRho):
        block_exchangeable_sigma(5, 3, -0.5)  # boundary -1/(block-1)
    with pytest.raises(BadRho):
        block_exchangeable_sigma(5, 3, -0.9)
    with pytest.raises(ValueError):
        block_exchangeable_sigma(5, 1, 0.5)
    with pytest.raises(ValueError):
        block_exchangeable_sigma(5, 6, 0.5)


def test_spec_validation():
    eye = np.eye(3)
    with pytest.raises(ValueError):
        SyntheticSpec(n=1, regimes=[Regime(10, np.eye(1))])
    with pytest.raises(ValueError):
        SyntheticSpec(n=3, regimes=[Regime(3, eye)])  # T < 4
    with pytest.raises(ValueError):
        SyntheticSpec(n=3, regimes=[Regime(10, np.eye(4))])
    with pytest.raises(ValueError):
        Regime(-1, eye)
    spec = SyntheticSpec(n=3, regimes=[Regime(0, eye), Regime(10, eye)])
    assert spec.T == 10


def test_generate_panel_deterministic():
    spec = SyntheticSpec(n=4, regimes=[Regime(30, np.eye(4))], seed=9)
    a = generate_panel(spec)
    b = generate_panel(spec)
    assert np.array_equal(a.values, b.values)


def test_generate_panel_zero_length_regime_noop():
    eye = np.eye(4)
    with_empty = SyntheticSpec(
        n=4, regimes=[Regime(0, eye), Regime(25, eye), Regime(0, eye)], seed=3)
    plain = SyntheticSpec(n=4, regimes=[Regime(25, eye)], seed=3)
    assert np.array_equal(generate_panel(with_empty).values,
                          generate_panel(plain).values)


def test_generate_panel_regime_lengths_and_cov():
    sigma = block_exchangeable_sigma(3, 3, 0.6)
    spec = SyntheticSpec(n=3, regimes=[Regime(4000, sigma)], seed=11)
    panel = generate_panel(spec)
    assert panel.values.shape == (3, 4000)
    cov = segment_covariance(standardize(panel), 1, 4000).values
    # sigma is a correlation matrix, so the standardized sample cov tracks it
    assert np.allclose(cov, sigma.values, atol=5.0 / np.sqrt(4000))
    # regimes accept plain nested lists too
    listy = SyntheticSpec(n=2, regimes=[Regime(6, [[1.0, 0.0], [0.0, 1.0]])])
    assert generate_panel(listy).values.shape == (2, 6)


def test_generate_ar1_panel():
    with pytest.raises(ValueError):
        generate_ar1_panel(3, 100, 1.0, stream(1, 0))
    a = generate_ar1_panel(4, 5000, 0.6, stream(12, 0))
    b = generate_ar1_panel(4, 5000, 0.6, stream(12, 0))
    assert np.array_equal(a.values, b.values)
    r1 = [np.corrcoef(row[1:], row[:-1])[0, 1] for row in a.values]
    assert 0.55 <= np.mean(r1) <= 0.65


def test_power_experiment_result_fields():
    config = DetectorConfig(b_count=100, seed=21)
    results = power_experiment([4], C=30, rho=0.9, reps=100, config=config)
    res, = results
    assert res.n == 4 and res.T == 42
    assert res.true_points == (21,)
    assert res.replications == 100
    assert 0.0 <= res.power <= 1.0
    assert len(res.detections) == 100
    assert sum(res.detection_histogram.values()) == pytest.approx(res.power)
    for offset in res.detection_histogram:
        assert isinstance(offset, int)
    # strong 4-node signal in a 4-node panel: most replicates should fire
    assert res.power >= 0.6
    again, = power_experiment([4], C=30, rho=0.9, reps=100, config=config)
    assert again.detections == res.detections


def test_power_experiment_T_formula():
    config = DetectorConfig(b_count=100, seed=22)
    results = power_experiment([4, 8], C=30, rho=0.9, reps=100, config=config)
    assert [res.T for res in results] == [42, 86]


def test_power_experiment_null_size():
    config = DetectorConfig(b_count=100, seed=23)
    res, = power_experiment([4], C=30, rho=0.0, reps=100, config=config)
    assert res.power <= 0.12


def test_power_experiment_rep_floor():
    with pytest.raises(ValueError):
        power_experiment([4], reps=99, config=DetectorConfig(b_count=100))


def test_calibrate_rho_orders_by_block_size():
    config = DetectorConfig(b_count=100, seed=24)
    small = calibrate_rho_for_power(6, 80, 3, 0.5, config, reps=100)
    large = calibrate_rho_for_power(6, 80, 6, 0.5, config, reps=100)
    assert 0.0 < large < small < 1.0


def test_calibrate_target_validation():
    config = DetectorConfig(b_count=100, alpha=0.05)
    for target in (0.05, 0.01, 1.0, 1.5):
        with pytest.raises(ValueError):
            calibrate_rho_for_power(6, 80, 3, target, config, reps=100)


def test_calibrate_no_solution():
    # 2-node block in an 11-column window: even rho -> 1 cannot reach 99%
    config = DetectorConfig(b_count=100, seed=25)
    with pytest.raises(NoSolution):
        calibrate_rho_for_power(10, 23, 2, 0.99, config, reps=100)


def test_multiple_cp_bins_and_power():
    config = DetectorConfig(b_count=100, seed=26)
    res = multiple_cp_experiment(config=config, reps=60, n=6, T=120, block=5,
                                 rho=0.9, switches=(30, 60, 90))
    assert res.true_points == (30, 60, 90)
    bins = list(res.detection_histogram)
    assert bins[0] == (1, 5) and bins[-1] == (116, 120) and len(bins) == 24
    assert all(hi == lo + 4 for lo, hi in bins)
    assert all(0.0 <= p <= 1.0 for p in res.detection_histogram.values())
    assert res.power >= 0.5
    assert max(detection_frequency(res, s, 7) for s in (30, 60, 90)) >= 0.3


def test_multiple_cp_null_size():
    config = DetectorConfig(b_count=100, seed=27)
    res = multiple_cp_experiment(config=config, reps=100, n=6, T=120, block=3,
                                 rho=0.0, switches=(30, 60, 90))
    assert res.power <= 0.12


def test_detection_frequency_counting():
    config = DetectorConfig(b_count=100)
    res = ExperimentResult(
        n=4, T=200, true_points=(100,),
        detection_histogram={}, power=0.75, replications=4,
        config=config, detections=(100, None, 102, (98, 205)))
    assert detection_frequency(res, 100, 2) == pytest.approx(0.75)
    assert detection_frequency(res, 205, 0) == pytest.approx(0.25)
    assert detection_frequency(res, 400, 3) == 0.0


def test_fig_csv_emitters():
    config = DetectorConfig(b_count=100)
    res = ExperimentResult(
        n=4, T=42, true_points=(21,),
        detection_histogram={-1: 0.25, 0: 0.5}, power=0.75, replications=4,
        config=config, detections=(20, 21, 21, None))
    out = fig2_csv([res])
    lines = out.splitlines()
    assert lines[0] == "n,T,offset,prob"
    assert lines[1] == "4,42,-1,0.25"
    assert lines[2] == "4,42,0,0.5"
    assert out.endswith("\n")

    rows = [NormComparisonRow(proportion=0.1, block=2, rho=0.9,
                              metric=DistanceMetricKind.FROBENIUS_SQ, power=0.5)]
    lines3 = fig3_csv(rows).splitlines()
    assert lines3[0] == "proportion,block,rho,metric,power"
    assert lines3[1].startswith("0.1,2,0.9,") and lines3[1].endswith(",0.5")

    res4 = ExperimentResult(
        n=4, T=10, true_points=(5,),
        detection_histogram={(1, 5): 0.1, (6, 10): 0.0}, power=0.1,
        replications=10, config=config, detections=((3,),))
    lines4 = fig4_csv(res4).splitlines()
    assert lines4[0] == "bin_start,bin_end,prob"
    assert lines4[1] == "1,5,0.1"
    assert lines4[2] == "6,10,0.0"


def test_synthetic_market_prices():
    panel = synthetic_market_prices()
    assert panel.values.shape == (50, 2001)
    assert np.all(panel.values > 0)
    assert panel.node_labels[0] == "STK01" and panel.node_labels[-1] == "STK50"
    again = synthetic_market_prices()
    assert np.array_equal(panel.values, again.values)
    returns = log_returns(panel)
    assert returns.values.shape == (50, 2000)
    standardize(returns)  # no ConstantRow, finite throughout
