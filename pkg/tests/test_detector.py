import math

import numpy as np
import pytest

from covertlink.bounds import (
    BPSK,
    GAUSSIAN,
    SPARSE,
    covert_power_budget,
    known_floor,
    radiometer_calibration,
)
from covertlink.detector import (
    LRT,
    RADIOMETER,
    DetectionScenario,
    classify_lrt,
    classify_radiometer,
    estimate_detection_errors,
    radiometer_statistic,
    signal_model,
)
from covertlink.stats import DensitySpec, tv_numeric_1d


def test_signal_model_shapes():
    g = signal_model(GAUSSIAN, 1.0, 0.25)
    assert g.components == ((1.0, 0.0, 1.25),)

    b = signal_model(BPSK, 2.0, 0.25)
    assert len(b.components) == 2
    assert b.components[0] == (0.5, -0.5, 2.0)
    assert b.components[1] == (0.5, 0.5, 2.0)

    s = signal_model(SPARSE, 1.0, 0.25, tau=0.2)
    weights = [w for w, _, _ in s.components]
    means = [m for _, m, _ in s.components]
    assert weights == [0.8, 0.1, 0.1]
    assert means == [0.0, -0.5, 0.5]

    # full occupancy degenerates to the two-point mixture
    assert len(signal_model(SPARSE, 1.0, 0.25, tau=1.0).components) == 2
    # no transmit power: the signal marginal is the noise marginal
    silent = signal_model(BPSK, 1.5, 0.0)
    assert silent.components == ((1.0, 0.0, 1.5),)
    with pytest.raises(ValueError):
        signal_model("other", 1.0, 0.1)


def test_radiometer_statistic():
    assert radiometer_statistic(np.array([1.0, -3.0])) == 5.0
    with pytest.raises(ValueError):
        radiometer_statistic(np.array([]))


def test_radiometer_boundary_rejects():
    cal = radiometer_calibration(4, 0.5, 1.0)
    assert cal.d == 2.0 and cal.t == 1.0
    on_boundary = np.array([2.0, 2.0, 0.0, 0.0])  # statistic exactly 2.0
    assert classify_radiometer(on_boundary, cal)
    assert not classify_radiometer(np.ones(4), cal)
    with pytest.raises(ValueError):
        classify_radiometer(np.ones(5), cal)


def test_lrt_matches_energy_threshold_for_gaussian_pair():
    v0, v1 = 1.0, 1.7
    p0 = DensitySpec.gaussian(0.0, v0)
    p1 = DensitySpec.gaussian(0.0, v1)
    n = 12
    threshold = n * math.log(v1 / v0) / (1.0 / v0 - 1.0 / v1)
    gen = np.random.default_rng(7)
    for _ in range(300):
        y = gen.normal(0.0, 1.3, size=n)
        assert classify_lrt(y, p0, p1) == (float(np.sum(y * y)) > threshold)


def test_lrt_tie_keeps_noise_hypothesis():
    p = DensitySpec.gaussian(0.0, 1.0)
    assert not classify_lrt(np.array([0.3, -0.8]), p, p)


def test_lrt_rejects_nan():
    p0 = DensitySpec.gaussian(0.0, 1.0)
    p1 = DensitySpec.gaussian(0.0, 2.0)
    with pytest.raises(ArithmeticError):
        classify_lrt(np.array([float("nan")]), p0, p1)
    with pytest.raises(ValueError):
        classify_lrt(np.array([]), p0, p1)


def test_scenario_validation():
    with pytest.raises(ValueError):
        DetectionScenario("other", 16, 1.0, 0.1)
    with pytest.raises(ValueError):
        DetectionScenario(BPSK, 16, -1.0, 0.1)
    with pytest.raises(ValueError):
        DetectionScenario(BPSK, 16, 1.0, -0.1)
    with pytest.raises(ValueError):
        DetectionScenario(BPSK, 16, 1.0, 0.1, alpha_star=1.0)
    scenario = DetectionScenario(SPARSE, 16, 1.0, 0.4, tau=0.5)
    assert scenario.average_power == 0.2


def test_estimate_input_checks():
    scenario = DetectionScenario(BPSK, 32, 1.0, 0.1)
    with pytest.raises(ValueError):
        estimate_detection_errors("other", scenario, 200, 1)
    with pytest.raises(ValueError):
        estimate_detection_errors(LRT, scenario, 99, 1)


def test_radiometer_false_alarm_stays_under_target():
    scenario = DetectionScenario(BPSK, 256, 1.0, 0.05, alpha_star=0.05)
    report = estimate_detection_errors(RADIOMETER, scenario, 500, seed=11)
    assert report.alpha_bound == 0.05
    # the Chebyshev calibration is conservative, so alpha_hat sits well under
    assert report.alpha_hat.point <= 0.05 + 3.0 * report.alpha_hat.ci_half_width


def test_zero_power_is_undetectable():
    scenario = DetectionScenario(GAUSSIAN, 64, 1.0, 0.0)
    lrt = estimate_detection_errors(LRT, scenario, 300, seed=13)
    # identical marginals: the LRT is identically zero and never rejects
    assert lrt.alpha_hat.point == 0.0
    assert lrt.beta_hat.point == 1.0

    radio = estimate_detection_errors(RADIOMETER, scenario, 400, seed=13)
    total = radio.alpha_hat.point + radio.beta_hat.point
    slack = 3.0 * (radio.alpha_hat.ci_half_width + radio.beta_hat.ci_half_width)
    assert abs(total - 1.0) <= slack + 1e-12


def test_lrt_single_use_error_sum_matches_tv():
    scenario = DetectionScenario(BPSK, 1, 1.0, 1.0)
    report = estimate_detection_errors(LRT, scenario, 4_000, seed=17)
    p0 = DensitySpec.gaussian(0.0, 1.0)
    p1 = signal_model(BPSK, 1.0, 1.0)
    tv = tv_numeric_1d(p0, p1)
    total = report.alpha_hat.point + report.beta_hat.point
    slack = 3.0 * (report.alpha_hat.ci_half_width + report.beta_hat.ci_half_width)
    assert abs(total - (1.0 - tv)) <= slack


def test_tv_bound_attaches_only_for_matching_budget():
    budget = covert_power_budget(512, 0.1, BPSK, known_floor(1.0))
    matched = DetectionScenario(
        BPSK, 512, 1.0, budget.symbol_power, budget=budget
    )
    report = estimate_detection_errors(LRT, matched, 200, seed=19)
    assert report.tv_bound is not None
    assert abs(report.tv_bound - 0.1) < 1e-12

    drifted = DetectionScenario(BPSK, 512, 1.0, 0.9 * budget.symbol_power, budget=budget)
    report = estimate_detection_errors(LRT, drifted, 200, seed=19)
    assert report.tv_bound is None

    plain = DetectionScenario(BPSK, 512, 1.0, budget.symbol_power)
    report = estimate_detection_errors(LRT, plain, 200, seed=19)
    assert report.tv_bound is None


def test_radiometer_codeword_episodes_detect_loud_signals():
    scenario = DetectionScenario(BPSK, 128, 1.0, 4.0, alpha_star=0.05)
    report = estimate_detection_errors(RADIOMETER, scenario, 300, seed=23)
    # a^2 = 4 x noise power: every episode crosses the energy threshold
    assert report.beta_hat.point < 0.05
    assert report.beta_bound is not None or report.beta_bound_vacuous


def test_estimates_are_deterministic_and_thread_invariant(monkeypatch):
    scenario = DetectionScenario(GAUSSIAN, 64, 1.0, 0.3)
    monkeypatch.setenv("COVERTLINK_THREADS", "1")
    serial = estimate_detection_errors(LRT, scenario, 500, seed=29)
    monkeypatch.setenv("COVERTLINK_THREADS", "3")
    threaded = estimate_detection_errors(LRT, scenario, 500, seed=29)
    assert serial.alpha_hat == threaded.alpha_hat
    assert serial.beta_hat == threaded.beta_hat

    again = estimate_detection_errors(LRT, scenario, 500, seed=29)
    assert again.alpha_hat == serial.alpha_hat
