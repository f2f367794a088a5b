"""Warden-side detectors and Monte Carlo estimation of their error rates.

Two detectors are modeled: a calibrated energy detector (radiometer) and the
likelihood-ratio test between the per-sample noise and signal marginals.
Conventions: a classifier returns True when it rejects the noise-only
hypothesis; the energy test rejects on its threshold boundary; the LRT
resolves ties to the noise hypothesis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .bounds import (
    BPSK,
    GAUSSIAN,
    SCHEMES,
    SPARSE,
    CovertBudget,
    RadiometerCalibration,
    VacuousBoundError,
    radiometer_beta_bound,
    radiometer_calibration,
    tv_taylor_bound,
)
from .codec import DEFAULT_CODEBOOK_REFRESH, CodebookSpec, encode, generate_codebook
from .stats import CI_MULTIPLIER, DensitySpec, IntervalEstimate

RADIOMETER = "radiometer"
LRT = "lrt"
DETECTORS = (RADIOMETER, LRT)


@dataclass(frozen=True)
class DetectionScenario:
    """What the warden faces: scheme, block length, noise, and powers.

    ``power`` is the occupied-symbol power (P_f for gaussian, a^2 for the
    antipodal schemes); zero means no transmission ever happens.  When the
    power split came from a covertness budget, attach it so the matching
    total-variation bound can be reported.
    """

    scheme: str
    n: int
    sigma_w_sq: float
    power: float
    tau: float = 1.0
    alpha_star: float = 0.05
    message_bits: int = 4
    budget: CovertBudget | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.sigma_w_sq <= 0.0:
            raise ValueError(f"sigma_w_sq must be positive, got {self.sigma_w_sq}")
        if self.power < 0.0:
            raise ValueError(f"power must be non-negative, got {self.power}")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError(f"tau must lie in (0, 1], got {self.tau}")
        if not 0.0 < self.alpha_star < 1.0:
            raise ValueError(f"alpha_star must lie in (0, 1), got {self.alpha_star}")
        if self.message_bits < 1:
            raise ValueError(f"message_bits must be >= 1, got {self.message_bits}")

    @property
    def average_power(self) -> float:
        """Mean per-slot transmit power under transmission."""
        if self.scheme == GAUSSIAN:
            return self.power
        return self.tau * self.power


@dataclass(frozen=True)
class DetectionReport:
    """Empirical false-alarm and miss rates with whatever bounds apply."""

    detector: str
    scenario: DetectionScenario
    trials: int
    seed: int
    alpha_hat: IntervalEstimate
    beta_hat: IntervalEstimate
    alpha_bound: float | None
    beta_bound: float | None
    beta_bound_vacuous: bool
    tv_bound: float | None


def signal_model(
    scheme: str, sigma_w_sq: float, power: float, tau: float = 1.0
) -> DensitySpec:
    """Per-sample marginal the warden sees while a codeword is on the air."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if power < 0.0:
        raise ValueError(f"power must be non-negative, got {power}")
    if power == 0.0:
        return DensitySpec.gaussian(0.0, sigma_w_sq)
    if scheme == GAUSSIAN:
        return DensitySpec.gaussian(0.0, sigma_w_sq + power)
    a = math.sqrt(power)
    if scheme == BPSK or tau == 1.0:
        return DensitySpec.mixture(
            [(0.5, -a, sigma_w_sq), (0.5, a, sigma_w_sq)]
        )
    return DensitySpec.mixture(
        [
            (1.0 - tau, 0.0, sigma_w_sq),
            (tau / 2.0, -a, sigma_w_sq),
            (tau / 2.0, a, sigma_w_sq),
        ]
    )


def radiometer_statistic(y: np.ndarray) -> float:
    """Per-slot average energy of an observation window."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("radiometer statistic needs a nonempty observation")
    return float(np.mean(y * y))


def classify_radiometer(y: np.ndarray, cal: RadiometerCalibration) -> bool:
    """True when average energy reaches sigma_w^2 + t (boundary rejects)."""
    y = np.asarray(y, dtype=float)
    if y.shape != (cal.n,):
        raise ValueError(f"observation shape {y.shape} != ({cal.n},)")
    return radiometer_statistic(y) >= cal.sigma_w_sq + cal.t


def classify_lrt(y: np.ndarray, p0: DensitySpec, p1: DensitySpec) -> bool:
    """True when the summed log-likelihood ratio favors p1 (ties keep p0)."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("likelihood-ratio test needs a nonempty observation")
    llr = float(np.sum(p1.logpdf(y) - p0.logpdf(y)))
    if math.isnan(llr):
        raise ArithmeticError("log-likelihood ratio is undefined at this observation")
    return llr > 0.0


def _rate_estimate(count: int, trials: int) -> IntervalEstimate:
    p = count / trials
    return IntervalEstimate(
        p, CI_MULTIPLIER * math.sqrt(p * (1.0 - p) / trials), trials
    )


def _noise_rejections(detector, scenario, p0, p1, cal, trials, seed, label) -> int:
    sizes = rng.block_sizes(trials, scenario.n)
    sd = math.sqrt(scenario.sigma_w_sq)
    threshold = None if cal is None else cal.sigma_w_sq + cal.t

    def one_block(b: int) -> int:
        gen = rng.stream(seed, "detect", detector, label, b)
        y = rng.normal(gen, (sizes[b], scenario.n), sd=sd)
        return _count_rejections(detector, y, p0, p1, threshold)

    return sum(rng.map_blocks(one_block, len(sizes)))


def _count_rejections(detector, y, p0, p1, threshold) -> int:
    if detector == RADIOMETER:
        stat = np.mean(y * y, axis=1)
        return int(np.count_nonzero(stat >= threshold))
    llr = np.sum(p1.logpdf(y) - p0.logpdf(y), axis=1)
    if np.any(np.isnan(llr)):
        raise ArithmeticError("log-likelihood ratio is undefined at an observation")
    return int(np.count_nonzero(llr > 0.0))


def _lrt_signal_rejections(scenario, p0, p1, trials, seed) -> int:
    sizes = rng.block_sizes(trials, scenario.n)

    def one_block(b: int) -> int:
        gen = rng.stream(seed, "detect", LRT, "h1", b)
        y = p1.sample(gen, sizes[b] * scenario.n).reshape(sizes[b], scenario.n)
        return _count_rejections(LRT, y, p0, p1, None)

    return sum(rng.map_blocks(one_block, len(sizes)))


def _codeword_rejections(scenario, cal, trials, seed) -> int:
    """Energy-detect actual encoded codewords, refreshing codebooks in groups."""
    spec = CodebookSpec(
        scenario.scheme,
        scenario.n,
        scenario.message_bits,
        scenario.power,
        scenario.tau,
    )
    group = DEFAULT_CODEBOOK_REFRESH
    groups = (trials + group - 1) // group
    threshold = cal.sigma_w_sq + cal.t
    sd = math.sqrt(scenario.sigma_w_sq)

    def one_group(g: int) -> int:
        size = min(group, trials - g * group)
        codebook = generate_codebook(spec, rng.derive_seed(seed, "detect_codebook", g))
        gen = rng.stream(seed, "detect", RADIOMETER, "h1", g)
        messages = gen.integers(0, spec.message_count, size=size)
        x = np.stack([encode(codebook, int(m)) for m in messages])
        y = x + rng.normal(gen, x.shape, sd=sd)
        stat = np.mean(y * y, axis=1)
        return int(np.count_nonzero(stat >= threshold))

    return sum(rng.map_blocks(one_group, groups))


def estimate_detection_errors(
    detector: str, scenario: DetectionScenario, trials: int, seed: int
) -> DetectionReport:
    """Monte Carlo false-alarm and miss rates for one detector and scenario.

    Noise-only episodes drive alpha_hat.  Transmission episodes drive
    beta_hat: the LRT faces i.i.d. draws from the per-sample signal marginal,
    the radiometer faces actual encoded codewords in noise (fresh message
    every episode, fresh codebook every ten).  Analytic companions are
    attached only where their formulas apply.
    """
    if detector not in DETECTORS:
        raise ValueError(f"unknown detector {detector!r}")
    trials = int(trials)
    if trials < 100:
        raise ValueError(f"trials must be >= 100, got {trials}")

    p0 = DensitySpec.gaussian(0.0, scenario.sigma_w_sq)
    p1 = signal_model(scenario.scheme, scenario.sigma_w_sq, scenario.power, scenario.tau)
    cal = None
    if detector == RADIOMETER:
        cal = radiometer_calibration(scenario.n, scenario.alpha_star, scenario.sigma_w_sq)

    false_alarms = _noise_rejections(
        detector, scenario, p0, p1, cal, trials, seed, "h0"
    )
    if scenario.power == 0.0:
        detections = _noise_rejections(
            detector, scenario, p0, p1, cal, trials, seed, "h1"
        )
    elif detector == LRT:
        detections = _lrt_signal_rejections(scenario, p0, p1, trials, seed)
    else:
        detections = _codeword_rejections(scenario, cal, trials, seed)

    alpha_hat = _rate_estimate(false_alarms, trials)
    beta_hat = _rate_estimate(trials - detections, trials)

    alpha_bound = scenario.alpha_star if detector == RADIOMETER else None
    beta_bound = None
    beta_vacuous = False
    if detector == RADIOMETER and scenario.average_power > 0.0:
        try:
            beta_bound = radiometer_beta_bound(cal, scenario.average_power).value
        except VacuousBoundError:
            beta_vacuous = True

    tv_bound = None
    budget = scenario.budget
    if (
        budget is not None
        and budget.scheme == scenario.scheme
        and budget.n == scenario.n
        and math.isclose(budget.symbol_power, scenario.power, rel_tol=1e-9)
        and math.isclose(budget.tau, scenario.tau, rel_tol=1e-9)
        and budget.symbol_power < scenario.sigma_w_sq
    ):
        tv_bound = tv_taylor_bound(budget, scenario.sigma_w_sq).value

    return DetectionReport(
        detector=detector,
        scenario=scenario,
        trials=trials,
        seed=seed,
        alpha_hat=alpha_hat,
        beta_hat=beta_hat,
        alpha_bound=alpha_bound,
        beta_bound=beta_bound,
        beta_bound_vacuous=beta_vacuous,
        tv_bound=tv_bound,
    )
