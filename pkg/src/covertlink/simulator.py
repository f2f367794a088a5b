"""Channel model and the three desk-scale experiments.

Every experiment derives each row's randomness purely from
(master_seed, experiment label, n, group index), so grid rows can be added,
removed, or computed in parallel without disturbing one another, and a rerun
with the same config reproduces results exactly.  No function here touches
the filesystem; the CLI layer owns serialization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .bounds import (
    GAUSSIAN,
    KNOWN_FLOOR,
    SCHEMES,
    UNKNOWN_DECAY,
    BoundValue,
    BudgetInfeasibleError,
    CovertBudget,
    FanoBound,
    FloorModel,
    achievable_rate,
    covert_power_budget,
    decoding_error_bound,
    fano_converse_bound,
    goodput_bound,
    radiometer_calibration,
)
from .codec import (
    DEFAULT_CODEBOOK_REFRESH,
    CodebookSpec,
    EmptyScheduleError,
    decode_hard_decision,
    decode_min_distance,
    encode,
    generate_codebook,
)
from .detector import LRT, RADIOMETER, DetectionReport, DetectionScenario, estimate_detection_errors
from .stats import CI_MULTIPLIER, IntervalEstimate


def awgn(x: np.ndarray, sigma_sq: float, gen: np.random.Generator) -> np.ndarray:
    """Add white Gaussian noise of power sigma_sq; sigma_sq = 0 is the identity."""
    x = np.asarray(x, dtype=float)
    if sigma_sq < 0.0:
        raise ValueError(f"noise power must be non-negative, got {sigma_sq}")
    if sigma_sq == 0.0:
        return x.copy()
    return x + rng.normal(gen, x.shape, sd=math.sqrt(sigma_sq))


@dataclass(frozen=True)
class ExperimentConfig:
    """Scenario family, grid, and budgets shared by the experiment drivers."""

    n_grid: tuple[int, ...]
    master_seed: int
    scheme: str = GAUSSIAN
    epsilon: float = 0.1
    rho: float = 0.9
    alpha_star: float = 0.05
    f_mode: str = KNOWN_FLOOR
    f_exponent: float = 0.25
    sigma_w_sq: float = 1.0
    sigma_b_sq: float = 1.0
    sigma_w_floor_sq: float = 1.0
    sparse_amplitude_sq: float | None = None
    trials: int = 1000
    message_bits: int = 8
    codebook_refresh: int = DEFAULT_CODEBOOK_REFRESH
    spot_trials: int = 400
    spot_decode_trials: int = 100
    converse_power_coeff: float = 1.0
    converse_power_exponent: float = -0.25
    converse_gamma: float = 1.0
    converse_rate_exponent: float = -0.25
    converse_message_bits: int = 2

    def __post_init__(self):
        if not self.n_grid:
            raise ValueError("n_grid must be nonempty")
        grid = tuple(int(n) for n in self.n_grid)
        if grid[0] < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("n_grid must be strictly increasing and positive")
        object.__setattr__(self, "n_grid", grid)
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        if not 0.0 < self.alpha_star < 1.0:
            raise ValueError(f"alpha_star must lie in (0, 1), got {self.alpha_star}")
        if self.f_mode not in (KNOWN_FLOOR, UNKNOWN_DECAY):
            raise ValueError(f"unknown f_mode {self.f_mode!r}")
        if self.sigma_w_sq <= 0.0:
            raise ValueError(f"sigma_w_sq must be positive, got {self.sigma_w_sq}")
        if self.sigma_b_sq < 0.0:
            raise ValueError(f"sigma_b_sq must be non-negative, got {self.sigma_b_sq}")
        if self.sigma_w_floor_sq <= 0.0:
            raise ValueError(
                f"sigma_w_floor_sq must be positive, got {self.sigma_w_floor_sq}"
            )
        if self.trials < 100:
            raise ValueError(f"trials must be >= 100, got {self.trials}")
        if self.codebook_refresh < 1:
            raise ValueError(f"codebook_refresh must be >= 1, got {self.codebook_refresh}")
        if not 0.0 < self.converse_gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {self.converse_gamma}")
        if self.master_seed < 0:
            raise ValueError(f"master_seed must be non-negative, got {self.master_seed}")

    def floor_model(self) -> FloorModel:
        return FloorModel(self.f_mode, self.sigma_w_floor_sq, self.f_exponent)


@dataclass(frozen=True)
class ReliabilityRecord:
    """One reliability grid row: empirical block error against its bound."""

    n: int
    scheme: str
    feasible: bool
    min_feasible_n: int | None = None
    symbol_power: float | None = None
    tau: float | None = None
    rate: float | None = None
    trials: int | None = None
    errors: int | None = None
    p_e_hat: IntervalEstimate | None = None
    bound: BoundValue | None = None


@dataclass(frozen=True)
class SpotDecode:
    """Decoding spot check attached to a scaling row."""

    message_bits: int
    rate: float
    trials: int
    errors: int
    p_e_hat: IntervalEstimate
    bound: BoundValue


@dataclass(frozen=True)
class ScalingRow:
    n: int
    feasible: bool
    min_feasible_n: int | None = None
    symbol_power: float | None = None
    tau: float | None = None
    rate: float | None = None
    bits: float | None = None
    spot_lrt: DetectionReport | None = None
    spot_decode: SpotDecode | None = None


@dataclass(frozen=True)
class ScalingResult:
    rows: tuple[ScalingRow, ...]
    slope: float | None
    slope_stderr: float | None


@dataclass(frozen=True)
class ConverseRow:
    """One radiometer sweep row against a power law P_k = coeff * n**exponent."""

    n: int
    p_k: float
    threshold_t: float
    d: float
    trials: int
    alpha_hat: IntervalEstimate
    beta_hat: IntervalEstimate
    alpha_bound: float
    beta_bound: float | None
    beta_bound_vacuous: bool
    rate: float
    fano: FanoBound
    goodput: BoundValue


def _decode_errors(
    spec: CodebookSpec,
    trials: int,
    refresh: int,
    sigma_b_sq: float,
    master_seed: int,
    label: str,
    n_label: int,
) -> int:
    """Count decoding failures over codebook-averaged episodes.

    Unkeyed operation: keystreams only permute signs, which both decoders
    undo exactly, so error statistics are key-invariant.
    """
    decode = decode_min_distance if spec.scheme == GAUSSIAN else decode_hard_decision
    groups = (trials + refresh - 1) // refresh
    sd = math.sqrt(sigma_b_sq)

    def one_group(g: int) -> int:
        size = min(refresh, trials - g * refresh)
        codebook = generate_codebook(
            spec, rng.derive_seed(master_seed, label, n_label, "codebook", g)
        )
        gen = rng.stream(master_seed, label, n_label, "episodes", g)
        messages = gen.integers(0, spec.message_count, size=size)
        x = np.stack([encode(codebook, int(m)) for m in messages])
        y = x if sd == 0.0 else x + rng.normal(gen, x.shape, sd=sd)
        decoded = decode(codebook, y)
        return int(np.count_nonzero(decoded != messages))

    return sum(rng.map_blocks(one_group, groups))


def run_reliability(config: ExperimentConfig) -> list[ReliabilityRecord]:
    """Empirical decoding error along the grid at the budgeted covert powers."""
    floor = config.floor_model()
    records = []
    for n in config.n_grid:
        try:
            budget = covert_power_budget(
                n, config.epsilon, config.scheme, floor, config.sparse_amplitude_sq
            )
        except BudgetInfeasibleError as err:
            records.append(
                ReliabilityRecord(n, config.scheme, feasible=False, min_feasible_n=err.min_n)
            )
            continue
        rate = config.message_bits / n
        # The analytic bound is for a noisy receiver; the noiseless limit
        # decodes exactly and carries no bound row.
        bound = (
            decoding_error_bound(n, rate, budget, config.sigma_b_sq)
            if config.sigma_b_sq > 0.0
            else None
        )
        spec = CodebookSpec(
            config.scheme, n, config.message_bits, budget.symbol_power, budget.tau
        )
        try:
            errors = _decode_errors(
                spec,
                config.trials,
                config.codebook_refresh,
                config.sigma_b_sq,
                config.master_seed,
                "reliability",
                n,
            )
        except EmptyScheduleError:
            records.append(ReliabilityRecord(n, config.scheme, feasible=False))
            continue
        p_hat = errors / config.trials
        estimate = IntervalEstimate(
            p_hat,
            CI_MULTIPLIER * math.sqrt(p_hat * (1.0 - p_hat) / config.trials),
            config.trials,
        )
        records.append(
            ReliabilityRecord(
                n=n,
                scheme=config.scheme,
                feasible=True,
                symbol_power=budget.symbol_power,
                tau=budget.tau,
                rate=rate,
                trials=config.trials,
                errors=errors,
                p_e_hat=estimate,
                bound=bound,
            )
        )
    return records


def _fit_slope(ns, values) -> tuple[float, float]:
    x = np.log2(np.asarray(ns, dtype=float))
    y = np.log2(np.asarray(values, dtype=float))
    x_bar = np.mean(x)
    sxx = float(np.sum((x - x_bar) ** 2))
    slope = float(np.sum((x - x_bar) * (y - np.mean(y))) / sxx)
    intercept = float(np.mean(y) - slope * x_bar)
    residuals = y - (intercept + slope * x)
    dof = len(x) - 2
    stderr = math.sqrt(float(np.sum(residuals**2)) / dof / sxx) if dof > 0 else float("nan")
    return slope, stderr


def run_square_root_scaling(config: ExperimentConfig) -> ScalingResult:
    """Analytic covert bits over the grid, with a fitted log-log slope.

    The grid must span at least four octaves.  At the smallest, median, and
    largest feasible n the driver also spot-checks the empirical LRT error
    sum and the empirical decoding error of a small code (message size capped
    at config.message_bits).
    """
    grid = config.n_grid
    if math.log2(grid[-1] / grid[0]) < 4.0:
        raise ValueError("n_grid must span at least 4 octaves")
    floor = config.floor_model()

    rows: list[ScalingRow] = []
    feasible_idx = []
    budgets: dict[int, CovertBudget] = {}
    for n in grid:
        try:
            budget = covert_power_budget(
                n, config.epsilon, config.scheme, floor, config.sparse_amplitude_sq
            )
        except BudgetInfeasibleError as err:
            rows.append(ScalingRow(n, feasible=False, min_feasible_n=err.min_n))
            continue
        budgets[n] = budget
        rate = achievable_rate(budget, config.sigma_b_sq, config.rho)
        feasible_idx.append(len(rows))
        rows.append(
            ScalingRow(
                n=n,
                feasible=True,
                symbol_power=budget.symbol_power,
                tau=budget.tau,
                rate=rate,
                bits=n * rate,
            )
        )

    spot_positions = sorted(
        {feasible_idx[0], feasible_idx[len(feasible_idx) // 2], feasible_idx[-1]}
    ) if feasible_idx else []
    for idx in spot_positions:
        row = rows[idx]
        budget = budgets[row.n]
        scenario = DetectionScenario(
            scheme=config.scheme,
            n=row.n,
            sigma_w_sq=config.sigma_w_sq,
            power=budget.symbol_power,
            tau=budget.tau,
            alpha_star=config.alpha_star,
            budget=budget,
        )
        spot_lrt = estimate_detection_errors(
            LRT,
            scenario,
            max(100, config.spot_trials),
            rng.derive_seed(config.master_seed, "scaling_lrt", row.n),
        )
        spot_bits = max(1, min(config.message_bits, int(row.bits)))
        spot_rate = spot_bits / row.n
        spec = CodebookSpec(config.scheme, row.n, spot_bits, budget.symbol_power, budget.tau)
        trials = max(100, config.spot_decode_trials)
        errors = _decode_errors(
            spec,
            trials,
            config.codebook_refresh,
            config.sigma_b_sq,
            config.master_seed,
            "scaling_decode",
            row.n,
        )
        p_hat = errors / trials
        spot_decode = SpotDecode(
            message_bits=spot_bits,
            rate=spot_rate,
            trials=trials,
            errors=errors,
            p_e_hat=IntervalEstimate(
                p_hat, CI_MULTIPLIER * math.sqrt(p_hat * (1.0 - p_hat) / trials), trials
            ),
            bound=decoding_error_bound(row.n, spot_rate, budget, config.sigma_b_sq)
            if config.sigma_b_sq > 0.0
            else BoundValue(0.0),
        )
        rows[idx] = ScalingRow(
            n=row.n,
            feasible=True,
            symbol_power=row.symbol_power,
            tau=row.tau,
            rate=row.rate,
            bits=row.bits,
            spot_lrt=spot_lrt,
            spot_decode=spot_decode,
        )

    slope = stderr = None
    if len(feasible_idx) >= 4:
        fit_rows = [rows[i] for i in feasible_idx]
        slope, stderr = _fit_slope([r.n for r in fit_rows], [r.bits for r in fit_rows])
    return ScalingResult(tuple(rows), slope, stderr)


def run_converse_sweep(config: ExperimentConfig) -> list[ConverseRow]:
    """Radiometer performance against Gaussian codewords of power coeff * n**exp.

    Emits data only — empirical alpha/beta with their Chebyshev companions,
    plus the Fano lower bound and goodput upper bound evaluated at the
    configured keyless-listener rate law.  Asserts nothing itself.
    """
    rows = []
    for n in config.n_grid:
        p_k = config.converse_power_coeff * float(n) ** config.converse_power_exponent
        scenario = DetectionScenario(
            scheme=GAUSSIAN,
            n=n,
            sigma_w_sq=config.sigma_w_sq,
            power=p_k,
            alpha_star=config.alpha_star,
            message_bits=config.converse_message_bits,
        )
        report = estimate_detection_errors(
            RADIOMETER,
            scenario,
            config.trials,
            rng.derive_seed(config.master_seed, "converse", n),
        )
        cal = radiometer_calibration(n, config.alpha_star, config.sigma_w_sq)
        rate = float(n) ** config.converse_rate_exponent
        fano = fano_converse_bound(
            n, rate, p_k, config.converse_gamma, config.sigma_b_sq
        )
        goodput = goodput_bound(
            n, rate, config.converse_gamma, p_k, config.sigma_b_sq
        )
        rows.append(
            ConverseRow(
                n=n,
                p_k=p_k,
                threshold_t=cal.t,
                d=cal.d,
                trials=config.trials,
                alpha_hat=report.alpha_hat,
                beta_hat=report.beta_hat,
                alpha_bound=config.alpha_star,
                beta_bound=report.beta_bound,
                beta_bound_vacuous=report.beta_bound_vacuous,
                rate=rate,
                fano=fano,
                goodput=goodput,
            )
        )
    return rows
