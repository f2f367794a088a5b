"""Analytic covertness, reliability, and converse bounds.

Powers are variances per channel use; divergences are nats; rates and key
costs are bits.  Probability bounds are clamped to [0, 1] and every clamp is
flagged on the returned value rather than applied silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .stats import binary_entropy, q_function

GAUSSIAN = "gaussian"
BPSK = "bpsk"
SPARSE = "sparse_bpsk"
SCHEMES = (GAUSSIAN, BPSK, SPARSE)

KNOWN_FLOOR = "known_floor"
UNKNOWN_DECAY = "unknown_decay"

# Accounting convention for stored codebook symbols.
BITS_PER_CODEBOOK_ENTRY = 64

_LN2 = math.log(2.0)


class BudgetInfeasibleError(ValueError):
    """No admissible power split at this block length."""

    def __init__(self, message: str, min_n: int | None = None):
        if min_n is not None:
            message = f"{message}; smallest admissible n is {min_n}"
        super().__init__(message)
        self.min_n = min_n


class VacuousBoundError(ValueError):
    """The requested bound carries no information at these parameters."""


@dataclass(frozen=True)
class BoundValue:
    """A bound with an explicit record of whether clamping fired."""

    value: float
    clamped: bool = False


@dataclass(frozen=True)
class FloorModel:
    """The warden-knowledge factor f(n) multiplying the power budget.

    ``known_floor`` pins f(n) to the calibrated noise power; ``unknown_decay``
    uses scale * n**-exponent with exponent in (0, 1/2) — vanishing, but slower
    than 1/sqrt(n).
    """

    kind: str
    scale: float
    exponent: float = 0.25

    def __post_init__(self):
        if self.kind not in (KNOWN_FLOOR, UNKNOWN_DECAY):
            raise ValueError(f"unknown floor model {self.kind!r}")
        if self.scale <= 0.0 or not math.isfinite(self.scale):
            raise ValueError(f"floor scale must be positive, got {self.scale}")
        if self.kind == UNKNOWN_DECAY and not 0.0 < self.exponent < 0.5:
            raise ValueError(
                f"decay exponent must lie in (0, 0.5), got {self.exponent}"
            )

    def f_of_n(self, n: int) -> float:
        if self.kind == KNOWN_FLOOR:
            return self.scale
        return self.scale * float(n) ** -self.exponent

    @property
    def assumed_noise_power(self) -> float:
        """Noise power the Taylor convergence conditions are checked against."""
        return self.scale


def known_floor(sigma_w_floor_sq: float) -> FloorModel:
    return FloorModel(KNOWN_FLOOR, float(sigma_w_floor_sq))


def unknown_decay(sigma_ref_sq: float, exponent: float = 0.25) -> FloorModel:
    return FloorModel(UNKNOWN_DECAY, float(sigma_ref_sq), float(exponent))


@dataclass(frozen=True)
class CovertBudget:
    """Per-symbol power split meeting the c*f(n)/sqrt(n) detectability budget."""

    epsilon: float
    c: float
    scheme: str
    floor: FloorModel
    n: int
    p_f: float | None = None
    a_sq: float | None = None
    tau: float = 1.0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError(f"tau must lie in (0, 1], got {self.tau}")
        if abs(self.c - 2.0 * self.epsilon * math.sqrt(2.0)) > 1e-12 * self.c:
            raise ValueError("c does not equal 2 * epsilon * sqrt(2)")
        target = self.c * self.floor.f_of_n(self.n) / math.sqrt(self.n)
        if self.scheme == GAUSSIAN:
            if self.p_f is None or self.a_sq is not None or self.tau != 1.0:
                raise ValueError("gaussian budgets carry exactly p_f with tau = 1")
            actual = self.p_f
        else:
            if self.a_sq is None or self.p_f is not None:
                raise ValueError("antipodal budgets carry exactly a_sq")
            if self.scheme == BPSK and self.tau != 1.0:
                raise ValueError("bpsk budgets have tau = 1")
            actual = self.tau * self.a_sq
        if abs(actual - target) > 1e-9 * max(target, 1e-300):
            raise ValueError(
                f"budget power {actual} does not meet c*f(n)/sqrt(n) = {target}"
            )
        sigma_sq = self.floor.assumed_noise_power
        if self.scheme == GAUSSIAN:
            if self.p_f >= sigma_sq:
                raise ValueError("p_f >= assumed noise power: series diverges")
        elif self.a_sq >= sigma_sq:
            raise ValueError("a_sq >= assumed noise power: series diverges")

    @property
    def average_power(self) -> float:
        """Mean transmit power per channel use."""
        if self.scheme == GAUSSIAN:
            return self.p_f
        return self.tau * self.a_sq

    @property
    def symbol_power(self) -> float:
        """Power of an occupied symbol (p_f, or a^2 for antipodal schemes)."""
        if self.scheme == GAUSSIAN:
            return self.p_f
        return self.a_sq


def _min_n_for_convergence(c: float, floor: FloorModel) -> int:
    # power < scale reduces to c * n**-(1/2) < 1 (known floor) or
    # c * n**-(1/2 + exponent) < 1 (decaying f).
    if floor.kind == KNOWN_FLOOR:
        return math.floor(c * c) + 1
    return math.floor(c ** (1.0 / (0.5 + floor.exponent))) + 1


def covert_power_budget(
    n: int,
    epsilon: float,
    scheme: str,
    floor: FloorModel,
    sparse_amplitude_sq: float | None = None,
) -> CovertBudget:
    """Split the c * f(n) / sqrt(n) power budget for the chosen scheme.

    Sparse budgets keep a fixed occupied-symbol power ``sparse_amplitude_sq``
    (default: a quarter of the assumed noise power) and derive the occupancy
    rate tau from the budget.
    """
    n = int(n)
    epsilon = float(epsilon)
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")

    c = 2.0 * epsilon * math.sqrt(2.0)
    budget_power = c * floor.f_of_n(n) / math.sqrt(n)
    sigma_sq = floor.assumed_noise_power

    if scheme in (GAUSSIAN, BPSK):
        if budget_power >= sigma_sq:
            raise BudgetInfeasibleError(
                f"n = {n} violates the series convergence condition",
                min_n=_min_n_for_convergence(c, floor),
            )
        if scheme == GAUSSIAN:
            return CovertBudget(epsilon, c, scheme, floor, n, p_f=budget_power)
        return CovertBudget(epsilon, c, scheme, floor, n, a_sq=budget_power)

    a_sq = sigma_sq / 4.0 if sparse_amplitude_sq is None else float(sparse_amplitude_sq)
    if not 0.0 < a_sq < sigma_sq:
        raise ValueError(
            f"sparse amplitude power {a_sq} must lie in (0, assumed noise power)"
        )
    tau = budget_power / a_sq
    if tau > 1.0:
        # Occupancy cannot exceed 1: find the smallest n with tau <= 1.
        ratio = c * floor.scale / a_sq
        if floor.kind == KNOWN_FLOOR:
            min_n = math.ceil(ratio * ratio)
        else:
            min_n = math.ceil(ratio ** (1.0 / (0.5 + floor.exponent)))
        raise BudgetInfeasibleError(
            f"n = {n} needs occupancy tau = {tau:.6g} > 1", min_n=min_n
        )
    return CovertBudget(epsilon, c, scheme, floor, n, a_sq=a_sq, tau=tau)


def tv_taylor_bound(budget: CovertBudget, sigma_w_sq: float) -> BoundValue:
    """Leading-order total variation bound for n uses against noise power sigma_w_sq."""
    sigma_w_sq = float(sigma_w_sq)
    if sigma_w_sq <= 0.0:
        raise ValueError(f"sigma_w_sq must be positive, got {sigma_w_sq}")
    if budget.symbol_power >= sigma_w_sq:
        raise ValueError(
            f"symbol power {budget.symbol_power} >= noise power {sigma_w_sq}: "
            "series diverges"
        )
    value = budget.average_power / (2.0 * sigma_w_sq) * math.sqrt(budget.n / 2.0)
    if value > 1.0:
        return BoundValue(1.0, clamped=True)
    return BoundValue(value)


def achievable_rate(budget: CovertBudget, sigma_b_sq: float, rho: float) -> float:
    """Operating rate in bits per channel use at margin rho of the budget."""
    sigma_b_sq = float(sigma_b_sq)
    rho = float(rho)
    if sigma_b_sq <= 0.0:
        raise ValueError(f"sigma_b_sq must be positive, got {sigma_b_sq}")
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    if budget.scheme == GAUSSIAN:
        return 0.5 * rho * math.log2(1.0 + budget.p_f / (2.0 * sigma_b_sq))
    return rho * budget.average_power / (sigma_b_sq * math.pi * _LN2)


def decoding_error_bound(
    n: int, rate: float, budget: CovertBudget, sigma_b_sq: float
) -> BoundValue:
    """Random-coding upper bound on block decoding error at the budget's powers.

    ``rate`` is in bits per channel use over all n slots; the sparse scheme's
    bound is evaluated over the expected occupied length tau * n.
    """
    n = int(n)
    rate = float(rate)
    sigma_b_sq = float(sigma_b_sq)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if rate < 0.0:
        raise ValueError(f"rate must be non-negative, got {rate}")
    if sigma_b_sq <= 0.0:
        raise ValueError(f"sigma_b_sq must be positive, got {sigma_b_sq}")

    if budget.scheme == GAUSSIAN:
        exponent = n * rate - 0.5 * n * math.log2(1.0 + budget.p_f / (2.0 * sigma_b_sq))
    else:
        p_e = q_function(math.sqrt(budget.a_sq / sigma_b_sq))
        exponent = n * rate - budget.tau * n * (1.0 - binary_entropy(p_e))
    if exponent > 0.0:
        return BoundValue(1.0, clamped=True)
    return BoundValue(2.0 ** exponent)


@dataclass(frozen=True)
class RadiometerCalibration:
    """Energy-detector threshold placement sigma_w^2 + t with t = d / sqrt(n)."""

    n: int
    alpha_star: float
    sigma_w_sq: float
    d: float
    t: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0.0 < self.alpha_star < 1.0:
            raise ValueError(f"alpha_star must lie in (0, 1), got {self.alpha_star}")
        if self.sigma_w_sq <= 0.0:
            raise ValueError(f"sigma_w_sq must be positive, got {self.sigma_w_sq}")
        if abs(self.t * math.sqrt(self.n) - self.d) > 1e-12 * max(self.d, 1e-300):
            raise ValueError("threshold offset t does not equal d / sqrt(n)")


def radiometer_calibration(
    n: int, alpha_star: float, sigma_w_sq: float
) -> RadiometerCalibration:
    """Place the energy threshold so the Chebyshev false alarm bound is alpha_star."""
    n = int(n)
    alpha_star = float(alpha_star)
    sigma_w_sq = float(sigma_w_sq)
    if not 0.0 < alpha_star < 1.0:
        raise ValueError(f"alpha_star must lie in (0, 1), got {alpha_star}")
    if sigma_w_sq <= 0.0:
        raise ValueError(f"sigma_w_sq must be positive, got {sigma_w_sq}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    d = math.sqrt(2.0 / alpha_star) * sigma_w_sq
    return RadiometerCalibration(n, alpha_star, sigma_w_sq, d, d / math.sqrt(n))


def radiometer_beta_bound(cal: RadiometerCalibration, p_k: float) -> BoundValue:
    """Chebyshev missed-detection bound for a codeword of average power p_k."""
    p_k = float(p_k)
    if p_k <= 0.0:
        raise ValueError(f"p_k must be positive, got {p_k}")
    margin = math.sqrt(cal.n) * p_k - cal.d
    if margin <= 0.0:
        raise VacuousBoundError(
            f"sqrt(n) * p_k = {math.sqrt(cal.n) * p_k:.6g} does not exceed "
            f"d = {cal.d:.6g}; the miss bound is vacuous"
        )
    value = (4.0 * p_k * cal.sigma_w_sq + 2.0 * cal.sigma_w_sq**2) / margin**2
    if value > 1.0:
        return BoundValue(1.0, clamped=True)
    return BoundValue(value)


@dataclass(frozen=True)
class FanoBound:
    """Converse lower bounds on decoding error for a keyless listener."""

    message_error_lower: float
    overall_error_lower: float
    clamped: bool


def fano_converse_bound(
    n: int, rate: float, p_u: float, gamma: float, sigma_b_sq: float
) -> FanoBound:
    """Fano lower bound on message error when a fraction gamma of slots is used.

    ``p_u`` is the transmit power during the used slots and ``rate`` the
    attempted rate in bits per used slot.
    """
    n = int(n)
    rate = float(rate)
    p_u = float(p_u)
    gamma = float(gamma)
    sigma_b_sq = float(sigma_b_sq)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if p_u < 0.0:
        raise ValueError(f"p_u must be non-negative, got {p_u}")
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    if sigma_b_sq <= 0.0:
        raise ValueError(f"sigma_b_sq must be positive, got {sigma_b_sq}")
    denominator = math.log2(gamma) / n + rate
    if denominator <= 0.0:
        raise ValueError(
            f"rate {rate} must exceed -log2(gamma)/n = {-math.log2(gamma) / n:.6g}"
        )
    raw = 1.0 - (p_u / (2.0 * sigma_b_sq) + 1.0 / n) / denominator
    if raw < 0.0:
        return FanoBound(0.0, 0.0, clamped=True)
    return FanoBound(raw, gamma * raw, clamped=False)


def goodput_bound(
    n: int, rate: float, gamma: float, p_u: float, sigma_b_sq: float
) -> BoundValue:
    """Upper bound on delivered bits: gamma * (success upper bound) * rate * n."""
    fano = fano_converse_bound(n, rate, p_u, gamma, sigma_b_sq)
    value = gamma * (1.0 - fano.message_error_lower) * rate * n
    return BoundValue(value, clamped=fano.clamped)


FULL_CODEBOOK = "full_codebook"
KEYED_BPSK = "keyed_bpsk"
SPARSE_KEY = "sparse"


@dataclass(frozen=True)
class KeyCost:
    """Expected secret-key expenditure of one transmission."""

    scheme: str
    keystream_bits: float = 0.0
    position_bits: float = 0.0
    codebook_entries: int | None = None
    codebook_bits: float | None = None

    @property
    def total_bits(self) -> float:
        total = self.keystream_bits + self.position_bits
        if self.codebook_bits is not None:
            total += self.codebook_bits
        return total


def key_cost(
    scheme: str, n: int, tau: float = 1.0, message_bits: int | None = None
) -> KeyCost:
    """Secret-key accounting for one length-n transmission.

    A shared full codebook is counted as 2**message_bits * n stored symbols at
    64 bits each; keyed antipodal schemes spend one keystream bit per occupied
    slot, and the sparse scheme additionally ceil(log2 n) position bits per
    occupied slot (in expectation, tau * n slots).
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if scheme == FULL_CODEBOOK:
        if message_bits is None or message_bits < 1:
            raise ValueError("full_codebook accounting needs message_bits >= 1")
        entries = (1 << message_bits) * n
        return KeyCost(
            scheme,
            codebook_entries=entries,
            codebook_bits=float(entries * BITS_PER_CODEBOOK_ENTRY),
        )
    if scheme == KEYED_BPSK:
        return KeyCost(scheme, keystream_bits=float(n))
    if scheme == SPARSE_KEY:
        if not 0.0 <= tau <= 1.0:
            raise ValueError(f"tau must lie in [0, 1], got {tau}")
        occupied = tau * n
        return KeyCost(
            scheme,
            keystream_bits=occupied,
            position_bits=occupied * math.ceil(math.log2(n)) if n > 1 else 0.0,
        )
    raise ValueError(f"unknown key accounting scheme {scheme!r}")
