"""Codebook generation, keyed encoding, and brute-force decoding.

Decoding enumerates the whole codebook, so message sizes are capped at 24
bits.  Hamming-distance decisions are computed in exact integer arithmetic;
ties always resolve to the lowest message index.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .bounds import BPSK, GAUSSIAN, SCHEMES, SPARSE

MAX_MESSAGE_BITS = 24

# Codebook-averaged experiments redraw the codebook after this many episodes.
DEFAULT_CODEBOOK_REFRESH = 10


class EmptyScheduleError(ValueError):
    """A sparse draw produced no occupied slots at this (n, tau)."""


@dataclass(frozen=True)
class CodebookSpec:
    """Shape of a codebook: scheme, block length, message size, and powers.

    ``power`` is the per-symbol variance P_f for the gaussian scheme and the
    occupied-symbol power a^2 for the antipodal schemes.
    """

    scheme: str
    n: int
    message_bits: int
    power: float
    tau: float = 1.0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.message_bits < 1:
            raise ValueError(f"message_bits must be >= 1, got {self.message_bits}")
        if self.message_bits > MAX_MESSAGE_BITS:
            raise ValueError(
                f"message_bits = {self.message_bits} exceeds the brute-force "
                f"decoding cap of {MAX_MESSAGE_BITS}"
            )
        if self.power <= 0.0 or not math.isfinite(self.power):
            raise ValueError(f"power must be positive, got {self.power}")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError(f"tau must lie in (0, 1], got {self.tau}")
        if self.scheme != SPARSE and self.tau != 1.0:
            raise ValueError("tau < 1 is only meaningful for the sparse scheme")

    @property
    def message_count(self) -> int:
        return 1 << self.message_bits

    @property
    def amplitude(self) -> float:
        if self.scheme == GAUSSIAN:
            raise ValueError("gaussian codebooks have no fixed amplitude")
        return math.sqrt(self.power)


@dataclass(frozen=True, eq=False)
class Codebook:
    """Generated codewords plus, for the sparse scheme, the slot schedule.

    ``codewords`` has one row per message: length n for gaussian/bpsk, length
    eta = len(schedule) for sparse.  ``schedule`` holds sorted 0-based slot
    indices.
    """

    spec: CodebookSpec
    seed: int
    codewords: np.ndarray
    schedule: np.ndarray | None = None

    def __post_init__(self):
        if self.spec.scheme == SPARSE:
            if self.schedule is None or len(self.schedule) == 0:
                raise EmptyScheduleError("sparse codebook has an empty schedule")
        expected_len = self.spec.n if self.spec.scheme != SPARSE else len(self.schedule)
        if self.codewords.shape != (self.spec.message_count, expected_len):
            raise ValueError(
                f"codewords shape {self.codewords.shape} does not match spec"
            )
        if self.spec.scheme == SPARSE:
            if np.any(np.diff(self.schedule) <= 0):
                raise ValueError("schedule indices must be strictly increasing")
            if self.schedule[0] < 0 or self.schedule[-1] >= self.spec.n:
                raise ValueError("schedule indices must lie in [0, n)")
        elif self.schedule is not None:
            raise ValueError("only sparse codebooks carry a schedule")
        if self.spec.scheme != GAUSSIAN:
            a = self.spec.amplitude
            if not np.all(np.isin(self.codewords, (-a, a))):
                raise ValueError("antipodal codewords must take values +-a")

    @property
    def occupied_length(self) -> int:
        """Number of slots a codeword actually occupies."""
        return self.codewords.shape[1]

    @property
    def realized_tau(self) -> float:
        return self.occupied_length / self.spec.n


@dataclass(frozen=True, eq=False)
class SecretKey:
    """One-time binary keystream; bit 1 flips the sign of its slot."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 1 or not np.all(np.isin(bits, (0, 1))):
            raise ValueError("key bits must be a 1-D 0/1 sequence")

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def sign_flips(self) -> np.ndarray:
        return 1.0 - 2.0 * np.asarray(self.bits, dtype=float)


def key_length(codebook: Codebook) -> int:
    """Keystream length the codebook's scheme consumes per transmission."""
    if codebook.spec.scheme == GAUSSIAN:
        raise ValueError("the gaussian scheme is unkeyed")
    if codebook.spec.scheme == BPSK:
        return codebook.spec.n
    return codebook.occupied_length


def random_key(length: int, seed: int) -> SecretKey:
    if length < 1:
        raise ValueError(f"key length must be >= 1, got {length}")
    gen = rng.stream(seed, "key")
    return SecretKey((gen.random(length) < 0.5).astype(np.uint8))


def generate_codebook(spec: CodebookSpec, seed: int) -> Codebook:
    """Draw a codebook deterministically from (spec, seed).

    Gaussian rows are i.i.d. N(0, power); antipodal rows are i.i.d. uniform
    +-a.  The sparse scheme draws its schedule first (per-slot Bernoulli(tau))
    and then an antipodal codebook over the occupied slots.
    """
    gen = rng.stream(seed, "codebook")
    if spec.scheme == GAUSSIAN:
        words = math.sqrt(spec.power) * rng.standard_normal(
            gen, (spec.message_count, spec.n)
        )
        return Codebook(spec, seed, words)

    schedule = None
    width = spec.n
    if spec.scheme == SPARSE:
        occupied = gen.random(spec.n) < spec.tau
        if not np.any(occupied):
            raise EmptyScheduleError(
                f"no slots occupied at n = {spec.n}, tau = {spec.tau}"
            )
        schedule = np.nonzero(occupied)[0]
        width = len(schedule)
    a = spec.amplitude
    words = np.where(gen.random((spec.message_count, width)) < 0.5, -a, a)
    return Codebook(spec, seed, words, schedule)


def _check_key(codebook: Codebook, key: SecretKey | None) -> SecretKey | None:
    if key is None:
        return None
    if codebook.spec.scheme == GAUSSIAN:
        raise ValueError("the gaussian scheme is unkeyed")
    if len(key) != key_length(codebook):
        raise ValueError(
            f"key length {len(key)} does not match required {key_length(codebook)}"
        )
    return key


def encode(codebook: Codebook, message: int, key: SecretKey | None = None) -> np.ndarray:
    """Map a message index to its length-n channel input."""
    if not 0 <= message < codebook.spec.message_count:
        raise ValueError(
            f"message {message} outside [0, {codebook.spec.message_count})"
        )
    key = _check_key(codebook, key)
    word = codebook.codewords[message]
    if key is not None:
        word = word * key.sign_flips
    if codebook.spec.scheme == SPARSE:
        out = np.zeros(codebook.spec.n)
        out[codebook.schedule] = word
        return out
    return word.copy()


def _occupied_view(codebook: Codebook, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != codebook.spec.n:
        raise ValueError(f"observation length {y.shape[-1]} != n = {codebook.spec.n}")
    if codebook.spec.scheme == SPARSE:
        return y[..., codebook.schedule]
    return y


def _dekey(codebook: Codebook, y: np.ndarray, key: SecretKey | None) -> np.ndarray:
    if y.ndim > 1 and key is not None:
        raise ValueError("batched decoding expects pre-dekeyed observations")
    if key is not None:
        y = y * key.sign_flips
    return y


def decode_min_distance(
    codebook: Codebook, y: np.ndarray, key: SecretKey | None = None
) -> int | np.ndarray:
    """Minimum Euclidean distance decoding over the whole codebook.

    Accepts a single length-n observation or a (batch, n) array; ties go to
    the lowest message index.
    """
    key = _check_key(codebook, key)
    obs = _dekey(codebook, _occupied_view(codebook, y), key)
    words = codebook.codewords
    # argmin ||y - c||^2 == argmax (c . y - ||c||^2 / 2); the half-norm term
    # only matters for gaussian codebooks (antipodal rows share their norm).
    score = obs @ words.T - 0.5 * np.sum(words * words, axis=1)
    picked = np.argmax(score, axis=-1)
    return int(picked) if np.ndim(picked) == 0 else picked


def decode_hard_decision(
    codebook: Codebook, y: np.ndarray, key: SecretKey | None = None
) -> int | np.ndarray:
    """Slice to +-a, then minimum Hamming distance in exact integer counts.

    The slicer maps y = 0 to +a.  Antipodal schemes only.
    """
    if codebook.spec.scheme == GAUSSIAN:
        raise ValueError("hard-decision decoding applies to antipodal schemes only")
    key = _check_key(codebook, key)
    obs = _dekey(codebook, _occupied_view(codebook, y), key)
    sliced = (obs < 0.0).astype(np.int32)  # 0 -> +a, 1 -> -a
    word_bits = (codebook.codewords < 0.0).astype(np.int32)
    # Hamming distance via exact integer arithmetic so equal distances tie
    # exactly and argmin resolves to the lowest index.
    ones_w = np.sum(word_bits, axis=1)
    distance = ones_w + np.sum(sliced, axis=-1, keepdims=sliced.ndim > 1) - 2 * (
        sliced @ word_bits.T
    )
    picked = np.argmin(distance, axis=-1)
    return int(picked) if np.ndim(picked) == 0 else picked


def codebook_to_json(codebook: Codebook) -> str:
    """Serialize spec fields, seed, schedule, and symbols losslessly."""
    payload = {
        "scheme": codebook.spec.scheme,
        "n": codebook.spec.n,
        "message_bits": codebook.spec.message_bits,
        "power": codebook.spec.power,
        "tau": codebook.spec.tau,
        "seed": codebook.seed,
        "schedule": None
        if codebook.schedule is None
        else [int(i) for i in codebook.schedule],
        "codewords": [[float(v) for v in row] for row in codebook.codewords],
    }
    return json.dumps(payload)


def codebook_from_json(text: str) -> Codebook:
    """Rebuild and re-validate a codebook serialized by codebook_to_json."""
    payload = json.loads(text)
    spec = CodebookSpec(
        scheme=payload["scheme"],
        n=int(payload["n"]),
        message_bits=int(payload["message_bits"]),
        power=float(payload["power"]),
        tau=float(payload["tau"]),
    )
    schedule = payload["schedule"]
    return Codebook(
        spec,
        int(payload["seed"]),
        np.asarray(payload["codewords"], dtype=float),
        None if schedule is None else np.asarray(schedule, dtype=np.int64),
    )
