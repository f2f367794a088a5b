"""Deterministic random streams for all stochastic code in the package.

Every stream is a Philox 4x64 counter-based generator keyed through a
``SeedSequence`` whose spawn key encodes a label path, so a stream is a pure
function of ``(master_seed, *labels)`` — independent of platform, execution
order, or how many other streams were created.  String labels hash through
CRC-32, which is stable everywhere.

Gaussian variates are produced by an explicit Box-Muller transform on the
stream's uniforms rather than the generator's built-in sampler.  That keeps
the mapping uniforms -> normals an algorithm that can be re-implemented
bit-for-bit in another language; distributional behaviour, not the exact
float stream, is what the tests pin down.

Monte Carlo loops draw in fixed-size blocks (``block_sizes``); block ``b`` of
a computation always uses the stream ``(seed, ..., b)``, so blocks can run in
any order or in parallel without changing results.
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

# Per-block draw budget: ~32 MB of float64 per block keeps memory flat even
# for block lengths up to 2**20.
BLOCK_ELEMENTS = 1 << 22

_TWO_PI = 2.0 * np.pi


def _label_index(label) -> int:
    if isinstance(label, (int, np.integer)):
        value = int(label)
        if value < 0:
            raise ValueError(f"stream labels must be non-negative, got {value}")
        return value
    if isinstance(label, str):
        return zlib.crc32(label.encode("utf-8"))
    raise TypeError(f"stream labels must be int or str, got {type(label).__name__}")


def stream(seed: int, *path) -> np.random.Generator:
    """Return the Philox generator identified by ``(seed, *path)``."""
    if not isinstance(seed, (int, np.integer)) or int(seed) < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    key = np.random.SeedSequence(
        entropy=int(seed), spawn_key=tuple(_label_index(p) for p in path)
    )
    return np.random.Generator(np.random.Philox(key))


def derive_seed(seed: int, *path) -> int:
    """Collapse ``(seed, *path)`` into a single integer seed, deterministically."""
    key = np.random.SeedSequence(
        entropy=int(seed), spawn_key=tuple(_label_index(p) for p in path)
    )
    return int(key.generate_state(1, np.uint64)[0])


def standard_normal(gen: np.random.Generator, shape) -> np.ndarray:
    """Draw N(0,1) variates via Box-Muller on the stream's uniforms."""
    if isinstance(shape, (int, np.integer)):
        shape = (int(shape),)
    count = int(np.prod(shape)) if shape else 1
    pairs = (count + 1) // 2
    u1 = gen.random(pairs)
    u2 = gen.random(pairs)
    # 1 - u1 lies in (0, 1]: the log never sees zero.
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    angle = _TWO_PI * u2
    out = np.empty(2 * pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:count].reshape(shape)


def normal(gen: np.random.Generator, shape, mean: float = 0.0, sd: float = 1.0) -> np.ndarray:
    return mean + sd * standard_normal(gen, shape)


def block_sizes(total: int, width: int) -> list[int]:
    """Split ``total`` trials of ``width`` draws each into fixed-size blocks.

    Pure function of its arguments, so the block -> stream mapping never
    depends on scheduling.
    """
    if total <= 0:
        raise ValueError(f"total must be positive, got {total}")
    per_block = max(1, BLOCK_ELEMENTS // max(1, width))
    sizes = [per_block] * (total // per_block)
    if total % per_block:
        sizes.append(total % per_block)
    return sizes


def worker_count() -> int:
    """Worker cap from COVERTLINK_THREADS (0 or unset = auto)."""
    raw = os.environ.get("COVERTLINK_THREADS", "0").strip()
    try:
        requested = int(raw)
    except ValueError:
        raise ValueError(f"COVERTLINK_THREADS must be an integer, got {raw!r}")
    if requested < 0:
        raise ValueError(f"COVERTLINK_THREADS must be >= 0, got {requested}")
    if requested == 0:
        return os.cpu_count() or 1
    return requested


def map_blocks(fn, count: int) -> list:
    """Evaluate ``fn(block_index)`` for every block, in parallel when allowed.

    Results come back ordered by block index regardless of schedule; combined
    with per-block streams this makes parallel runs bit-identical to serial
    ones.
    """
    workers = min(worker_count(), count)
    if workers <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))
