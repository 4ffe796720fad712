"""Deterministic ensembles over seeded paths.

Every path draws from its own generator, seeded from ``(master_seed,
path_index)`` through :class:`numpy.random.SeedSequence`. Paths are mapped
in parallel but collected in index order, so results never depend on the
number of worker threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np
from scipy.special import ndtri

T = TypeVar("T")

_TWO53 = float(2**53)


def path_seed(master_seed: int, path_index: int) -> np.random.SeedSequence:
    """Stable per-path seed derived from the master seed and the path index."""
    if master_seed < 0 or path_index < 0:
        raise ValueError("seeds and path indices must be nonnegative")
    return np.random.SeedSequence([int(master_seed), int(path_index)])


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def open_uniforms(rng: np.random.Generator, size) -> np.ndarray:
    """Uniforms on the open interval (0, 1) with 53-bit resolution."""
    return (rng.integers(0, 2**53, size=size, dtype=np.int64) + 0.5) / _TWO53


def std_normals(rng: np.random.Generator, size) -> np.ndarray:
    """Standard normals by inverse-CDF transform of open uniforms.

    The algorithm is fixed (``ndtri`` of :func:`open_uniforms`) so that other
    implementations can reproduce the moments, though not the bit stream.
    """
    return ndtri(open_uniforms(rng, size))


def ensemble_map(
    fn: Callable[[int, np.random.SeedSequence], T],
    n_paths: int,
    master_seed: int,
    threads: int = 1,
) -> list[T]:
    """Evaluate ``fn(index, seed)`` for every path, returned in index order."""
    if n_paths < 1:
        raise ValueError("n_paths must be at least 1")
    seeds = [path_seed(master_seed, i) for i in range(n_paths)]
    if threads <= 1:
        return [fn(i, s) for i, s in enumerate(seeds)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_paths), seeds))


def stack(rows: Sequence[np.ndarray]) -> np.ndarray:
    return np.vstack([np.asarray(r, dtype=float) for r in rows])


def ensemble_norm(values: np.ndarray, p: float = 2.0) -> np.ndarray:
    """Ensemble ``L^p`` norm at each index: ``(mean_paths |x|^p)^(1/p)``.

    ``values`` has one path per row. The reduction is a fixed-order sum over
    rows, independent of how the rows were produced.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError("values must be 2-D (paths x time)")
    return np.mean(np.abs(values) ** p, axis=0) ** (1.0 / p)
