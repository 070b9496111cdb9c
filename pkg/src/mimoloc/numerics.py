"""Shared numerical kernels: DFT pair, Hermitian products, quantiles, seeded RNG.

All arithmetic is 64-bit (complex128 / float64). Random streams come from the
Philox counter-based bit generator so that an integer seed reproduces the same
draws on every platform.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Seeded generator backed by the Philox4x64 counter-based algorithm."""
    return np.random.Generator(np.random.Philox(seed))


def idft_row(row: np.ndarray) -> np.ndarray:
    """Inverse DFT of one vector: out[l] = (1/N) sum_k row[k] exp(+2j pi k l / N)."""
    row = np.asarray(row, dtype=np.complex128)
    if row.ndim != 1 or row.size == 0:
        raise ValueError("empty vector")
    return np.fft.ifft(row)


def dft_row(row: np.ndarray) -> np.ndarray:
    """Forward DFT, the exact inverse of idft_row (no 1/N factor)."""
    row = np.asarray(row, dtype=np.complex128)
    if row.ndim != 1 or row.size == 0:
        raise ValueError("empty vector")
    return np.fft.fft(row)


def hermitian_product(y: np.ndarray) -> np.ndarray:
    """Y @ Y^H for a complex M x N matrix.

    The result is symmetrized so it is exactly Hermitian with a real,
    non-negative diagonal.
    """
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim != 2 or y.shape[0] == 0 or y.shape[1] == 0:
        raise ValueError("matrix must be 2-D with nonzero dimensions")
    c = y @ y.conj().T
    c = 0.5 * (c + c.conj().T)
    return c


def percentile(values, q: float) -> float:
    """Linear-interpolation quantile of a nonempty collection, q in [0, 1]."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("empty set")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"quantile fraction {q} outside [0, 1]")
    return float(np.quantile(values, q))
