"""Snapshot-to-feature transforms: packed covariance, truncated impulse
response, and raw re/im stacking, plus the dataset power normalization that
precedes them.

All three features are real vectors meant as network inputs:

* covariance: C = Y Y^H packed into M^2 reals. The default layout keeps the
  real lower triangle (with diagonal) in place and mirrors the imaginary
  strict lower triangle into the upper slots, which is lossless for a
  Hermitian matrix. A literal mode instead sums real and imaginary parts
  into the same lower-triangle slots and zeroes the upper ones.
* cir: inverse DFT of each row, first L delay bins, re block then im block
  (length 2*M*L).
* raw: re block then im block of Y itself (length 2*M*N).
"""

from __future__ import annotations

import numpy as np

from .channel import Dataset
from .numerics import hermitian_product


def normalize_dataset(dataset: Dataset) -> tuple[Dataset, float]:
    """Scale the whole snapshot tensor so mean per-entry power is 1.

    Returns the scaled dataset and the factor alpha = sqrt(T*M*N / ||A||_F^2).
    """
    ys = dataset.ys
    power = float(np.vdot(ys, ys).real)
    if power == 0.0:
        raise ValueError("zero-power dataset")
    alpha = float(np.sqrt(ys.size / power))
    return Dataset(ys=ys * alpha, positions=dataset.positions, scene=dataset.scene), alpha


def covariance_fingerprint(y: np.ndarray, literal: bool = False) -> np.ndarray:
    """Packed single-snapshot spatial covariance, length M^2 (row-major).

    Default layout is information preserving (see module docstring);
    literal=True reproduces the plain lower-triangle sum instead.
    """
    c = hermitian_product(y)
    if literal:
        packed = np.tril(c.real) + np.tril(c.imag, k=-1)
    else:
        packed = np.tril(c.real) + np.triu(c.imag.T, k=1)
    return packed.ravel()


def unpack_covariance(packed: np.ndarray) -> np.ndarray:
    """Rebuild the Hermitian covariance from the default packed layout."""
    vec = np.asarray(packed, dtype=np.float64)
    m = int(round(np.sqrt(vec.size)))
    if m * m != vec.size:
        raise ValueError(f"packed covariance length {vec.size} is not a square")
    mat = vec.reshape(m, m)
    re_low = np.tril(mat)                      # Re C on and below the diagonal
    im_low = np.triu(mat, k=1).T               # Im C of the strict lower triangle
    lower = re_low + 1j * im_low
    return lower + np.tril(lower, k=-1).conj().T


def cir_fingerprint(y: np.ndarray, l_bins: int) -> np.ndarray:
    """Truncated impulse-response feature, length 2*M*l_bins.

    Rows of Y are inverse-DFT'd and only the first l_bins delay taps kept;
    output stacks vec(Re D) then vec(Im D).
    """
    y = np.asarray(y, dtype=np.complex128)
    n = y.shape[1]
    if not 1 <= l_bins <= n:
        raise ValueError(f"l_bins {l_bins} outside [1, {n}]")
    d = np.fft.ifft(y, axis=1)[:, :l_bins]
    return np.concatenate([d.real.ravel(), d.imag.ravel()])


def raw_fingerprint(y: np.ndarray) -> np.ndarray:
    """Plain re/im stacking of the snapshot, length 2*M*N."""
    y = np.asarray(y, dtype=np.complex128)
    return np.concatenate([y.real.ravel(), y.imag.ravel()])


def fingerprint_matrix(dataset: Dataset, kind: str, l_bins: int = 10,
                       literal_cov: bool = False) -> np.ndarray:
    """Feature matrix (T, d) of one fingerprint kind over a whole dataset."""
    t, m, n = dataset.dims
    if kind == "cov":
        out = np.empty((t, m * m))
        for i in range(t):
            out[i] = covariance_fingerprint(dataset.ys[i], literal=literal_cov)
    elif kind == "cir":
        out = np.empty((t, 2 * m * l_bins))
        for i in range(t):
            out[i] = cir_fingerprint(dataset.ys[i], l_bins)
    elif kind == "raw":
        out = np.empty((t, 2 * m * n))
        for i in range(t):
            out[i] = raw_fingerprint(dataset.ys[i])
    else:
        raise ValueError(f"unknown fingerprint kind {kind!r}")
    return out


def feature_stats(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature mean and standard deviation (floored away from zero)."""
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    return mean, np.maximum(std, 1e-12)


def apply_standardize(x: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    """Optional per-feature standardization; off by default in the pipeline."""
    return (x - mean) / std
