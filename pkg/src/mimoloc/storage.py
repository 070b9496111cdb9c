"""Binary dataset/model files and delimited text reports.

Dataset layout: magic b"MMLC", u16 version, u32 T, M, N, then per snapshot
M*N (Re, Im) float64 pairs row-major followed by the (x, y) position.
Model layout: magic b"MLPW", u16 version, u32 layer count, u64 init seed,
f64 leaky slope, u32 (in, out) per layer, then row-major float64 W and b
per layer. Everything little-endian. CSV files use '.' decimals, ','
separators, a header row, and 12 significant digits.
"""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np

from .channel import Dataset, SceneConfig
from .neuralnet import MlpModel, MlpSpec

_DATASET_MAGIC = b"MMLC"
_MODEL_MAGIC = b"MLPW"
_VERSION = 1


class FormatError(ValueError):
    """File does not match the documented layout."""


def save_dataset(path, dataset: Dataset) -> int:
    """Write the dataset file; returns bytes written."""
    t, m, n = dataset.dims
    header = _DATASET_MAGIC + struct.pack("<HIII", _VERSION, t, m, n)
    # interleave (Re, Im) pairs, one snapshot then its position
    body = np.empty((t, 2 * m * n + 2), dtype="<f8")
    flat = dataset.ys.reshape(t, -1)
    body[:, 0:2 * m * n:2] = flat.real
    body[:, 1:2 * m * n:2] = flat.imag
    body[:, -2:] = dataset.positions
    with open(path, "wb") as fh:
        fh.write(header)
        body.tofile(fh)
    return len(header) + body.nbytes


def read_header(path) -> tuple[int, int, int]:
    """(T, M, N) from the file header, validating magic and version."""
    with open(path, "rb") as fh:
        raw = fh.read(18)
    if len(raw) < 18 or raw[:4] != _DATASET_MAGIC:
        raise FormatError(f"{path}: not a dataset file")
    version, t, m, n = struct.unpack("<HIII", raw[4:18])
    if version != _VERSION:
        raise FormatError(f"{path}: unsupported dataset version {version}")
    return t, m, n


def load_dataset(path, scene: SceneConfig | None = None) -> Dataset:
    """Read a dataset file back; scene metadata is not stored in the file,
    so callers supply the matching SceneConfig (defaults otherwise)."""
    t, m, n = read_header(path)
    with open(path, "rb") as fh:
        fh.seek(18)
        body = np.fromfile(fh, dtype="<f8")
    expect = t * (2 * m * n + 2)
    if body.size != expect:
        raise FormatError(f"{path}: truncated dataset (got {body.size} of "
                          f"{expect} values)")
    body = body.reshape(t, 2 * m * n + 2)
    ys = (body[:, 0:2 * m * n:2] + 1j * body[:, 1:2 * m * n:2]).reshape(t, m, n)
    positions = np.ascontiguousarray(body[:, -2:])
    if scene is None:
        scene = SceneConfig(array_rows=1, array_cols=m, n_subcarriers=n)
    if scene.m_antennas != m or scene.n_subcarriers != n:
        raise FormatError(f"{path}: scene dims ({scene.m_antennas}, "
                          f"{scene.n_subcarriers}) do not match file ({m}, {n})")
    return Dataset(ys=np.ascontiguousarray(ys), positions=positions, scene=scene)


def save_model(path, model: MlpModel) -> None:
    spec = model.spec
    with open(path, "wb") as fh:
        fh.write(_MODEL_MAGIC)
        fh.write(struct.pack("<HIQd", _VERSION, len(spec.layer_dims), spec.seed,
                             spec.leaky_slope))
        for din, dout in spec.layer_dims:
            fh.write(struct.pack("<II", din, dout))
        for w, b in zip(model.weights, model.biases):
            np.ascontiguousarray(w, dtype="<f8").tofile(fh)
            np.ascontiguousarray(b, dtype="<f8").tofile(fh)


def load_model(path) -> MlpModel:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MODEL_MAGIC:
            raise FormatError(f"{path}: not a model file")
        version, n_layers, seed, slope = struct.unpack("<HIQd", fh.read(22))
        if version != _VERSION:
            raise FormatError(f"{path}: unsupported model version {version}")
        dims_pairs = [struct.unpack("<II", fh.read(8)) for _ in range(n_layers)]
        weights, biases = [], []
        for fan_in, fan_out in dims_pairs:
            w = np.fromfile(fh, dtype="<f8", count=fan_out * fan_in)
            b = np.fromfile(fh, dtype="<f8", count=fan_out)
            if w.size != fan_out * fan_in or b.size != fan_out:
                raise FormatError(f"{path}: truncated model file")
            weights.append(w.reshape(fan_out, fan_in))
            biases.append(b)
    spec = MlpSpec(layer_dims=tuple(dims_pairs), leaky_slope=slope, seed=seed)
    return MlpModel(weights=weights, biases=biases, spec=spec)


def fmt(x) -> str:
    """One numeric cell: 12 significant digits, '.' decimal point."""
    return f"{float(x):.12g}"


def config_hash(pairs: dict[str, str]) -> str:
    """Stable digest of the effective config (sorted key=value lines)."""
    canon = "\n".join(f"{k}={pairs[k]}" for k in sorted(pairs))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def write_report_csv(path, truth, test_idx, errors: dict, percentiles: dict,
                     rho, cfg_hash: str) -> None:
    """Per-sample error table plus the summary block.

    Methods absent from a run leave their column empty. The summary lists
    methods in the fixed order fused, cov, cir, raw.
    """
    order = ("fused", "cov", "cir", "raw")
    lines = ["index,x,y,e_cov,e_cir,e_raw,e_fused"]
    for i, idx in enumerate(test_idx):
        cells = [str(int(idx)), fmt(truth[i, 0]), fmt(truth[i, 1])]
        for m in ("cov", "cir", "raw", "fused"):
            cells.append(fmt(errors[m][i]) if m in errors else "")
        lines.append(",".join(cells))
    lines.append("summary,method,p50,p90,p95,")
    for m in order:
        if m in percentiles:
            p = percentiles[m]
            lines.append(f"summary,{m},{fmt(p[50])},{fmt(p[90])},{fmt(p[95])},")
    lines.append(f"summary,rho,{'' if rho is None else fmt(rho)},,,")
    lines.append(f"summary,config_hash,{cfg_hash},,,")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_loss_csv(path, history) -> None:
    lines = ["epoch,loss"]
    lines += [f"{e},{fmt(v)}" for e, v in enumerate(history)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_cdf_csv(path, table: np.ndarray) -> None:
    """table rows are (error, cumulative fraction)."""
    lines = ["error,cum_fraction"]
    lines += [f"{fmt(e)},{fmt(f)}" for e, f in table]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_spatialcorr_csv(path, rows, wavelength: float) -> None:
    """rows are (separation in metres, |rho|); first column reported in
    wavelengths."""
    lines = ["delta_over_lambda,abs_rho"]
    lines += [f"{fmt(d / wavelength)},{fmt(r)}" for d, r in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
