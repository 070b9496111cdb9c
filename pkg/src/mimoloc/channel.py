"""Synthetic indoor massive MIMO channel along robot trajectories.

A rectangular 2-D room with a base-station planar array on one side; the
mobile transmitter is scanned along parallel lines, serpentine order. Each
snapshot is an M x N transfer-function matrix

    Y = H * gamma + noise

where H comes from an image-source multipath model (line-of-sight plus wall
reflections), gamma is a per-receiver-chain complex gain that is constant for
a whole dataset (uncalibrated RF chains), and the noise is white Gaussian at
a configurable per-entry SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .numerics import make_rng

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class SceneConfig:
    """Room, array, and impairment parameters of the simulator.

    element_spacing=None resolves to half a carrier wavelength. snr_db may be
    math.inf for a noise-free scene.
    """

    room: tuple[float, float] = (6.0, 5.0)          # width (x), depth (y) in m
    bs_position: tuple[float, float] = (3.0, 0.5)   # array reference point, m
    array_rows: int = 4
    array_cols: int = 8
    element_spacing: float | None = None            # m, default lambda/2
    carrier_freq: float = 3.7e9                     # Hz
    bandwidth: float = 20e6                         # Hz
    n_subcarriers: int = 64
    max_reflection_order: int = 2                   # 0 = pure LoS
    wall_reflection_loss: float = 3.0               # dB per bounce
    snr_db: float = 20.0
    rf_chain_seed: int = 7001
    noise_seed: int = 7002
    rf_gain_spread_db: float = 3.0                  # chain magnitudes in +/- this range

    def __post_init__(self):
        w, d = self.room
        if w <= 0 or d <= 0:
            raise ValueError(f"room dimensions must be positive, got {self.room}")
        if not (0 <= self.bs_position[0] <= w and 0 <= self.bs_position[1] <= d):
            raise ValueError("bs_position outside room")
        if self.array_rows < 1 or self.array_cols < 1:
            raise ValueError("array must have at least one element")
        if self.element_spacing is not None and self.element_spacing <= 0:
            raise ValueError("element_spacing must be positive")
        if self.carrier_freq <= 0 or self.bandwidth <= 0:
            raise ValueError("carrier_freq and bandwidth must be positive")
        if self.n_subcarriers < 1:
            raise ValueError("n_subcarriers must be >= 1")
        if self.max_reflection_order < 0:
            raise ValueError("max_reflection_order must be >= 0")
        if self.rf_gain_spread_db < 0:
            raise ValueError("rf_gain_spread_db must be >= 0")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def spacing(self) -> float:
        return self.element_spacing if self.element_spacing is not None else self.wavelength / 2

    @property
    def m_antennas(self) -> int:
        return self.array_rows * self.array_cols


@dataclass(frozen=True)
class TrajectoryPlan:
    """Serpentine scan: n_lines parallel x-direction lines, spaced in y."""

    n_lines: int = 40
    line_spacing: float = 0.05      # m between adjacent lines (y)
    line_length: float = 0.5        # m travelled per line (x)
    speed: float = 0.1              # m/s
    snapshot_rate: float = 100.0    # Hz
    start: tuple[float, float] = (1.75, 2.0)

    def __post_init__(self):
        if self.n_lines < 1:
            raise ValueError("n_lines must be >= 1")
        if self.speed <= 0 or self.snapshot_rate <= 0:
            raise ValueError("speed and snapshot_rate must be positive")
        if self.line_spacing < 0 or self.line_length < 0:
            raise ValueError("line_spacing and line_length must be >= 0")

    @property
    def step(self) -> float:
        """In-line spacing between consecutive snapshots, m."""
        return self.speed / self.snapshot_rate

    @property
    def samples_per_line(self) -> int:
        return int(math.floor(self.line_length / self.step + 1e-9)) + 1

    @property
    def n_snapshots(self) -> int:
        return self.n_lines * self.samples_per_line


@dataclass
class Dataset:
    """Ordered channel snapshots with ground-truth transmitter positions."""

    ys: np.ndarray          # (T, M, N) complex128
    positions: np.ndarray   # (T, 2) float64, m
    scene: SceneConfig

    def __post_init__(self):
        if self.ys.ndim != 3 or self.positions.shape != (self.ys.shape[0], 2):
            raise ValueError("snapshot tensor and positions are inconsistent")

    @property
    def n_snapshots(self) -> int:
        return self.ys.shape[0]

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.ys.shape


class Rays(NamedTuple):
    """Parallel per-ray arrays, sorted by (bounce count, delay)."""

    delays: np.ndarray      # s
    azimuths: np.ndarray    # rad, direction of arrival seen from the array
    gains: np.ndarray       # complex
    bounces: np.ndarray     # reflection order per ray


def plan_positions(plan: TrajectoryPlan, room: tuple[float, float] | None = None) -> np.ndarray:
    """Ground-truth positions of a serpentine scan, in snapshot order.

    Every line covers the same x grid; odd lines are traversed backwards so the
    path is continuous. With room given, positions outside it raise.
    """
    n = plan.samples_per_line
    xs = plan.start[0] + plan.step * np.arange(n)
    out = np.empty((plan.n_lines * n, 2), dtype=np.float64)
    for line in range(plan.n_lines):
        sl = slice(line * n, (line + 1) * n)
        out[sl, 0] = xs if line % 2 == 0 else xs[::-1]
        out[sl, 1] = plan.start[1] + line * plan.line_spacing
    if room is not None:
        w, d = room
        if (out[:, 0].min() < 0 or out[:, 0].max() > w
                or out[:, 1].min() < 0 or out[:, 1].max() > d):
            raise ValueError("trajectory leaves room")
    return out


def _axis_images(coord: float, extent: float, max_order: int) -> list[tuple[float, int]]:
    """Mirror images of one coordinate across the two walls of its axis.

    Walls sit at 0 and extent; repeated reflection yields 2*p*extent + coord
    with 2*p bounces and 2*p*extent - coord with |2*p - 1| bounces.
    """
    images = []
    p_max = max_order // 2 + 1
    for p in range(-p_max, p_max + 1):
        n_even = abs(2 * p)
        if n_even <= max_order:
            images.append((2 * p * extent + coord, n_even))
        n_odd = abs(2 * p - 1)
        if n_odd <= max_order:
            images.append((2 * p * extent - coord, n_odd))
    return images


def multipath_rays(scene: SceneConfig, ue: tuple[float, float]) -> Rays:
    """Image-source rays from a transmitter position to the array reference.

    Each ray: delay = path/c, amplitude = 1/path attenuated by
    wall_reflection_loss dB per bounce, phase = -2*pi*path/lambda, azimuth =
    arrival direction at the array. The direct ray is always included.
    """
    bx, by = scene.bs_position
    ux, uy = float(ue[0]), float(ue[1])
    if ux == bx and uy == by:
        raise ValueError("degenerate geometry: transmitter at array position")
    w, d = scene.room
    order = scene.max_reflection_order

    records = []
    for ix, nx in _axis_images(ux, w, order):
        for iy, ny in _axis_images(uy, d, order):
            bounces = nx + ny
            if bounces > order:
                continue
            dx, dy = ix - bx, iy - by
            path = math.hypot(dx, dy)
            records.append((bounces, path, math.atan2(dy, dx)))
    records.sort(key=lambda r: (r[0], r[1]))

    bounces = np.array([r[0] for r in records], dtype=np.int64)
    paths = np.array([r[1] for r in records])
    azimuths = np.array([r[2] for r in records])
    mags = (1.0 / paths) * 10.0 ** (-bounces * scene.wall_reflection_loss / 20.0)
    phases = -2.0 * np.pi * paths / scene.wavelength
    gains = mags * np.exp(1j * phases)
    return Rays(paths / SPEED_OF_LIGHT, azimuths, gains, bounces)


def subcarrier_offsets(scene: SceneConfig) -> np.ndarray:
    """Baseband frequency of each subcarrier: -bw/2 + k*bw/N, k = 0..N-1."""
    n = scene.n_subcarriers
    return -scene.bandwidth / 2 + np.arange(n) * (scene.bandwidth / n)


def rf_chain_gains(scene: SceneConfig) -> np.ndarray:
    """Per-chain complex coefficients, frequency flat, fixed for a scene.

    Magnitude is log-uniform within +/- rf_gain_spread_db, phase uniform;
    drawn from rf_chain_seed so every snapshot of a dataset shares them.
    """
    rng = make_rng(scene.rf_chain_seed)
    m = scene.m_antennas
    mag_db = rng.uniform(-scene.rf_gain_spread_db, scene.rf_gain_spread_db, m)
    phase = rng.uniform(0.0, 2.0 * np.pi, m)
    return 10.0 ** (mag_db / 20.0) * np.exp(1j * phase)


def propagation_matrix(scene: SceneConfig, ue: tuple[float, float]) -> np.ndarray:
    """Noise-free, chain-free channel H of shape (M, N).

    H[m, k] = sum_rays gain * exp(-2j pi f_k tau) * steer_m(azimuth), with the
    array phasing applied at the carrier (narrowband array). Element m = r*cols
    + c sits at horizontal offset (c - (cols-1)/2) * spacing along the array
    axis (the x direction); rows are stacked out of the simulated plane, so
    elements of one column share a steering phase.
    """
    rays = multipath_rays(scene, ue)
    f_off = subcarrier_offsets(scene)
    # (R, N) per-ray linear phase across the band
    band_phase = np.exp(-2j * np.pi * np.outer(rays.delays, f_off))
    col_offsets = (np.arange(scene.array_cols) - (scene.array_cols - 1) / 2) * scene.spacing
    k0 = 2.0 * np.pi / scene.wavelength
    # (R, cols) steering at the carrier, replicated across rows in (r, c) order
    steer_cols = np.exp(1j * k0 * np.outer(np.cos(rays.azimuths), col_offsets))
    steer = np.repeat(steer_cols[:, np.newaxis, :], scene.array_rows, axis=1).reshape(
        len(rays.delays), -1)
    return np.einsum("r,rm,rn->mn", rays.gains, steer, band_phase, optimize=True)


def synth_snapshot(scene: SceneConfig, ue: tuple[float, float],
                   noise_rng: np.random.Generator,
                   gamma: np.ndarray | None = None) -> np.ndarray:
    """One received snapshot Y = H * gamma + noise, shape (M, N).

    gamma defaults to rf_chain_gains(scene). Noise is complex white Gaussian
    with per-entry power mean(|H*gamma|^2) / 10^(snr_db/10); snr_db = inf
    skips the noise draw entirely.
    """
    if gamma is None:
        gamma = rf_chain_gains(scene)
    y = propagation_matrix(scene, ue) * gamma[:, np.newaxis]
    if math.isfinite(scene.snr_db):
        signal_power = float(np.mean(np.abs(y) ** 2))
        noise_power = signal_power / 10.0 ** (scene.snr_db / 10.0)
        scale = math.sqrt(noise_power / 2.0)
        re = noise_rng.standard_normal(y.shape)
        im = noise_rng.standard_normal(y.shape)
        y = y + scale * (re + 1j * im)
    return y


def generate_dataset(scene: SceneConfig, plan: TrajectoryPlan) -> Dataset:
    """All snapshots of a scan, in plan order; bit-deterministic given seeds.

    The per-snapshot noise stream is seeded with noise_seed + snapshot index,
    so any snapshot can be regenerated in isolation.
    """
    positions = plan_positions(plan, scene.room)
    gamma = rf_chain_gains(scene)
    t = len(positions)
    ys = np.empty((t, scene.m_antennas, scene.n_subcarriers), dtype=np.complex128)
    for i in range(t):
        ys[i] = synth_snapshot(scene, positions[i], make_rng(scene.noise_seed + i), gamma=gamma)
    return Dataset(ys=ys, positions=positions, scene=scene)
