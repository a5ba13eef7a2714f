"""Discretized frames on [0, 1]: redundant Daubechies wavelet frames and
orthonormal Legendre/Fourier baselines, their duals, and derivatives.

Grid convention: L endpoint-inclusive points t_k = k/(L-1).  Discrete
inner products use trapezoid weights w = [1/2, 1, ..., 1, 1/2] / (L-1);
the endpoints are needed because the operator constructions evaluate
frame elements at t=0 and t=1 directly.

Wavelet frame layout: the father/mother support is mapped to the whole
domain at scale 0; a copy at scale i spans 2^i domain lengths, and
adjacent copies are separated by shift_m * 2^i (shift_m = 1 places copies
end to end on the dyadic lattice, smaller values oversample by 1/m).
Copies are clipped to [0, 1]; each row is scaled so that an *unclipped*
copy has unit discrete norm, which means boundary-clipped rows keep their
reduced energy.  Rows whose in-domain energy falls below 1e-8 of a full
copy are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .filters import WaveletTables, cascade, daubechies_filter

ENERGY_DROP = 1e-8


class FrameFamily(Enum):
    DAUBECHIES = "daubechies"
    LEGENDRE = "legendre"
    FOURIER = "fourier"


class FrameError(Exception):
    """Configuration produced an empty or degenerate frame."""


@dataclass(frozen=True)
class FrameSpec:
    """Parameters identifying a frame.

    ``order_p``/``scale_min``/``scale_max``/``shift_m`` apply to the
    Daubechies family; ``basis_n`` to Legendre/Fourier.  ``rcond`` is the
    relative singular-value cutoff used when the dual is computed.
    """

    family: FrameFamily
    grid_len_L: int
    rcond: float = 0.01
    order_p: int = 11
    scale_min: int = 0
    scale_max: int = 0
    shift_m: float = 1.0
    basis_n: int = 0
    cascade_levels: int = 12

    def __post_init__(self):
        L = self.grid_len_L
        if L < 2 or (L & (L - 1)) != 0:
            raise ValueError("grid_len_L must be a power of two >= 2")
        if not (0.0 < self.rcond < 1.0):
            raise ValueError("rcond must lie in (0, 1)")
        if self.family is FrameFamily.DAUBECHIES:
            if self.scale_min > self.scale_max:
                raise ValueError("scale_min must not exceed scale_max")
            if not (0.0 < self.shift_m <= 1.0):
                raise ValueError("shift_m must lie in (0, 1]")
        else:
            if self.basis_n < 1:
                raise ValueError("basis_n must be >= 1 for basis frames")


@dataclass(frozen=True)
class RowDescriptor:
    kind: str          # "father" | "mother" | "basis"
    scale: int
    shift_index: int


@dataclass(frozen=True)
class Frame:
    """N_full frame elements sampled on the endpoint-inclusive grid."""

    rows: np.ndarray                 # (n_full, L)
    descriptors: tuple[RowDescriptor, ...]
    spec: FrameSpec

    @property
    def n_full(self) -> int:
        return self.rows.shape[0]

    @property
    def grid_len(self) -> int:
        return self.rows.shape[1]

    @property
    def grid(self) -> np.ndarray:
        L = self.grid_len
        return np.arange(L) / (L - 1)

    @property
    def weights(self) -> np.ndarray:
        return grid_weights(self.grid_len)


@dataclass(frozen=True)
class DualFrame:
    """rcond-truncated dual rows plus the singular spectrum of the frame."""

    rows: np.ndarray                 # (n_full, L)
    sigma: np.ndarray                # all min(n_full, L) singular values
    rank_eff: int
    rcond: float

    @property
    def n_full(self) -> int:
        return self.rows.shape[0]


def grid_weights(L: int) -> np.ndarray:
    """Trapezoid quadrature weights on the endpoint grid (sum to 1)."""
    w = np.full(L, 1.0 / (L - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _wavelet_rows(tables: WaveletTables, spec: FrameSpec):
    t = np.arange(spec.grid_len_L) / (spec.grid_len_L - 1)
    step_grid = 1.0 / (spec.grid_len_L - 1)
    rows, descriptors = [], []

    def emit(kind: str, evaluate, scales):
        for i in scales:
            span = 2.0 ** i
            shift_step = spec.shift_m * span
            k_lo = int(np.floor(-span / shift_step)) + 1
            k_hi = int(np.ceil(1.0 / shift_step)) - 1
            for k in range(k_lo, k_hi + 1):
                b = k * shift_step
                if not (-span < b < 1.0):
                    continue
                row = evaluate((t - b) / span)
                # full (untruncated) discrete norm of the same copy, sampled
                # at the same grid step beyond the domain
                n_ext = int(np.ceil(span / step_grid)) + 2
                t_ext = b + np.arange(n_ext + 1) * step_grid
                full = evaluate((t_ext - b) / span)
                norm_full = np.sqrt(np.sum(full * full) * step_grid)
                energy_in = np.sum(_w * row * row)
                if energy_in < ENERGY_DROP * norm_full ** 2:
                    continue
                rows.append(row / norm_full)
                descriptors.append(RowDescriptor(kind=kind, scale=i, shift_index=k))

    _w = grid_weights(spec.grid_len_L)
    emit("father", tables.eval_father, [spec.scale_max])
    emit("mother", tables.eval_mother, range(spec.scale_min, spec.scale_max + 1))
    return rows, descriptors


def build_wavelet_frame(spec: FrameSpec) -> Frame:
    """Construct the redundant Daubechies frame described by ``spec``.

    Father copies appear at scale_max only; mother copies at every integer
    scale in [scale_min, scale_max].  Requires order_p >= 2: Haar and D4
    lack the differentiability the operator construction needs.
    """
    if spec.family is not FrameFamily.DAUBECHIES:
        raise ValueError("build_wavelet_frame expects a Daubechies spec")
    if spec.order_p < 2:
        raise ValueError("wavelet frames require order_p >= 2 (differentiability)")
    bank = daubechies_filter(spec.order_p)
    tables = cascade(bank, spec.cascade_levels)
    rows, descriptors = _wavelet_rows(tables, spec)
    if not rows:
        raise FrameError("frame specification yields zero rows on [0, 1]")
    return Frame(rows=np.asarray(rows), descriptors=tuple(descriptors), spec=spec)


def build_basis_frame(spec: FrameSpec) -> Frame:
    """Orthonormal Legendre or Fourier rows (renormalized discretely).

    Legendre: sqrt(2n+1) * P_n(2t-1), n = 0..basis_n-1.  Fourier: the
    constant row followed by sqrt(2) cos / sqrt(2) sin pairs of increasing
    frequency, basis_n rows in total.
    """
    L = spec.grid_len_L
    t = np.arange(L) / (L - 1)
    n = spec.basis_n
    F = np.empty((n, L))
    if spec.family is FrameFamily.LEGENDRE:
        for i in range(n):
            coeff = np.zeros(i + 1)
            coeff[i] = 1.0
            F[i] = np.polynomial.legendre.legval(2.0 * t - 1.0, coeff) * np.sqrt(2 * i + 1)
    elif spec.family is FrameFamily.FOURIER:
        F[0] = 1.0
        for r in range(1, n):
            freq = (r + 1) // 2
            if r % 2 == 1:
                F[r] = np.sqrt(2.0) * np.cos(2.0 * np.pi * freq * t)
            else:
                F[r] = np.sqrt(2.0) * np.sin(2.0 * np.pi * freq * t)
    else:
        raise ValueError("build_basis_frame expects a Legendre or Fourier spec")
    w = grid_weights(L)
    F /= np.sqrt(F * F @ w)[:, None]
    descriptors = tuple(RowDescriptor(kind="basis", scale=0, shift_index=i) for i in range(n))
    return Frame(rows=F, descriptors=descriptors, spec=spec)


def build_frame(spec: FrameSpec) -> Frame:
    if spec.family is FrameFamily.DAUBECHIES:
        return build_wavelet_frame(spec)
    return build_basis_frame(spec)


def dual_frame(frame: Frame, rcond: Optional[float] = None) -> DualFrame:
    """rcond-truncated pseudo-inverse dual under the discrete inner product.

    For any f in the span of the kept singular directions,
    sum_i <f, phi_i> phitilde_i reproduces f.
    """
    if frame.n_full == 0:
        raise FrameError("cannot dualize an empty frame")
    if rcond is None:
        rcond = frame.spec.rcond
    w = frame.weights
    sw = np.sqrt(w)
    M = frame.rows * sw
    U, sigma, Vt = np.linalg.svd(M, full_matrices=False)
    rank = int(np.sum(sigma > rcond * sigma[0]))
    if rank == 0:
        raise FrameError(f"all singular values fall below rcond={rcond:g} * sigma_max")
    rows = (U[:, :rank] / sigma[:rank]) @ (Vt[:rank] / sw)
    return DualFrame(rows=rows, sigma=sigma, rank_eff=rank, rcond=float(rcond))


def frame_derivative(frame: Frame) -> np.ndarray:
    """Per-row time derivative: central differences inside, one-sided
    second-order at the two endpoints (step 1/(L-1))."""
    L = frame.grid_len
    if L < 3:
        raise ValueError("derivative needs at least 3 grid points")
    return np.gradient(frame.rows, 1.0 / (L - 1), axis=1, edge_order=2)


def project(frame: Frame, signal_on_grid: np.ndarray) -> np.ndarray:
    """Analysis coefficients c_i = <signal, phi_i> on the frame's own grid."""
    return (frame.rows * frame.weights) @ np.asarray(signal_on_grid)


def synthesize(dual: DualFrame, coeffs: np.ndarray) -> np.ndarray:
    """Reconstruction sum_i c_i phitilde_i on the frame grid."""
    return dual.rows.T @ np.asarray(coeffs)


def span_signal(frame: Frame, dual: DualFrame, seed_values: np.ndarray) -> np.ndarray:
    """Deterministic signal in the span of the kept singular directions.

    ``seed_values`` supplies rank_eff coefficients; the result is a length-L
    signal normalized to unit peak amplitude.
    """
    w = frame.weights
    M = frame.rows * np.sqrt(w)
    _, _, Vt = np.linalg.svd(M, full_matrices=False)
    r = dual.rank_eff
    f = (Vt[:r].T @ np.asarray(seed_values[:r])) / np.sqrt(w)
    peak = np.abs(f).max()
    return f / peak if peak > 0 else f
