"""Execution engines for the state-space operators.

Three equivalent paths compute the state sequence:

* dense generalized-bilinear-transform stepping, one linear solve per
  sample for the scaled window, a single factored inverse reused for
  every sample of the sliding window;
* diagonal stepping, elementwise over the eigenmodes;
* kernel application, the stepping recursion unrolled into per-mode
  propagation products (geometric rows for the sliding window, so the
  whole running state follows from FFT convolutions).

Step convention (dt = 1, step k consumes u[k]): the scaled window uses
A_k = A/(k+1), B_k = B/(k+1) on the explicit side and A/(k+2) on the
implicit side, so step 0 divides by one; the sliding window uses A/theta
and B/theta throughout.  States are reported at times T = k+1 = number of
samples consumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

import numpy as np

from . import _accel
from .frames import DualFrame, Frame
from .safari import Measure, MeasureKind, SSMOperator
from .spectral import DiagonalSSM


class StepError(Exception):
    pass


class RunMode(Enum):
    DENSE_SEQUENTIAL = "dense"
    DIAGONAL_SEQUENTIAL = "diagonal"
    KERNEL = "kernel"


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 0.5
    mode: RunMode = RunMode.DENSE_SEQUENTIAL
    emit_stride: int = 1

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError("alpha must lie in [0, 1]")
        if self.emit_stride < 1:
            raise ValueError("emit_stride must be >= 1")


@dataclass(frozen=True)
class StateTrajectory:
    times: np.ndarray          # (n_emit,) samples consumed at emission
    states: np.ndarray         # (n_emit, N) real coefficient vectors

    @property
    def final_state(self) -> np.ndarray:
        if self.states.shape[0] == 0:
            raise ValueError("empty trajectory has no final state")
        return self.states[-1]


@dataclass(frozen=True)
class KernelMatrix:
    """Per-mode propagation products; column j carries the contribution of
    u[j] to the final state (b_tilde factored out)."""

    entries: np.ndarray        # (n_modes, length) complex
    measure: MeasureKind
    alpha: float

    @property
    def length(self) -> int:
        return self.entries.shape[1]


def emit_indices(length: int, stride: int) -> np.ndarray:
    """0-based step indices at which states are emitted: every stride-th
    consumed sample plus always the final one (ceil(L/stride) rows)."""
    if length == 0:
        return np.empty(0, dtype=np.int64)
    idx = np.arange(stride - 1, length, stride, dtype=np.int64)
    if idx.size == 0 or idx[-1] != length - 1:
        idx = np.append(idx, length - 1)
    return idx


def gbt_step_dense(ssm: SSMOperator, c: np.ndarray, u_k: float, k: int,
                   alpha: float = 0.5, dt: float = 1.0) -> np.ndarray:
    """One generalized-bilinear-transform step of the dense system."""
    A = ssm.a_matrix
    n = ssm.n
    if ssm.measure.kind is Measure.SCALED:
        A_now, A_next = A / (k + 1), A / (k + 2)
        B_now = ssm.b_vector / (k + 1)
    else:
        theta = ssm.measure.theta
        A_now = A_next = A / theta
        B_now = ssm.b_vector / theta
    lhs = np.eye(n) + dt * alpha * A_next
    rhs = (np.eye(n) - dt * (1.0 - alpha) * A_now) @ c + dt * B_now * u_k
    try:
        return np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(lhs)
        raise StepError(f"singular implicit matrix at step {k} (cond={cond:.2e})") from exc


def _diag_factors(diag: DiagonalSSM, alpha: float):
    """Constant per-mode propagation/injection factors (translated only)."""
    theta = diag.measure.theta
    lam = diag.lambdas
    den = 1.0 + (alpha / theta) * lam
    a = (1.0 - ((1.0 - alpha) / theta) * lam) / den
    g = (1.0 / theta) / den
    return a, g


def run_sequential(system: Union[SSMOperator, DiagonalSSM], signal: np.ndarray,
                   cfg: RunConfig = RunConfig()) -> StateTrajectory:
    """Step the system over a sampled signal and emit coefficient states.

    Dense systems run the GBT recursion on the full matrix; diagonal
    systems step elementwise and are mapped back to frame coefficients
    through ``v_out`` before emission.
    """
    u = np.asarray(signal, dtype=np.float64)
    if not np.all(np.isfinite(u)):
        raise ValueError("signal contains non-finite samples")
    idx = emit_indices(u.size, cfg.emit_stride)
    times = idx + 1
    if u.size == 0:
        n = system.n if isinstance(system, SSMOperator) else system.n_full
        return StateTrajectory(times=times, states=np.empty((0, n)))
    if isinstance(system, DiagonalSSM):
        if system.measure.kind is Measure.SCALED:
            tilde = _accel.step_diag_scaled(system.lambdas, system.b_tilde, u,
                                            cfg.alpha, idx)
        else:
            a, g = _diag_factors(system, cfg.alpha)
            tilde = _accel.step_diag_const(a, g * system.b_tilde, u, idx)
        states = np.real(tilde @ system.v_out.T)
        return StateTrajectory(times=times, states=states)

    if system.measure.kind is Measure.SCALED:
        states = _accel.step_dense_scaled(system.a_matrix, system.b_vector, u,
                                          cfg.alpha, idx)
    else:
        cache = DenseStepCache(system, alpha=cfg.alpha)
        states = cache.run(u, cfg.emit_stride).states
    if not np.all(np.isfinite(states)):
        bad = int(np.argmax(~np.all(np.isfinite(states), axis=1)))
        raise StepError(f"non-finite state at emitted step index {bad}")
    return StateTrajectory(times=times, states=states)


class DenseStepCache:
    """Precomputed per-step propagators for batch dense runs.

    The sliding window needs a single factored inverse (reused for every
    step); the scaled window gets one (M_k, v_k) pair per step so that
    many signals can be run against the same operator at matrix-vector
    cost.  Identical in exact arithmetic to gbt_step_dense stepping.
    """

    def __init__(self, ssm: SSMOperator, alpha: float = 0.5,
                 length: Optional[int] = None):
        self.ssm = ssm
        self.alpha = float(alpha)
        A = ssm.a_matrix
        n = ssm.n
        I = np.eye(n)
        if ssm.measure.kind is Measure.TRANSLATED:
            theta = ssm.measure.theta
            try:
                inv = np.linalg.inv(I + (alpha / theta) * A)
            except np.linalg.LinAlgError as exc:
                raise StepError("singular implicit matrix for translated stepping") from exc
            self._Ms = (inv @ (I - ((1.0 - alpha) / theta) * A))[None, :, :]
            self._vs = (inv @ (ssm.b_vector / theta))[None, :]
            self.length = None
        else:
            if length is None:
                raise ValueError("scaled cache requires the signal length")
            Ms = np.empty((length, n, n))
            vs = np.empty((length, n))
            for k in range(length):
                inv = np.linalg.inv(I + (alpha / (k + 2)) * A)
                Ms[k] = inv @ (I - ((1.0 - alpha) / (k + 1)) * A)
                vs[k] = inv @ (ssm.b_vector / (k + 1))
            self._Ms = Ms
            self._vs = vs
            self.length = length

    def run(self, signal: np.ndarray, emit_stride: int = 1) -> StateTrajectory:
        u = np.asarray(signal, dtype=np.float64)
        idx = emit_indices(u.size, emit_stride)
        if u.size == 0:
            return StateTrajectory(times=idx + 1, states=np.empty((0, self.ssm.n)))
        if self.length is None:
            states = _accel.step_dense_const(self._Ms[0], self._vs[0], u, idx)
        else:
            if u.size > self.length:
                raise ValueError("signal longer than cached step range")
            states = _accel.step_dense_cached(self._Ms[: u.size], self._vs[: u.size], u, idx)
        return StateTrajectory(times=idx + 1, states=states)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def build_kernel(diag: DiagonalSSM, length: int, alpha: float = 0.5) -> KernelMatrix:
    """Unrolled stepping products per mode.

    entries[i, j] = (prod of propagation factors for steps j+1..length-1)
    times the injection factor at step j, so the final diagonal state is
    b_tilde * (entries @ u).  Sliding-window rows are geometric.
    """
    lam = diag.lambdas
    if diag.measure.kind is Measure.TRANSLATED:
        theta = diag.measure.theta
        den = 1.0 + (alpha / theta) * lam
        a = (1.0 - ((1.0 - alpha) / theta) * lam) / den
        g = (1.0 / theta) / den
        powers = np.arange(length - 1, -1, -1)
        entries = a[:, None] ** powers[None, :] * g[:, None]
    else:
        ks = np.arange(length)
        num = 1.0 - ((1.0 - alpha) / (ks + 1))[None, :] * lam[:, None]
        den = 1.0 + (alpha / (ks + 2))[None, :] * lam[:, None]
        ratios = num / den
        suffix = np.ones_like(ratios)
        if length > 1:
            rev = np.cumprod(ratios[:, ::-1], axis=1)[:, ::-1]
            suffix[:, :-1] = rev[:, 1:]
        inject = (1.0 / (ks + 1))[None, :] / den
        entries = suffix * inject
    return KernelMatrix(entries=entries, measure=diag.measure, alpha=float(alpha))


def apply_kernel(kernel: KernelMatrix, signal: np.ndarray, b_tilde: np.ndarray,
                 v_out: np.ndarray) -> np.ndarray:
    """Final coefficient vector c = Re(v_out @ (b_tilde * (K @ u)))."""
    u = np.asarray(signal, dtype=np.float64)
    if u.size != kernel.length:
        raise ValueError(f"signal length {u.size} != kernel length {kernel.length}")
    tilde = b_tilde * (kernel.entries @ u)
    return np.real(v_out @ tilde)


def kernel_effective_support(kernel: KernelMatrix, tol: float = 1e-12) -> int:
    """Samples after which every sliding-window kernel row has decayed
    below ``tol`` of its peak."""
    mags = np.abs(kernel.entries)
    peaks = mags.max(axis=1, keepdims=True)
    alive = mags > tol * peaks
    cols = np.where(alive.any(axis=0))[0]
    if cols.size == 0:
        return 0
    return kernel.length - int(cols.min())


def run_kernel_translated(diag: DiagonalSSM, signal: np.ndarray,
                          alpha: float = 0.5, emit_stride: int = 1,
                          tail_tol: float = 1e-12) -> StateTrajectory:
    """Running states for the sliding window via FFT convolution.

    Each mode's kernel is geometric, so the entire state sequence is a
    causal convolution of the input with a decaying exponential; rows are
    truncated once they fall below ``tail_tol`` of their peak, which
    changes the result by less than the truncation level.
    """
    u = np.asarray(signal, dtype=np.float64)
    L = u.size
    idx = emit_indices(L, emit_stride)
    if L == 0:
        return StateTrajectory(times=idx + 1, states=np.empty((0, diag.n_full)))
    a, g = _diag_factors(diag, alpha)
    coef = g * diag.b_tilde
    n_fft = 1 << int(np.ceil(np.log2(max(2 * L, 2))))
    U = np.fft.fft(u, n_fft)
    tilde = np.empty((L, diag.n_eff), dtype=np.complex128)
    powers = np.arange(L)
    for i in range(diag.n_eff):
        decay = np.abs(a[i])
        if decay < 1.0 and decay > 0.0:
            n_keep = min(L, max(1, int(np.log(tail_tol) / np.log(decay)) + 1))
        else:
            n_keep = L
        row = coef[i] * (a[i] ** powers[:n_keep])
        tilde[:, i] = np.fft.ifft(U * np.fft.fft(row, n_fft))[:L]
    states = np.real(tilde[idx] @ diag.v_out.T)
    return StateTrajectory(times=idx + 1, states=states)


def unroll_kernel_dense(ssm: SSMOperator, length: int, alpha: float = 0.5) -> np.ndarray:
    """Coefficient-space kernel (n, length) by unrolling the dense stepping,
    for operators that cannot be stably diagonalized."""
    n = ssm.n
    A = ssm.a_matrix
    I = np.eye(n)
    K = np.empty((n, length))
    if ssm.measure.kind is Measure.TRANSLATED:
        theta = ssm.measure.theta
        inv = np.linalg.inv(I + (alpha / theta) * A)
        M = inv @ (I - ((1.0 - alpha) / theta) * A)
        v = inv @ (ssm.b_vector / theta)
        K[:, length - 1] = v
        for j in range(length - 2, -1, -1):
            K[:, j] = M @ K[:, j + 1]
    else:
        P = I.copy()
        for j in range(length - 1, -1, -1):
            inv = np.linalg.inv(I + (alpha / (j + 2)) * A)
            K[:, j] = P @ (inv @ (ssm.b_vector / (j + 1)))
            P = P @ (inv @ (I - ((1.0 - alpha) / (j + 1)) * A))
    return K


def coefficient_kernel(diag: DiagonalSSM, length: int, alpha: float = 0.5) -> np.ndarray:
    """Real frame-coefficient kernel Re(v_out diag(b_tilde) K)."""
    kern = build_kernel(diag, length, alpha)
    return np.real(diag.v_out @ (diag.b_tilde[:, None] * kern.entries))


def ideal_kernel(frame: Frame, length: int, theta: int) -> np.ndarray:
    """Zero-error sliding-window kernel: row i holds phi_i across the last
    theta columns (weight 1/theta), zero elsewhere."""
    rows = resample_rows(frame.rows, (np.arange(theta) + 1.0) / theta)
    K = np.zeros((frame.n_full, length))
    K[:, length - theta:] = rows / theta
    return K


# ---------------------------------------------------------------------------
# reconstruction
# ---------------------------------------------------------------------------

def resample_rows(rows: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Linear interpolation of row functions from the frame grid onto
    arbitrary positions in [0, 1]."""
    L = rows.shape[1]
    x = np.asarray(positions, dtype=np.float64) * (L - 1)
    i0 = np.clip(np.floor(x).astype(np.int64), 0, L - 2)
    fr = x - i0
    return rows[:, i0] * (1.0 - fr) + rows[:, i0 + 1] * fr


def reconstruct(c: np.ndarray, frame: Frame, dual: DualFrame, measure: MeasureKind,
                T: int) -> np.ndarray:
    """Sampled reconstruction of the represented window at time T.

    Scaled: u_hat over the first T samples (sample j at position (j+1)/T).
    Translated: u_hat over the theta samples of the window [T-theta, T).
    """
    if measure.kind is Measure.SCALED:
        if T < 1:
            raise ValueError("scaled reconstruction requires T >= 1")
        positions = (np.arange(T) + 1.0) / T
    else:
        theta = measure.theta
        if T < theta:
            raise ValueError(f"translated reconstruction requires T >= theta={theta}")
        positions = (np.arange(theta) + 1.0) / theta
    rows = resample_rows(dual.rows, positions)
    return np.asarray(c) @ rows
