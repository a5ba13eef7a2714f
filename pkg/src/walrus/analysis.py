"""Evaluation metrics: reconstruction MSE (overall and running),
multiscale modulus-maxima peak detection, peak matching, win tallies,
and sliding-window kernel diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _accel
from .frames import DualFrame, Frame
from .runtime import KernelMatrix, StateTrajectory, resample_rows
from .safari import Measure, MeasureKind


# ---------------------------------------------------------------------------
# MSE
# ---------------------------------------------------------------------------

def overall_mse(u: np.ndarray, u_hat: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    u_hat = np.asarray(u_hat, dtype=np.float64)
    if u.shape != u_hat.shape:
        raise ValueError("signals must have equal length")
    return float(np.mean((u - u_hat) ** 2))


@dataclass(frozen=True)
class MseReport:
    overall: float
    running: np.ndarray                    # (n_steps,)
    times: np.ndarray
    quantiles: Optional[dict] = None       # {"q40": ..., "median": ..., "q60": ...}


def running_mse(trajectory: StateTrajectory, dual: DualFrame, signal: np.ndarray,
                measure: MeasureKind) -> np.ndarray:
    """Reconstruction MSE of the represented window at every emitted step.

    Scaled: window [0, T).  Translated: window [T-theta, T), reported only
    for T >= theta (earlier steps are warm-up and are skipped by callers
    via the returned times alignment: entries for T < theta are NaN).
    """
    u = np.asarray(signal, dtype=np.float64)
    times = trajectory.times
    states = trajectory.states
    if measure.kind is Measure.SCALED:
        return _accel.running_mse_scaled(states, times.astype(np.int64), dual.rows, u)
    theta = measure.theta
    win_rows = resample_rows(dual.rows, (np.arange(theta) + 1.0) / theta)
    out = np.full(times.size, np.nan)
    valid = times >= theta
    if np.any(valid):
        recon = states[valid] @ win_rows
        for j, T in enumerate(times[valid]):
            seg = u[T - theta:T]
            out[np.flatnonzero(valid)[j]] = float(np.mean((recon[j] - seg) ** 2))
    return out


def quantile_bands(per_instance: np.ndarray) -> dict:
    """q40/median/q60 across instances (axis 0) at every step."""
    return {
        "q40": np.nanquantile(per_instance, 0.4, axis=0),
        "median": np.nanquantile(per_instance, 0.5, axis=0),
        "q60": np.nanquantile(per_instance, 0.6, axis=0),
    }


# ---------------------------------------------------------------------------
# peak detection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PeakDetector:
    """Multiscale detector: undecimated Haar-style detail coefficients at
    ``scales``, thresholded at threshold_k times the robust noise level
    (MAD * 1.4826 of the finest-scale details), with maxima required to
    persist across ``persistence`` scales.  ``width`` guides clustering
    and the local amplitude window (defaults to the largest scale)."""

    scales: tuple[int, ...] = (2, 4, 8, 16)
    threshold_k: float = 4.0
    persistence: int = 2
    width: Optional[int] = None

    @property
    def cluster_width(self) -> int:
        return self.width if self.width is not None else max(self.scales)


@dataclass(frozen=True)
class PeakEvent:
    position: int
    amplitude: float


def _haar_detail(signal: np.ndarray, s: int) -> np.ndarray:
    """Right-minus-left moving-average difference at half-width s."""
    padded = np.pad(signal, s, mode="edge")
    kernel = np.concatenate([np.ones(s), -np.ones(s)]) / (2.0 * s)
    return np.convolve(padded, kernel[::-1], mode="same")[s:-s]


def detect_peaks(signal: np.ndarray, detector: PeakDetector = PeakDetector()) -> list[PeakEvent]:
    """Locate isolated peaks via cross-scale modulus maxima.

    Maxima of |detail| at the finest scale that exceed the robust
    threshold and persist across at least ``persistence`` scales are
    clustered; each cluster is refined to the median index of the samples
    within half of the local extremum, with the extremum as amplitude.
    """
    u = np.asarray(signal, dtype=np.float64)
    if u.size < 64:
        raise ValueError("peak detection expects signals of length >= 64")
    if np.ptp(u) == 0.0:
        return []
    scales = tuple(sorted(detector.scales))
    details = {s: _haar_detail(u, s) for s in scales}
    fine = details[scales[0]]
    sigma = float(np.median(np.abs(fine - np.median(fine)))) * 1.4826
    sigma = max(sigma, 1e-300)
    candidates = {}
    guard = scales[-1]
    for s in scales:
        d = np.abs(details[s])
        local_max = (d >= np.roll(d, 1)) & (d >= np.roll(d, -1)) & (d > detector.threshold_k * sigma)
        local_max[:guard] = False
        local_max[-guard:] = False
        candidates[s] = np.flatnonzero(local_max)
    kept = []
    for p in candidates[scales[0]]:
        count = 1
        for s in scales[1:]:
            other = candidates[s]
            if other.size and np.min(np.abs(other - p)) <= 2 * s:
                count += 1
        if count >= detector.persistence:
            kept.append(int(p))
    if not kept:
        return []
    width = detector.cluster_width
    groups: list[list[int]] = []
    for p in sorted(kept):
        if groups and p - groups[-1][-1] <= width:
            groups[-1].append(p)
        else:
            groups.append([p])
    out = []
    for g in groups:
        lo = max(0, g[0] - width)
        hi = min(u.size, g[-1] + width + 1)
        seg = np.abs(u[lo:hi])
        peak = seg.max()
        inside = np.flatnonzero(seg >= 0.5 * peak)
        pos = lo + int(np.median(inside))
        out.append(PeakEvent(position=pos, amplitude=float(abs(u[pos]))))
    return out


# ---------------------------------------------------------------------------
# matching and tallies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Match:
    truth_pos: int
    det_pos: int
    truth_amp: float
    det_amp: float


@dataclass(frozen=True)
class PeakReport:
    missed: int
    false_peaks: int
    matches: tuple[Match, ...]
    avg_displacement: float
    rel_amp_error: float


def match_peaks(detected: Sequence[PeakEvent], truth_pos: Sequence[int],
                truth_amp: Sequence[float], tol_window: int) -> PeakReport:
    """Greedy matching by ascending position difference, each truth and
    detection used once; ties go to the earlier truth."""
    pairs = []
    for di, det in enumerate(detected):
        for ti, tp in enumerate(truth_pos):
            d = abs(det.position - int(tp))
            if d <= tol_window:
                pairs.append((d, ti, di))
    pairs.sort(key=lambda x: (x[0], x[1], x[2]))
    used_t: set[int] = set()
    used_d: set[int] = set()
    matches = []
    for d, ti, di in pairs:
        if ti in used_t or di in used_d:
            continue
        used_t.add(ti)
        used_d.add(di)
        matches.append(Match(truth_pos=int(truth_pos[ti]), det_pos=detected[di].position,
                             truth_amp=float(truth_amp[ti]), det_amp=detected[di].amplitude))
    missed = len(truth_pos) - len(matches)
    false_peaks = len(detected) - len(matches)
    if matches:
        avg_disp = float(np.mean([abs(m.truth_pos - m.det_pos) for m in matches]))
        rel_amp = float(np.mean([abs(m.det_amp - m.truth_amp) / abs(m.truth_amp)
                                 for m in matches]))
    else:
        avg_disp = 0.0
        rel_amp = 0.0
    return PeakReport(missed=missed, false_peaks=false_peaks, matches=tuple(matches),
                      avg_displacement=avg_disp, rel_amp_error=rel_amp)


@dataclass(frozen=True)
class WinTally:
    counts: dict
    n_instances: int

    def percentage(self, method: str) -> float:
        return 100.0 * self.counts[method] / self.n_instances


def tally_wins(per_instance: dict, mode: str = "peaks") -> WinTally:
    """Instance-wise wins.

    peaks mode: per_instance maps method -> list of missed counts; a
    method wins an instance when its missed count is <= every other
    method's (ties award all, so percentages need not sum to 100).
    mse mode: method -> list of MSEs; strictly lowest wins, ties award all
    tied methods.
    """
    methods = list(per_instance)
    lengths = {len(v) for v in per_instance.values()}
    if len(lengths) != 1:
        raise ValueError("all methods must cover the same instances")
    n = lengths.pop()
    counts = {m: 0 for m in methods}
    for i in range(n):
        vals = {m: per_instance[m][i] for m in methods}
        best = min(vals.values())
        for m in methods:
            if mode == "peaks":
                if vals[m] <= best:
                    counts[m] += 1
            else:
                if vals[m] == best:
                    counts[m] += 1
    return WinTally(counts=counts, n_instances=n)


# ---------------------------------------------------------------------------
# kernel diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelDiagnostics:
    out_of_window_energy_ratio: float
    dead_zone_front: np.ndarray     # per-row samples, within the window
    dead_zone_back: np.ndarray
    window: int
    dead_threshold: float


def kernel_diagnostics(kernel: np.ndarray, window_W: int,
                       dead_threshold: float = 1e-6) -> KernelDiagnostics:
    """Localization diagnostics of a coefficient-space kernel.

    out_of_window_energy_ratio: energy in columns older than the window
    over total energy.  dead_zone_front/back: per-row leading/trailing
    spans of the in-window part where |K| stays below ``dead_threshold``
    times the row's in-window maximum.
    """
    K = kernel.entries if isinstance(kernel, KernelMatrix) else np.asarray(kernel)
    K = np.abs(K.real) if np.iscomplexobj(K) else np.abs(K)
    L = K.shape[1]
    if not (0 < window_W <= L):
        raise ValueError("window_W must lie in 1..kernel length")
    energy = K ** 2
    total = float(energy.sum())
    oow = float(energy[:, : L - window_W].sum() / total) if total > 0 else 0.0
    win = K[:, L - window_W:]
    peaks = win.max(axis=1)
    fronts = np.empty(K.shape[0], dtype=np.int64)
    backs = np.empty(K.shape[0], dtype=np.int64)
    for i in range(K.shape[0]):
        if peaks[i] <= 0.0:
            fronts[i] = backs[i] = window_W
            continue
        alive = np.flatnonzero(win[i] > dead_threshold * peaks[i])
        fronts[i] = int(alive[0])
        backs[i] = int(window_W - 1 - alive[-1])
    return KernelDiagnostics(out_of_window_energy_ratio=oow,
                             dead_zone_front=fronts, dead_zone_back=backs,
                             window=window_W, dead_threshold=dead_threshold)


def dead_zone_excess(computed: KernelDiagnostics, ideal: KernelDiagnostics) -> float:
    """Mean per-row dead-zone growth of a computed kernel over its ideal
    (structural support is discounted, so only genuine coefficient loss
    counts)."""
    front = np.maximum(computed.dead_zone_front - ideal.dead_zone_front, 0)
    back = np.maximum(computed.dead_zone_back - ideal.dead_zone_back, 0)
    return float(np.mean(front + back))
