"""Binary container formats and CSV exports.

Containers start with one ASCII header line, then (for frames/duals) a
descriptor block of one line per row, then raw little-endian float64
payloads in row-major order:

    WALRUS-FRAME v1 n_full=<int> L=<int> grid=endpoint
    WALRUS-DUAL  v1 n_full=<int> L=<int> grid=endpoint rank_eff=<int>
    WALRUS-SSM   v1 n=<int> measure=<scaled|translated> construction=<saf|hippo> [theta=<int>]
    WALRUS-DIAG  v1 n_eff=<int> n_full=<int> measure=<...> cond_v=<float> [theta=<int>]

Dual files append the singular-value vector after the matrix; diagonal
files store Lambda, B-tilde and v_out as interleaved re/im pairs.
"""

from __future__ import annotations

import csv as _csv
from typing import Optional

import numpy as np

from .frames import DualFrame, Frame, FrameFamily, FrameSpec, RowDescriptor
from .safari import Measure, MeasureKind, SSMOperator, scaled_measure, translated_measure
from .spectral import DiagonalSSM


class FormatError(Exception):
    pass


def _header_fields(line: str, tag: str) -> dict:
    parts = line.strip().split()
    if len(parts) < 2 or parts[0] != tag or parts[1] != "v1":
        raise FormatError(f"expected '{tag} v1' header, got {line.strip()!r}")
    fields = {}
    for tok in parts[2:]:
        if "=" not in tok:
            raise FormatError(f"malformed header token {tok!r}")
        k, v = tok.split("=", 1)
        fields[k] = v
    return fields


def _write_matrix(fh, mat: np.ndarray):
    fh.write(np.ascontiguousarray(mat, dtype="<f8").tobytes())


def _read_floats(fh, count: int) -> np.ndarray:
    raw = fh.read(8 * count)
    if len(raw) != 8 * count:
        raise FormatError("truncated float payload")
    return np.frombuffer(raw, dtype="<f8").copy()


def _write_descriptors(fh, descriptors):
    for d in descriptors:
        fh.write(f"{d.kind} {d.scale} {d.shift_index}\n".encode())


def _read_descriptors(fh, n: int):
    out = []
    for _ in range(n):
        line = fh.readline().decode()
        kind, scale, shift = line.split()
        out.append(RowDescriptor(kind=kind, scale=int(scale), shift_index=int(shift)))
    return tuple(out)


def save_frame(path, frame: Frame):
    with open(path, "wb") as fh:
        fh.write(f"WALRUS-FRAME v1 n_full={frame.n_full} L={frame.grid_len} "
                 f"grid=endpoint\n".encode())
        _write_descriptors(fh, frame.descriptors)
        _write_matrix(fh, frame.rows)


def load_frame(path, spec: Optional[FrameSpec] = None) -> Frame:
    """Read a frame container; ``spec`` restores the generating parameters
    (a placeholder spec is synthesized when omitted)."""
    with open(path, "rb") as fh:
        fields = _header_fields(fh.readline().decode(), "WALRUS-FRAME")
        n, L = int(fields["n_full"]), int(fields["L"])
        if fields.get("grid") != "endpoint":
            raise FormatError("unsupported grid convention")
        descriptors = _read_descriptors(fh, n)
        rows = _read_floats(fh, n * L).reshape(n, L)
    if spec is None:
        spec = FrameSpec(family=FrameFamily.DAUBECHIES, grid_len_L=L)
    return Frame(rows=rows, descriptors=descriptors, spec=spec)


def save_dual(path, frame: Frame, dual: DualFrame):
    with open(path, "wb") as fh:
        fh.write(f"WALRUS-DUAL v1 n_full={dual.n_full} L={frame.grid_len} "
                 f"grid=endpoint rank_eff={dual.rank_eff}\n".encode())
        _write_descriptors(fh, frame.descriptors)
        _write_matrix(fh, dual.rows)
        _write_matrix(fh, dual.sigma)


def load_dual(path, rcond: float = 0.01) -> DualFrame:
    with open(path, "rb") as fh:
        fields = _header_fields(fh.readline().decode(), "WALRUS-DUAL")
        n, L = int(fields["n_full"]), int(fields["L"])
        rank = int(fields["rank_eff"])
        _read_descriptors(fh, n)
        rows = _read_floats(fh, n * L).reshape(n, L)
        sigma = _read_floats(fh, min(n, L))
    return DualFrame(rows=rows, sigma=sigma, rank_eff=rank, rcond=rcond)


def save_ssm(path, ssm: SSMOperator):
    header = (f"WALRUS-SSM v1 n={ssm.n} measure={ssm.measure.kind.value} "
              f"construction={ssm.construction}")
    if ssm.measure.kind is Measure.TRANSLATED:
        header += f" theta={ssm.measure.theta}"
    with open(path, "wb") as fh:
        fh.write((header + "\n").encode())
        _write_matrix(fh, ssm.a_matrix)
        _write_matrix(fh, ssm.b_vector)


def load_ssm(path) -> SSMOperator:
    with open(path, "rb") as fh:
        fields = _header_fields(fh.readline().decode(), "WALRUS-SSM")
        n = int(fields["n"])
        A = _read_floats(fh, n * n).reshape(n, n)
        B = _read_floats(fh, n)
    if fields["measure"] == "scaled":
        measure = scaled_measure()
    else:
        measure = translated_measure(int(fields["theta"]))
    return SSMOperator(a_matrix=A, b_vector=B, measure=measure,
                       construction=fields["construction"])


def _write_complex(fh, arr: np.ndarray):
    inter = np.empty(arr.size * 2)
    inter[0::2] = arr.real.ravel()
    inter[1::2] = arr.imag.ravel()
    _write_matrix(fh, inter)


def _read_complex(fh, count: int) -> np.ndarray:
    inter = _read_floats(fh, 2 * count)
    return inter[0::2] + 1j * inter[1::2]


def save_diag(path, diag: DiagonalSSM):
    header = (f"WALRUS-DIAG v1 n_eff={diag.n_eff} n_full={diag.n_full} "
              f"measure={diag.measure.kind.value} cond_v={diag.cond_v!r}")
    if diag.measure.kind is Measure.TRANSLATED:
        header += f" theta={diag.measure.theta}"
    with open(path, "wb") as fh:
        fh.write((header + "\n").encode())
        _write_complex(fh, diag.lambdas)
        _write_complex(fh, diag.b_tilde)
        _write_complex(fh, diag.v_out)


def load_diag(path) -> DiagonalSSM:
    with open(path, "rb") as fh:
        fields = _header_fields(fh.readline().decode(), "WALRUS-DIAG")
        n_eff, n_full = int(fields["n_eff"]), int(fields["n_full"])
        lam = _read_complex(fh, n_eff)
        btil = _read_complex(fh, n_eff)
        v_out = _read_complex(fh, n_full * n_eff).reshape(n_full, n_eff)
    if fields["measure"] == "scaled":
        measure = scaled_measure()
    else:
        measure = translated_measure(int(fields["theta"]))
    return DiagonalSSM(lambdas=lam, b_tilde=btil, v_out=v_out, measure=measure,
                       cond_v=float(fields["cond_v"]))


# ---------------------------------------------------------------------------
# CSV exports
# ---------------------------------------------------------------------------

def export_trajectory_csv(path, trajectory):
    n = trajectory.states.shape[1]
    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["step"] + [f"c_{i}" for i in range(n)])
        for t, row in zip(trajectory.times, trajectory.states):
            writer.writerow([int(t)] + [repr(float(v)) for v in row])


def export_reconstruction_csv(path, u: np.ndarray, u_hat: np.ndarray):
    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["t", "u", "u_hat"])
        for t, (a, b) in enumerate(zip(u, u_hat)):
            writer.writerow([t, repr(float(a)), repr(float(b))])


def export_peak_metrics_csv(path, rows: list[dict]):
    """Per-method peak metrics rows with the benchmark-table columns."""
    cols = ["method", "measure", "peaks_missed_pct", "false_peaks_pct",
            "wins_pct", "rel_amp_err_pct", "avg_displacement"]
    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(cols)
        for row in rows:
            writer.writerow([row[c] for c in cols])


def export_mse_table_csv(path, rows: list[dict]):
    cols = ["method", "measure", "mean_mse", "wins_pct"]
    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(cols)
        for row in rows:
            writer.writerow([row[c] for c in cols])


def export_running_mse_csv(path, times: np.ndarray, bands: dict):
    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["step", "q40", "median", "q60"])
        for i, t in enumerate(times):
            writer.writerow([int(t), repr(float(bands["q40"][i])),
                             repr(float(bands["median"][i])),
                             repr(float(bands["q60"][i]))])


def export_kernel_grid_csv(path, kernel: np.ndarray, max_rows: int = 128,
                           max_cols: int = 512):
    """Down-sampled |K| magnitude grid for plotting."""
    K = np.abs(np.asarray(kernel))
    r_step = max(1, K.shape[0] // max_rows)
    c_step = max(1, K.shape[1] // max_cols)
    sub = K[::r_step, ::c_step]
    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["row", "col", "magnitude"])
        for i in range(sub.shape[0]):
            for j in range(sub.shape[1]):
                writer.writerow([i * r_step, j * c_step, repr(float(sub[i, j]))])


def export_kernel_diagnostics_csv(path, diags: dict):
    """method -> KernelDiagnostics rows."""
    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["method", "out_of_window_energy_ratio",
                         "mean_dead_zone_front", "mean_dead_zone_back"])
        for name, d in diags.items():
            writer.writerow([name, repr(float(d.out_of_window_energy_ratio)),
                             repr(float(np.mean(d.dead_zone_front))),
                             repr(float(np.mean(d.dead_zone_back)))])
