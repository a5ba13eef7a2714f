"""Command-line driver.

Subcommands: build, bench-mse, bench-peaks, kernel, reconstruct, gen.
Exit codes: 0 success, 1 usage/configuration error, 2 numerical failure.
Every CSV output gets a ``.meta`` sidecar holding the canonical config
plus run metadata, enough to re-run the experiment bit-identically.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .analysis import kernel_diagnostics
from .config import ConfigError, ExperimentConfig, load_config
from .experiments import (SCALED_METHODS, TRANSLATED_METHODS, bench_mse,
                          bench_peaks, build_method_pack, center_readout,
                          running_mse_bench, instance_seed, _make_instance,
                          _final_reconstruction)
from .frames import FrameError, FrameFamily, build_frame, dual_frame, frame_derivative
from .io import (export_kernel_diagnostics_csv, export_kernel_grid_csv,
                 export_mse_table_csv, export_peak_metrics_csv,
                 export_reconstruction_csv, export_running_mse_csv,
                 save_diag, save_dual, save_frame, save_ssm)
from .runtime import StepError, coefficient_kernel, unroll_kernel_dense
from .safari import Measure, build_ssm
from .signals import GeneratorSpec, SignalIOError, generate, load_csv, load_wav, save_csv
from .spectral import SpectralError, diagonalize, reduce_to_effective

USAGE_ERROR = 1
NUMERICAL_ERROR = 2


def _write_sidecar(csv_path, cfg: ExperimentConfig, extra: dict):
    lines = [cfg.canonical_text.rstrip("\n")]
    lines.append(f"# walrus {__version__}")
    for k, v in extra.items():
        lines.append(f"# {k}: {v}")
    with open(str(csv_path) + ".meta", "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _out_dir(args, cfg: ExperimentConfig) -> str:
    out = args.out or cfg.output_dir
    os.makedirs(out, exist_ok=True)
    return out


def cmd_build(args, cfg: ExperimentConfig) -> int:
    out = _out_dir(args, cfg)
    frame = build_frame(cfg.frame)
    dual = dual_frame(frame)
    dframe = frame_derivative(frame)
    ssm = build_ssm(frame, dual, dframe, cfg.measure)
    decomp = diagonalize(ssm)
    save_frame(os.path.join(out, "frame.walrus-frame"), frame)
    save_dual(os.path.join(out, "dual.walrus-dual"), frame, dual)
    save_ssm(os.path.join(out, "operator.walrus-ssm"), ssm)
    print(f"frame: n_full={frame.n_full} L={frame.grid_len} rank_eff={dual.rank_eff}")
    print(f"operator: measure={cfg.measure.kind.value} cond_v={decomp.cond_v:.3e} "
          f"stably_diagonalizable={decomp.stably_diagonalizable}")
    if decomp.stably_diagonalizable:
        n_eff = min(cfg.n_eff, dual.rank_eff)
        diag = reduce_to_effective(decomp, frame, dual, n_eff)
        save_diag(os.path.join(out, "diagonal.walrus-diag"), diag)
        print(f"diagonal: n_eff={diag.n_eff}")
    else:
        print("diagonal: skipped (not stably diagonalizable)")
    return 0


def _methods(args, cfg: ExperimentConfig):
    if args.methods:
        return [m.strip().lower() for m in args.methods.split(",") if m.strip()]
    return list(SCALED_METHODS if cfg.measure.kind is Measure.SCALED
                else TRANSLATED_METHODS)


def cmd_bench_mse(args, cfg: ExperimentConfig) -> int:
    out = _out_dir(args, cfg)
    methods = _methods(args, cfg)
    result = bench_mse(cfg, methods)
    path = os.path.join(out, "mse_table.csv")
    export_mse_table_csv(path, result.rows)
    _write_sidecar(path, cfg, {"command": "bench-mse", "methods": ",".join(methods),
                               "notes": "; ".join(result.notes) or "none"})
    for row in result.rows:
        print(f"{row['method']}: mean_mse={row['mean_mse']:.6g} wins={row['wins_pct']:.1f}%")
    for note in result.notes:
        print(f"note: {note}")
    print(f"wrote {path}")
    return 0


def cmd_bench_peaks(args, cfg: ExperimentConfig) -> int:
    out = _out_dir(args, cfg)
    methods = _methods(args, cfg)
    result = bench_peaks(cfg, methods)
    path = os.path.join(out, "peaks_table.csv")
    export_peak_metrics_csv(path, result.rows)
    _write_sidecar(path, cfg, {"command": "bench-peaks", "methods": ",".join(methods),
                               "notes": "; ".join(result.notes) or "none"})
    for row in result.rows:
        print(f"{row['method']}: missed={row['peaks_missed_pct']:.2f}% "
              f"false={row['false_peaks_pct']:.2f}% wins={row['wins_pct']:.1f}% "
              f"disp={row['avg_displacement']:.2f}")
    for note in result.notes:
        print(f"note: {note}")
    print(f"wrote {path}")
    return 0


def cmd_running_mse(args, cfg: ExperimentConfig) -> int:
    out = _out_dir(args, cfg)
    methods = _methods(args, cfg)
    results = running_mse_bench(cfg, methods)
    for name, data in results.items():
        path = os.path.join(out, f"running_mse_{name}.csv")
        export_running_mse_csv(path, data["times"], data["bands"])
        _write_sidecar(path, cfg, {"command": "bench-mse --running", "method": name})
        print(f"wrote {path}")
    return 0


def cmd_kernel(args, cfg: ExperimentConfig) -> int:
    out = _out_dir(args, cfg)
    methods = _methods(args, cfg)
    if cfg.measure.kind is not Measure.TRANSLATED:
        print("kernel diagnostics expect a translated-measure config", file=sys.stderr)
        return USAGE_ERROR
    W = args.window or cfg.measure.theta
    length = max(2 * W, cfg.dataset.length if cfg.dataset else 2 * W)
    diags = {}
    for name in methods:
        pack = build_method_pack(name, cfg)
        if pack.uses_dense:
            K = unroll_kernel_dense(pack.ssm, length, cfg.run.alpha)
            note = "dense unroll (not stably diagonalizable)"
        else:
            K = coefficient_kernel(pack.diag, length, cfg.run.alpha)
            note = "diagonal closed form"
        diags[name] = kernel_diagnostics(K, W, dead_threshold=args.dead_threshold)
        grid_path = os.path.join(out, f"kernel_{name}.csv")
        export_kernel_grid_csv(grid_path, K)
        _write_sidecar(grid_path, cfg, {"command": "kernel", "method": name,
                                        "window": W, "path": note})
        print(f"{name}: out_of_window={diags[name].out_of_window_energy_ratio:.5f} "
              f"({note})")
    path = os.path.join(out, "kernel_diagnostics.csv")
    export_kernel_diagnostics_csv(path, diags)
    _write_sidecar(path, cfg, {"command": "kernel", "methods": ",".join(methods),
                               "window": W})
    print(f"wrote {path}")
    return 0


def cmd_reconstruct(args, cfg: ExperimentConfig) -> int:
    out = _out_dir(args, cfg)
    if args.input:
        if args.input.endswith(".wav"):
            sig = load_wav(args.input)
        else:
            sig = load_csv(args.input, column=cfg.dataset_column)
        u = sig.samples
    else:
        if cfg.dataset is None:
            print("reconstruct needs --input or a synthetic dataset config",
                  file=sys.stderr)
            return USAGE_ERROR
        u = generate(GeneratorSpec(**{**cfg.dataset.__dict__,
                                      "seed": instance_seed(cfg.seed, 0, 0)})).samples
    method = (args.methods or "walrus").split(",")[0].strip().lower()
    pack = build_method_pack(method, cfg)
    if cfg.measure.kind is Measure.SCALED:
        c = pack.final_state(u, cfg.run.alpha)
        u_hat = _final_reconstruction(pack, c, u.size)
    else:
        if u.size < cfg.measure.theta:
            print("input shorter than the translated window", file=sys.stderr)
            return USAGE_ERROR
        u_hat = center_readout(pack, u, cfg.run.alpha)
    path = os.path.join(out, "reconstruction.csv")
    export_reconstruction_csv(path, u, u_hat)
    _write_sidecar(path, cfg, {"command": "reconstruct", "method": method,
                               "input": args.input or "synthetic[0]"})
    mse = float(np.mean((u - u_hat) ** 2))
    print(f"{method}: reconstruction mse={mse:.6g} over {u.size} samples")
    print(f"wrote {path}")
    return 0


def cmd_gen(args, cfg: ExperimentConfig) -> int:
    out = _out_dir(args, cfg)
    if cfg.dataset is None:
        print("gen requires a synthetic dataset class", file=sys.stderr)
        return USAGE_ERROR
    for i in range(cfg.instances):
        sig = generate(GeneratorSpec(**{**cfg.dataset.__dict__,
                                        "seed": instance_seed(cfg.seed, i, 0)}))
        path = os.path.join(out, f"{cfg.dataset.class_tag.value}_{i:04d}.csv")
        save_csv(path, sig)
    print(f"wrote {cfg.instances} instances to {out}")
    return 0


_COMMANDS = {
    "build": cmd_build,
    "bench-mse": cmd_bench_mse,
    "bench-peaks": cmd_bench_peaks,
    "bench-running-mse": cmd_running_mse,
    "kernel": cmd_kernel,
    "reconstruct": cmd_reconstruct,
    "gen": cmd_gen,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="walrus",
                                     description="frame-built state-space models")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="key = value config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--methods", default=None, help="comma-separated method list")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        if name == "kernel":
            p.add_argument("--window", type=int, default=None)
            p.add_argument("--dead-threshold", type=float, default=1e-6)
        if name == "reconstruct":
            p.add_argument("--input", default=None, help="CSV or WAV input file")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            raw = dict(cfg.raw)
            raw["seed"] = str(args.seed)
            from .config import build_experiment_config
            cfg = build_experiment_config(raw)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        return _COMMANDS[args.command](args, cfg)
    except (FrameError, SpectralError, StepError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except (SignalIOError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
