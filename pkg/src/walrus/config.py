"""Flat ``key = value`` experiment configuration.

Keys use dotted section prefixes (frame.order_p, run.alpha, ...).  Unknown
keys are hard errors; parsing then serializing then parsing again is a
fixed point because serialization always writes the full canonical key
set in a fixed order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .analysis import PeakDetector
from .frames import FrameFamily, FrameSpec
from .runtime import RunConfig, RunMode
from .safari import Measure, MeasureKind, scaled_measure, translated_measure
from .signals import GeneratorSpec, SignalClass


class ConfigError(Exception):
    pass


_DEFAULTS = {
    "frame.family": "daubechies",
    "frame.order_p": "11",
    "frame.scale_min": "0",
    "frame.scale_max": "3",
    "frame.shift_m": "0.01",
    "frame.grid_len_L": "8192",
    "frame.rcond": "0.01",
    "frame.basis_n": "64",
    "frame.cascade_levels": "12",
    "measure.kind": "scaled",
    "measure.theta": "512",
    "n_eff": "64",
    "run.alpha": "0.5",
    "run.emit_stride": "1",
    "run.mode": "kernel",
    "dataset.class": "spikes",
    "dataset.length": "4096",
    "dataset.n_events": "10",
    "dataset.amp_lo": "2.0",
    "dataset.amp_hi": "4.0",
    "dataset.width": "96",
    "dataset.min_gap": "384",
    "dataset.min_jump": "0.5",
    "dataset.noise_snr": "0.001",
    "dataset.path": "",
    "dataset.column": "0",
    "detector.scales": "16,32,64",
    "detector.threshold_k": "2.75",
    "detector.persistence": "2",
    "detector.width": "0",
    "match.tol_window": "0",
    "instances": "100",
    "seed": "42",
    "output_dir": "out",
}

_CANONICAL_ORDER = list(_DEFAULTS)


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines ('#' starts a comment); unknown keys are
    rejected with a list of offenders."""
    values = dict(_DEFAULTS)
    unknown = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _DEFAULTS:
            unknown.append(key)
            continue
        values[key] = val
    if unknown:
        raise ConfigError("unknown configuration keys: " + ", ".join(sorted(unknown)))
    return values


def serialize_config(values: dict) -> str:
    lines = [f"{k} = {values[k]}" for k in _CANONICAL_ORDER]
    return "\n".join(lines) + "\n"


def _to_int(values, key):
    try:
        return int(values[key])
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {values[key]!r}")


def _to_float(values, key):
    try:
        return float(values[key])
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {values[key]!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    frame: FrameSpec
    measure: MeasureKind
    n_eff: int
    run: RunConfig
    dataset: Optional[GeneratorSpec]
    dataset_path: str
    dataset_column: int
    noise_snr: float
    detector: PeakDetector
    tol_window: int
    instances: int
    seed: int
    output_dir: str
    raw: dict

    @property
    def canonical_text(self) -> str:
        return serialize_config(self.raw)


def build_experiment_config(values: dict) -> ExperimentConfig:
    family = values["frame.family"].lower()
    try:
        fam = FrameFamily(family)
    except ValueError:
        raise ConfigError(f"frame.family must be daubechies|legendre|fourier, got {family!r}")
    frame = FrameSpec(
        family=fam,
        grid_len_L=_to_int(values, "frame.grid_len_L"),
        rcond=_to_float(values, "frame.rcond"),
        order_p=_to_int(values, "frame.order_p"),
        scale_min=_to_int(values, "frame.scale_min"),
        scale_max=_to_int(values, "frame.scale_max"),
        shift_m=_to_float(values, "frame.shift_m"),
        basis_n=_to_int(values, "frame.basis_n"),
        cascade_levels=_to_int(values, "frame.cascade_levels"),
    )
    kind = values["measure.kind"].lower()
    if kind == "scaled":
        measure = scaled_measure()
    elif kind == "translated":
        measure = translated_measure(_to_int(values, "measure.theta"))
    else:
        raise ConfigError(f"measure.kind must be scaled|translated, got {kind!r}")
    mode_txt = values["run.mode"].lower()
    try:
        mode = RunMode(mode_txt)
    except ValueError:
        raise ConfigError(f"run.mode must be dense|diagonal|kernel, got {mode_txt!r}")
    run = RunConfig(alpha=_to_float(values, "run.alpha"), mode=mode,
                    emit_stride=_to_int(values, "run.emit_stride"))

    cls_txt = values["dataset.class"].lower()
    dataset = None
    if cls_txt in ("csv", "wav", "external"):
        if not values["dataset.path"]:
            raise ConfigError("dataset.path required for external datasets")
    else:
        try:
            cls = SignalClass(cls_txt)
        except ValueError:
            raise ConfigError(f"unknown dataset.class {cls_txt!r}")
        dataset = GeneratorSpec(
            class_tag=cls,
            length=_to_int(values, "dataset.length"),
            n_events=_to_int(values, "dataset.n_events"),
            amp_lo=_to_float(values, "dataset.amp_lo"),
            amp_hi=_to_float(values, "dataset.amp_hi"),
            width=_to_int(values, "dataset.width"),
            min_gap=_to_int(values, "dataset.min_gap"),
            min_jump=_to_float(values, "dataset.min_jump"),
            seed=_to_int(values, "seed"),
        )
    try:
        scales = tuple(int(s) for s in values["detector.scales"].split(",") if s.strip())
    except ValueError:
        raise ConfigError(f"detector.scales must be comma-separated integers")
    det_width = _to_int(values, "detector.width")
    detector = PeakDetector(scales=scales,
                            threshold_k=_to_float(values, "detector.threshold_k"),
                            persistence=_to_int(values, "detector.persistence"),
                            width=det_width if det_width > 0 else None)
    tol = _to_int(values, "match.tol_window")
    if tol <= 0:
        tol = _to_int(values, "dataset.width")
    instances = _to_int(values, "instances")
    if instances < 1:
        raise ConfigError("instances must be >= 1")
    return ExperimentConfig(frame=frame, measure=measure,
                            n_eff=_to_int(values, "n_eff"), run=run,
                            dataset=dataset, dataset_path=values["dataset.path"],
                            dataset_column=_to_int(values, "dataset.column"),
                            noise_snr=_to_float(values, "dataset.noise_snr"),
                            detector=detector, tol_window=tol,
                            instances=instances, seed=_to_int(values, "seed"),
                            output_dir=values["output_dir"], raw=values)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return build_experiment_config(parse_config_text(fh.read()))
