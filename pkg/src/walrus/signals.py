"""Deterministic synthetic benchmark signals and univariate-series ingestion.

All randomness flows through SplitMix64 so fixtures are reproducible
bit-for-bit across platforms and implementations: output i is
mix64(seed + (i+1) * 0x9E3779B97F4A7C15), uniforms take the top 53 bits,
and Gaussians apply Box-Muller to consecutive uniform pairs.
"""

from __future__ import annotations

import csv as _csv
import wave as _wave
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """``count`` raw 64-bit outputs of the SplitMix64 stream for ``seed``,
    starting ``offset`` draws in."""
    i = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + i * _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


class Stream:
    """Sequential view over a SplitMix64 stream with uniform/Gaussian/integer
    draws.  Box-Muller consumes two uniforms per pair of Gaussians."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._drawn = 0

    def raw(self, count: int) -> np.ndarray:
        out = splitmix64(self.seed, count, offset=self._drawn)
        self._drawn += count
        return out

    def uniform(self, count: int) -> np.ndarray:
        """Uniforms in (0, 1]: (raw >> 11 + 1) * 2^-53."""
        bits = self.raw(count) >> np.uint64(11)
        return (bits.astype(np.float64) + 1.0) * (2.0 ** -53)

    def uniform_range(self, lo: float, hi: float, count: int) -> np.ndarray:
        return lo + (hi - lo) * self.uniform(count)

    def integers(self, lo: int, hi: int, count: int) -> np.ndarray:
        """Integers in [lo, hi) by scaling uniforms; hi must exceed lo."""
        if hi <= lo:
            raise ValueError("empty integer range")
        u = self.uniform(count)
        return lo + np.minimum((u * (hi - lo)).astype(np.int64), hi - lo - 1)

    def normals(self, count: int) -> np.ndarray:
        pairs = (count + 1) // 2
        u1 = self.uniform(pairs)
        u2 = self.uniform(pairs)
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.empty(2 * pairs)
        z[0::2] = r * np.cos(2.0 * np.pi * u2)
        z[1::2] = r * np.sin(2.0 * np.pi * u2)
        return z[:count]

    def signs(self, count: int) -> np.ndarray:
        return np.where(self.uniform(count) < 0.5, -1.0, 1.0)


class SignalClass(Enum):
    BLOCKS = "blocks"
    BUMPS = "bumps"
    SPIKES = "spikes"
    PIECEPOLY = "piecepoly"
    EXTERNAL = "external"


@dataclass(frozen=True)
class Event:
    position: int
    amplitude: float


@dataclass(frozen=True)
class SignalInstance:
    samples: np.ndarray
    events: tuple[Event, ...]
    seed: int
    class_tag: SignalClass

    def __post_init__(self):
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("signal contains non-finite samples")
        positions = [e.position for e in self.events]
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise ValueError("event positions must be strictly increasing")
        if positions and (positions[0] < 0 or positions[-1] >= self.samples.size):
            raise ValueError("event positions must lie inside the signal")

    @property
    def event_positions(self) -> np.ndarray:
        return np.array([e.position for e in self.events], dtype=np.int64)

    @property
    def event_amplitudes(self) -> np.ndarray:
        return np.array([e.amplitude for e in self.events])


@dataclass(frozen=True)
class GeneratorSpec:
    class_tag: SignalClass
    length: int
    n_events: int = 10
    amp_lo: float = 1.0
    amp_hi: float = 4.0
    width: int = 16
    min_gap: int = 64
    seed: int = 0
    min_jump: float = 0.5      # piecepoly: smallest allowed discontinuity
    positions: Optional[tuple[int, ...]] = None   # explicit override

    def __post_init__(self):
        if self.positions is None and self.n_events * (self.width + self.min_gap) > self.length:
            raise ValueError("infeasible spacing: n_events*(width+min_gap) exceeds length")


def _draw_positions(spec: GeneratorSpec, stream: Stream) -> np.ndarray:
    """Distinct positions, pairwise at least min_gap apart, margin min_gap
    from both ends; rejection sampling on the deterministic stream."""
    if spec.positions is not None:
        pos = np.asarray(spec.positions, dtype=np.int64)
        if np.any(pos < 0) or np.any(pos >= spec.length):
            raise ValueError("explicit positions outside the signal")
        return np.sort(pos)
    lo = spec.min_gap
    hi = spec.length - spec.min_gap
    chosen: list[int] = []
    tries = 0
    limit = 10000 * spec.n_events
    while len(chosen) < spec.n_events:
        if tries >= limit:
            raise ValueError("infeasible spacing: rejection sampling exhausted")
        cand = int(stream.integers(lo, hi, 1)[0])
        tries += 1
        if all(abs(cand - p) >= spec.min_gap for p in chosen):
            chosen.append(cand)
    return np.sort(np.asarray(chosen, dtype=np.int64))


def gen_blocks(spec: GeneratorSpec) -> SignalInstance:
    """Piecewise-constant signal; events record the signed jump heights."""
    if spec.n_events < 1:
        raise ValueError("blocks needs at least one jump")
    stream = Stream(spec.seed)
    pos = _draw_positions(spec, stream)
    heights = stream.uniform_range(spec.amp_lo, spec.amp_hi, pos.size) * stream.signs(pos.size)
    samples = np.zeros(spec.length)
    for p, h in zip(pos, heights):
        samples[p:] += h
    events = tuple(Event(int(p), float(h)) for p, h in zip(pos, heights))
    return SignalInstance(samples=samples, events=events, seed=spec.seed,
                          class_tag=SignalClass.BLOCKS)


def gen_bumps(spec: GeneratorSpec) -> SignalInstance:
    """Sum of cusped pulses a * (1 + |t - t_i| / w)^-4 with positive heights."""
    stream = Stream(spec.seed)
    pos = _draw_positions(spec, stream)
    amps = stream.uniform_range(spec.amp_lo, spec.amp_hi, pos.size)
    t = np.arange(spec.length, dtype=np.float64)
    samples = np.zeros(spec.length)
    for p, a in zip(pos, amps):
        samples += a * (1.0 + np.abs(t - p) / spec.width) ** -4
    events = tuple(Event(int(p), float(a)) for p, a in zip(pos, amps))
    return SignalInstance(samples=samples, events=events, seed=spec.seed,
                          class_tag=SignalClass.BUMPS)


def gen_spikes(spec: GeneratorSpec) -> SignalInstance:
    """Rectangular pulses of fixed width and positive height, centered on
    the event positions."""
    stream = Stream(spec.seed)
    pos = _draw_positions(spec, stream)
    amps = stream.uniform_range(spec.amp_lo, spec.amp_hi, pos.size)
    samples = np.zeros(spec.length)
    for p, a in zip(pos, amps):
        start = max(0, int(p) - spec.width // 2)
        samples[start:start + spec.width] += a
    events = tuple(Event(int(p), float(a)) for p, a in zip(pos, amps))
    return SignalInstance(samples=samples, events=events, seed=spec.seed,
                          class_tag=SignalClass.SPIKES)


def gen_piecepoly(spec: GeneratorSpec) -> SignalInstance:
    """Random cubic-or-lower segments with guaranteed jump discontinuities
    at the breakpoints; events record the jump magnitudes."""
    stream = Stream(spec.seed)
    if spec.n_events == 0:
        breakpoints = np.empty(0, dtype=np.int64)
    else:
        breakpoints = _draw_positions(spec, stream)
    bounds = np.concatenate(([0], breakpoints, [spec.length]))
    samples = np.empty(spec.length)
    t = np.arange(spec.length, dtype=np.float64) / spec.length
    events = []
    prev_end = 0.0
    scale = max(abs(spec.amp_lo), abs(spec.amp_hi))
    for seg in range(bounds.size - 1):
        a, b = bounds[seg], bounds[seg + 1]
        coeffs = stream.uniform_range(-scale, scale, 4)
        x = t[a:b] - t[a]
        vals = coeffs[0] + coeffs[1] * x + coeffs[2] * x ** 2 + coeffs[3] * x ** 3
        if seg > 0:
            # shift the segment so the join jumps by at least min_jump
            jump = stream.uniform_range(spec.min_jump, spec.min_jump + scale, 1)[0]
            sign = stream.signs(1)[0]
            offset = prev_end + sign * jump - vals[0]
            vals = vals + offset
            events.append(Event(int(a), float(sign * jump)))
        samples[a:b] = vals
        prev_end = vals[-1]
    return SignalInstance(samples=samples, events=tuple(events), seed=spec.seed,
                          class_tag=SignalClass.PIECEPOLY)


_GENERATORS = {
    SignalClass.BLOCKS: gen_blocks,
    SignalClass.BUMPS: gen_bumps,
    SignalClass.SPIKES: gen_spikes,
    SignalClass.PIECEPOLY: gen_piecepoly,
}


def generate(spec: GeneratorSpec) -> SignalInstance:
    try:
        fn = _GENERATORS[spec.class_tag]
    except KeyError:
        raise ValueError(f"no generator for class {spec.class_tag}")
    return fn(spec)


def add_noise(signal: SignalInstance, snr_param: float, seed: int) -> SignalInstance:
    """Add white Gaussian noise with variance snr_param * mean(signal^2);
    snr_param is a noise-to-signal power ratio.  Events are preserved."""
    if snr_param < 0:
        raise ValueError("snr_param must be non-negative")
    if snr_param == 0.0:
        return signal
    power = float(np.mean(signal.samples ** 2))
    stream = Stream(seed)
    noise = stream.normals(signal.samples.size) * np.sqrt(snr_param * power)
    return replace(signal, samples=signal.samples + noise)


# ---------------------------------------------------------------------------
# ingestion / export
# ---------------------------------------------------------------------------

class SignalIOError(Exception):
    pass


def load_csv(path, column: int = 0) -> SignalInstance:
    """One numeric column of a CSV file; a non-numeric first row is
    treated as a header and skipped."""
    values = []
    with open(path, newline="") as fh:
        reader = _csv.reader(fh)
        for row_idx, row in enumerate(reader):
            if not row:
                continue
            if column >= len(row):
                raise SignalIOError(f"row {row_idx} has no column {column}")
            cell = row[column].strip()
            try:
                values.append(float(cell))
            except ValueError:
                if row_idx == 0:
                    continue
                raise SignalIOError(f"non-numeric value {cell!r} at row {row_idx}")
    if not values:
        raise SignalIOError(f"no numeric data found in {path}")
    return SignalInstance(samples=np.asarray(values), events=(), seed=0,
                          class_tag=SignalClass.EXTERNAL)


def load_wav(path) -> SignalInstance:
    """First channel of a 16-bit PCM RIFF file, scaled to [-1, 1)."""
    try:
        with _wave.open(str(path), "rb") as wf:
            if wf.getsampwidth() != 2:
                raise SignalIOError("only 16-bit PCM WAV is supported")
            n_ch = wf.getnchannels()
            raw = wf.readframes(wf.getnframes())
    except _wave.Error as exc:
        raise SignalIOError(f"malformed WAV file: {exc}") from exc
    data = np.frombuffer(raw, dtype="<i2")
    samples = data[::n_ch].astype(np.float64) / 32768.0
    return SignalInstance(samples=samples, events=(), seed=0,
                          class_tag=SignalClass.EXTERNAL)


def save_csv(path, signal: SignalInstance):
    """index,value[,is_event,event_amplitude] rows; floats at full precision."""
    marks = {e.position: e.amplitude for e in signal.events}
    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        if signal.events:
            writer.writerow(["index", "value", "is_event", "event_amplitude"])
            for i, v in enumerate(signal.samples):
                if i in marks:
                    writer.writerow([i, repr(float(v)), 1, repr(float(marks[i]))])
                else:
                    writer.writerow([i, repr(float(v)), 0, ""])
        else:
            writer.writerow(["index", "value"])
            for i, v in enumerate(signal.samples):
                writer.writerow([i, repr(float(v))])


def load_signal_csv(path) -> SignalInstance:
    """Inverse of save_csv (events restored when the columns are present)."""
    values, events = [], []
    with open(path, newline="") as fh:
        reader = _csv.reader(fh)
        header = next(reader)
        has_events = len(header) >= 4
        for row in reader:
            values.append(float(row[1]))
            if has_events and row[2] == "1":
                events.append(Event(int(row[0]), float(row[3])))
    return SignalInstance(samples=np.asarray(values), events=tuple(events),
                          seed=0, class_tag=SignalClass.EXTERNAL)


def save_wav(path, samples: np.ndarray, rate: int = 16000):
    """16-bit PCM export (values clipped to [-1, 1))."""
    data = np.clip(np.asarray(samples), -1.0, 32767.0 / 32768.0)
    ints = np.round(data * 32768.0).astype("<i2")
    with _wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(rate)
        wf.writeframes(ints.tobytes())
