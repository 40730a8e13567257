"""Block-based vibrotactile DSP: bandpass filtering, gain ramps, mixing.

The bandpass is a Chamberlin state-variable filter with f1 = 2 sin(pi fc/fs),
run sample by sample with state carried across blocks. The band output is
scaled by 1/Q so the steady-state magnitude follows
|H(f)| = 1 / sqrt(1 + Q^2 (f/f0 - f0/f)^2) with unity gain at resonance for
any Q (at the default Q = 1 the raw band output is already unity there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatch, UnstableState, ValidationError


@dataclass(frozen=True)
class RenderConfig:
    sample_rate: int = 48_000
    block_size: int = 960          # 20 ms at 48 kHz: one gain update per block
    resonance_fc: float = 250.0
    filter_q: float = 1.0
    gain_ramp: float = 0.010       # seconds
    loop_audio: bool = True

    def __post_init__(self):
        if self.sample_rate < 8000:
            raise ValidationError(f"sample_rate must be >= 8000, got {self.sample_rate}")
        if not (0 < self.resonance_fc < self.sample_rate / 2):
            raise ValidationError(
                f"resonance_fc must be in (0, sample_rate/2), got {self.resonance_fc}"
            )
        if self.block_size <= 0:
            raise ValidationError(f"block_size must be > 0, got {self.block_size}")
        if self.filter_q <= 0:
            raise ValidationError(f"filter_q must be > 0, got {self.filter_q}")
        if self.gain_ramp < 0:
            raise ValidationError(f"gain_ramp must be >= 0, got {self.gain_ramp}")

    @property
    def block_duration(self) -> float:
        return self.block_size / self.sample_rate

    @property
    def blocks_per_second(self) -> float:
        return self.sample_rate / self.block_size


@dataclass
class FilterState:
    """Running state of one state-variable filter channel."""

    low: float = 0.0
    band: float = 0.0

    def reset(self) -> None:
        self.low = 0.0
        self.band = 0.0


def svf_coefficient(fc: float, sample_rate: float) -> float:
    """Frequency coefficient f1 = 2 sin(pi fc / fs)."""
    return 2.0 * math.sin(math.pi * fc / sample_rate)


def svf_bandpass(block: np.ndarray, state: FilterState,
                 config: RenderConfig) -> np.ndarray:
    """Filter one block through the bandpass, mutating the carried state.

    Raises UnstableState (and resets the state) if the recursion goes
    non-finite; valid configs at audio rates never trigger this.
    """
    f1 = svf_coefficient(config.resonance_fc, config.sample_rate)
    q = 1.0 / config.filter_q
    low = state.low
    band = state.band
    x = np.asarray(block, dtype=np.float64)
    out = np.empty(len(x), dtype=np.float64)
    for n in range(len(x)):
        high = x[n] - low - q * band
        band = band + f1 * high
        low = low + f1 * band
        out[n] = band
    if not (math.isfinite(low) and math.isfinite(band)):
        state.reset()
        raise UnstableState("filter state went non-finite; state reset")
    state.low = low
    state.band = band
    return out * q  # 1/Q normalization: unity magnitude at resonance


def bandpass_magnitude(f: float, fc: float, q_factor: float) -> float:
    """Analytic steady-state magnitude of the normalized bandpass."""
    if f <= 0:
        return 0.0
    ratio = f / fc - fc / f
    return 1.0 / math.sqrt(1.0 + (q_factor * ratio) ** 2)


def apply_gain_ramp(block: np.ndarray, gain_prev: float, gain_next: float,
                    config: RenderConfig) -> np.ndarray:
    """Scale a block with a linear gain ramp over min(gain_ramp, block length).

    The ramp starts at gain_prev and reaches gain_next after ramp_samples;
    the remainder of the block (and always the final sample) sits at
    gain_next, so consecutive blocks chain without steps.
    """
    x = np.asarray(block, dtype=np.float64)
    n = len(x)
    if gain_prev == gain_next or n == 0:
        return x * gain_next
    ramp_samples = min(n, max(1, round(config.gain_ramp * config.sample_rate)))
    gains = np.full(n, gain_next, dtype=np.float64)
    steps = (np.arange(1, ramp_samples + 1, dtype=np.float64)) / ramp_samples
    gains[:ramp_samples] = gain_prev + (gain_next - gain_prev) * steps
    return x * gains


def mix_sources(blocks: list[np.ndarray], gains: list[float]) -> np.ndarray:
    """Samplewise sum of gain-weighted blocks, hard-clamped to [-1, 1]."""
    if len(blocks) != len(gains):
        raise LengthMismatch(
            f"{len(blocks)} blocks vs {len(gains)} gains"
        )
    if not blocks:
        return np.zeros(0, dtype=np.float64)
    n = len(blocks[0])
    for b in blocks[1:]:
        if len(b) != n:
            raise LengthMismatch("mixed blocks must share one length")
    mixed = np.zeros(n, dtype=np.float64)
    for block, gain in zip(blocks, gains):
        mixed += gain * np.asarray(block, dtype=np.float64)
    return np.clip(mixed, -1.0, 1.0)


@dataclass
class SourceChannel:
    """Per-source render state: filter, play cursor, last applied gain."""

    samples: np.ndarray
    state: FilterState = field(default_factory=FilterState)
    cursor: int = 0
    gain: float = 0.0

    def next_block(self, config: RenderConfig) -> np.ndarray:
        """Next block of source audio, looping or zero-padding at the end."""
        n = config.block_size
        total = len(self.samples)
        if total == 0:
            return np.zeros(n, dtype=np.float64)
        if config.loop_audio:
            idx = (self.cursor + np.arange(n)) % total
            self.cursor = (self.cursor + n) % total
            return self.samples[idx].astype(np.float64)
        end = min(self.cursor + n, total)
        block = np.zeros(n, dtype=np.float64)
        if self.cursor < total:
            block[: end - self.cursor] = self.samples[self.cursor:end]
        self.cursor = min(self.cursor + n, total)
        return block
