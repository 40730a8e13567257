#!/usr/bin/env python3
"""The 250 Hz state-variable bandpass that turns audio into vibrotactile signal.

Sweeps sines through the filter and compares the measured steady-state
gain with the analytic response; the passband sits on the skin's most
sensitive band. Writes a response plot to demos/out/bandpass_response.png.
"""

import math
from pathlib import Path

import numpy as np

from vibroscene.dsp import FilterState, RenderConfig, bandpass_magnitude, svf_bandpass

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

config = RenderConfig()


def measured_gain(freq):
    n = int(config.sample_rate * 0.5)
    t = np.arange(n) / config.sample_rate
    y = svf_bandpass(np.sin(2 * np.pi * freq * t), FilterState(), config)
    tail = slice(n // 2, n)
    a = 2 * np.mean(y[tail] * np.sin(2 * np.pi * freq * t[tail]))
    b = 2 * np.mean(y[tail] * np.cos(2 * np.pi * freq * t[tail]))
    return math.hypot(a, b)


freqs = np.geomspace(30, 6000, 25)
measured = [measured_gain(f) for f in freqs]
analytic = [bandpass_magnitude(f, config.resonance_fc, config.filter_q) for f in freqs]

print(f"fs = {config.sample_rate} Hz, fc = {config.resonance_fc} Hz, "
      f"Q = {config.filter_q}\n")
print(f"{'f [Hz]':>8} {'measured':>10} {'analytic':>10} {'delta dB':>9}")
for f, m, a in zip(freqs, measured, analytic):
    print(f"{f:>8.1f} {m:>10.4f} {a:>10.4f} {20 * math.log10(m / a):>9.3f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.loglog(freqs, measured, "o-", label="measured (sine probes)")
    ax.loglog(freqs, analytic, "--", label="analytic |H(f)|")
    ax.axvline(250, color="gray", lw=0.5)
    ax.set_xlabel("frequency [Hz]")
    ax.set_ylabel("gain")
    ax.set_title("state-variable bandpass, resonance 250 Hz")
    ax.legend()
    fig.tight_layout()
    fig.savefig(OUT / "bandpass_response.png", dpi=120)
    print(f"\nwrote {OUT / 'bandpass_response.png'}")
except ImportError:
    print("\nmatplotlib not installed; skipped the plot")
