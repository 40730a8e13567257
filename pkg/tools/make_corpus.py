#!/usr/bin/env python3
"""Synthesize the bundled corpus audio (CC0) and write its manifest.

Run from the repo root: python3 tools/make_corpus.py
Regenerating is deterministic; the three clips cover the bundled scenes'
vibration keywords.
"""

import json
from pathlib import Path

import numpy as np

RATE = 44_100
ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "corpus"


def pcm16(samples: np.ndarray) -> np.ndarray:
    peak = np.max(np.abs(samples))
    if peak > 0:
        samples = samples * (0.9 / peak)
    return (samples * 32767.0).astype(np.int16)


def smartphone_buzz(duration=1.5):
    t = np.arange(int(RATE * duration)) / RATE
    carrier = np.sin(2 * np.pi * 235 * t) + 0.35 * np.sin(2 * np.pi * 470 * t)
    bursts = (np.sin(2 * np.pi * 3.0 * t) > -0.2).astype(float)
    envelope = np.convolve(bursts, np.ones(256) / 256, mode="same")
    return carrier * envelope


def washing_machine_rumble(duration=2.0):
    rng = np.random.default_rng(7)
    t = np.arange(int(RATE * duration)) / RATE
    drum = (np.sin(2 * np.pi * 52 * t)
            + 0.6 * np.sin(2 * np.pi * 77 * t + 0.7)
            + 0.4 * np.sin(2 * np.pi * 121 * t + 1.9))
    wobble = 0.75 + 0.25 * np.sin(2 * np.pi * 1.4 * t)
    noise = rng.standard_normal(len(t))
    # one-pole lowpass keeps the noise in the rumble band
    lp = np.empty_like(noise)
    acc = 0.0
    for i, x in enumerate(noise):
        acc += 0.02 * (x - acc)
        lp[i] = acc
    return drum * wobble + 2.5 * lp


def speaker_thump(duration=1.6):
    t = np.arange(int(RATE * duration)) / RATE
    beat = np.maximum(0.0, np.sin(2 * np.pi * 2.0 * t)) ** 3
    bass = np.sin(2 * np.pi * 55 * t) + 0.5 * np.sin(2 * np.pi * 110 * t)
    shimmer = 0.15 * np.sin(2 * np.pi * 251 * t)
    return bass * (0.3 + 0.7 * beat) + shimmer


def main():
    from scipy.io import wavfile

    audio_dir = OUT / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)
    clips = {
        "smartphone buzz": ("smartphone_buzz.wav", smartphone_buzz()),
        "washing machine rumble": ("washing_machine_rumble.wav", washing_machine_rumble()),
        "speaker thump": ("speaker_thump.wav", speaker_thump()),
    }
    entries = []
    for keywords, (filename, samples) in clips.items():
        wavfile.write(audio_dir / filename, RATE, pcm16(samples))
        entries.append({"keywords": keywords, "path": f"audio/{filename}"})
        print(f"wrote corpus/audio/{filename}")
    manifest = OUT / "manifest.json"
    manifest.write_text(json.dumps({"entries": entries}, indent=2) + "\n", "utf-8")
    print(f"wrote {manifest.relative_to(ROOT)}")


if __name__ == "__main__":
    main()
