#!/usr/bin/env python3
"""Offline render of a Study-2-style probing session, in all three modes.

The script touches the smartphone, then the table at 0.4, 0.8, and 1.2 m
from it. Under 'no' propagation only the phone segment sounds; under
'full' every touch plays at source amplitude; under 'attenuated' the RMS
per segment falls off exactly as the plate model predicts. Writes one WAV
per mode into demos/out/.
"""

from pathlib import Path

from vibroscene import CorpusManifest, MockBackend, build_engine
from vibroscene.dsp import RenderConfig
from vibroscene.session import load_script, render_session

ROOT = Path(__file__).resolve().parent.parent
OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

engine = build_engine(
    (ROOT / "scenes" / "study2_smartphone.json").read_bytes(),
    MockBackend(),
    CorpusManifest.load(ROOT / "corpus" / "manifest.json"),
)
script = load_script((ROOT / "scripts" / "study2_smartphone.json").read_bytes())

results = {}
for mode in ("no", "full", "attenuated"):
    result = render_session(engine.scene, engine.derived, engine.graph,
                            engine.inferred, engine.assets, script,
                            RenderConfig(), mode)
    path = OUT / f"study2_smartphone_{mode}.wav"
    path.write_bytes(result.wav_bytes)
    results[mode] = result
    print(f"wrote {path}  ({len(result.wav_bytes)} bytes, "
          f"clipped: {result.clipped})")

print()
print(f"{'touch segment':<22} {'no':>9} {'full':>9} {'attenuated':>11} {'att/full':>9}")
for i, seg in enumerate(results["full"].segments):
    rms = {m: results[m].segments[i].rms for m in results}
    ratio = rms["attenuated"] / rms["full"] if rms["full"] else 0.0
    label = f"{seg.object_id} @ {seg.start:.0f}s"
    print(f"{label:<22} {rms['no']:>9.5f} {rms['full']:>9.5f} "
          f"{rms['attenuated']:>11.5f} {ratio:>9.5f}")

print()
print("the att/full column IS the attenuation gain of each touch point")
