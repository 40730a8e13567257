#!/usr/bin/env python3
"""The four chained inference agents, run against the deterministic mock.

Shows a rendered prompt, the chaining order recovered from the backend
call log, and the final inferred document with per-object semantics,
material properties, and vibration descriptions.
"""

from pathlib import Path

from vibroscene import MockBackend, derive_geometry, infer_scene, load_scene
from vibroscene.prompts import render_prompt

ROOT = Path(__file__).resolve().parent.parent

scene = load_scene((ROOT / "scenes" / "study2_washing_machine.json").read_bytes())
derived = derive_geometry(scene)

print("=== a rendered agent prompt (material property estimator) ===")
print(render_prompt("material_estimator", {"material_category": "steel"}))

backend = MockBackend()
inferred = infer_scene(scene, derived, backend)

print("=== backend call order ===")
for record in backend.log:
    tag = f" [{record.tag}]" if record.tag else ""
    print(f"  {record.index:>2}. {record.agent}{tag}")

print()
print(f"scene category: {inferred.scene_category}")
for oid, info in inferred.objects.items():
    a = info.analysis
    print(f"\n{oid}:")
    print(f"  category: {a.object_category}  material: {a.material_category}")
    print(f"  usage: {a.usage}")
    print(f"  vibrates: {a.should_vibrate}  ({a.should_vibrate_reason})")
    print(f"  density {info.material.density} kg/m^3, "
          f"E {info.material.elastic_modulus:.3g} N/m^2, "
          f"nu {info.material.poissons_ratio}")
    if info.vibration:
        print(f"  vibration: \"{info.vibration.free_form}\" "
              f"/ keywords \"{info.vibration.keywords}\"")
