"""Synthetic scene builder for load and latency tests.

Builds a spaced-out scene whose contact topology is declared explicitly
(random spanning tree plus extra edges), with materials cycled from the
reference table, bypassing the inference agents.
"""

import numpy as np

from vibroscene.agents import (
    InferredObject,
    InferredScene,
    ObjectAnalysis,
    VibrationDescription,
)
from vibroscene.geometry import SceneModel, SceneObject, Vec3, derive_geometry
from vibroscene.materials import REFERENCE_MATERIALS


def build_synthetic(n_objects: int, n_edges: int, n_sources: int, seed: int = 0):
    """Scene + derived + inferred with exactly n_edges contacts."""
    rng = np.random.default_rng(seed)
    assert n_edges >= n_objects - 1
    ids = [f"obj{i:02d}" for i in range(n_objects)]

    # spanning tree keeps everything reachable, extras add cycles
    edges: set[tuple[int, int]] = set()
    for i in range(1, n_objects):
        j = int(rng.integers(0, i))
        edges.add((j, i))
    while len(edges) < n_edges:
        a, b = sorted(int(x) for x in rng.integers(0, n_objects, size=2))
        if a != b:
            edges.add((a, b))

    contacts: dict[int, list[str]] = {i: [] for i in range(n_objects)}
    for a, b in edges:
        contacts[a].append(ids[b])

    objects = []
    for i, oid in enumerate(ids):
        # 3 m spacing guarantees no accidental AABB contact
        position = Vec3(3.0 * (i % 8), 0.5, 3.0 * (i // 8))
        size = Vec3(1.0 + 0.1 * (i % 5), 0.05, 1.0 + 0.07 * (i % 7))
        objects.append(SceneObject(
            id=oid, name=f"Prop {i}", position=position, size=size,
            explicit_contacts=tuple(contacts[i]) or None,
        ))
    scene = SceneModel(scene_name="synthetic", scene_images=(),
                       objects=tuple(objects))
    derived = derive_geometry(scene)

    materials = list(REFERENCE_MATERIALS.items())
    inferred_objects = {}
    for i, oid in enumerate(ids):
        name, props = materials[i % len(materials)]
        vibrates = i < n_sources
        analysis = ObjectAnalysis(
            object_category="machine" if vibrates else "prop",
            object_category_reason="synthetic",
            material_category=name,
            usage="synthetic load test object",
            estimated_size=objects[i].size,
            estimated_size_reason="synthetic",
            should_vibrate=vibrates,
            should_vibrate_reason="synthetic",
        )
        vibration = VibrationDescription(
            free_form="Machine hums in place", keywords="machine hum"
        ) if vibrates else None
        inferred_objects[oid] = InferredObject(
            analysis=analysis, material=props, vibration=vibration
        )
    inferred = InferredScene(scene_category="warehouse", objects=inferred_objects)
    return scene, derived, inferred
