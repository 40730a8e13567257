"""End-to-end composition: manifest -> inference -> audio -> contact graph.

The CLI and the HTTP service both run scenes through these helpers so their
outputs (inferred documents, rendered WAVs) are byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

from .agents import AgentBackend, InferredScene, infer_scene
from .audio_assets import AudioAsset, CorpusManifest, resolve_scene_audio
from .contact_graph import ContactGraph, build_graph
from .geometry import DerivedGeometry, SceneModel, derive_geometry, load_scene


@dataclass
class EngineState:
    """Everything the runtime needs for one scene."""

    scene: SceneModel
    derived: DerivedGeometry
    inferred: InferredScene
    graph: ContactGraph
    assets: dict[str, AudioAsset]


def load_and_derive(manifest: bytes | str) -> tuple[SceneModel, DerivedGeometry]:
    scene = load_scene(manifest)
    return scene, derive_geometry(scene)


def run_inference(scene: SceneModel, derived: DerivedGeometry, backend: AgentBackend,
                  corpus: CorpusManifest | None = None, adapters: list = (),
                  target_rate: int = 48_000,
                  max_workers: int = 1) -> tuple[InferredScene, dict[str, AudioAsset]]:
    """Agent chain plus audio resolution; the document carries the asset ids."""
    inferred = infer_scene(scene, derived, backend, max_workers=max_workers)
    assets = resolve_scene_audio(inferred, corpus, adapters, target_rate)
    return inferred, assets


def build_engine(manifest: bytes | str, backend: AgentBackend,
                 corpus: CorpusManifest | None = None, adapters: list = (),
                 target_rate: int = 48_000) -> EngineState:
    scene, derived = load_and_derive(manifest)
    inferred, assets = run_inference(scene, derived, backend, corpus, adapters,
                                     target_rate)
    graph = build_graph(scene, derived, inferred)
    return EngineState(scene=scene, derived=derived, inferred=inferred,
                       graph=graph, assets=assets)


def attach_assets(scene: SceneModel, inferred: InferredScene,
                  corpus: CorpusManifest | None, adapters: list = (),
                  target_rate: int = 48_000) -> dict[str, AudioAsset]:
    """Re-resolve assets for a previously saved inferred document."""
    return resolve_scene_audio(inferred, corpus, adapters, target_rate)


def validate_inferred_matches(scene: SceneModel, inferred: InferredScene) -> None:
    """Both documents must describe the same object set."""
    scene_ids = set(scene.object_ids())
    inferred_ids = set(inferred.objects)
    if scene_ids != inferred_ids:
        missing = scene_ids - inferred_ids
        extra = inferred_ids - scene_ids
        raise ValueError(
            f"inferred document does not match scene"
            f"{'; missing ' + str(sorted(missing)) if missing else ''}"
            f"{'; extra ' + str(sorted(extra)) if extra else ''}"
        )
