"""vibroscene: scene manifests in, touch-dependent vibrotactile signals out.

The pipeline: a JSON scene manifest is validated and measured (geometry),
chained inference agents assign per-object semantics and material
properties (agents), vibrating objects get audio assets (audio_assets),
a contact graph answers propagation-path queries (contact_graph), a
plate-bending model turns paths into attenuation gains (propagation), and
a bandpass DSP chain renders gain-modulated signals (dsp, session). The
service and cli modules expose the same engine over HTTP and the shell.
"""

from .agents import (
    AgentBackend,
    HttpBackend,
    InferredObject,
    InferredScene,
    MockBackend,
    ObjectAnalysis,
    RecordingBackend,
    ReplayBackend,
    VibrationDescription,
    infer_scene,
    load_inferred,
    parse_agent_json,
    serialize_inferred,
)
from .audio_assets import (
    AudioAsset,
    CorpusManifest,
    load_audio,
    resolve_scene_audio,
    resolve_vibration_audio,
    search_corpus,
)
from .contact_graph import (
    ContactGraph,
    PropagationPath,
    all_paths,
    build_graph,
    shortest_path,
    update_contact,
)
from .dsp import FilterState, RenderConfig, apply_gain_ramp, mix_sources, svf_bandpass
from .geometry import (
    Aabb,
    DerivedGeometry,
    SceneModel,
    SceneObject,
    Vec3,
    compute_relative_heights,
    derive_contacts,
    derive_geometry,
    dominant_surface_thickness,
    load_scene,
    serialize_scene,
)
from .materials import MaterialProperties, lookup_reference_material
from .pipeline import EngineState, build_engine, load_and_derive, run_inference
from .propagation import (
    AttenuationQuery,
    GainResult,
    PropagationMode,
    attenuation_map,
    attenuation_ratio,
    bending_stiffness,
    path_attenuation,
    touch_gain,
    wavenumber,
)
from .prompts import render_prompt
from .session import RenderResult, SessionScript, load_script, render_session

__version__ = "0.1.0"
