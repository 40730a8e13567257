"""Offline session rendering: a scripted timeline of touches played to WAV.

The renderer advances in fixed blocks (one gain update per block, the
interactive cadence), filters each source's looping audio through its own
bandpass, ramps gains to avoid zipper noise, mixes, and trims to the
requested duration. Identical inputs produce byte-identical WAV output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .agents import InferredScene
from .audio_assets import AudioAsset, encode_wav_float32
from .contact_graph import ContactGraph
from .dsp import RenderConfig, SourceChannel, apply_gain_ramp, mix_sources, svf_bandpass
from .errors import MissingAudio, ParseError, ValidationError
from .geometry import DerivedGeometry, SceneModel, Vec3
from .propagation import PropagationMode, touch_gain


@dataclass(frozen=True)
class ScriptEvent:
    t: float
    type: str                      # touch | release | mode
    object_id: str | None = None
    point: Vec3 | None = None
    client: str = "default"
    mode: PropagationMode | None = None


@dataclass(frozen=True)
class SessionScript:
    duration: float
    events: tuple[ScriptEvent, ...]


def load_script(data: bytes | str) -> SessionScript:
    """Parse and validate the JSON session-script format."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"script is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "duration" not in doc:
        raise ParseError("script must be an object with a 'duration' key")
    duration = doc["duration"]
    if not isinstance(duration, (int, float)) or duration <= 0:
        raise ValidationError(f"duration must be > 0, got {duration!r}")
    events = []
    last_t = 0.0
    for i, raw in enumerate(doc.get("events", [])):
        where = f"events[{i}]"
        t = raw.get("t")
        if not isinstance(t, (int, float)) or t < 0 or t > duration:
            raise ValidationError(f"{where}: t must lie within [0, duration]")
        if t < last_t:
            raise ValidationError(f"{where}: event times must be non-decreasing")
        last_t = t
        etype = raw.get("type")
        if etype == "touch":
            if "object" not in raw or "point" not in raw:
                raise ValidationError(f"{where}: touch needs 'object' and 'point'")
            events.append(ScriptEvent(
                t=float(t), type="touch", object_id=raw["object"],
                point=Vec3.of(raw["point"]), client=raw.get("client", "default"),
            ))
        elif etype == "release":
            events.append(ScriptEvent(
                t=float(t), type="release", client=raw.get("client", "default"),
            ))
        elif etype == "mode":
            events.append(ScriptEvent(
                t=float(t), type="mode", mode=PropagationMode.parse(raw.get("mode")),
            ))
        else:
            raise ValidationError(f"{where}: unknown event type {etype!r}")
    return SessionScript(duration=float(duration), events=tuple(events))


def compute_target_gains(scene: SceneModel, derived: DerivedGeometry,
                         graph: ContactGraph, inferred: InferredScene,
                         touches: dict[str, tuple[str, Vec3]],
                         mode: PropagationMode, omega0: float) -> dict[str, float]:
    """Per-source gain targets for the current touch set.

    Every graph source gets an entry; with several simultaneous touches a
    source renders at the strongest contact's gain.
    """
    gains = {source: 0.0 for source in sorted(graph.sources)}
    for object_id, point in touches.values():
        for result in touch_gain(scene, derived, graph, inferred, object_id,
                                 point, mode, omega0):
            if result.gain > gains.get(result.source, 0.0):
                gains[result.source] = result.gain
    return gains


@dataclass
class TouchSegment:
    client: str
    object_id: str
    start: float
    end: float
    rms: float = 0.0


@dataclass
class RenderResult:
    wav_bytes: bytes
    sample_rate: int
    samples: np.ndarray
    segments: list[TouchSegment] = field(default_factory=list)
    clipped: bool = False


def render_session(scene: SceneModel, derived: DerivedGeometry, graph: ContactGraph,
                   inferred: InferredScene, assets: dict[str, AudioAsset],
                   script: SessionScript, config: RenderConfig | None = None,
                   initial_mode: PropagationMode | str = PropagationMode.ATTENUATED,
                   omega0: float | None = None) -> RenderResult:
    config = config or RenderConfig()
    mode = PropagationMode.parse(initial_mode)
    if omega0 is None:
        omega0 = 2.0 * math.pi * config.resonance_fc

    sources = sorted(graph.sources)
    channels: dict[str, SourceChannel] = {}
    for source in sources:
        asset_id = inferred.objects[source].audio_asset_id if source in inferred.objects else None
        if asset_id is None or asset_id not in assets:
            raise MissingAudio(f"source {source!r} has no resolved audio asset")
        asset = assets[asset_id]
        if asset.sample_rate != config.sample_rate:
            raise ValidationError(
                f"asset {asset_id!r} is at {asset.sample_rate} Hz, "
                f"render runs at {config.sample_rate} Hz"
            )
        channels[source] = SourceChannel(samples=np.asarray(asset.samples, dtype=np.float64))

    total_samples = round(script.duration * config.sample_rate)
    n_blocks = math.ceil(total_samples / config.block_size)
    output = np.zeros(n_blocks * config.block_size, dtype=np.float64)

    touches: dict[str, tuple[str, Vec3]] = {}
    open_segments: dict[str, TouchSegment] = {}
    segments: list[TouchSegment] = []
    clipped = False
    pending = list(script.events)

    for b in range(n_blocks):
        t_block = b * config.block_duration
        while pending and pending[0].t <= t_block + 1e-9:
            event = pending.pop(0)
            if event.type == "touch":
                touches[event.client] = (event.object_id, event.point)
                if event.client in open_segments:
                    open_segments[event.client].end = t_block
                    segments.append(open_segments.pop(event.client))
                open_segments[event.client] = TouchSegment(
                    client=event.client, object_id=event.object_id,
                    start=t_block, end=script.duration,
                )
            elif event.type == "release":
                touches.pop(event.client, None)
                if event.client in open_segments:
                    open_segments[event.client].end = t_block
                    segments.append(open_segments.pop(event.client))
            elif event.type == "mode":
                mode = event.mode

        targets = compute_target_gains(scene, derived, graph, inferred,
                                       touches, mode, omega0)
        blocks = []
        for source in sources:
            channel = channels[source]
            raw = channel.next_block(config)
            filtered = svf_bandpass(raw, channel.state, config)
            target = targets.get(source, 0.0)
            blocks.append(apply_gain_ramp(filtered, channel.gain, target, config))
            channel.gain = target
        if blocks:
            unclamped = np.sum(blocks, axis=0)
            if np.any(np.abs(unclamped) > 1.0):
                clipped = True
            mixed = mix_sources(blocks, [1.0] * len(blocks))
        else:
            mixed = np.zeros(config.block_size, dtype=np.float64)
        output[b * config.block_size:(b + 1) * config.block_size] = mixed

    segments.extend(open_segments.values())
    output = output[:total_samples]
    for seg in segments:
        lo = min(total_samples, round(seg.start * config.sample_rate))
        hi = min(total_samples, round(seg.end * config.sample_rate))
        chunk = output[lo:hi]
        seg.rms = float(np.sqrt(np.mean(chunk ** 2))) if len(chunk) else 0.0

    samples32 = output.astype(np.float32)
    return RenderResult(
        wav_bytes=encode_wav_float32(samples32, config.sample_rate),
        sample_rate=config.sample_rate,
        samples=samples32,
        segments=segments,
        clipped=clipped,
    )
