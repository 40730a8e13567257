"""HTTP service: scene upload, inference, touch probing, maps, renders, stream.

JSON over HTTP plus a server-sent-events stream that pushes one message per
render block (the interactive cadence). Inferred documents and rendered WAVs
are produced by the same pipeline the CLI uses, so both surfaces emit
byte-identical artifacts for identical inputs.
"""

from __future__ import annotations

import asyncio
import base64
import dataclasses
import json
import math
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse, Response, StreamingResponse

from .agents import InferredScene, load_inferred, make_backend, serialize_inferred
from .audio_assets import AudioAsset, CorpusManifest, adapters_from_env
from .contact_graph import ContactGraph, build_graph, set_sources, to_dot
from .dsp import RenderConfig, SourceChannel, apply_gain_ramp, mix_sources, svf_bandpass
from .errors import (
    BackendError,
    DomainError,
    EstimationUnavailable,
    InvariantViolation,
    MalformedResponse,
    ParseError,
    ResolutionFailed,
    UnknownMaterial,
    UnknownNode,
    ValidationError,
    VibrosceneError,
)
from .geometry import DerivedGeometry, SceneModel, Vec3, derive_geometry, load_scene
from .materials import lookup_reference_material
from .pipeline import run_inference
from .propagation import (
    GainResult,
    PropagationMode,
    attenuation_map,
    touch_gain,
)
from .session import SessionScript, compute_target_gains, load_script, render_session

GAIN_DISPLAY_FORMAT = "{:.4f}"


def format_gain(gain: float) -> str:
    """Canonical display string for a gain; clients must show it verbatim."""
    return GAIN_DISPLAY_FORMAT.format(gain)


def gain_to_json(result: GainResult) -> dict:
    return {
        "source": result.source,
        "gain": result.gain,
        "display": format_gain(result.gain),
        "path": list(result.path.nodes),
        "segments": [
            {
                "object": seg.object_id,
                "length": seg.length,
                "wavenumber": seg.wavenumber,
                "gain": seg.gain,
            }
            for seg in result.segments
        ],
    }


@dataclass
class SceneSession:
    id: str
    scene: SceneModel
    derived: DerivedGeometry
    inferred: InferredScene | None = None
    graph: ContactGraph | None = None
    assets: dict[str, AudioAsset] = field(default_factory=dict)
    mode: PropagationMode = PropagationMode.ATTENUATED
    touches: dict[str, tuple[str, Vec3]] = field(default_factory=dict)
    source_overrides: dict[str, bool] = field(default_factory=dict)
    last_render: dict | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    def rebuild_graph(self) -> None:
        graph = build_graph(self.scene, self.derived, self.inferred)
        sources = set(graph.sources)
        for oid, flag in self.source_overrides.items():
            if flag:
                sources.add(oid)
            else:
                sources.discard(oid)
        self.graph = set_sources(graph, sources)


class ApiError(Exception):
    def __init__(self, status: int, detail: str):
        super().__init__(detail)
        self.status = status
        self.detail = detail


def _json_error(status: int, detail: str) -> JSONResponse:
    return JSONResponse({"detail": detail}, status_code=status)


def make_app(corpus_path: str | Path | None = "corpus/manifest.json",
             state_dir: str | Path | None = None,
             config: RenderConfig | None = None) -> FastAPI:
    config = config or RenderConfig()
    app = FastAPI(title="vibroscene", version="0.1.0")
    sessions: dict[str, SceneSession] = {}
    state_path = Path(state_dir) if state_dir else None
    corpus_file = Path(corpus_path) if corpus_path else None

    def load_corpus() -> CorpusManifest | None:
        if corpus_file is not None and corpus_file.is_file():
            return CorpusManifest.load(corpus_file)
        return None

    def get_session(scene_id: str) -> SceneSession:
        session = sessions.get(scene_id)
        if session is None:
            raise ApiError(404, f"no scene with id {scene_id!r}")
        return session

    def require_inferred(session: SceneSession) -> SceneSession:
        if session.inferred is None or session.graph is None:
            raise ApiError(409, "scene is not inferred yet; POST /scenes/{id}/infer first")
        return session

    def persist_manifest(session: SceneSession, manifest: bytes) -> None:
        if state_path is not None:
            state_path.mkdir(parents=True, exist_ok=True)
            (state_path / f"{session.id}.manifest.json").write_bytes(manifest)

    def persist_inferred(session: SceneSession, document: bytes) -> None:
        if state_path is not None:
            state_path.mkdir(parents=True, exist_ok=True)
            (state_path / f"{session.id}.inferred.json").write_bytes(document)

    def restore_state() -> None:
        if state_path is None or not state_path.is_dir():
            return
        corpus = load_corpus()
        for manifest_file in sorted(state_path.glob("*.manifest.json")):
            sid = manifest_file.name.removesuffix(".manifest.json")
            try:
                scene = load_scene(manifest_file.read_bytes())
            except VibrosceneError:
                continue
            session = SceneSession(id=sid, scene=scene, derived=derive_geometry(scene))
            inferred_file = state_path / f"{sid}.inferred.json"
            if inferred_file.is_file():
                try:
                    session.inferred = load_inferred(inferred_file.read_bytes())
                    from .pipeline import attach_assets

                    session.assets = attach_assets(scene, session.inferred, corpus)
                    session.rebuild_graph()
                except VibrosceneError:
                    session.inferred = None
            sessions[sid] = session

    restore_state()

    @app.exception_handler(ApiError)
    async def _handle_api_error(request: Request, exc: ApiError):
        return _json_error(exc.status, exc.detail)

    # -- scene lifecycle ----------------------------------------------------

    @app.post("/scenes", status_code=201)
    async def create_scene(request: Request):
        manifest = await request.body()
        try:
            scene = load_scene(manifest)
        except (ParseError, ValidationError) as exc:
            return _json_error(400, str(exc))
        session = SceneSession(
            id=uuid.uuid4().hex[:12], scene=scene, derived=derive_geometry(scene)
        )
        sessions[session.id] = session
        persist_manifest(session, manifest)
        return JSONResponse({"scene_id": session.id}, status_code=201)

    @app.get("/scenes/{scene_id}")
    async def scene_summary(scene_id: str):
        session = get_session(scene_id)
        return {
            "scene_id": session.id,
            "scene_name": session.scene.scene_name,
            "objects": session.scene.object_ids(),
            "inferred": session.inferred is not None,
            "mode": session.mode.value,
            "sources": sorted(session.graph.sources) if session.graph else [],
            "active_touches": {
                client: {"object_id": oid, "point": list(point.as_tuple())}
                for client, (oid, point) in session.touches.items()
            },
            "last_render": session.last_render,
        }

    @app.get("/scenes/{scene_id}/objects")
    async def scene_objects(scene_id: str):
        session = get_session(scene_id)
        out = []
        for obj in session.scene.objects:
            box = session.derived.aabb[obj.id]
            entry = {
                "id": obj.id,
                "name": obj.name,
                "aabb": {"lo": list(box.lo.as_tuple()), "hi": list(box.hi.as_tuple())},
                "relative_height": session.derived.relative_height[obj.id],
            }
            if session.inferred is not None and obj.id in session.inferred.objects:
                info = session.inferred.objects[obj.id]
                entry["category"] = info.analysis.object_category
                entry["material"] = info.analysis.material_category
                entry["vibrates"] = info.analysis.should_vibrate
                entry["is_source"] = (
                    session.graph is not None and obj.id in session.graph.sources
                )
            out.append(entry)
        return {"objects": out, "contacts": sorted(session.derived.contacts)}

    # -- inference ----------------------------------------------------------

    @app.post("/scenes/{scene_id}/infer")
    async def infer(scene_id: str, backend: str = "mock", replay: str | None = None):
        session = get_session(scene_id)
        try:
            agent_backend = make_backend(backend, replay_file=replay)
        except BackendError as exc:
            return _json_error(502, f"{exc}")
        corpus = load_corpus()
        try:
            inferred, assets = await asyncio.to_thread(
                run_inference, session.scene, session.derived, agent_backend,
                corpus, adapters_from_env(), config.sample_rate,
            )
        except BackendError as exc:
            return _json_error(502, str(exc))
        except (MalformedResponse, InvariantViolation, EstimationUnavailable,
                ResolutionFailed, UnknownMaterial) as exc:
            return _json_error(422, str(exc))
        with session.lock:
            session.inferred = inferred
            session.assets = assets
            session.rebuild_graph()
        document = serialize_inferred(inferred)
        persist_inferred(session, document)
        return Response(content=document, media_type="application/json")

    @app.get("/scenes/{scene_id}/inferred")
    async def get_inferred(scene_id: str):
        session = require_inferred(get_session(scene_id))
        return Response(content=serialize_inferred(session.inferred),
                        media_type="application/json")

    # -- mode and object edits ----------------------------------------------

    @app.get("/scenes/{scene_id}/mode")
    async def get_mode(scene_id: str):
        return {"mode": get_session(scene_id).mode.value}

    @app.put("/scenes/{scene_id}/mode")
    async def put_mode(scene_id: str, request: Request):
        session = get_session(scene_id)
        body = await request.json()
        try:
            mode = PropagationMode.parse(body.get("mode"))
        except DomainError as exc:
            return _json_error(400, str(exc))
        with session.lock:
            session.mode = mode
        return {"mode": session.mode.value}

    @app.put("/scenes/{scene_id}/objects/{object_id}/material")
    async def put_material(scene_id: str, object_id: str, request: Request):
        session = require_inferred(get_session(scene_id))
        if object_id not in session.inferred.objects:
            return _json_error(400, f"unknown object {object_id!r}")
        body = await request.json()
        name = body.get("material", "")
        try:
            material = lookup_reference_material(name)
        except UnknownMaterial as exc:
            return _json_error(400, str(exc))
        with session.lock:
            info = session.inferred.objects[object_id]
            info.material = material
            info.analysis = dataclasses.replace(info.analysis, material_category=name)
        return {"object_id": object_id, "material": name}

    @app.put("/scenes/{scene_id}/objects/{object_id}/source")
    async def put_source(scene_id: str, object_id: str, request: Request):
        session = require_inferred(get_session(scene_id))
        if object_id not in session.inferred.objects:
            return _json_error(400, f"unknown object {object_id!r}")
        body = await request.json()
        flag = body.get("source")
        if not isinstance(flag, bool):
            return _json_error(400, "body must carry a boolean 'source'")
        with session.lock:
            session.source_overrides[object_id] = flag
            session.rebuild_graph()
        return {"object_id": object_id, "source": flag,
                "sources": sorted(session.graph.sources)}

    # -- touch --------------------------------------------------------------

    @app.post("/scenes/{scene_id}/touch")
    async def touch(scene_id: str, request: Request):
        session = require_inferred(get_session(scene_id))
        body = await request.json()
        object_id = body.get("object_id")
        try:
            point = Vec3.of(body.get("point", ()))
        except (ValidationError, TypeError) as exc:
            return _json_error(400, f"bad point: {exc}")
        client = body.get("client", "default")
        try:
            results = touch_gain(
                session.scene, session.derived, session.graph, session.inferred,
                object_id, point, session.mode,
                omega0=2.0 * math.pi * config.resonance_fc,
            )
        except UnknownNode as exc:
            return _json_error(400, str(exc))
        with session.lock:
            session.touches[client] = (object_id, point)
        return {
            "object_id": object_id,
            "client": client,
            "mode": session.mode.value,
            "gains": [gain_to_json(r) for r in results],
        }

    @app.delete("/scenes/{scene_id}/touch/{client}")
    async def release(scene_id: str, client: str):
        session = get_session(scene_id)
        with session.lock:
            released = session.touches.pop(client, None) is not None
        return {"client": client, "released": released}

    # -- attenuation map ------------------------------------------------------

    @app.get("/scenes/{scene_id}/attenuation-map")
    async def get_attenuation_map(scene_id: str, object: str, resolution: int = 64,
                                  mode: str | None = None):
        session = require_inferred(get_session(scene_id))
        map_mode = session.mode if mode is None else PropagationMode.parse(mode)
        try:
            amap = await asyncio.to_thread(
                attenuation_map, session.scene, session.derived, session.graph,
                session.inferred, object, resolution, map_mode,
                2.0 * math.pi * config.resonance_fc,
            )
        except UnknownNode as exc:
            return _json_error(400, str(exc))
        except DomainError as exc:
            return _json_error(422, str(exc))
        return {
            "object_id": amap.object_id,
            "resolution": amap.resolution,
            "u_axis": amap.u_axis,
            "v_axis": amap.v_axis,
            "u_range": list(amap.u_range),
            "v_range": list(amap.v_range),
            "plane_value": amap.plane_value,
            "mode": map_mode.value,
            "per_source": amap.per_source,
            "combined": amap.combined(),
        }

    # -- render and stream ----------------------------------------------------

    def parse_script_param(raw: str) -> SessionScript:
        text = raw.strip()
        if not text:
            raise ApiError(422, "empty script parameter")
        if text.startswith("{"):
            return load_script(text)
        path = Path(text)
        if not path.is_file():
            raise ApiError(422, f"script file not found: {text}")
        return load_script(path.read_bytes())

    @app.get("/scenes/{scene_id}/render")
    async def render(scene_id: str, script: str, mode: str | None = None):
        session = require_inferred(get_session(scene_id))
        try:
            parsed = parse_script_param(script)
        except (ParseError, ValidationError, DomainError) as exc:
            return _json_error(422, str(exc))
        initial = session.mode if mode is None else PropagationMode.parse(mode)
        try:
            result = await asyncio.to_thread(
                render_session, session.scene, session.derived, session.graph,
                session.inferred, session.assets, parsed, config, initial,
            )
        except VibrosceneError as exc:
            return _json_error(422, str(exc))
        with session.lock:
            session.last_render = {
                "clipped": result.clipped,
                "segments": [
                    {"client": s.client, "object_id": s.object_id,
                     "start": s.start, "end": s.end, "rms": s.rms}
                    for s in result.segments
                ],
            }
        return Response(content=result.wav_bytes, media_type="audio/wav")

    async def stream_blocks(session: SceneSession, include_audio: bool,
                            max_blocks: int | None = None):
        omega0 = 2.0 * math.pi * config.resonance_fc
        channels: dict[str, SourceChannel] = {}
        loop = asyncio.get_running_loop()
        start = loop.time()
        seq = 0
        while max_blocks is None or seq < max_blocks:
            mode = session.mode
            with session.lock:
                touches = dict(session.touches)
                graph = session.graph
                inferred = session.inferred
            if graph is None or inferred is None:
                gains: dict[str, float] = {}
            else:
                gains = compute_target_gains(
                    session.scene, session.derived, graph, inferred,
                    touches, mode, omega0,
                )
            rms = 0.0
            frame = None
            blocks = []
            for source in sorted(gains):
                if inferred is None:
                    break
                info = inferred.objects.get(source)
                asset = session.assets.get(info.audio_asset_id) if info else None
                if asset is None:
                    continue
                channel = channels.get(source)
                if channel is None:
                    channel = SourceChannel(
                        samples=np.asarray(asset.samples, dtype=np.float64)
                    )
                    channels[source] = channel
                raw = channel.next_block(config)
                filtered = svf_bandpass(raw, channel.state, config)
                blocks.append(apply_gain_ramp(filtered, channel.gain,
                                              gains[source], config))
                channel.gain = gains[source]
            if blocks:
                mixed = mix_sources(blocks, [1.0] * len(blocks))
                rms = float(np.sqrt(np.mean(mixed ** 2)))
                if include_audio:
                    frame = base64.b64encode(
                        mixed.astype(np.float32).tobytes()
                    ).decode("ascii")
            message = {
                "seq": seq,
                "t": seq * config.block_duration,
                "mode": mode.value,
                "gains": {s: g for s, g in gains.items()},
                "displays": {s: format_gain(g) for s, g in gains.items()},
                "rms": rms,
            }
            if frame is not None:
                message["frame"] = frame
                message["sample_rate"] = config.sample_rate
            yield f"data: {json.dumps(message)}\n\n"
            seq += 1
            deadline = start + seq * config.block_duration
            delay = deadline - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)

    @app.get("/scenes/{scene_id}/stream")
    async def stream(scene_id: str, audio: int = 0, blocks: int | None = None):
        session = get_session(scene_id)
        return StreamingResponse(
            stream_blocks(session, include_audio=bool(audio), max_blocks=blocks),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    # -- debug ----------------------------------------------------------------

    @app.get("/scenes/{scene_id}/graph.dot")
    async def graph_dot(scene_id: str):
        session = require_inferred(get_session(scene_id))
        return PlainTextResponse(to_dot(session.graph))

    return app
