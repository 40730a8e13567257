"""Chained inference agents and their backends.

Four agents run per scene: a scene analyzer (once, first), then per object
an object analyzer whose output feeds a material property estimator and,
for vibrating objects only, a vibration describer. Backends are pluggable:
a deterministic substring-rule mock, a replay store keyed by prompt hash,
and an HTTP chat-completions client; all three return raw response strings
that go through the same parsers.
"""

from __future__ import annotations

import base64
import hashlib
import json
import math
import os
import re
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    BackendError,
    EstimationUnavailable,
    InvariantViolation,
    MalformedResponse,
)
from .geometry import DerivedGeometry, SceneModel, SceneObject, Vec3
from .materials import MaterialProperties, gpa_to_si, lookup_reference_material
from .prompts import render_prompt

DEFAULT_TEMPERATURE = 0.2
MAX_RETRIES = 3  # re-queries on malformed output before giving up


# ---------------------------------------------------------------------------
# output types

@dataclass(frozen=True)
class ObjectAnalysis:
    object_category: str
    object_category_reason: str
    material_category: str
    usage: str
    estimated_size: Vec3
    estimated_size_reason: str
    should_vibrate: bool
    should_vibrate_reason: str


@dataclass(frozen=True)
class VibrationDescription:
    free_form: str
    keywords: str

    def validate(self) -> "VibrationDescription":
        if not self.free_form.strip():
            raise MalformedResponse("empty free-form sentence", field="free_form")
        tokens = self.keywords.split()
        if len(tokens) < 2:
            raise InvariantViolation(
                f"keywords must contain at least two tokens, got {self.keywords!r}"
            )
        if tokens[-1].strip(".,!?'\"").lower() == "vibrate":
            raise InvariantViolation("keyword verb must not be 'vibrate'")
        return self


@dataclass
class InferredObject:
    analysis: ObjectAnalysis
    material: MaterialProperties
    vibration: VibrationDescription | None = None
    audio_asset_id: str | None = None

    def __post_init__(self):
        if (self.vibration is not None) != self.analysis.should_vibrate:
            raise InvariantViolation(
                "vibration description present iff should_vibrate is set"
            )


@dataclass
class InferredScene:
    scene_category: str
    objects: dict[str, InferredObject]

    def sources(self) -> set[str]:
        return {oid for oid, o in self.objects.items() if o.analysis.should_vibrate}


# ---------------------------------------------------------------------------
# backends

@dataclass
class CallRecord:
    index: int
    agent: str
    tag: str | None
    prompt: str
    response: str


class AgentBackend:
    """Base backend: subclasses implement _complete; calls are logged."""

    kind = "abstract"

    def __init__(self, temperature: float = DEFAULT_TEMPERATURE):
        if not (0.0 <= temperature <= 2.0):
            raise ValueError(f"temperature must be in [0, 2], got {temperature}")
        self.temperature = temperature
        self.log: list[CallRecord] = []
        self._lock = threading.Lock()

    def complete(self, agent: str, prompt: str, images: tuple[str, ...] = (),
                 tag: str | None = None) -> str:
        response = self._complete(agent, prompt, images)
        with self._lock:
            self.log.append(CallRecord(len(self.log), agent, tag, prompt, response))
        return response

    def _complete(self, agent: str, prompt: str, images: tuple[str, ...]) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class ObjectRule:
    """Substring rule for the object analyzer mock."""

    contains: str
    object_category: str
    material_category: str
    should_vibrate: bool
    usage: str
    object_category_reason: str = "The name and images identify the object directly."
    should_vibrate_reason: str = ""
    estimated_size: str | None = None  # None: echo the size offered in the prompt


@dataclass
class MockRules:
    """Deterministic substring-rule table; responses are pure functions of the prompt."""

    scene: list[tuple[str, str]] = field(default_factory=list)
    objects: list[ObjectRule] = field(default_factory=list)
    materials: dict[str, dict[str, float]] = field(default_factory=dict)
    vibrations: list[tuple[str, dict[str, str]]] = field(default_factory=list)
    fallback_scene: str = "undefined"
    fallback_object: ObjectRule | None = None


def _reference_gpa_table() -> dict[str, dict[str, float]]:
    from .materials import REFERENCE_MATERIALS

    table = {}
    for name, props in REFERENCE_MATERIALS.items():
        table[name] = {
            "density": props.density,
            "youngs_modulus": props.elastic_modulus / 1e9,
            "poissons_ratio": props.poissons_ratio,
            "damping_ratio": 0.01,
        }
    return table


def default_mock_rules() -> MockRules:
    """Rule table covering the bundled study scenes plus safe fallbacks."""
    return MockRules(
        scene=[
            ("smartphone", "Living Room"),
            ("speaker", "Music Studio"),
            ("washing", "Laundry Room"),
        ],
        objects=[
            ObjectRule(
                contains="smartphone",
                object_category="smartphone",
                material_category="glass",
                should_vibrate=True,
                usage="It rests on the table and buzzes to signal incoming notifications.",
                should_vibrate_reason="The smartphone vibrates when it receives calls or notifications.",
            ),
            ObjectRule(
                contains="washing",
                object_category="washing machine",
                material_category="steel",
                should_vibrate=True,
                usage="It runs laundry cycles on the floor and shakes while spinning.",
                should_vibrate_reason="The drum motor shakes the whole cabinet during spin cycles.",
            ),
            ObjectRule(
                contains="speaker",
                object_category="speaker",
                material_category="plywood",
                should_vibrate=True,
                usage="It plays loud music on the table for people in the room.",
                should_vibrate_reason="The driver excites the cabinet whenever music plays.",
            ),
            ObjectRule(
                contains="metal table",
                object_category="table",
                material_category="steel",
                should_vibrate=False,
                usage="It supports other objects placed on its top surface.",
                should_vibrate_reason="A table has no mechanism of its own.",
            ),
            ObjectRule(
                contains="table",
                object_category="table",
                material_category="oak",
                should_vibrate=False,
                usage="It supports other objects placed on its top surface.",
                should_vibrate_reason="A table has no mechanism of its own.",
            ),
            ObjectRule(
                contains="floor",
                object_category="floor",
                material_category="oak",
                should_vibrate=False,
                usage="People walk on it and furniture stands on it.",
                should_vibrate_reason="A floor is a passive boundary surface.",
            ),
        ],
        materials=_reference_gpa_table(),
        vibrations=[
            ("smartphone", {
                "free_form": "Smartphone buzzes rapidly on the table surface",
                "keywords": "smartphone buzz",
            }),
            ("washing machine", {
                "free_form": "Washing machine rumbles steadily during its spin cycle",
                "keywords": "washing machine rumble",
            }),
            ("speaker", {
                "free_form": "Speaker thumps with deep bass pulses from loud music",
                "keywords": "speaker thump",
            }),
        ],
        fallback_object=ObjectRule(
            contains="",
            object_category="object",
            material_category="plywood",
            should_vibrate=False,
            usage="It sits in the scene as a passive prop.",
            should_vibrate_reason="Nothing suggests an active mechanism.",
        ),
    )


_SIZE_IN_PROMPT = re.compile(
    r"The size of the object in the scene is (?P<size>.*?) in a meter unit\."
)
# Binding extractors: the mock matches its substring rules against the field
# a rule is about (object name, scene name, ...), not the whole template text.
_NAME_IN_PROMPT = re.compile(r"The object name in a Unity scene is (?P<name>.*?)\.\n")
_SCENE_IN_PROMPT = re.compile(r"The name of the Unity scene is (?P<name>.*?)\.\n")
_MATERIAL_IN_PROMPT = re.compile(r"damping ratio of (?P<name>.*?) in float values\.")
_CATEGORY_IN_PROMPT = re.compile(r"^(?P<name>.*?) is used in the following way:",
                                 re.MULTILINE)
_USER_PROMPT_IN_PROMPT = re.compile(r"The user prompt is (?P<text>.*?)\. If the")


class MockBackend(AgentBackend):
    """Substring-rule mock: first matching rule wins, responses fully deterministic."""

    kind = "mock"

    def __init__(self, rules: MockRules | None = None,
                 temperature: float = DEFAULT_TEMPERATURE):
        super().__init__(temperature)
        self.rules = rules if rules is not None else default_mock_rules()

    @staticmethod
    def _extract(pattern: re.Pattern, prompt: str) -> str:
        match = pattern.search(prompt)
        return match.group(1) if match else ""

    def _complete(self, agent: str, prompt: str, images: tuple[str, ...]) -> str:
        if agent == "scene_analyzer":
            scene_name = self._extract(_SCENE_IN_PROMPT, prompt).lower()
            for needle, category in self.rules.scene:
                if needle.lower() in scene_name:
                    return category
            return self.rules.fallback_scene
        if agent == "object_analyzer":
            subject = (self._extract(_NAME_IN_PROMPT, prompt) + " "
                       + self._extract(_USER_PROMPT_IN_PROMPT, prompt)).lower()
            rule = self._match_object_rule(subject)
            if rule is None:
                raise BackendError("mock has no object rule matching the prompt")
            return self._object_response(rule, prompt)
        if agent == "material_estimator":
            return self._material_response(
                self._extract(_MATERIAL_IN_PROMPT, prompt).lower()
            )
        if agent == "vibration_describer":
            category = self._extract(_CATEGORY_IN_PROMPT, prompt).lower()
            for needle, payload in self.rules.vibrations:
                if needle.lower() in category:
                    return json.dumps(payload)
            raise BackendError("mock has no vibration rule matching the prompt")
        raise BackendError(f"mock does not know agent {agent!r}")

    def _match_object_rule(self, subject: str) -> ObjectRule | None:
        for rule in self.rules.objects:
            if rule.contains.lower() in subject:
                return rule
        return self.rules.fallback_object

    def _object_response(self, rule: ObjectRule, prompt: str) -> str:
        size = rule.estimated_size
        if size is None:
            match = _SIZE_IN_PROMPT.search(prompt)
            size = match.group("size") if match else "1.0,1.0,1.0"
        reason = rule.should_vibrate_reason or (
            "It vibrates in this scene." if rule.should_vibrate
            else "It has no vibration source of its own."
        )
        return json.dumps({
            "object_category": rule.object_category,
            "object_category_reason": rule.object_category_reason,
            "material_category": rule.material_category,
            "usage": rule.usage,
            "estimated_size": size,
            "estimated_size_reason": "The given size is plausible for this object category.",
            "should_vibrate": rule.should_vibrate,
            "should_vibrate_reason": reason,
        })

    def _material_response(self, category: str) -> str:
        # Longest matching material name wins ("gypsum board" before "board").
        best = None
        for name, values in self.rules.materials.items():
            if name.lower() in category and (best is None or len(name) > len(best)):
                best = name
        if best is None:
            return json.dumps({
                "density": 0, "youngs_modulus": 0,
                "poissons_ratio": 0, "damping_ratio": 0,
            })
        return json.dumps(self.rules.materials[best])


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class ReplayBackend(AgentBackend):
    """Replays raw responses recorded earlier, keyed by rendered-prompt hash."""

    kind = "replay"

    def __init__(self, recording: dict[str, str] | str | Path,
                 temperature: float = DEFAULT_TEMPERATURE):
        super().__init__(temperature)
        if isinstance(recording, (str, Path)):
            recording = json.loads(Path(recording).read_text("utf-8"))
        if not isinstance(recording, dict):
            raise BackendError("replay recording must map prompt hashes to responses")
        self.recording: dict[str, str] = dict(recording)

    def _complete(self, agent: str, prompt: str, images: tuple[str, ...]) -> str:
        key = prompt_hash(prompt)
        try:
            return self.recording[key]
        except KeyError:
            raise BackendError(
                f"no recorded response for {agent} prompt hash {key[:12]}..."
            ) from None


class RecordingBackend(AgentBackend):
    """Wraps another backend and captures its responses into a replayable session."""

    kind = "recording"

    def __init__(self, inner: AgentBackend):
        super().__init__(inner.temperature)
        self.inner = inner
        self.recording: dict[str, str] = {}

    def _complete(self, agent: str, prompt: str, images: tuple[str, ...]) -> str:
        response = self.inner.complete(agent, prompt, images)
        self.recording[prompt_hash(prompt)] = response
        return response

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.recording, indent=2, sort_keys=True) + "\n", "utf-8"
        )


ENV_ENDPOINT = "VIBROSCENE_LLM_ENDPOINT"
ENV_API_KEY = "VIBROSCENE_LLM_API_KEY"
ENV_MODEL = "VIBROSCENE_LLM_MODEL"
ENV_TEMPERATURE = "VIBROSCENE_LLM_TEMPERATURE"


class HttpBackend(AgentBackend):
    """Chat-completions-style HTTP client with data-URL image attachments.

    Configuration comes from the environment unless passed explicitly:
    VIBROSCENE_LLM_ENDPOINT (required), VIBROSCENE_LLM_API_KEY,
    VIBROSCENE_LLM_MODEL, VIBROSCENE_LLM_TEMPERATURE.
    """

    kind = "http"

    def __init__(self, endpoint: str | None = None, api_key: str | None = None,
                 model: str | None = None, temperature: float | None = None,
                 timeout: float = 120.0, transport=None):
        endpoint = endpoint or os.environ.get(ENV_ENDPOINT)
        if not endpoint:
            raise BackendError(
                f"http backend needs an endpoint: set {ENV_ENDPOINT} or pass endpoint="
            )
        if temperature is None:
            temperature = float(os.environ.get(ENV_TEMPERATURE, DEFAULT_TEMPERATURE))
        super().__init__(temperature)
        self.endpoint = endpoint
        self.api_key = api_key or os.environ.get(ENV_API_KEY)
        self.model = model or os.environ.get(ENV_MODEL, "gpt-4o")
        self.timeout = timeout
        self._transport = transport

    def _complete(self, agent: str, prompt: str, images: tuple[str, ...]) -> str:
        import httpx

        content: list[dict] = [{"type": "text", "text": prompt}]
        for path in images:
            p = Path(path)
            if not p.is_file():
                continue  # image lists may reference absent files; tolerate
            mime = "image/png" if p.suffix.lower() == ".png" else "image/jpeg"
            data = base64.b64encode(p.read_bytes()).decode("ascii")
            content.append({
                "type": "image_url",
                "image_url": {"url": f"data:{mime};base64,{data}"},
            })
        payload = {
            "model": self.model,
            "temperature": self.temperature,
            "messages": [{"role": "user", "content": content}],
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            with httpx.Client(timeout=self.timeout, transport=self._transport) as client:
                response = client.post(self.endpoint, json=payload, headers=headers)
        except httpx.HTTPError as exc:
            raise BackendError(f"http backend request failed: {exc}") from exc
        if response.status_code != 200:
            raise BackendError(
                f"http backend returned {response.status_code}: {response.text[:200]}"
            )
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise BackendError(f"http backend response shape unexpected: {exc}") from exc


def make_backend(kind: str, replay_file: str | Path | None = None,
                 temperature: float = DEFAULT_TEMPERATURE) -> AgentBackend:
    if kind == "mock":
        return MockBackend(temperature=temperature)
    if kind == "replay":
        if replay_file is None:
            raise BackendError("replay backend needs a recording file")
        return ReplayBackend(replay_file, temperature=temperature)
    if kind == "http":
        return HttpBackend(temperature=temperature)
    raise BackendError(f"unknown backend kind {kind!r}")


# ---------------------------------------------------------------------------
# response parsing

_FENCE = re.compile(r"^```[a-zA-Z0-9_-]*\s*\n(.*?)\n?```\s*$", re.DOTALL)

_KEY_ALIASES = {
    "young_s_modulus": "elastic_modulus",
    "youngs_modulus": "elastic_modulus",
    "young_modulus": "elastic_modulus",
    "poisson_s_ratio": "poissons_ratio",
    "poisson_ratio": "poissons_ratio",
    "vibrate_or_not": "should_vibrate",
    "free_form_sentence": "free_form",
    "sentence": "free_form",
    "combined_keywords": "keywords",
}


def _normalize_key(key: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "_", key.strip().lower()).strip("_")
    return _KEY_ALIASES.get(slug, slug)


def strip_affixes(raw: str) -> str:
    """Remove code-fence wrappers the prompt forbade but models still emit."""
    text = raw.strip()
    match = _FENCE.match(text)
    if match:
        return match.group(1).strip()
    return text


def parse_agent_json(raw: str, required: tuple[str, ...]) -> dict:
    """Parse a JSON agent response, normalize keys, check required fields."""
    text = strip_affixes(raw)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedResponse(f"response is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedResponse("response JSON must be an object")
    normalized = {_normalize_key(k): v for k, v in doc.items()}
    for key in required:
        if key not in normalized:
            raise MalformedResponse(f"response missing field {key!r}", field=key)
    return normalized


def _require_text(doc: dict, key: str) -> str:
    value = doc[key]
    if not isinstance(value, str) or not value.strip():
        raise MalformedResponse(f"field {key!r} must be non-empty text", field=key)
    return value


def _coerce_number(doc: dict, key: str) -> float:
    value = doc[key]
    if isinstance(value, bool):
        raise MalformedResponse(f"field {key!r} must be numeric", field=key)
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise MalformedResponse(f"field {key!r} is not numeric: {value!r}", field=key) from None
    if not isinstance(value, (int, float)) or not math.isfinite(value):
        raise MalformedResponse(f"field {key!r} must be a finite number", field=key)
    return float(value)


def _coerce_bool(doc: dict, key: str) -> bool:
    value = doc[key]
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().lower() in ("true", "false"):
        return value.strip().lower() == "true"
    raise MalformedResponse(f"field {key!r} must be a boolean", field=key)


def parse_size_string(value) -> Vec3:
    """Parse the mandated 'x,y,z' size string (lists tolerated) into a Vec3."""
    if isinstance(value, (list, tuple)):
        parts = list(value)
    elif isinstance(value, str):
        parts = [p.strip() for p in value.split(",")]
    else:
        raise MalformedResponse(f"estimated_size has unexpected type {type(value).__name__}")
    if len(parts) != 3:
        raise MalformedResponse(f"estimated_size must have 3 components, got {value!r}")
    try:
        comps = [float(p) for p in parts]
    except (TypeError, ValueError):
        raise MalformedResponse(f"estimated_size not numeric: {value!r}") from None
    if any((not math.isfinite(c)) or c <= 0 for c in comps):
        raise MalformedResponse(f"estimated_size components must be > 0, got {value!r}")
    return Vec3(comps[0], comps[1], comps[2])


_OBJECT_FIELDS = (
    "object_category", "object_category_reason", "material_category", "usage",
    "estimated_size", "estimated_size_reason", "should_vibrate", "should_vibrate_reason",
)


def parse_object_analysis(raw: str) -> ObjectAnalysis:
    doc = parse_agent_json(raw, _OBJECT_FIELDS)
    return ObjectAnalysis(
        object_category=_require_text(doc, "object_category"),
        object_category_reason=_require_text(doc, "object_category_reason"),
        material_category=_require_text(doc, "material_category"),
        usage=_require_text(doc, "usage"),
        estimated_size=parse_size_string(doc["estimated_size"]),
        estimated_size_reason=_require_text(doc, "estimated_size_reason"),
        should_vibrate=_coerce_bool(doc, "should_vibrate"),
        should_vibrate_reason=_require_text(doc, "should_vibrate_reason"),
    )


_MATERIAL_FIELDS = ("density", "elastic_modulus", "poissons_ratio", "damping_ratio")


def parse_material_properties(raw: str) -> MaterialProperties:
    """Parse the estimator response; modulus arrives in GPa and is stored in SI."""
    doc = parse_agent_json(raw, _MATERIAL_FIELDS)
    values = {key: _coerce_number(doc, key) for key in _MATERIAL_FIELDS}
    if all(v == 0 for v in values.values()):
        raise EstimationUnavailable("estimator returned the all-zero sentinel")
    try:
        return MaterialProperties(
            density=values["density"],
            elastic_modulus=gpa_to_si(values["elastic_modulus"]),
            poissons_ratio=values["poissons_ratio"],
            damping_ratio=values["damping_ratio"],
        )
    except Exception as exc:
        raise MalformedResponse(f"material values out of range: {exc}") from exc


def parse_vibration_description(raw: str) -> VibrationDescription:
    doc = parse_agent_json(raw, ("free_form", "keywords"))
    return VibrationDescription(
        free_form=_require_text(doc, "free_form"),
        keywords=_require_text(doc, "keywords"),
    ).validate()


# ---------------------------------------------------------------------------
# agent runners

def _with_retries(call, parse, attempts: int = MAX_RETRIES + 1):
    last: Exception | None = None
    for _ in range(attempts):
        raw = call()
        try:
            return parse(raw)
        except (MalformedResponse, InvariantViolation) as exc:
            last = exc
    assert last is not None
    raise last


def format_size(size: Vec3) -> str:
    return ",".join(f"{c:g}" for c in size.as_tuple())


def run_scene_analyzer(scene: SceneModel, backend: AgentBackend) -> str:
    prompt = render_prompt("scene_analyzer", {"scene_name": scene.scene_name})

    def parse(raw: str) -> str:
        category = raw.strip()
        if not category:
            raise MalformedResponse("scene analyzer returned empty text")
        return category

    return _with_retries(
        lambda: backend.complete("scene_analyzer", prompt, scene.scene_images, tag=None),
        parse,
    )


def object_analyzer_bindings(obj: SceneObject, scene_category: str,
                             derived: DerivedGeometry) -> dict[str, str]:
    return {
        "user_prompt": obj.user_prompt,
        "scene_category": scene_category,
        "object_name": obj.name,
        "size": format_size(obj.size),
        "position_y": f"{derived.relative_height[obj.id]:.3f}",
        "len_isolated": str(len(obj.isolated_images)),
        "len_scene": str(len(obj.context_images)),
    }


def run_object_analyzer(obj: SceneObject, scene_category: str,
                        derived: DerivedGeometry, backend: AgentBackend) -> ObjectAnalysis:
    prompt = render_prompt(
        "object_analyzer", object_analyzer_bindings(obj, scene_category, derived)
    )
    images = obj.isolated_images + obj.context_images
    return _with_retries(
        lambda: backend.complete("object_analyzer", prompt, images, tag=obj.id),
        parse_object_analysis,
    )


def run_material_estimator(material_category: str, backend: AgentBackend,
                           tag: str | None = None) -> MaterialProperties:
    if not material_category.strip():
        raise MalformedResponse("material category must be non-empty")
    prompt = render_prompt("material_estimator", {"material_category": material_category})
    return _with_retries(
        lambda: backend.complete("material_estimator", prompt, tag=tag),
        parse_material_properties,
    )


def run_vibration_describer(object_category: str, usage: str, backend: AgentBackend,
                            tag: str | None = None) -> VibrationDescription:
    prompt = render_prompt(
        "vibration_describer", {"object_category": object_category, "usage": usage}
    )
    return _with_retries(
        lambda: backend.complete("vibration_describer", prompt, tag=tag),
        parse_vibration_description,
    )


def _infer_object(obj: SceneObject, scene_category: str, derived: DerivedGeometry,
                  backend: AgentBackend) -> InferredObject:
    analysis = run_object_analyzer(obj, scene_category, derived, backend)
    if obj.material_override:
        material = lookup_reference_material(obj.material_override)
    else:
        material = run_material_estimator(analysis.material_category, backend, tag=obj.id)
    vibration = None
    if analysis.should_vibrate:
        vibration = run_vibration_describer(
            analysis.object_category, analysis.usage, backend, tag=obj.id
        )
    return InferredObject(analysis=analysis, material=material, vibration=vibration)


def infer_scene(scene: SceneModel, derived: DerivedGeometry, backend: AgentBackend,
                max_workers: int = 1) -> InferredScene:
    """Run the full agent chain: scene analyzer once, then per-object agents.

    Per-object runs are independent and may execute concurrently; results are
    assembled in scene order so deterministic backends give identical output
    regardless of worker count. Errors carry the object id that failed.
    """
    scene_category = run_scene_analyzer(scene, backend)

    def work(obj: SceneObject) -> tuple[str, InferredObject]:
        try:
            return obj.id, _infer_object(obj, scene_category, derived, backend)
        except Exception as exc:
            exc.object_id = obj.id  # annotate for callers; class preserved
            raise

    if max_workers <= 1:
        results = [work(obj) for obj in scene.objects]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(work, scene.objects))
    return InferredScene(scene_category=scene_category, objects=dict(results))


# ---------------------------------------------------------------------------
# serialization (stable key order for golden-file comparison)

def inferred_to_dict(inferred: InferredScene) -> dict:
    objects = []
    for oid, obj in inferred.objects.items():
        a = obj.analysis
        entry = {
            "id": oid,
            "analysis": {
                "object_category": a.object_category,
                "object_category_reason": a.object_category_reason,
                "material_category": a.material_category,
                "usage": a.usage,
                "estimated_size": list(a.estimated_size.as_tuple()),
                "estimated_size_reason": a.estimated_size_reason,
                "should_vibrate": a.should_vibrate,
                "should_vibrate_reason": a.should_vibrate_reason,
            },
            "material": {
                "density": obj.material.density,
                "elastic_modulus": obj.material.elastic_modulus,
                "poissons_ratio": obj.material.poissons_ratio,
                "damping_ratio": obj.material.damping_ratio,
            },
            "vibration": None if obj.vibration is None else {
                "free_form": obj.vibration.free_form,
                "keywords": obj.vibration.keywords,
            },
            "audio_asset_id": obj.audio_asset_id,
        }
        objects.append(entry)
    return {"scene_category": inferred.scene_category, "objects": objects}


def serialize_inferred(inferred: InferredScene) -> bytes:
    return (json.dumps(inferred_to_dict(inferred), indent=2) + "\n").encode("utf-8")


def inferred_from_dict(doc: dict) -> InferredScene:
    objects: dict[str, InferredObject] = {}
    for entry in doc["objects"]:
        a = entry["analysis"]
        analysis = ObjectAnalysis(
            object_category=a["object_category"],
            object_category_reason=a["object_category_reason"],
            material_category=a["material_category"],
            usage=a["usage"],
            estimated_size=Vec3.of(a["estimated_size"]),
            estimated_size_reason=a["estimated_size_reason"],
            should_vibrate=a["should_vibrate"],
            should_vibrate_reason=a["should_vibrate_reason"],
        )
        m = entry["material"]
        material = MaterialProperties(
            density=m["density"],
            elastic_modulus=m["elastic_modulus"],
            poissons_ratio=m["poissons_ratio"],
            damping_ratio=m["damping_ratio"],
        )
        vib = entry.get("vibration")
        vibration = None if vib is None else VibrationDescription(
            free_form=vib["free_form"], keywords=vib["keywords"]
        )
        oid = entry["id"]
        if oid in objects:
            raise MalformedResponse(f"duplicate object id {oid!r} in inferred document")
        objects[oid] = InferredObject(
            analysis=analysis,
            material=material,
            vibration=vibration,
            audio_asset_id=entry.get("audio_asset_id"),
        )
    return InferredScene(scene_category=doc["scene_category"], objects=objects)


def load_inferred(data: bytes | str) -> InferredScene:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedResponse(f"inferred document is not valid JSON: {exc}") from exc
    try:
        return inferred_from_dict(doc)
    except (KeyError, TypeError) as exc:
        raise MalformedResponse(f"inferred document missing field: {exc}") from exc
