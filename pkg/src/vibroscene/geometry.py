"""Scene manifest model and derived geometry.

A scene is a flat list of axis-aligned objects. `position` is the center of
an object's AABB and `size` its full extent per axis, both in meters. From
these the engine derives per-object relative heights (vertical offset of the
AABB bottom above the lowest bottom in the scene), contact pairs, and the
dominant-surface thickness used by the propagation model.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import DegenerateSize, ParseError, ValidationError

DEFAULT_CONTACT_EPSILON = 0.005


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for c in (self.x, self.y, self.z):
            if not math.isfinite(c):
                raise ValidationError(f"non-finite vector component in {self!r}")

    @classmethod
    def of(cls, seq) -> "Vec3":
        if len(seq) != 3:
            raise ValidationError(f"expected 3 components, got {len(seq)}")
        return cls(float(seq[0]), float(seq[1]), float(seq[2]))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def min_component(self) -> float:
        return min(self.x, self.y, self.z)

    def distance_to(self, other: "Vec3") -> float:
        return math.dist(self.as_tuple(), other.as_tuple())


@dataclass(frozen=True)
class Aabb:
    """Closed axis-aligned box given by min/max corners."""

    lo: Vec3
    hi: Vec3

    @classmethod
    def from_center_size(cls, center: Vec3, size: Vec3) -> "Aabb":
        half = (size.x / 2.0, size.y / 2.0, size.z / 2.0)
        return cls(
            Vec3(center.x - half[0], center.y - half[1], center.z - half[2]),
            Vec3(center.x + half[0], center.y + half[1], center.z + half[2]),
        )

    def center(self) -> Vec3:
        return Vec3(
            (self.lo.x + self.hi.x) / 2.0,
            (self.lo.y + self.hi.y) / 2.0,
            (self.lo.z + self.hi.z) / 2.0,
        )

    def inflated(self, eps: float) -> "Aabb":
        return Aabb(
            Vec3(self.lo.x - eps, self.lo.y - eps, self.lo.z - eps),
            Vec3(self.hi.x + eps, self.hi.y + eps, self.hi.z + eps),
        )

    def overlaps(self, other: "Aabb") -> bool:
        return (
            self.lo.x <= other.hi.x and other.lo.x <= self.hi.x
            and self.lo.y <= other.hi.y and other.lo.y <= self.hi.y
            and self.lo.z <= other.hi.z and other.lo.z <= self.hi.z
        )

    def contact_point(self, other: "Aabb") -> Vec3:
        """Centroid of the overlap box; midpoint of the gap when disjoint.

        Per axis the interval [max(lo), min(hi)] is the overlap when the
        boxes intersect and the (inverted) gap otherwise; its midpoint is
        well-defined either way.
        """
        return Vec3(
            (max(self.lo.x, other.lo.x) + min(self.hi.x, other.hi.x)) / 2.0,
            (max(self.lo.y, other.lo.y) + min(self.hi.y, other.hi.y)) / 2.0,
            (max(self.lo.z, other.lo.z) + min(self.hi.z, other.hi.z)) / 2.0,
        )

    def clamp(self, point: Vec3) -> Vec3:
        return Vec3(
            min(max(point.x, self.lo.x), self.hi.x),
            min(max(point.y, self.lo.y), self.hi.y),
            min(max(point.z, self.lo.z), self.hi.z),
        )


@dataclass(frozen=True)
class SceneObject:
    id: str
    name: str
    position: Vec3
    size: Vec3
    isolated_images: tuple[str, ...] = ()
    context_images: tuple[str, ...] = ()
    explicit_contacts: tuple[str, ...] | None = None
    source_override: bool | None = None
    material_override: str | None = None
    user_prompt: str = ""

    def aabb(self) -> Aabb:
        return Aabb.from_center_size(self.position, self.size)


@dataclass(frozen=True)
class SceneModel:
    scene_name: str
    scene_images: tuple[str, ...]
    objects: tuple[SceneObject, ...]
    contact_epsilon: float = DEFAULT_CONTACT_EPSILON

    def object_ids(self) -> list[str]:
        return [o.id for o in self.objects]

    def get(self, object_id: str) -> SceneObject:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise KeyError(object_id)


@dataclass
class DerivedGeometry:
    """Quantities computed once per scene and shared by inference and physics."""

    relative_height: dict[str, float] = field(default_factory=dict)
    aabb: dict[str, Aabb] = field(default_factory=dict)
    contacts: set[tuple[str, str]] = field(default_factory=set)


_SCENE_KEYS = {"scene_name", "scene_images", "contact_epsilon", "objects"}
_OBJECT_KEYS = {
    "id", "name", "position", "size", "isolated_images", "context_images",
    "explicit_contacts", "source_override", "material_override", "user_prompt",
}


def _require(doc: dict, key: str, kind, where: str):
    if key not in doc:
        raise ValidationError(f"{where}: missing required key {key!r}")
    value = doc[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValidationError(f"{where}: {key!r} must be a number")
        return float(value)
    if not isinstance(value, kind):
        raise ValidationError(f"{where}: {key!r} must be {kind.__name__}")
    return value


def _str_list(value, where: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ValidationError(f"{where}: expected a list of strings")
    return tuple(value)


def _parse_object(doc: dict, index: int) -> SceneObject:
    where = f"objects[{index}]"
    if not isinstance(doc, dict):
        raise ValidationError(f"{where}: must be an object")
    unknown = set(doc) - _OBJECT_KEYS
    if unknown:
        raise ValidationError(f"{where}: unknown keys {sorted(unknown)}")
    oid = _require(doc, "id", str, where)
    name = _require(doc, "name", str, where)
    position = Vec3.of(_require(doc, "position", list, where))
    size = Vec3.of(_require(doc, "size", list, where))
    if size.min_component() <= 0:
        raise ValidationError(f"{where}: size components must be > 0, got {size.as_tuple()}")
    explicit = doc.get("explicit_contacts")
    if explicit is not None:
        explicit = _str_list(explicit, f"{where}.explicit_contacts")
    source_override = doc.get("source_override")
    if source_override is not None and not isinstance(source_override, bool):
        raise ValidationError(f"{where}: source_override must be a boolean")
    material_override = doc.get("material_override")
    if material_override is not None and not isinstance(material_override, str):
        raise ValidationError(f"{where}: material_override must be a string")
    user_prompt = doc.get("user_prompt", "")
    if not isinstance(user_prompt, str):
        raise ValidationError(f"{where}: user_prompt must be a string")
    return SceneObject(
        id=oid,
        name=name,
        position=position,
        size=size,
        isolated_images=_str_list(doc.get("isolated_images", []), f"{where}.isolated_images"),
        context_images=_str_list(doc.get("context_images", []), f"{where}.context_images"),
        explicit_contacts=explicit,
        source_override=source_override,
        material_override=material_override,
        user_prompt=user_prompt,
    )


def load_scene(manifest: bytes | str) -> SceneModel:
    """Parse and validate a UTF-8 JSON scene manifest."""
    try:
        doc = json.loads(manifest)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("manifest top level must be a JSON object")
    unknown = set(doc) - _SCENE_KEYS
    if unknown:
        raise ValidationError(f"manifest: unknown keys {sorted(unknown)}")
    scene_name = _require(doc, "scene_name", str, "manifest")
    scene_images = _str_list(doc.get("scene_images", []), "manifest.scene_images")
    epsilon = doc.get("contact_epsilon", DEFAULT_CONTACT_EPSILON)
    if not isinstance(epsilon, (int, float)) or isinstance(epsilon, bool) or epsilon <= 0:
        raise ValidationError("manifest: contact_epsilon must be a number > 0")
    raw_objects = _require(doc, "objects", list, "manifest")
    if not raw_objects:
        raise ValidationError("manifest: scene must contain at least one object")
    objects = tuple(_parse_object(o, i) for i, o in enumerate(raw_objects))
    seen: set[str] = set()
    for obj in objects:
        if obj.id in seen:
            raise ValidationError(f"duplicate object id {obj.id!r}")
        seen.add(obj.id)
    for obj in objects:
        for ref in obj.explicit_contacts or ():
            if ref not in seen:
                raise ValidationError(
                    f"object {obj.id!r}: explicit contact {ref!r} references no object"
                )
            if ref == obj.id:
                raise ValidationError(f"object {obj.id!r}: explicit self-contact")
    return SceneModel(
        scene_name=scene_name,
        scene_images=scene_images,
        objects=objects,
        contact_epsilon=float(epsilon),
    )


def serialize_scene(scene: SceneModel) -> bytes:
    """Inverse of load_scene: reloading the output yields an equal SceneModel."""
    doc = {
        "scene_name": scene.scene_name,
        "scene_images": list(scene.scene_images),
        "contact_epsilon": scene.contact_epsilon,
        "objects": [],
    }
    for o in scene.objects:
        entry: dict = {
            "id": o.id,
            "name": o.name,
            "position": list(o.position.as_tuple()),
            "size": list(o.size.as_tuple()),
            "isolated_images": list(o.isolated_images),
            "context_images": list(o.context_images),
        }
        if o.explicit_contacts is not None:
            entry["explicit_contacts"] = list(o.explicit_contacts)
        if o.source_override is not None:
            entry["source_override"] = o.source_override
        if o.material_override is not None:
            entry["material_override"] = o.material_override
        if o.user_prompt:
            entry["user_prompt"] = o.user_prompt
        doc["objects"].append(entry)
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def compute_aabbs(scene: SceneModel) -> dict[str, Aabb]:
    return {o.id: o.aabb() for o in scene.objects}


def compute_relative_heights(scene: SceneModel) -> dict[str, float]:
    """Vertical offset of each object's AABB bottom above the scene's lowest bottom."""
    bottoms = {o.id: o.aabb().lo.y for o in scene.objects}
    floor = min(bottoms.values())
    return {oid: bottom - floor for oid, bottom in bottoms.items()}


def contact_pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a < b else (b, a)


def derive_contacts(scene: SceneModel) -> set[tuple[str, str]]:
    """Contact pairs: explicit declarations plus epsilon-inflated AABB overlaps."""
    pairs: set[tuple[str, str]] = set()
    for obj in scene.objects:
        for ref in obj.explicit_contacts or ():
            pairs.add(contact_pair(obj.id, ref))
    boxes = [(o.id, o.aabb().inflated(scene.contact_epsilon)) for o in scene.objects]
    for i, (id_a, box_a) in enumerate(boxes):
        for id_b, box_b in boxes[i + 1:]:
            if box_a.overlaps(box_b):
                pairs.add(contact_pair(id_a, id_b))
    return pairs


def derive_geometry(scene: SceneModel) -> DerivedGeometry:
    return DerivedGeometry(
        relative_height=compute_relative_heights(scene),
        aabb=compute_aabbs(scene),
        contacts=derive_contacts(scene),
    )


def dominant_surface_thickness(size: Vec3) -> float:
    """Plate thickness h: the smallest size component.

    A plate-like dominant surface is thin along exactly one axis.
    """
    if size.min_component() <= 0:
        raise DegenerateSize(f"size components must be > 0, got {size.as_tuple()}")
    return size.min_component()
