"""Flexural-wave attenuation along contact paths.

The physical model treats each traversed object as a thin plate. Bending
stiffness D = E h^3 / (12 (1 - nu^2)) and wavenumber k = (rho h w0^2 / D)^(1/4)
give an exponential amplitude decay gamma = exp(-k d) over Euclidean distance d.
A multi-hop path is split at the contact-region centroids between consecutive
objects; each segment decays with the traversed object's own k, and segment
gains multiply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .agents import InferredScene
from .contact_graph import ContactGraph, PropagationPath, all_paths, shortest_path
from .errors import DomainError, MissingMaterial, NoPath, UnknownNode
from .geometry import (
    DerivedGeometry,
    SceneModel,
    Vec3,
    dominant_surface_thickness,
)

DEFAULT_OMEGA0 = 2.0 * math.pi * 250.0  # rad/s, the bandpass resonance
DEGENERATE_SEGMENT = 1e-9  # meters; shorter segments contribute unit gain


class PropagationMode(str, Enum):
    NO = "no"
    FULL = "full"
    ATTENUATED = "attenuated"

    @classmethod
    def parse(cls, value: "PropagationMode | str") -> "PropagationMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            raise DomainError(
                f"unknown propagation mode {value!r}; expected one of "
                f"{[m.value for m in cls]}"
            ) from None


@dataclass(frozen=True)
class PlateParams:
    density: float          # kg/m^3
    elastic_modulus: float  # N/m^2
    poissons_ratio: float
    thickness: float        # m
    omega0: float           # rad/s

    def __post_init__(self):
        for label, value in (("density", self.density),
                             ("elastic_modulus", self.elastic_modulus),
                             ("thickness", self.thickness),
                             ("omega0", self.omega0)):
            if value <= 0:
                raise DomainError(f"{label} must be > 0, got {value}")
        if not (0 <= self.poissons_ratio < 0.5):
            raise DomainError(
                f"Poisson's ratio must be in [0, 0.5), got {self.poissons_ratio}"
            )

    def wavenumber(self) -> float:
        d = bending_stiffness(self.elastic_modulus, self.thickness, self.poissons_ratio)
        return wavenumber(self.density, self.thickness, self.omega0, d)


@dataclass(frozen=True)
class SegmentGain:
    object_id: str
    length: float
    wavenumber: float
    gain: float


@dataclass(frozen=True)
class GainResult:
    source: str
    gain: float
    path: PropagationPath
    segments: tuple[SegmentGain, ...] = ()


@dataclass(frozen=True)
class AttenuationQuery:
    path: PropagationPath
    touch_point: Vec3
    mode: PropagationMode = PropagationMode.ATTENUATED


def bending_stiffness(elastic_modulus: float, thickness: float,
                      poissons_ratio: float) -> float:
    """D = E h^3 / (12 (1 - nu^2)), in N*m."""
    if elastic_modulus <= 0:
        raise DomainError(f"elastic modulus must be > 0, got {elastic_modulus}")
    if thickness <= 0:
        raise DomainError(f"thickness must be > 0, got {thickness}")
    if not (0 <= poissons_ratio < 0.5):
        raise DomainError(f"Poisson's ratio must be in [0, 0.5), got {poissons_ratio}")
    return elastic_modulus * thickness ** 3 / (12.0 * (1.0 - poissons_ratio ** 2))


def wavenumber(density: float, thickness: float, omega0: float,
               bending: float) -> float:
    """k = (rho h w0^2 / D)^(1/4), in rad/m."""
    for label, value in (("density", density), ("thickness", thickness),
                         ("omega0", omega0), ("bending stiffness", bending)):
        if value <= 0:
            raise DomainError(f"{label} must be > 0, got {value}")
    return (density * thickness * omega0 ** 2 / bending) ** 0.25


def attenuation_ratio(k: float, distance: float) -> float:
    """gamma = exp(-k d) for Euclidean distance d >= 0."""
    if k <= 0:
        raise DomainError(f"wavenumber must be > 0, got {k}")
    if distance < 0:
        raise DomainError(f"distance must be >= 0, got {distance}")
    return math.exp(-k * distance)


def object_wavenumber(inferred: InferredScene, object_id: str, omega0: float) -> float:
    """Wavenumber of one object from its inferred material and estimated size."""
    obj = inferred.objects.get(object_id)
    if obj is None:
        raise MissingMaterial(f"object {object_id!r} has no inferred material properties")
    m = obj.material
    h = dominant_surface_thickness(obj.analysis.estimated_size)
    return PlateParams(
        density=m.density,
        elastic_modulus=m.elastic_modulus,
        poissons_ratio=m.poissons_ratio,
        thickness=h,
        omega0=omega0,
    ).wavenumber()


def _path_points(path: PropagationPath, scene: SceneModel,
                 derived: DerivedGeometry, touch_point: Vec3) -> list[Vec3]:
    """Waypoints R0 -> contact centroids -> clamped touch point."""
    source_box = derived.aabb[path.source]
    points = [source_box.center()]
    for a, b in zip(path.nodes, path.nodes[1:]):
        points.append(derived.aabb[a].contact_point(derived.aabb[b]))
    points.append(derived.aabb[path.touched].clamp(touch_point))
    return points


def path_attenuation(query: AttenuationQuery, scene: SceneModel,
                     derived: DerivedGeometry, inferred: InferredScene,
                     omega0: float = DEFAULT_OMEGA0) -> GainResult:
    """Gain at the touch point for one propagation path.

    Attenuated mode decomposes the path into per-object segments whose gains
    multiply; full mode short-circuits to 1 (a path exists); no-propagation
    short-circuits to 1 on the source itself and 0 beyond it. Only the
    attenuated branch populates the per-segment breakdown.
    """
    mode = PropagationMode.parse(query.mode)
    path = query.path
    if mode is PropagationMode.FULL:
        return GainResult(source=path.source, gain=1.0, path=path)
    if mode is PropagationMode.NO:
        return GainResult(source=path.source,
                          gain=1.0 if path.hop_count == 0 else 0.0, path=path)

    points = _path_points(path, scene, derived, query.touch_point)
    segments = []
    total = 1.0
    for obj_id, start, end in zip(path.nodes, points, points[1:]):
        k = object_wavenumber(inferred, obj_id, omega0)
        length = start.distance_to(end)
        gain = 1.0 if length < DEGENERATE_SEGMENT else attenuation_ratio(k, length)
        segments.append(SegmentGain(object_id=obj_id, length=length,
                                    wavenumber=k, gain=gain))
        total *= gain
    return GainResult(source=path.source, gain=total, path=path,
                      segments=tuple(segments))


def gains_for_paths(paths: list[PropagationPath], touch_point: Vec3,
                    mode: PropagationMode, scene: SceneModel,
                    derived: DerivedGeometry, inferred: InferredScene,
                    omega0: float = DEFAULT_OMEGA0) -> list[GainResult]:
    """Shortest path per source, evaluated under the given mode."""
    if not paths:
        return []
    try:
        winners = shortest_path(paths, per_source=True)
    except NoPath:
        return []
    return [
        path_attenuation(
            AttenuationQuery(path=p, touch_point=touch_point, mode=mode),
            scene, derived, inferred, omega0,
        )
        for p in winners
    ]


def touch_gain(scene: SceneModel, derived: DerivedGeometry, graph: ContactGraph,
               inferred: InferredScene, touched: str, point: Vec3,
               mode: PropagationMode | str = PropagationMode.ATTENUATED,
               omega0: float = DEFAULT_OMEGA0) -> list[GainResult]:
    """Per-source gains for a touch, one GainResult per reachable source.

    no: unit gain only when the touched object is itself a source.
    full: unit gain for every source with any path to the touch.
    attenuated: shortest path per source through path_attenuation.
    """
    mode = PropagationMode.parse(mode)
    if touched not in graph.nodes:
        raise UnknownNode(f"unknown object {touched!r}")
    if mode is PropagationMode.NO:
        if touched in graph.sources:
            return [GainResult(source=touched, gain=1.0,
                               path=PropagationPath((touched,)))]
        return []
    paths = all_paths(graph, touched)
    return gains_for_paths(paths, point, mode, scene, derived, inferred, omega0)


# ---------------------------------------------------------------------------
# attenuation-map sampling

@dataclass(frozen=True)
class AttenuationMap:
    object_id: str
    resolution: int
    u_axis: str               # first surface axis in x,y,z order
    v_axis: str
    u_range: tuple[float, float]
    v_range: tuple[float, float]
    plane_value: float        # coordinate of the sampled face along the thickness axis
    per_source: dict[str, list[list[float]]]  # [u_index][v_index], row-major

    def combined(self) -> list[list[float]]:
        """Max over sources per cell; zeros when the scene has no sources."""
        n = self.resolution
        grid = [[0.0] * n for _ in range(n)]
        for cells in self.per_source.values():
            for i in range(n):
                for j in range(n):
                    if cells[i][j] > grid[i][j]:
                        grid[i][j] = cells[i][j]
        return grid


_AXES = ("x", "y", "z")


def dominant_face_grid(scene: SceneModel, derived: DerivedGeometry, object_id: str,
                       resolution: int) -> tuple[str, str, tuple[float, float],
                                                 tuple[float, float], float]:
    """Geometry of the sampled face: surface axes, their ranges, face coordinate."""
    obj = scene.get(object_id)
    box = derived.aabb[object_id]
    sizes = obj.size.as_tuple()
    thickness_axis = sizes.index(min(sizes))
    u_axis, v_axis = [i for i in range(3) if i != thickness_axis]
    lo = box.lo.as_tuple()
    hi = box.hi.as_tuple()
    return (
        _AXES[u_axis], _AXES[v_axis],
        (lo[u_axis], hi[u_axis]),
        (lo[v_axis], hi[v_axis]),
        hi[thickness_axis],
    )


def attenuation_map(scene: SceneModel, derived: DerivedGeometry, graph: ContactGraph,
                    inferred: InferredScene, object_id: str, resolution: int,
                    mode: PropagationMode | str = PropagationMode.ATTENUATED,
                    omega0: float = DEFAULT_OMEGA0) -> AttenuationMap:
    """Sample per-source gains on a grid over the object's dominant face.

    Paths depend only on the touched object, so they are enumerated once and
    reused for every cell; each cell's values are identical to a touch_gain
    call at the cell center.
    """
    if resolution < 1:
        raise DomainError(f"resolution must be >= 1, got {resolution}")
    mode = PropagationMode.parse(mode)
    if object_id not in graph.nodes:
        raise UnknownNode(f"unknown object {object_id!r}")
    u_name, v_name, u_range, v_range, plane = dominant_face_grid(
        scene, derived, object_id, resolution
    )
    if mode is PropagationMode.NO:
        fill = 1.0 if object_id in graph.sources else None
        per_source = {} if fill is None else {
            object_id: [[fill] * resolution for _ in range(resolution)]
        }
        return AttenuationMap(
            object_id=object_id, resolution=resolution, u_axis=u_name, v_axis=v_name,
            u_range=u_range, v_range=v_range, plane_value=plane, per_source=per_source,
        )
    paths = all_paths(graph, object_id)
    sources = sorted({p.source for p in paths})
    per_source = {
        s: [[0.0] * resolution for _ in range(resolution)] for s in sources
    }
    du = (u_range[1] - u_range[0]) / resolution
    dv = (v_range[1] - v_range[0]) / resolution
    for i in range(resolution):
        u = u_range[0] + (i + 0.5) * du
        for j in range(resolution):
            v = v_range[0] + (j + 0.5) * dv
            coords = {u_name: u, v_name: v}
            point = Vec3(
                coords.get("x", plane), coords.get("y", plane), coords.get("z", plane)
            )
            results = gains_for_paths(paths, point, mode, scene, derived,
                                      inferred, omega0)
            for result in results:
                per_source[result.source][i][j] = result.gain
    return AttenuationMap(
        object_id=object_id,
        resolution=resolution,
        u_axis=u_name,
        v_axis=v_name,
        u_range=u_range,
        v_range=v_range,
        plane_value=plane,
        per_source=per_source,
    )
