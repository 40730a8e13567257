"""Material properties and the built-in reference table.

Elastic moduli are stored in N/m^2 everywhere in the engine. The estimator
prompt asks for GPa, so responses are converted exactly once, at parse time,
through gpa_to_si below; the reference table uses the same conversion so the
two routes agree bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnknownMaterial, ValidationError


def gpa_to_si(gpa: float) -> float:
    return gpa * 1e9


@dataclass(frozen=True)
class MaterialProperties:
    density: float            # kg/m^3
    elastic_modulus: float    # N/m^2
    poissons_ratio: float     # dimensionless
    damping_ratio: float = 0.0  # stored for format fidelity, unused by the propagation model

    def __post_init__(self):
        if self.density <= 0:
            raise ValidationError(f"density must be > 0, got {self.density}")
        if self.elastic_modulus <= 0:
            raise ValidationError(f"elastic modulus must be > 0, got {self.elastic_modulus}")
        if not (0 <= self.poissons_ratio < 0.5):
            raise ValidationError(f"Poisson's ratio must be in [0, 0.5), got {self.poissons_ratio}")
        if self.damping_ratio < 0:
            raise ValidationError(f"damping ratio must be >= 0, got {self.damping_ratio}")


def _entry(density: float, modulus_gpa: float, poissons_ratio: float) -> MaterialProperties:
    return MaterialProperties(
        density=density,
        elastic_modulus=gpa_to_si(modulus_gpa),
        poissons_ratio=poissons_ratio,
        damping_ratio=0.0,
    )


# Reference property database: density kg/m^3, elastic modulus GPa, Poisson's ratio.
REFERENCE_MATERIALS: dict[str, MaterialProperties] = {
    "aluminum": _entry(2700, 69, 0.33),
    "steel": _entry(7850, 200, 0.30),
    "copper": _entry(8960, 110, 0.34),
    "glass": _entry(2500, 70, 0.23),
    "plywood": _entry(600, 10, 0.3),
    "gypsum board": _entry(850, 2.5, 0.25),
    "brick": _entry(1920, 12, 0.20),
    "asphalt": _entry(2300, 1, 0.35),
    "oak": _entry(700, 12, 0.30),
    "plexiglass": _entry(1180, 3.3, 0.35),
}


def lookup_reference_material(name: str) -> MaterialProperties:
    """Case-insensitive lookup in the reference property database."""
    key = " ".join(name.strip().lower().split())
    try:
        return REFERENCE_MATERIALS[key]
    except KeyError:
        raise UnknownMaterial(f"no reference properties for material {name!r}") from None
