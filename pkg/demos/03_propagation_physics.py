#!/usr/bin/env python3
"""The plate propagation model, material by material.

For each reference material and a 1 cm plate driven at 250 Hz, prints the
bending stiffness D, the wavenumber k, and the attenuation gains at the
probe distances. Stiff dense plates (steel) carry vibration much farther
than soft ones (asphalt, plexiglass): the table you pick changes what the
hand feels a meter away.
"""

import math

from vibroscene import attenuation_ratio, bending_stiffness, wavenumber
from vibroscene.materials import REFERENCE_MATERIALS

OMEGA0 = 2 * math.pi * 250.0
H = 0.01
DISTANCES = (0.4, 0.8, 1.2)

header = f"{'material':<14} {'D [N m]':>12} {'k [rad/m]':>10}"
header += "".join(f"  G({d} m)" for d in DISTANCES)
print(f"plate thickness h = {H} m, drive 250 Hz\n")
print(header)
print("-" * len(header))
for name, props in REFERENCE_MATERIALS.items():
    d = bending_stiffness(props.elastic_modulus, H, props.poissons_ratio)
    k = wavenumber(props.density, H, OMEGA0, d)
    gains = "".join(f"  {attenuation_ratio(k, dist):7.4f}" for dist in DISTANCES)
    print(f"{name:<14} {d:>12.4g} {k:>10.3f}{gains}")

print()
print("scaling sanity checks:")
d1 = bending_stiffness(200e9, 0.01, 0.3)
d2 = bending_stiffness(200e9, 0.02, 0.3)
print(f"  doubling h multiplies D by {d2 / d1:.1f} (cubic law)")
k1 = wavenumber(7850, 0.01, OMEGA0, d1)
k2 = wavenumber(7850, 0.01, 2 * OMEGA0, d1)
print(f"  doubling the drive frequency multiplies k by {k2 / k1:.6f} (sqrt 2)")
