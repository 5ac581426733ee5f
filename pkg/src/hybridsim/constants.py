"""Physical constants and the default diamond material table.

Fundamental constants come from :mod:`scipy.constants` (CODATA).  Material
constants are plain defaults; every spec object accepts overrides.
"""
from __future__ import annotations

from dataclasses import dataclass

from scipy import constants as _sc

HBAR = _sc.hbar
KB = _sc.k
EPS0 = _sc.epsilon_0
MU0 = _sc.mu_0
C_LIGHT = _sc.c
MU_B = _sc.physical_constants["Bohr magneton"][0]
Z0 = _sc.physical_constants["characteristic impedance of vacuum"][0]
TWO_PI = 2.0 * _sc.pi

G_NV = 2.0  # electron g-factor used for the NV ground state
D_NV = TWO_PI * 2.87e9  # zero-field splitting (rad/s)


@dataclass(frozen=True)
class Material:
    """Isotropic elastic/dielectric material constants (SI)."""

    name: str
    youngs_modulus: float  # Pa
    density: float  # kg/m^3
    relative_permittivity: float


DIAMOND = Material(name="diamond", youngs_modulus=1.05e12, density=3515.0,
                   relative_permittivity=5.7)
