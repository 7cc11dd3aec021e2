"""Fundamental mode of a suspended graphene beam and the force it takes to ripple it.

The resonance of a beam of length L, width w and thickness t under tension T is

    f0 = sqrt[(A sqrt(E/rho) t / L^2)^2 + A^2 0.57 T / (rho L^2 w t)],

with A = 1.03 for a doubly clamped beam and 0.162 for a cantilever. A static
deflection of the mode costs kappa_eff * amplitude, with
kappa_eff = m_eff (2 pi f0)^2 and m_eff = 0.735 L w t rho.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

DOUBLY_CLAMPED = 1.03
CANTILEVER = 0.162
EFFECTIVE_MASS_FACTOR = 0.735


@dataclass(frozen=True)
class MembraneSpec:
    """Geometry and material of the suspended sheet, SI units throughout.

    Defaults describe a 3 um x 2 um single-layer cantilever under 0.1 nN.
    Set ``allow_custom_clamping`` to use an ``A`` other than the two tabulated values.
    """

    youngs_modulus: float = 1.0e12
    density: float = 2200.0
    thickness: float = 0.3e-9
    width: float = 2.0e-6
    length: float = 3.0e-6
    tension: float = 0.1e-9
    clamping: float = CANTILEVER
    allow_custom_clamping: bool = False

    def __post_init__(self):
        for name in ("youngs_modulus", "density", "thickness", "width", "length"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value}")
        if not (self.tension >= 0 and math.isfinite(self.tension)):
            raise DomainError(f"tension must be non-negative, got {self.tension}")
        if not self.clamping > 0:
            raise DomainError(f"clamping coefficient must be positive, got {self.clamping}")
        if not self.allow_custom_clamping and self.clamping not in (DOUBLY_CLAMPED, CANTILEVER):
            raise DomainError(
                f"clamping must be {DOUBLY_CLAMPED} (doubly clamped) or {CANTILEVER} (cantilever); "
                "pass allow_custom_clamping=True to override")

    @property
    def effective_mass(self) -> float:
        return EFFECTIVE_MASS_FACTOR * self.length * self.width * self.thickness * self.density


def fundamental_frequency(m: MembraneSpec) -> float:
    """Fundamental resonance f0 in Hz."""
    bending = m.clamping * math.sqrt(m.youngs_modulus / m.density) * m.thickness / m.length**2
    stretching = m.clamping**2 * 0.57 * m.tension / (m.density * m.length**2 * m.width * m.thickness)
    return math.sqrt(bending**2 + stretching)


def spring_constant(m: MembraneSpec) -> float:
    """Effective spring constant of the fundamental mode, N/m."""
    return m.effective_mass * (2.0 * math.pi * fundamental_frequency(m)) ** 2


def force_for_amplitude(m: MembraneSpec, amplitude: float) -> float:
    """Static force in N that deflects the fundamental mode by ``amplitude`` metres."""
    if not amplitude > 0:
        raise DomainError(f"amplitude must be positive, got {amplitude}")
    return spring_constant(m) * amplitude


def atoms_needed(f_required: float, f_per_atom: float) -> int:
    """Smallest number of atoms whose combined force reaches ``f_required``.

    Only magnitudes count; see :func:`force_direction` for push versus pull.
    """
    if f_per_atom == 0 or not math.isfinite(f_per_atom):
        raise DomainError(f"force per atom must be finite and nonzero, got {f_per_atom}")
    if not f_required > 0:
        raise DomainError(f"required force must be positive, got {f_required}")
    ratio = f_required / abs(f_per_atom)
    nearest = round(ratio)
    # a ratio within rounding noise of an integer is that integer, not the next one up
    if nearest > 0 and abs(ratio - nearest) <= 1e-12 * nearest:
        return int(nearest)
    return int(math.ceil(ratio))


def force_direction(f_per_atom: float) -> str:
    """'repulsive' (pushes the sheet away) for F > 0, 'attractive' for F < 0."""
    if f_per_atom > 0:
        return "repulsive"
    if f_per_atom < 0:
        return "attractive"
    return "none"
