"""Physical constants and the handful of unit conversions used across the package.

Everything crossing a module boundary is SI. Atomic units (e, a_B, Hartree)
appear only inside :mod:`graphene_cp.rubidium`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import constants as sc

from .errors import DomainError

#: Mass of the 87Rb atom (kg), from the atomic mass 86.909180527 u.
RB87_MASS = 86.909180527 * sc.atomic_mass


@dataclass(frozen=True)
class PhysicalConstants:
    c: float
    hbar: float
    mu0: float
    eps0: float
    kB: float
    a_B: float
    e_charge: float
    alpha_fs: float
    Ry_Rb: float

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not value > 0:
                raise DomainError(f"constant {name} must be positive, got {value!r}")

    @property
    def h(self) -> float:
        return 2.0 * math.pi * self.hbar

    @classmethod
    def codata(cls) -> "PhysicalConstants":
        return cls(
            c=sc.c,
            hbar=sc.hbar,
            mu0=sc.mu_0,
            eps0=sc.epsilon_0,
            kB=sc.k,
            a_B=sc.physical_constants["Bohr radius"][0],
            e_charge=sc.e,
            alpha_fs=sc.fine_structure,
            Ry_Rb=sc.Rydberg / (1.0 + sc.m_e / RB87_MASS),
        )

    def rounded(self) -> "PhysicalConstants":
        """Same constants with the fine-structure constant rounded to 1/137."""
        return replace(self, alpha_fs=1.0 / 137.0)


CODATA = PhysicalConstants.codata()
ROUNDED = CODATA.rounded()

#: Fermi velocity of graphene in units of c.
V_TILDE_DEFAULT = 1.0 / 300.0


def au_to_si_dipole(d, const: PhysicalConstants = CODATA):
    """Dipole moment in e*a_B -> C*m."""
    return np.multiply(d, const.e_charge * const.a_B)


def si_to_au_dipole(d, const: PhysicalConstants = CODATA):
    return np.divide(d, const.e_charge * const.a_B)


def hartree(const: PhysicalConstants = CODATA) -> float:
    """Hartree energy in J, built from the same constants (E_h = hbar^2 / (m_e a_B^2))."""
    return 2.0 * const.h * const.c * sc.Rydberg


def au_to_si_energy(e, const: PhysicalConstants = CODATA):
    return np.multiply(e, hartree(const))


def si_to_au_energy(e, const: PhysicalConstants = CODATA):
    return np.divide(e, hartree(const))


def thermal_wavelength(T: float, const: PhysicalConstants = CODATA) -> float:
    """Thermal photon wavelength h c / (k_B T) in metres."""
    if not T > 0:
        raise DomainError(f"temperature must be positive, got {T!r}")
    return const.h * const.c / (const.kB * T)


def matsubara_spacing(T: float, const: PhysicalConstants = CODATA) -> float:
    """First Matsubara frequency 2 pi k_B T / hbar in rad/s."""
    if T < 0:
        raise DomainError(f"temperature must be non-negative, got {T!r}")
    return 2.0 * math.pi * const.kB * T / const.hbar


def photon_occupation(omega, T: float, const: PhysicalConstants = CODATA):
    """Bose-Einstein occupation 1/(exp(hbar omega / k_B T) - 1); zero at T = 0."""
    omega = np.asarray(omega, dtype=float)
    if T <= 0:
        return np.zeros_like(omega)
    with np.errstate(over="ignore"):
        return 1.0 / np.expm1(const.hbar * omega / (const.kB * T))
