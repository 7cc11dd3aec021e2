"""Reflection coefficients of free-standing graphene in the massless Dirac model.

With k0 = xi/c on the imaginary-frequency axis,

    R_TM =  pi a q / (pi a q + 2 s),     R_TE = -pi a s / (pi a s + 2 q),
    q = sqrt(k0^2 + k^2),  s = sqrt(k0^2 + v^2 k^2),

which is the usual 4 pi alpha / 8 form divided through by 4. The resonant
Casimir-Polder term needs the same coefficients continued to real frequency,
k0^2 -> -omega^2/c^2, on the evanescent branch parametrised by the decay
constant kappa = sqrt(k^2 - omega^2/c^2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import CODATA, ROUNDED, V_TILDE_DEFAULT
from .errors import BranchError, DomainError, IndeterminateError, UnsupportedStateError

#: Upper end of the linear-dispersion regime.
DIRAC_VALIDITY_EV = 2.0


class DiracValidityWarning(UserWarning):
    """Evaluated above the energy where the linear Dirac dispersion holds."""


@dataclass(frozen=True)
class GrapheneModel:
    v_tilde: float = V_TILDE_DEFAULT
    alpha_fs: float = CODATA.alpha_fs
    mass_gap: float = 0.0
    chem_potential: float = 0.0

    def __post_init__(self):
        if not 0 < self.v_tilde < 1:
            raise DomainError(f"v_tilde must lie in (0, 1), got {self.v_tilde}")
        if self.alpha_fs < 0:
            raise DomainError("alpha_fs must be non-negative")
        if self.mass_gap != 0 or self.chem_potential != 0:
            raise UnsupportedStateError("only the gapless, undoped Dirac cone (m = mu = 0) is supported")

    @classmethod
    def rounded(cls) -> "GrapheneModel":
        """alpha = 1/137 and v_F = c/300 exactly."""
        return cls(v_tilde=1.0 / 300.0, alpha_fs=ROUNDED.alpha_fs)

    @property
    def near_field_tm(self) -> float:
        """Large-k limit of R_TM, pi a / (pi a + 2 v)."""
        pa = math.pi * self.alpha_fs
        return pa / (pa + 2.0 * self.v_tilde)

    @property
    def near_field_te(self) -> float:
        pav = math.pi * self.alpha_fs * self.v_tilde
        return -pav / (pav + 2.0)


def _tm(pa, q, s):
    return pa * q / (pa * q + 2.0 * s)


def _te(pa, q, s):
    return -pa * s / (pa * s + 2.0 * q)


def imag_axis_coefficients(g: GrapheneModel, xi, k_par, c: float = CODATA.c):
    """(R_TE, R_TM) on the imaginary axis; broadcasting, no argument checks."""
    # only xi / (c k) matters; rescaling keeps tiny arguments out of underflow
    w = np.asarray(xi, dtype=float)
    ck = c * np.asarray(k_par, dtype=float)
    scale = np.maximum(w, ck)
    scale = np.where(scale > 0, scale, 1.0)
    k0, k = w / scale, ck / scale
    q = np.sqrt(k0 * k0 + k * k)
    s = np.sqrt(k0 * k0 + (g.v_tilde * k) ** 2)
    pa = math.pi * g.alpha_fs
    return _te(pa, q, s), _tm(pa, q, s)


def evanescent_coefficients(g: GrapheneModel, omega, kappa, c: float = CODATA.c):
    """(R_TE, R_TM) continued to real omega, as complex arrays.

    Where v^2 k^2 < omega^2/c^2 the Dirac square root turns imaginary; the
    causal branch sqrt(-a) = -i sqrt(a) is taken, consistently with kappa = -i k_z
    for propagating waves.
    """
    omega = np.asarray(omega, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    k0sq = (omega / c) ** 2
    arg = g.v_tilde**2 * (kappa * kappa + k0sq) - k0sq
    s = np.where(arg >= 0, np.sqrt(np.abs(arg)) + 0j, -1j * np.sqrt(np.abs(arg)))
    q = kappa + 0j
    pa = math.pi * g.alpha_fs
    return _te(pa, q, s), _tm(pa, q, s)


def _check_imag(xi, k_par, c):
    if xi < 0 or k_par < 0:
        raise DomainError("xi and k_par must be non-negative")
    if xi == 0 and k_par == 0:
        raise IndeterminateError("reflection coefficients are indeterminate at xi = k_par = 0")
    energy_ev = CODATA.hbar * xi / CODATA.e_charge
    if energy_ev > DIRAC_VALIDITY_EV:
        warnings.warn(f"Dirac model evaluated at {energy_ev:.3g} eV, above {DIRAC_VALIDITY_EV} eV",
                      DiracValidityWarning, stacklevel=3)


def r_tm_imag(g: GrapheneModel, xi: float, k_par: float, c: float = CODATA.c) -> float:
    _check_imag(xi, k_par, c)
    return float(imag_axis_coefficients(g, xi, k_par, c)[1])


def r_te_imag(g: GrapheneModel, xi: float, k_par: float, c: float = CODATA.c) -> float:
    _check_imag(xi, k_par, c)
    return float(imag_axis_coefficients(g, xi, k_par, c)[0])


def _check_evanescent(g, omega, kappa, c):
    if not (omega > 0 and kappa > 0):
        raise DomainError("omega and kappa must be positive")
    k0sq = (omega / c) ** 2
    if g.v_tilde**2 * (kappa * kappa + k0sq) < k0sq:
        raise BranchError(
            f"kappa={kappa:.4g} 1/m lies below the Dirac threshold "
            f"{omega / c * math.sqrt(1 / g.v_tilde**2 - 1):.4g} 1/m; coefficients are complex here")


def r_tm_evanescent(g: GrapheneModel, omega: float, kappa: float, c: float = CODATA.c) -> float:
    _check_evanescent(g, omega, kappa, c)
    return float(evanescent_coefficients(g, omega, kappa, c)[1].real)


def r_te_evanescent(g: GrapheneModel, omega: float, kappa: float, c: float = CODATA.c) -> float:
    _check_evanescent(g, omega, kappa, c)
    return float(evanescent_coefficients(g, omega, kappa, c)[0].real)
