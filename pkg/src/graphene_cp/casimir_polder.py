"""Casimir-Polder potential and force on an atom above a graphene sheet.

The potential of an atom in energy eigenstate |n> splits into a nonresonant
part, an imaginary-frequency integral over the dynamic polarizability,

    U_nr = (hbar mu0 / 8 pi^2) int dxi alpha(i xi) int dk (k/q) e^{-2 q z}
           [xi^2 R_TE - (xi^2 + 2 c^2 k^2) R_TM],      q = sqrt(k^2 + xi^2/c^2),

and a resonant part from real photon exchange with lower-lying levels,

    U_r = (mu0 / 4 pi) sum_k w_k omega_k^2 |d_k|^2 / (2 j + 1)
          int dkappa e^{-2 kappa z} Re[R_TE + R_TM (1 + 2 kappa^2 c^2 / omega_k^2)].

The bracket of the nonresonant term is the usual xi^2 [R_TE + R_TM (1 - 2 k^2
gamma^2 c^2 / xi^2)] with the 1/xi^2 pole cancelled analytically. In the
resonant term w_k = 1 for downward transitions at T = 0; at finite temperature
downward lines are weighted by n(omega) + 1 and upward lines by -n(omega).
The mu0/4pi prefactor contracts the dipole dyad with a full trace;
``resonant_contraction="isotropic"`` applies the extra 1/3 of an orientation
average instead.

At finite temperature the xi integral becomes a Matsubara sum over
xi_j = 2 pi j k_B T / hbar with the zero-temperature reflection coefficients
kept at every j, including j = 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import CODATA, PhysicalConstants, matsubara_spacing, photon_occupation, thermal_wavelength
from .errors import ConvergenceError, DomainError, IntegrationError
from .graphene import GrapheneModel, evanescent_coefficients, imag_axis_coefficients
from .quadrature import QuadratureConfig, integrate_semi_infinite, sum_until_converged
from .rubidium import TransitionTable, polarizability_imag_freq

_CONTRACTIONS = {"trace": 1.0, "isotropic": 1.0 / 3.0}

# Absolute floor for the CP quadratures. Where e^{-2 q z} runs into denormals
# the relative error estimate is pure noise; the integrals themselves are
# hundreds of orders of magnitude larger.
_ABS_FLOOR = 1e-250


class ThermalValidityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CPConfig:
    outer_rel_tol: float = 1e-6
    inner_rel_tol: float = 1e-7
    matsubara_rel_tol: float = 1e-9
    max_subdivisions: int = 400
    max_matsubara_terms: int = 100_000
    resonant_contraction: str = "trace"
    matsubara_mode: str = "auto"
    const: PhysicalConstants = CODATA

    def __post_init__(self):
        if self.resonant_contraction not in _CONTRACTIONS:
            raise DomainError(f"resonant_contraction must be one of {sorted(_CONTRACTIONS)}")
        if self.matsubara_mode not in ("auto", "sum", "euler-maclaurin"):
            raise DomainError("matsubara_mode must be 'auto', 'sum' or 'euler-maclaurin'")
        for name in ("outer_rel_tol", "inner_rel_tol", "matsubara_rel_tol"):
            if not 0 < getattr(self, name) < 1:
                raise DomainError(f"{name} must lie in (0, 1)")


@dataclass(frozen=True)
class CPQuery:
    table: TransitionTable
    graphene: GrapheneModel
    z_A: float
    temperature: float = 0.0

    def __post_init__(self):
        if not self.z_A > 0:
            raise DomainError(f"atom-surface distance must be positive, got {self.z_A}")
        if self.temperature < 0:
            raise DomainError(f"temperature must be non-negative, got {self.temperature}")


@dataclass
class CPResult:
    state: str
    z_A: float
    temperature: float
    u_nonres: float
    u_res: float
    u_total: float
    f_total: float | None = None
    diagnostics: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


# --- nonresonant part -------------------------------------------------------

class _Diagnostics:
    def __init__(self):
        self.evaluations = 0
        self.inner_calls = 0
        self.max_inner_error = 0.0
        self.outer_error = None
        self.matsubara_terms = None

    def as_dict(self):
        return {k: v for k, v in vars(self).items() if v is not None}


def _inner_k(graphene, xi, zs, cfg, diag):
    """int dk (k/q) e^{-2qz} [xi^2 R_TE - (xi^2 + 2c^2k^2) R_TM] for all (z, xi) pairs."""
    c = cfg.const.c
    X = np.asarray(xi, dtype=float)[None, :, None]
    Z = np.asarray(zs, dtype=float)[:, None, None]

    def integrand(k):
        K = k[None, None, :]
        q = np.sqrt(K * K + (X / c) ** 2)
        r_te, r_tm = imag_axis_coefficients(graphene, X, K, c)
        bracket = X * X * r_te - (X * X + 2.0 * c * c * K * K) * r_tm
        # k/q -> 1 as k, xi -> 0 together; q == 0 only at k = xi = 0
        ratio = np.divide(K, q, out=np.ones(np.broadcast(K, q).shape), where=q > 0)
        return ratio * np.exp(-2.0 * q * Z) * bracket

    qc = QuadratureConfig(abs_tol=_ABS_FLOOR, rel_tol=cfg.inner_rel_tol, max_subdivisions=cfg.max_subdivisions,
                          decay_scale=0.5 / float(np.min(zs)))
    res = integrate_semi_infinite(integrand, qc)
    diag.evaluations += res.evaluations
    diag.inner_calls += 1
    rel = np.max(res.error_estimate / np.maximum(np.abs(res.value), 1e-300))
    diag.max_inner_error = max(diag.max_inner_error, float(rel))
    if not res.converged:
        raise IntegrationError("inner k-integral did not converge",
                               {"xi_range": (float(np.min(xi)), float(np.max(xi))),
                                "subdivisions": res.subdivisions, "relative_error": float(rel)})
    return np.atleast_2d(res.value)


def _nonresonant_integrand(table, graphene, zs, cfg, diag):
    def f(xi):
        alpha = polarizability_imag_freq(table, xi, cfg.const)
        return alpha[None, :] * _inner_k(graphene, xi, zs, cfg, diag)
    return f


def _nonresonant_T0(table, graphene, zs, cfg, diag):
    f = _nonresonant_integrand(table, graphene, zs, cfg, diag)
    qc = QuadratureConfig(abs_tol=_ABS_FLOOR, rel_tol=cfg.outer_rel_tol, max_subdivisions=cfg.max_subdivisions,
                          decay_scale=table.dominant_frequency)
    res = integrate_semi_infinite(f, qc)
    diag.evaluations += res.evaluations
    diag.outer_error = np.asarray(res.error_estimate).tolist()
    if not res.converged:
        raise IntegrationError("outer xi-integral did not converge",
                               {"subdivisions": res.subdivisions,
                                "error_estimate": np.asarray(res.error_estimate).tolist()})
    const = cfg.const
    return const.hbar * const.mu0 / (8.0 * math.pi**2) * np.asarray(res.value)


def _dense_matsubara(table, graphene, zs, spacing, cfg):
    """True when the Matsubara spacing is fine on every scale of the integrand.

    Besides the atomic lines, the sheet's response changes over
    xi ~ v c / (2 z), where the Dirac root sqrt(xi^2/c^2 + v^2 k^2) turns over.
    """
    smallest = min(float(np.min(np.abs(table.signed_omegas))),
                   graphene.v_tilde * cfg.const.c / (2.0 * float(np.max(zs))))
    return spacing < 0.02 * smallest


def _nonresonant_thermal(table, graphene, zs, T, cfg, diag):
    const = cfg.const
    spacing = matsubara_spacing(T, const)
    f = _nonresonant_integrand(table, graphene, zs, cfg, diag)
    prefactor = const.mu0 / (8.0 * math.pi) * 2.0 * const.kB * T
    dense = (cfg.matsubara_mode == "euler-maclaurin" or
             (cfg.matsubara_mode == "auto" and _dense_matsubara(table, graphene, zs, spacing, cfg)))
    if dense:
        # Euler-Maclaurin: spacing * sum' f(j spacing) = int f - spacing^2 f'(0) / 12 + O(spacing^4).
        # f is even in xi, so the correction only guards against a badly resolved start.
        integral = _nonresonant_T0(table, graphene, zs, cfg, diag) / (
            const.hbar * const.mu0 / (8.0 * math.pi**2))
        f012 = f(spacing * np.arange(3.0))
        slope = (-3.0 * f012[:, 0] + 4.0 * f012[:, 1] - f012[:, 2]) / (2.0 * spacing)
        diag.matsubara_terms = "euler-maclaurin"
        return prefactor * (integral - spacing**2 * slope / 12.0) / spacing
    try:
        total, n_terms = sum_until_converged(lambda j: f(spacing * j), cfg.matsubara_rel_tol,
                                             block=16, max_terms=cfg.max_matsubara_terms,
                                             return_count=True)
    except ConvergenceError as exc:
        raise ConvergenceError(f"Matsubara sum: {exc}", exc.diagnostics) from None
    # Slowly decaying terms leave a tail of order term / (1 - ratio) after the
    # stop; add it back as the midpoint-rule integral from (J - 1/2) spacing.
    start = (n_terms - 0.5) * spacing
    qc = QuadratureConfig(abs_tol=_ABS_FLOOR, rel_tol=cfg.outer_rel_tol, max_subdivisions=cfg.max_subdivisions,
                          decay_scale=max(table.dominant_frequency, start))
    tail = integrate_semi_infinite(lambda x: f(start + x), qc)
    diag.evaluations += tail.evaluations
    diag.matsubara_terms = n_terms
    total = np.asarray(total) + np.asarray(tail.value) / spacing
    return prefactor * np.asarray(total)


# --- resonant part ----------------------------------------------------------

def _resonant_weights(table, T, const):
    w = table.signed_omegas
    nbar = photon_occupation(np.abs(w), T, const)
    return np.where(w < 0, nbar + 1.0, -nbar)


def _resonant(table, graphene, zs, T, cfg, diag):
    const = cfg.const
    weights = _resonant_weights(table, T, const)
    active = weights != 0
    if not np.any(active):
        return np.zeros(len(zs))
    omega = np.abs(table.signed_omegas[active])[:, None, None]
    Z = np.asarray(zs, dtype=float)[None, :, None]
    c = const.c

    def integrand(kappa):
        K = kappa[None, None, :]
        r_te, r_tm = evanescent_coefficients(graphene, omega, K, c)
        bracket = (r_te + r_tm * (1.0 + 2.0 * K * K * c * c / omega**2)).real
        return np.exp(-2.0 * K * Z) * bracket

    # Dirac threshold kappa where v^2 k^2 = omega^2/c^2: the coefficients have a kink there
    vt = graphene.v_tilde
    kinks = (np.abs(table.signed_omegas[active]) / c) * math.sqrt(1.0 / vt**2 - 1.0)
    qc = QuadratureConfig(abs_tol=_ABS_FLOOR, rel_tol=cfg.inner_rel_tol, max_subdivisions=cfg.max_subdivisions,
                          decay_scale=0.5 / float(np.min(zs)))
    res = integrate_semi_infinite(integrand, qc, points=kinks)
    diag.evaluations += res.evaluations
    if not res.converged:
        raise IntegrationError("resonant kappa-integral did not converge",
                               {"subdivisions": res.subdivisions})
    per_line = np.atleast_2d(res.value)       # (lines, z)
    strength = (weights[active] * np.abs(table.signed_omegas[active]) ** 2
                * table.dipoles_sq[active] / table.multiplicity)
    prefactor = const.mu0 / (4.0 * math.pi) * _CONTRACTIONS[cfg.resonant_contraction]
    return prefactor * (strength @ per_line)


# --- public API -------------------------------------------------------------

def _potentials(q: CPQuery, zs, cfg: CPConfig):
    diag = _Diagnostics()
    zs = np.asarray(zs, dtype=float)
    if q.temperature > 0:
        u_nr = _nonresonant_thermal(q.table, q.graphene, zs, q.temperature, cfg, diag)
    else:
        u_nr = _nonresonant_T0(q.table, q.graphene, zs, cfg, diag)
    u_r = _resonant(q.table, q.graphene, zs, q.temperature, cfg, diag)
    return np.asarray(u_nr).reshape(-1), np.asarray(u_r).reshape(-1), diag


def _thermal_warnings(q: CPQuery, const):
    out = []
    if q.temperature > 0:
        lam = thermal_wavelength(q.temperature, const)
        if not q.z_A < lam / 10:
            out.append(f"z_A = {q.z_A:.3e} m is not small against the thermal wavelength "
                       f"{lam:.3e} m (z_A >= lambda_T/10)")
    for msg in out:
        warnings.warn(msg, ThermalValidityWarning, stacklevel=3)
    return out


def potential_nonresonant_T0(q: CPQuery, cfg: CPConfig = CPConfig()) -> float:
    diag = _Diagnostics()
    return float(_nonresonant_T0(q.table, q.graphene, [q.z_A], cfg, diag)[0])


def potential_resonant_T0(q: CPQuery, cfg: CPConfig = CPConfig()) -> float:
    diag = _Diagnostics()
    return float(_resonant(q.table, q.graphene, [q.z_A], 0.0, cfg, diag)[0])


def force_step(z: float) -> float:
    """Finite-difference step max(1e-3 z, 0.01 nm)."""
    return max(1e-3 * z, 1e-11)


def potential_total(q: CPQuery, cfg: CPConfig = CPConfig(), with_force: bool = False,
                    step: float | None = None) -> CPResult:
    """Both potential terms at (z_A, T); optionally the force from the same mesh.

    The force is -dU/dz from central differences at h and 2h, Richardson
    extrapolated once. All five distances share one quadrature mesh.
    """
    warns = _thermal_warnings(q, cfg.const)
    z = q.z_A
    if with_force:
        h = force_step(z) if step is None else step
        if not 0 < 2 * h < z:
            raise DomainError(f"finite-difference step {h} is incompatible with z_A = {z}")
        zs = z + h * np.array([0.0, -2.0, -1.0, 1.0, 2.0])
    else:
        zs = np.array([z])
    u_nr, u_r, diag = _potentials(q, zs, cfg)
    u = u_nr + u_r
    force = None
    if with_force:
        d1 = (u[3] - u[2]) / (2 * h)
        d2 = (u[4] - u[1]) / (4 * h)
        force = float(-(4.0 * d1 - d2) / 3.0)
    return CPResult(
        state=q.table.center.label, z_A=z, temperature=q.temperature,
        u_nonres=float(u_nr[0]), u_res=float(u_r[0]), u_total=float(u_nr[0] + u_r[0]),
        f_total=force, diagnostics=diag.as_dict(), warnings=warns)


def force(q: CPQuery, cfg: CPConfig = CPConfig(), step: float | None = None) -> float:
    """F = -dU/dz_A in newtons; negative means attraction toward the sheet."""
    return potential_total(q, cfg, with_force=True, step=step).f_total


def richardson_derivative(u, z: float, h: float) -> float:
    """Once-extrapolated central difference of a callable, -dU/dz."""
    d1 = (u(z + h) - u(z - h)) / (2 * h)
    d2 = (u(z + 2 * h) - u(z - 2 * h)) / (4 * h)
    return -(4.0 * d1 - d2) / 3.0


def perfect_conductor_c3(table: TransitionTable, const: PhysicalConstants = CODATA) -> float:
    """C3 of the nonretarded perfect-mirror potential, (hbar/16 pi^2 eps0) int alpha(i xi) dxi."""
    signed = np.sign(table.signed_omegas) * table.dipoles_sq
    return float(signed.sum()) / (48.0 * math.pi * const.eps0 * table.multiplicity)


def near_field_nonresonant(table: TransitionTable, graphene: GrapheneModel, z: float,
                           const: PhysicalConstants = CODATA) -> float:
    """-R_TM(k -> inf) C3 / z^3: constant-reflectivity near-field estimate."""
    return -graphene.near_field_tm * perfect_conductor_c3(table, const) / z**3
