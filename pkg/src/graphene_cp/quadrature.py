"""Adaptive quadrature on [0, inf) and a convergence-checked series summation.

The semi-infinite range is compactified with ``x = s u / (1 - u)`` where ``s``
is the integrand's decay scale, and [0, 1) is refined by global adaptive
bisection using the 10-point Gauss / 21-point Kronrod pair.

Integrands are called with a 1-D array of abscissae and may return either an
array of the same length or an array of shape ``(..., n)``. In the latter case
all components are integrated on one shared mesh, so integrals that depend
smoothly on a parameter stay smooth in that parameter (this is what keeps the
finite-difference forces in :mod:`graphene_cp.casimir_polder` free of mesh
noise).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, IntegrationError

# QUADPACK qk21 abscissae and weights; the Gauss nodes are the odd entries.
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208245980285,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

# Full 21-point rule on [-1, 1]; Gauss weights scattered onto the shared nodes.
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(21)
_gauss_pos = np.concatenate([np.arange(1, 10, 2), 20 - np.arange(1, 10, 2)])
GAUSS_WEIGHTS[_gauss_pos] = np.concatenate([_WG, _WG])

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-6
    abs_tol: float = 0.0
    max_subdivisions: int = 400
    decay_scale: float = 1.0

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise DomainError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if self.abs_tol < 0:
            raise DomainError(f"abs_tol must be >= 0, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")
        if not self.decay_scale > 0:
            raise DomainError(f"decay_scale must be > 0, got {self.decay_scale}")

    def with_scale(self, decay_scale: float, rel_tol: float | None = None) -> "QuadratureConfig":
        return QuadratureConfig(
            rel_tol=self.rel_tol if rel_tol is None else rel_tol,
            abs_tol=self.abs_tol,
            max_subdivisions=self.max_subdivisions,
            decay_scale=decay_scale,
        )


@dataclass
class QuadratureResult:
    value: float | np.ndarray
    error_estimate: float | np.ndarray
    evaluations: int
    converged: bool
    subdivisions: int = 0


def _tolerance(value, resabs, cfg):
    # Roundoff floor: no point chasing errors below what the sum of |f| allows.
    return np.maximum(np.maximum(cfg.rel_tol * np.abs(value), cfg.abs_tol), 50 * _EPS * resabs)


def _panel_rule(f, a, b, scale):
    """Apply GK21 to f on each mapped panel [a_i, b_i] in u; returns (K, |K-G|, K|f|)."""
    a = np.atleast_1d(a)
    b = np.atleast_1d(b)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    u = (mid[:, None] + half[:, None] * NODES[None, :]).ravel()
    one_minus = 1.0 - u
    x = scale * u / one_minus
    jac = scale / one_minus**2
    fx = np.asarray(f(x), dtype=float)
    if fx.shape[-1] != x.size:
        raise IntegrationError(
            f"integrand returned shape {fx.shape}, expected trailing axis {x.size}")
    if not np.all(np.isfinite(fx)):
        bad = x[~np.all(np.isfinite(fx.reshape(-1, x.size)), axis=0)]
        raise IntegrationError("integrand returned a non-finite value",
                               {"abscissae": bad[:5].tolist()})
    g = (fx * jac).reshape(fx.shape[:-1] + (a.size, 21))
    kron = half * (g @ KRONROD_WEIGHTS)
    gauss = half * (g @ GAUSS_WEIGHTS)
    resabs = half * (np.abs(g) @ KRONROD_WEIGHTS)
    return kron, np.abs(kron - gauss), resabs, x.size


def integrate_semi_infinite(f, cfg: QuadratureConfig = QuadratureConfig(),
                            initial_panels: int = 4, points=()) -> QuadratureResult:
    """Integrate ``f`` over [0, inf).

    Parameters
    ----------
    f : callable
        Vectorised integrand ``f(x) -> ndarray``; the last axis runs over ``x``.
    cfg : QuadratureConfig
        Tolerances and the decay scale used for the compactifying map.
    initial_panels : int
        Number of equal panels in ``u`` to start from.
    points : sequence of float
        Abscissae where the integrand has kinks; they become panel edges.

    Returns
    -------
    QuadratureResult
        ``value`` has the shape of ``f``'s output without its last axis.
        ``converged`` is False if ``max_subdivisions`` ran out first; the
        caller decides what to do with it.
    """
    edges = np.linspace(0.0, 1.0, initial_panels + 1)
    pts = np.asarray([p for p in points if 0 < p < np.inf], dtype=float)
    if pts.size:
        edges = np.unique(np.concatenate([edges, pts / (cfg.decay_scale + pts)]))
    lo, hi = edges[:-1], edges[1:]
    kron, err, resabs, nev = _panel_rule(f, lo, hi, cfg.decay_scale)
    # panels along the last axis
    lo, hi = list(lo), list(hi)
    splits = 0
    while True:
        value = kron.sum(axis=-1)
        total_err = err.sum(axis=-1)
        tol = _tolerance(value, resabs.sum(axis=-1), cfg)
        if np.all(total_err <= tol):
            converged = True
            break
        if splits >= cfg.max_subdivisions:
            converged = False
            break
        # worst panel relative to each component's tolerance
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = err / np.where(tol > 0, tol, np.inf)[..., None]
        ratio = ratio.reshape(-1, err.shape[-1]).max(axis=0)
        i = int(np.argmax(ratio))
        a, b = lo[i], hi[i]
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            converged = False
            break
        k2, e2, r2, n2 = _panel_rule(f, [a, m], [m, b], cfg.decay_scale)
        nev += n2
        splits += 1
        lo[i:i + 1] = [a, m]
        hi[i:i + 1] = [m, b]
        kron = np.concatenate([kron[..., :i], k2, kron[..., i + 1:]], axis=-1)
        err = np.concatenate([err[..., :i], e2, err[..., i + 1:]], axis=-1)
        resabs = np.concatenate([resabs[..., :i], r2, resabs[..., i + 1:]], axis=-1)
    if np.ndim(value) == 0:
        value, total_err = float(value), float(total_err)
    return QuadratureResult(value, total_err, nev, converged, splits)


def sum_until_converged(term, rel_tol: float = 1e-8, consecutive: int = 3,
                        max_terms: int = 100_000, block: int = 1, return_count: bool = False):
    """Sum ``term(0)/2 + term(1) + term(2) + ...``.

    The j = 0 term carries weight 1/2, the Matsubara prime convention.
    Summation stops once ``consecutive`` successive terms are each no larger
    than ``rel_tol`` times the running sum. With ``block > 1`` the callable
    receives integer arrays of that many indices and must return values along
    the last axis; vector-valued terms converge only when every component has.
    With ``return_count`` the number of terms summed is returned as well.
    """
    if block < 1:
        raise DomainError("block must be >= 1")
    total = None
    quiet = None
    j = 0
    while j < max_terms:
        if block == 1:
            values = np.asarray(term(j), dtype=float)[..., None]
            idx = np.array([j])
        else:
            idx = np.arange(j, min(j + block, max_terms))
            values = np.asarray(term(idx), dtype=float)
        if not np.all(np.isfinite(values)):
            raise ConvergenceError(f"non-finite term near index {j}")
        for col, jj in enumerate(idx):
            v = values[..., col]
            weighted = 0.5 * v if jj == 0 else v
            total = weighted if total is None else total + weighted
            small = np.abs(weighted) <= rel_tol * np.abs(total)
            quiet = np.where(small, (0 if quiet is None else quiet) + 1, 0)
            if np.all(quiet >= consecutive):
                total = float(total) if np.ndim(total) == 0 else total
                return (total, int(jj) + 1) if return_count else total
        j = int(idx[-1]) + 1
    raise ConvergenceError(
        f"series did not converge within the term cap max_terms={max_terms}",
        {"max_terms": max_terms, "partial_sum": total})
