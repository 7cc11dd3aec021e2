"""Rubidium-87 atomic structure.

State energies come from Rydberg-Ritz quantum defects, Rydberg-Rydberg radial
dipole integrals from Numerov integration of the Coulomb-approximation radial
equation, and the ground-state response from a shipped D1/D2 line-data file.
Energies, frequencies and dipoles leave this module in SI units.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .constants import CODATA, PhysicalConstants, au_to_si_dipole
from .errors import (ConfigurationError, LineDataError, NumericalError,
                     SelectionRuleError, UnsupportedStateError)

SPECIES = "87Rb"
DATA_ENV_VAR = "GRAPHENE_CP_DATA"
RYDBERG_MIN_N = 10
DEFAULT_WINDOW = 5

_SERIES = "SPDFGH"
_LABEL_RE = re.compile(r"^\s*(\d+)\s*([A-Za-z])\s*_?\{?(\d+)/2\}?\s*$")


def _read_rows(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line.split()


def _data_path(name):
    return resources.files("graphene_cp") / "data" / name


def _load_defects(path=None):
    path = path or _data_path("rb87_quantum_defects.dat")
    table = {}
    for lineno, cols in _read_rows(path):
        if len(cols) != 4:
            raise LineDataError(path, lineno, f"expected 4 columns, got {len(cols)}")
        try:
            l, j = int(cols[0]), float(Fraction(cols[1]))
            table[(l, j)] = (float(cols[2]), float(cols[3]))
        except ValueError as exc:
            raise LineDataError(path, lineno, str(exc)) from None
    return table


QUANTUM_DEFECTS = _load_defects()


def quantum_defect(l: int, j: float, n: float) -> float:
    """Rydberg-Ritz defect delta0 + delta2/(n - delta0)^2; ``n = inf`` gives delta0."""
    try:
        d0, d2 = QUANTUM_DEFECTS[(int(l), float(j))]
    except KeyError:
        raise UnsupportedStateError(
            f"no quantum defects for l={l}, j={j} (series {_series(l)})") from None
    if math.isinf(n):
        return d0
    return d0 + d2 / (n - d0) ** 2


def _series(l):
    return _SERIES[l] if 0 <= l < len(_SERIES) else f"l={l}"


@dataclass(frozen=True)
class AtomicState:
    n: int
    l: int
    j: float
    species: str = SPECIES

    def __post_init__(self):
        if self.n < 5 or not 0 <= self.l < self.n:
            raise UnsupportedStateError(f"invalid quantum numbers n={self.n}, l={self.l}")
        if not any(math.isclose(self.j, self.l + s) for s in (-0.5, 0.5)) or self.j < 0:
            raise UnsupportedStateError(f"j={self.j} incompatible with l={self.l}")
        object.__setattr__(self, "j", float(self.j))

    @classmethod
    def parse(cls, label: str) -> "AtomicState":
        """Parse labels like ``"32S1/2"``, ``"5P3/2"`` or ``"32 S_{1/2}"``."""
        m = _LABEL_RE.match(label)
        if not m:
            raise UnsupportedStateError(f"cannot parse state label {label!r}")
        n, letter, twoj = int(m.group(1)), m.group(2).upper(), int(m.group(3))
        if letter not in _SERIES:
            raise UnsupportedStateError(f"unknown series {letter!r} in {label!r}")
        return cls(n, _SERIES.index(letter), twoj / 2)

    @property
    def label(self) -> str:
        return f"{self.n}{_series(self.l)}{int(round(2 * self.j))}/2"

    @property
    def n_star(self) -> float:
        ns = self.n - quantum_defect(self.l, self.j, self.n)
        if ns <= 0:
            raise UnsupportedStateError(f"non-positive effective quantum number for {self.label}")
        return ns

    @property
    def energy(self) -> float:
        return state_energy(self)

    def __str__(self):
        return self.label


def state_energy(s: AtomicState, const: PhysicalConstants = CODATA) -> float:
    """Binding energy -h c Ry_Rb / n*^2 in J."""
    return -const.h * const.c * const.Ry_Rb / s.n_star**2


# --- radial wavefunctions -------------------------------------------------

_NUMEROV_STEP = 0.005   # in x = sqrt(r / a_B)
_INNER_RADIUS = 1.0     # a_B; inner cut of the Coulomb approximation


@lru_cache(maxsize=256)
def _coulomb_wavefunction(n_star: float, l: int, step: float = _NUMEROV_STEP):
    """Normalised y(x) = r^(3/4) R(r) on the grid x_i = x_in + i*step.

    Integrates the pure-Coulomb radial equation at energy -1/(2 n*^2) inward
    from r = 2 n* (n* + 15), where the bound solution is exponentially small.
    """
    x_in = math.sqrt(_INNER_RADIUS)
    x_out = math.sqrt(2.0 * n_star * (n_star + 15.0))
    npts = int((x_out - x_in) / step) + 1
    x = x_in + step * np.arange(npts)
    r = x * x
    g = 4.0 * r * (2.0 * (-1.0 / r + 0.5 / n_star**2) + l * (l + 1) / r**2) + 0.75 / r
    c = 1.0 - step * step * g / 12.0
    d = 2.0 + 10.0 * step * step * g / 12.0
    y = np.zeros(npts)
    y[-1] = 1e-12
    y[-2] = 2e-12
    c_list, d_list = c.tolist(), d.tolist()
    yl = y.tolist()
    for i in range(npts - 2, 0, -1):
        yl[i - 1] = (d_list[i] * yl[i] - c_list[i + 1] * yl[i + 1]) / c_list[i - 1]
    y = np.asarray(yl)
    norm2 = 2.0 * np.trapezoid(y * y * x * x, x)
    if not (np.isfinite(norm2) and norm2 > 0):
        raise NumericalError("radial wavefunction normalisation failed",
                             {"n_star": n_star, "l": l, "points": npts, "norm2": norm2})
    return x, y / math.sqrt(norm2)


def radial_matrix_element(a: AtomicState, b: AtomicState) -> float:
    """Radial dipole integral <a|r|b> in units of a_B (positive by convention)."""
    if abs(a.l - b.l) != 1 or abs(a.j - b.j) > 1:
        raise SelectionRuleError(f"dipole transition {a.label} <-> {b.label} is forbidden")
    if a.n < RYDBERG_MIN_N or b.n < RYDBERG_MIN_N:
        raise UnsupportedStateError(
            f"Coulomb approximation needs n >= {RYDBERG_MIN_N}; use line data for {a.label}, {b.label}")
    x1, y1 = _coulomb_wavefunction(round(a.n_star, 12), a.l)
    x2, y2 = _coulomb_wavefunction(round(b.n_star, 12), b.l)
    m = min(x1.size, x2.size)
    x = x1[:m]
    value = 2.0 * np.trapezoid(y1[:m] * y2[:m] * x**4, x)
    if not np.isfinite(value):
        raise NumericalError("radial integral is not finite",
                             {"states": (a.label, b.label), "points": m})
    return abs(float(value))


def angular_factor(s_half: AtomicState, p: AtomicState) -> float:
    """|<S1/2||d||P_j>|^2 / (e <S|r|P>)^2 = (2j+1)/3 for alkali one-electron states."""
    if s_half.l != 0 or p.l != 1:
        raise UnsupportedStateError("only S1/2 <-> P_j reductions are implemented")
    return (2.0 * p.j + 1.0) / 3.0


# --- line data ------------------------------------------------------------

@dataclass(frozen=True)
class Transition:
    lower: AtomicState
    upper: AtomicState
    omega: float            # rad/s, > 0
    reduced_dipole: float   # C m, Edmonds-normalised <lower||d||upper>

    def __post_init__(self):
        if abs(self.lower.l - self.upper.l) != 1 or abs(self.lower.j - self.upper.j) > 1:
            raise SelectionRuleError(f"{self.lower.label} -> {self.upper.label} is not E1-allowed")
        if not self.omega > 0:
            raise ConfigurationError(f"transition frequency must be positive, got {self.omega}")

    def partner(self, center: AtomicState) -> AtomicState:
        return self.upper if center == self.lower else self.lower


def line_data_path() -> Path:
    env = os.environ.get(DATA_ENV_VAR)
    return Path(env) if env else Path(str(_data_path("rb87_lines.dat")))


def load_line_data(path=None, const: PhysicalConstants = CODATA) -> list[Transition]:
    """Parse a line-data file of ``lower upper wavelength_nm dipole_ea0`` rows."""
    path = Path(path) if path is not None else line_data_path()
    out = []
    for lineno, cols in _read_rows(path):
        if len(cols) != 4:
            raise LineDataError(path, lineno, f"expected 4 columns, got {len(cols)}")
        try:
            lower, upper = AtomicState.parse(cols[0]), AtomicState.parse(cols[1])
            wavelength, dipole = float(cols[2]) * 1e-9, float(cols[3])
        except (ValueError, UnsupportedStateError) as exc:
            raise LineDataError(path, lineno, str(exc)) from None
        if not (wavelength > 0 and dipole >= 0):
            raise LineDataError(path, lineno, "wavelength must be > 0 and dipole >= 0")
        try:
            out.append(Transition(lower, upper, 2 * math.pi * const.c / wavelength,
                                  float(au_to_si_dipole(dipole, const))))
        except (SelectionRuleError, ConfigurationError) as exc:
            raise LineDataError(path, lineno, str(exc)) from None
    return out


# --- transition tables ----------------------------------------------------

@dataclass(frozen=True)
class TransitionTable:
    center: AtomicState
    transitions: tuple
    truncation_window: int
    signed_omegas: np.ndarray = field(init=False, repr=False, compare=False)
    dipoles_sq: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.transitions:
            raise ConfigurationError(f"empty transition table for {self.center.label}")
        partners = set()
        for t in self.transitions:
            if self.center not in (t.lower, t.upper):
                raise ConfigurationError(f"{t} does not involve {self.center.label}")
            p = t.partner(self.center)
            if p in partners:
                raise ConfigurationError(f"duplicate partner {p.label}")
            partners.add(p)
        # omega_kn = (E_k - E_n)/hbar: negative for partners below the centre
        w = np.array([t.omega if t.lower == self.center else -t.omega for t in self.transitions])
        d2 = np.array([t.reduced_dipole**2 for t in self.transitions])
        w.flags.writeable = False
        d2.flags.writeable = False
        object.__setattr__(self, "signed_omegas", w)
        object.__setattr__(self, "dipoles_sq", d2)

    def __len__(self):
        return len(self.transitions)

    @property
    def multiplicity(self) -> float:
        return 2.0 * self.center.j + 1.0

    @property
    def dominant_frequency(self) -> float:
        """|omega| of the transition with the largest |d|^2 / |omega| weight."""
        w = np.abs(self.signed_omegas)
        return float(w[np.argmax(self.dipoles_sq / w)])

    def downward(self):
        return self.signed_omegas < 0


def _rydberg_partners(center: AtomicState, window: int):
    e0 = center.energy
    out = []
    for j in (0.5, 1.5):
        below, above = [], []
        for n in range(max(RYDBERG_MIN_N, center.n - window - 2), center.n + window + 3):
            p = AtomicState(n, 1, j)
            (below if p.energy < e0 else above).append(p)
        out += below[-window:] + above[:window]
    return out


def build_transition_table(s: AtomicState, window: int = DEFAULT_WINDOW,
                           line_data=None, const: PhysicalConstants = CODATA) -> TransitionTable:
    """Dipole-coupled partners of ``s``.

    The 5S1/2 ground state takes its D1/D2 lines from the line-data file.
    A Rydberg nS1/2 state couples to the ``window`` nearest nP1/2 and nP3/2
    levels on each side in energy (for 32S: 27P..36P, 20 transitions).
    Partners below n = 10 are outside the Coulomb approximation and dropped.
    """
    if s.l != 0 or s.j != 0.5:
        raise UnsupportedStateError(f"only nS1/2 centre states are supported, got {s.label}")
    if window < 1:
        raise ConfigurationError(f"window must be >= 1 (got {window}); table would be empty")
    if s.n < RYDBERG_MIN_N:
        lines = load_line_data(line_data, const) if not isinstance(line_data, list) else line_data
        chosen = [t for t in lines if s in (t.lower, t.upper)]
        return TransitionTable(s, tuple(chosen), window)
    transitions = []
    for p in _rydberg_partners(s, window):
        radial = radial_matrix_element(s, p)
        d = math.sqrt(angular_factor(s, p)) * float(au_to_si_dipole(radial, const))
        omega = abs(p.energy - s.energy) / const.hbar
        lower, upper = (s, p) if p.energy > s.energy else (p, s)
        transitions.append(Transition(lower, upper, omega, d))
    return TransitionTable(s, tuple(transitions), window)


def polarizability_imag_freq(t: TransitionTable, xi, const: PhysicalConstants = CODATA):
    """Scalar dynamic polarizability alpha(i xi) in C m^2 / V.

    Downward transitions enter with negative omega_kn, so an excited state can
    have a negative response at low frequency.
    """
    xi = np.asarray(xi, dtype=float)
    w = t.signed_omegas
    terms = w * t.dipoles_sq / (w * w + xi[..., None] ** 2)
    return 2.0 / (3.0 * const.hbar * t.multiplicity) * terms.sum(axis=-1)
