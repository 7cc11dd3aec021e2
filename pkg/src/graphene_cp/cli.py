"""Command-line front end.

Settings resolve as command-line flag, then ``--config`` file, then built-in
default. The config file is flat ``key = value`` text with ``#`` comments;
keys use the long option names with underscores (``v_tilde = 0.0033``).

Exit status is 0 on success, 2 for usage errors and 3 when a numerical
procedure fails to converge. Warnings go to stderr and never into output.
"""

from __future__ import annotations

import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import click
import numpy as np

from . import __version__
from .casimir_polder import CPConfig, CPQuery, potential_total
from .constants import CODATA, ROUNDED, V_TILDE_DEFAULT
from .errors import GrapheneCPError, NumericalError
from .graphene import GrapheneModel
from .membrane import MembraneSpec, atoms_needed, force_direction, force_for_amplitude, fundamental_frequency, spring_constant
from .report import QuantityReport, ReportRow, ScenarioReport
from .rubidium import DEFAULT_WINDOW, RYDBERG_MIN_N, AtomicState, build_transition_table
from .scenarios import ScenarioConfig, min_distance, reproduce_table1, reproduce_table2
from .scenarios import round_count

COMMANDS = ("cp", "force", "sweep", "table1", "table2", "membrane", "atoms-needed")


def _flag(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_float(text):
    return None if text in (None, "", "none") else float(text)


_cp_defaults = CPConfig()
_membrane_defaults = MembraneSpec()

# key -> (default, parser for config-file text)
SETTINGS = {
    "state": ("32S1/2", str),
    "distance": (200e-9, float),
    "range": ("1e-8:5e-7:50:log", str),
    "temperature": (0.0, float),
    "format": ("csv", str),
    "output": (None, str),
    "v_tilde": (V_TILDE_DEFAULT, float),
    "alpha_fs": (None, _optional_float),
    "rounded_constants": (False, _flag),
    "outer_rel_tol": (_cp_defaults.outer_rel_tol, float),
    "inner_rel_tol": (_cp_defaults.inner_rel_tol, float),
    "matsubara_rel_tol": (_cp_defaults.matsubara_rel_tol, float),
    "max_subdivisions": (_cp_defaults.max_subdivisions, int),
    "resonant_contraction": (_cp_defaults.resonant_contraction, str),
    "window": (DEFAULT_WINDOW, int),
    "rounding": ("ceiling", str),
    "full_cp": (False, _flag),
    "jobs": (1, int),
    "youngs_modulus": (_membrane_defaults.youngs_modulus, float),
    "density": (_membrane_defaults.density, float),
    "thickness": (_membrane_defaults.thickness, float),
    "width": (_membrane_defaults.width, float),
    "length": (_membrane_defaults.length, float),
    "tension": (_membrane_defaults.tension, float),
    "clamping": (_membrane_defaults.clamping, float),
    "amplitude": (1e-9, float),
    "f_required": (None, _optional_float),
    "f_per_atom": (None, _optional_float),
}


class ConfigError(click.UsageError):
    pass


def read_config_file(path) -> dict:
    """Parse a flat ``key = value`` file into raw strings; unknown keys are errors."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in SETTINGS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def parse_range(text: str) -> np.ndarray:
    """``start:stop:points:lin|log`` to an array of distances."""
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError(f"range {text!r} must look like start:stop:points:lin|log")
    try:
        start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"range {text!r} has a non-numeric field") from None
    spacing = parts[3].strip().lower()
    if points < 2:
        raise ConfigError(f"range needs at least 2 points, got {points}")
    if not stop > start:
        raise ConfigError(f"range stop must exceed start ({start} >= {stop})")
    if spacing == "lin":
        return np.linspace(start, stop, points)
    if spacing == "log":
        if start <= 0:
            raise ConfigError("log range needs a positive start")
        return np.geomspace(start, stop, points)
    raise ConfigError(f"range spacing must be 'lin' or 'log', got {parts[3]!r}")


@dataclass(frozen=True)
class RunConfig:
    command: str
    state: AtomicState
    distance: float
    distances: tuple
    temperature: float
    graphene: GrapheneModel
    cp: CPConfig
    membrane: MembraneSpec
    amplitude: float
    window: int
    rounding: str
    full_cp: bool
    jobs: int
    f_required: float | None
    f_per_atom: float | None
    fmt: str
    output: Path | None

    def scenario(self) -> ScenarioConfig:
        return ScenarioConfig(cp=self.cp, graphene=self.graphene, membrane=self.membrane,
                              amplitude=self.amplitude, window=self.window,
                              rounding=self.rounding, full_cp=self.full_cp, jobs=self.jobs)

    @property
    def required_force(self) -> float:
        if self.f_required is not None:
            return self.f_required
        return force_for_amplitude(self.membrane, self.amplitude)


def parse_config(command: str, cli_values: dict, config_path=None) -> RunConfig:
    """Merge flag values (None = not given), config file and defaults."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    file_values = read_config_file(config_path) if config_path else {}
    v = {}
    for key, (default, parse) in SETTINGS.items():
        if cli_values.get(key) is not None:
            v[key] = cli_values[key]
        elif key in file_values:
            try:
                v[key] = parse(file_values[key])
            except ValueError as exc:
                raise ConfigError(f"config key {key!r}: {exc}") from None
        else:
            v[key] = default
    if v["format"] not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {v['format']!r}")
    try:
        state = AtomicState.parse(v["state"])
        const = ROUNDED if v["rounded_constants"] else CODATA
        alpha = v["alpha_fs"] if v["alpha_fs"] is not None else const.alpha_fs
        graphene = GrapheneModel(v_tilde=v["v_tilde"], alpha_fs=alpha)
        cp = CPConfig(outer_rel_tol=v["outer_rel_tol"], inner_rel_tol=v["inner_rel_tol"],
                      matsubara_rel_tol=v["matsubara_rel_tol"],
                      max_subdivisions=v["max_subdivisions"],
                      resonant_contraction=v["resonant_contraction"], const=const)
        membrane = MembraneSpec(v["youngs_modulus"], v["density"], v["thickness"], v["width"],
                                v["length"], v["tension"], v["clamping"],
                                allow_custom_clamping=True)
        if not v["distance"] > 0:
            raise ValueError(f"distance must be positive, got {v['distance']}")
        if v["temperature"] < 0:
            raise ValueError(f"temperature must be non-negative, got {v['temperature']}")
        if v["rounding"] not in ("ceiling", "nearest"):
            raise ValueError(f"rounding must be ceiling or nearest, got {v['rounding']!r}")
        if v["jobs"] < 1 or v["window"] < 1:
            raise ValueError("jobs and window must be >= 1")
        if not v["amplitude"] > 0:
            raise ValueError(f"amplitude must be positive, got {v['amplitude']}")
    except (GrapheneCPError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    distances = tuple(parse_range(v["range"])) if command == "sweep" else (v["distance"],)
    return RunConfig(
        command=command, state=state, distance=v["distance"], distances=distances,
        temperature=v["temperature"], graphene=graphene, cp=cp, membrane=membrane,
        amplitude=v["amplitude"], window=v["window"], rounding=v["rounding"],
        full_cp=v["full_cp"], jobs=v["jobs"], f_required=v["f_required"],
        f_per_atom=v["f_per_atom"], fmt=v["format"],
        output=Path(v["output"]) if v["output"] else None)


# --- execution --------------------------------------------------------------

def _evaluate_at(args):
    table, graphene, z, T, cp, with_force = args
    return potential_total(CPQuery(table, graphene, z, T), cp, with_force=with_force)


def _cp_rows(cfg: RunConfig, with_force: bool, n_atoms: bool):
    table = build_transition_table(cfg.state, cfg.window, const=cfg.cp.const)
    if cfg.state.n >= RYDBERG_MIN_N:
        z_min = min_distance(cfg.state.n, cfg.cp.const)
        close = [z for z in cfg.distances if z < z_min]
        if close:
            warnings.warn(f"{len(close)} distance(s) below z_min = {z_min:.3e} m for "
                          f"{cfg.state.label}; the orbit overlaps the sheet")
    tasks = [(table, cfg.graphene, z, cfg.temperature, cfg.cp, with_force) for z in cfg.distances]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_evaluate_at, tasks))
    else:
        results = [_evaluate_at(t) for t in tasks]
    f_req = cfg.required_force
    rows = []
    for r in results:
        count = None
        if n_atoms and r.f_total:
            count = round_count(f_req / abs(r.f_total), cfg.rounding)
        rows.append(ReportRow(r.state, r.z_A, r.temperature, r.u_nonres, r.u_res, r.u_total,
                              r.f_total, count, "computed"))
    return rows


def _meta(cfg: RunConfig) -> dict:
    return {
        "command": cfg.command,
        "package": __version__,
        "state": cfg.state.label,
        "temperature_K": cfg.temperature,
        "window": cfg.window,
        "v_tilde": cfg.graphene.v_tilde,
        "alpha_fs": cfg.graphene.alpha_fs,
        "outer_rel_tol": cfg.cp.outer_rel_tol,
        "inner_rel_tol": cfg.cp.inner_rel_tol,
        "matsubara_rel_tol": cfg.cp.matsubara_rel_tol,
        "resonant_contraction": cfg.cp.resonant_contraction,
        "rounding": cfg.rounding,
    }


def _membrane_report(cfg: RunConfig) -> QuantityReport:
    m = cfg.membrane
    rows = [
        ("fundamental_frequency", fundamental_frequency(m), "Hz"),
        ("effective_mass", m.effective_mass, "kg"),
        ("spring_constant", spring_constant(m), "N/m"),
        ("amplitude", cfg.amplitude, "m"),
        ("force_for_amplitude", force_for_amplitude(m, cfg.amplitude), "N"),
    ]
    meta = {"command": "membrane", "package": __version__,
            **{k: val for k, val in asdict(m).items() if k != "allow_custom_clamping"}}
    return QuantityReport(rows, meta)


def _atoms_report(cfg: RunConfig) -> QuantityReport:
    if cfg.f_per_atom is None:
        raise ConfigError("atoms-needed requires --f-per-atom")
    f_req = cfg.required_force
    try:
        ceiling = atoms_needed(f_req, cfg.f_per_atom)
    except GrapheneCPError as exc:
        raise ConfigError(str(exc)) from None
    rows = [
        ("f_required", f_req, "N"),
        ("f_per_atom", cfg.f_per_atom, "N"),
        ("n_atoms", ceiling, "1"),
        ("n_atoms_nearest", round_count(f_req / abs(cfg.f_per_atom), "nearest"), "1"),
        ("direction", force_direction(cfg.f_per_atom), ""),
    ]
    return QuantityReport(rows, {"command": "atoms-needed", "package": __version__,
                                 "rounding": "ceiling"})


def build_report(cfg: RunConfig):
    if cfg.command == "cp":
        return ScenarioReport(_cp_rows(cfg, with_force=False, n_atoms=False), _meta(cfg))
    if cfg.command == "force":
        return ScenarioReport(_cp_rows(cfg, with_force=True, n_atoms=True), _meta(cfg))
    if cfg.command == "sweep":
        return ScenarioReport(_cp_rows(cfg, with_force=True, n_atoms=False), _meta(cfg))
    if cfg.command == "table1":
        return reproduce_table1(cfg.scenario())
    if cfg.command == "table2":
        return reproduce_table2(cfg.scenario())
    if cfg.command == "membrane":
        return _membrane_report(cfg)
    return _atoms_report(cfg)


def run(cfg: RunConfig) -> int:
    """Execute ``cfg``, write its output and return the exit status."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            report = build_report(cfg)
        except NumericalError as exc:
            _flush(caught)
            click.echo(f"error: {exc}", err=True)
            if exc.diagnostics:
                click.echo(f"diagnostics: {exc.diagnostics}", err=True)
            return 3
        except GrapheneCPError as exc:
            _flush(caught)
            raise ConfigError(str(exc)) from None
    _flush(caught)
    text = report.render(cfg.fmt)
    if cfg.output is None:
        click.echo(text, nl=False)
    else:
        cfg.output.write_text(text)
        cfg.output.with_name(cfg.output.name + ".meta.json").write_text(report.sidecar())
    return 0


def _flush(caught):
    seen = set()
    for w in caught:
        msg = str(w.message)
        if msg not in seen:
            seen.add(msg)
            click.echo(f"warning: {msg}", err=True)


# --- click wiring -----------------------------------------------------------

def _common(f):
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="Flat key = value settings file."),
        click.option("--format", "format", type=click.Choice(["csv", "json"]), default=None),
        click.option("--output", "-o", default=None, help="Write here instead of stdout."),
    ]
    for opt in reversed(options):
        f = opt(f)
    return f


def _physics(f):
    options = [
        click.option("--state", default=None, help="Atomic state, e.g. 32S1/2 or 5S1/2."),
        click.option("--temperature", type=float, default=None, help="Kelvin."),
        click.option("--window", type=int, default=None, help="Partner levels per side."),
        click.option("--v-tilde", type=float, default=None, help="Fermi velocity over c."),
        click.option("--alpha-fs", type=float, default=None),
        click.option("--rounded-constants/--codata-constants", default=None,
                     help="Use alpha = 1/137 instead of CODATA."),
        click.option("--outer-rel-tol", type=float, default=None),
        click.option("--inner-rel-tol", type=float, default=None),
        click.option("--matsubara-rel-tol", type=float, default=None),
        click.option("--max-subdivisions", type=int, default=None),
        click.option("--resonant-contraction", type=click.Choice(["trace", "isotropic"]), default=None),
        click.option("--jobs", type=int, default=None, help="Worker processes."),
    ]
    for opt in reversed(options):
        f = opt(f)
    return f


def _mechanics(f):
    options = [
        click.option("--youngs-modulus", type=float, default=None, help="Pa."),
        click.option("--density", type=float, default=None, help="kg/m^3."),
        click.option("--thickness", type=float, default=None, help="m."),
        click.option("--width", type=float, default=None, help="m."),
        click.option("--length", type=float, default=None, help="m."),
        click.option("--tension", type=float, default=None, help="N."),
        click.option("--clamping", type=float, default=None, help="1.03 or 0.162."),
        click.option("--amplitude", type=float, default=None, help="Ripple amplitude, m."),
        click.option("--rounding", type=click.Choice(["ceiling", "nearest"]), default=None),
    ]
    for opt in reversed(options):
        f = opt(f)
    return f


def _execute(command, config_path, values):
    cfg = parse_config(command, values, config_path)
    sys.exit(run(cfg))


@click.group()
@click.version_option(__version__)
def main():
    """Casimir-Polder forces of Rb atoms on graphene and the ripples they drive."""


@main.command()
@_common
@_physics
@click.option("--distance", type=float, default=None, help="Atom-sheet distance, m.")
def cp(config_path, **values):
    """Nonresonant, resonant and total potential at one distance."""
    _execute("cp", config_path, values)


@main.command()
@_common
@_physics
@_mechanics
@click.option("--distance", type=float, default=None, help="Atom-sheet distance, m.")
def force(config_path, **values):
    """Force on one atom, and atoms needed for the ripple."""
    _execute("force", config_path, values)


@main.command()
@_common
@_physics
@click.option("--distance", "range", default=None, help="start:stop:points:lin|log, m.")
def sweep(config_path, **values):
    """Potentials and force over a range of distances."""
    _execute("sweep", config_path, values)


@main.command()
@_common
@_physics
@_mechanics
def table1(config_path, **values):
    """Rydberg forces and atom counts at 200 nm and z_min, 0 K and 300 K."""
    _execute("table1", config_path, values)


@main.command()
@_common
@_physics
@_mechanics
@click.option("--full-cp/--scaling-only", default=None,
              help="Also evaluate the full potential at z_min.")
def table2(config_path, **values):
    """Minimal atom numbers at z_min from the n^4 scaling law."""
    _execute("table2", config_path, values)


@main.command()
@_common
@_mechanics
def membrane(config_path, **values):
    """Resonance, spring constant and force for the ripple amplitude."""
    _execute("membrane", config_path, values)


@main.command("atoms-needed")
@_common
@_mechanics
@click.option("--f-required", type=float, default=None, help="N; defaults to the membrane force.")
@click.option("--f-per-atom", type=float, default=None, help="N per atom, signed.")
def atoms_needed_cmd(config_path, **values):
    """Atom count for a given per-atom force."""
    _execute("atoms-needed", config_path, values)
