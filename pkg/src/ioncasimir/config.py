"""Run configuration files (TOML).

Lengths are given in nm, energies in eV and temperature in K; everything is
converted to SI here. A minimal file::

    temperature_K = 300

    [stack]
    half_space = "silica"
    slab = "gold_drude"
    separation_nm = 100
    thickness_nm = 50

    [gap]
    water_material = "water"
    lambda_D_nm = 100        # or concentration_mol_per_L; inf switches ions off

Material entries name a shipped material or a path to a material file,
resolved relative to the configuration file.
"""
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .electrolyte import (
    DEFAULT_GAMMA_IONS,
    ElectrolyteGap,
    debye_length_from_concentration,
    ion_density_from_molarity,
)
from .engine import LayerStack, QuadratureSpec
from .materials import MaterialError, eps_static, load_material, shipped_material, shipped_material_names
from .quantities import CONSTANTS, DEFAULT_TEMPERATURE, angular_to_ev, ev_to_angular

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = ["ConfigError", "SweepSpec", "OutputSpec", "RunConfig", "load_config", "config_from_dict", "MIN_SEPARATION", "MIN_THICKNESS"]

NM = 1e-9
#: Shortest accepted separation and slab thickness (m).
MIN_SEPARATION = 0.1 * NM
MIN_THICKNESS = 1.0 * NM

GOLD_MODELS = {"drude": "gold_drude", "tabulated": "gold_tabulated"}


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


@dataclass(frozen=True)
class SweepSpec:
    """Log-spaced sweep of ``variable`` ("L" or "lambda_D") between ``min`` and ``max`` (m)."""

    variable: str = "L"
    min: float = 1.0 * NM
    max: float = 5000.0 * NM
    count: int = 30

    def grid(self):
        return np.geomspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class OutputSpec:
    format: str = "csv"
    path: str = "-"


@dataclass(frozen=True)
class RunConfig:
    stack: LayerStack
    spec: QuadratureSpec = field(default_factory=QuadratureSpec)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    source: str = "<defaults>"

    @property
    def temperature(self):
        return self.stack.temperature


def _get(doc, key, kind, where, default=None, required=False):
    if key not in doc:
        if required:
            raise ConfigError(f"{where}.{key}: missing required field")
        return default
    v = doc[key]
    if kind is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{where}.{key}: expected a number, got {v!r}")
        return float(v)
    if kind is int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{where}.{key}: expected an integer, got {v!r}")
        return v
    if kind is bool:
        if not isinstance(v, bool):
            raise ConfigError(f"{where}.{key}: expected true or false, got {v!r}")
        return v
    if not isinstance(v, kind):
        raise ConfigError(f"{where}.{key}: expected {kind.__name__}, got {v!r}")
    return v


def _check_keys(doc, allowed, where):
    extra = set(doc) - set(allowed)
    if extra:
        raise ConfigError(f"{where}: unknown field(s) {sorted(extra)}")


def _material(ref, where, base_dir):
    try:
        if ref in shipped_material_names():
            return shipped_material(ref)
        path = Path(ref)
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        if not path.exists():
            raise ConfigError(f"{where}: {ref!r} is neither a shipped material {shipped_material_names()} nor a file")
        return load_material(path)
    except MaterialError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def config_from_dict(doc, source="<dict>", base_dir=None):
    """Build a :class:`RunConfig` from a parsed document, validating every field."""
    _check_keys(doc, {"temperature_K", "stack", "gap", "quadrature", "sweep", "output"}, "<top>")
    T = _get(doc, "temperature_K", float, "<top>", DEFAULT_TEMPERATURE)
    if not (T > 0 and math.isfinite(T)):
        raise ConfigError("<top>.temperature_K: must be positive")

    st = doc.get("stack", {})
    _check_keys(st, {"half_space", "slab", "separation_nm", "thickness_nm", "local_gap"}, "[stack]")
    half = _material(_get(st, "half_space", str, "[stack]", "silica"), "[stack].half_space", base_dir)
    slab = _material(_get(st, "slab", str, "[stack]", "gold_drude"), "[stack].slab", base_dir)
    L = _get(st, "separation_nm", float, "[stack]", 100.0) * NM
    d = _get(st, "thickness_nm", float, "[stack]", 50.0) * NM
    if not (L >= MIN_SEPARATION and math.isfinite(L)):
        raise ConfigError(f"[stack].separation_nm: must be >= {MIN_SEPARATION / NM:g} nm, got {L / NM:g}")
    if not (d >= MIN_THICKNESS and math.isfinite(d)):
        raise ConfigError(f"[stack].thickness_nm: must be >= {MIN_THICKNESS / NM:g} nm, got {d / NM:g}")
    local = _get(st, "local_gap", bool, "[stack]", False)

    g = doc.get("gap", {})
    _check_keys(g, {"water_material", "lambda_D_nm", "concentration_mol_per_L", "gamma_ions_ev", "ion_mass_u", "temperature_K"}, "[gap]")
    water = _material(_get(g, "water_material", str, "[gap]", "water"), "[gap].water_material", base_dir)
    if "temperature_K" in g:
        T = _get(g, "temperature_K", float, "[gap]")
    if "lambda_D_nm" in g and "concentration_mol_per_L" in g:
        raise ConfigError("[gap]: give either lambda_D_nm or concentration_mol_per_L, not both")
    if "concentration_mol_per_L" in g:
        conc = _get(g, "concentration_mol_per_L", float, "[gap]")
        if not conc > 0:
            raise ConfigError("[gap].concentration_mol_per_L: must be positive")
        try:
            lam = debye_length_from_concentration(ion_density_from_molarity(conc), eps_static(water), T)
        except (ValueError, MaterialError) as exc:
            raise ConfigError(f"[gap]: {exc}") from None
    else:
        lam = _get(g, "lambda_D_nm", float, "[gap]", 100.0) * NM
        if not lam > 0:
            raise ConfigError("[gap].lambda_D_nm: must be positive (inf switches the ions off)")
    gamma = ev_to_angular(_get(g, "gamma_ions_ev", float, "[gap]", angular_to_ev(DEFAULT_GAMMA_IONS)))
    mass = _get(g, "ion_mass_u", float, "[gap]", 23.0)
    if not mass > 0:
        raise ConfigError("[gap].ion_mass_u: must be positive")
    try:
        gap = ElectrolyteGap(water, lam, gamma, mass * CONSTANTS.atomic_mass_unit, T)
        stack = LayerStack(half, gap, L, slab, d, local)
    except (ValueError, MaterialError) as exc:
        raise ConfigError(f"[gap]: {exc}") from None

    q = doc.get("quadrature", {})
    _check_keys(q, {"rel_tol", "abs_tol", "max_subdivisions", "matsubara_tail_tol"}, "[quadrature]")
    try:
        spec = QuadratureSpec(
            _get(q, "rel_tol", float, "[quadrature]", 1e-10),
            _get(q, "abs_tol", float, "[quadrature]", 0.0),
            _get(q, "max_subdivisions", int, "[quadrature]", 1024),
            _get(q, "matsubara_tail_tol", float, "[quadrature]", 1e-8),
        )
    except ValueError as exc:
        raise ConfigError(f"[quadrature]: {exc}") from None

    s = doc.get("sweep", {})
    _check_keys(s, {"variable", "min_nm", "max_nm", "count"}, "[sweep]")
    var = _get(s, "variable", str, "[sweep]", "L")
    if var not in ("L", "lambda_D"):
        raise ConfigError(f"[sweep].variable: must be 'L' or 'lambda_D', got {var!r}")
    lo = _get(s, "min_nm", float, "[sweep]", 1.0)
    hi = _get(s, "max_nm", float, "[sweep]", 5000.0)
    count = _get(s, "count", int, "[sweep]", 30)
    if not (0 < lo < hi and math.isfinite(hi)):
        raise ConfigError(f"[sweep]: need 0 < min_nm < max_nm, got {lo:g}, {hi:g}")
    if count < 2:
        raise ConfigError("[sweep].count: must be >= 2")
    if var == "L" and lo * NM < MIN_SEPARATION:
        raise ConfigError(f"[sweep].min_nm: separations below {MIN_SEPARATION / NM:g} nm are rejected")
    sweep = SweepSpec(var, lo * NM, hi * NM, count)

    o = doc.get("output", {})
    _check_keys(o, {"format", "path"}, "[output]")
    fmt = _get(o, "format", str, "[output]", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"[output].format: must be 'csv' or 'json', got {fmt!r}")
    output = OutputSpec(fmt, _get(o, "path", str, "[output]", "-"))
    return RunConfig(stack, spec, sweep, output, source)


def load_config(path=None):
    """Parse a configuration file; ``None`` gives the built-in defaults."""
    if path is None:
        return config_from_dict({}, "<defaults>")
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(doc, str(path), path.parent)


def apply_overrides(cfg, L=None, lambda_D=None, temperature=None, gold_model=None, local_water=None,
                    thickness=None, jobs=None, fmt=None, output=None):
    """Copy of ``cfg`` with command-line overrides (lengths in m)."""
    stack = cfg.stack
    if L is not None:
        if not L >= MIN_SEPARATION:
            raise ConfigError(f"--L: must be >= {MIN_SEPARATION / NM:g} nm")
        stack = stack.with_(separation=L)
    if thickness is not None:
        if not thickness >= MIN_THICKNESS:
            raise ConfigError(f"--thickness: must be >= {MIN_THICKNESS / NM:g} nm")
        stack = stack.with_(thickness=thickness)
    if lambda_D is not None:
        if not lambda_D > 0:
            raise ConfigError("--lambda-D: must be positive")
        stack = stack.with_(debye_length=lambda_D)
    if temperature is not None:
        if not temperature > 0:
            raise ConfigError("--temperature: must be positive")
        stack = stack.with_(temperature=temperature)
    if gold_model is not None:
        stack = stack.with_(slab=shipped_material(GOLD_MODELS[gold_model]))
    if local_water:
        stack = stack.with_(local_gap=True)
    out = cfg.output
    if fmt is not None or output is not None:
        out = OutputSpec(fmt or out.format, output or out.path)
    return replace(cfg, stack=stack, output=out)
