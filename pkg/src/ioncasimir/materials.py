"""Dielectric functions of bulk media on the imaginary frequency axis.

Two model families are supported:

* oscillator sums, ``eps_inf + sum C w0^2/(w0^2 + xi^2 + g xi) + wp^2/(xi (xi + gamma))``;
* tabulated loss data ``eps''(omega)`` continued to ``eps(i xi)`` with the
  Kramers-Kronig relation, plus an analytic Drude piece below the table.

Materials are read from TOML files with the fields ``name``, ``eps_inf``,
``drude = {omega_p_ev, gamma_ev}``, ``oscillators = [{C, omega_ev, damping_ev}]``
and ``table_path``.
"""
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from .quantities import ev_to_angular

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = [
    "MaterialError",
    "DrudeTerm",
    "LorentzOscillator",
    "OscillatorModel",
    "TabulatedLossData",
    "Material",
    "eval_oscillator",
    "eval_tabulated",
    "eval_material",
    "eps_static",
    "load_loss_table",
    "load_material",
    "shipped_material",
    "shipped_material_names",
    "vacuum",
]

KK_TOL = 1e-8


class MaterialError(ValueError):
    """Invalid material definition or an evaluation outside the model's domain."""


def _positive(name, value, allow_zero=False):
    value = float(value)
    ok = value >= 0.0 if allow_zero else value > 0.0
    if not (np.isfinite(value) and ok):
        rel = "non-negative" if allow_zero else "positive"
        raise MaterialError(f"{name} must be {rel} and finite, got {value!r}")
    return value


@dataclass(frozen=True)
class DrudeTerm:
    """Free-carrier term ``omega_p^2/(xi (xi + gamma))``; ``gamma = 0`` is the plasma model."""

    omega_p: float
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "omega_p", _positive("omega_p", self.omega_p))
        object.__setattr__(self, "gamma", _positive("gamma", self.gamma, allow_zero=True))


@dataclass(frozen=True)
class LorentzOscillator:
    """Bound-charge term ``strength w0^2/(w0^2 + xi^2 + damping xi)``."""

    strength: float
    omega_res: float
    damping: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "strength", _positive("strength", self.strength))
        object.__setattr__(self, "omega_res", _positive("omega_res", self.omega_res))
        object.__setattr__(self, "damping", _positive("damping", self.damping, allow_zero=True))


@dataclass(frozen=True)
class OscillatorModel:
    """Background constant plus Lorentz oscillators and an optional Drude term."""

    eps_inf: float = 1.0
    drude: Optional[DrudeTerm] = None
    oscillators: Tuple[LorentzOscillator, ...] = ()

    def __post_init__(self):
        eps_inf = float(self.eps_inf)
        if not (np.isfinite(eps_inf) and eps_inf >= 1.0):
            raise MaterialError(f"eps_inf must be >= 1, got {eps_inf!r}")
        object.__setattr__(self, "eps_inf", eps_inf)
        object.__setattr__(self, "oscillators", tuple(self.oscillators))


@dataclass(frozen=True)
class TabulatedLossData:
    """Imaginary part ``eps''(omega)`` on a strictly increasing grid (rad/s).

    ``low_freq_extension`` supplies the Drude loss below the first row.
    """

    omega: Tuple[float, ...]
    eps_imag: Tuple[float, ...]
    low_freq_extension: Optional[DrudeTerm] = None

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        e = np.asarray(self.eps_imag, dtype=float)
        if w.ndim != 1 or w.shape != e.shape:
            raise MaterialError("omega and eps_imag must be one-dimensional and equally long")
        if w.size == 0:
            raise MaterialError("loss table is empty")
        if not np.all(np.isfinite(w)) or not np.all(np.isfinite(e)):
            raise MaterialError("loss table contains non-finite values")
        if w[0] <= 0.0 or np.any(np.diff(w) <= 0.0):
            raise MaterialError("omega must be positive and strictly increasing")
        if np.any(e < 0.0):
            raise MaterialError("eps_imag must be non-negative")
        object.__setattr__(self, "omega", tuple(float(x) for x in w))
        object.__setattr__(self, "eps_imag", tuple(float(x) for x in e))


@dataclass(frozen=True)
class Material:
    """A named dielectric function."""

    name: str
    model: Union[OscillatorModel, TabulatedLossData] = field(default_factory=OscillatorModel)

    @property
    def drude(self):
        """The free-carrier term governing ``xi -> 0``, or None for dielectrics."""
        if isinstance(self.model, OscillatorModel):
            return self.model.drude
        return self.model.low_freq_extension

    @property
    def is_metallic(self):
        return self.drude is not None

    def eps(self, xi):
        """Shorthand for :func:`eval_material`."""
        return eval_material(self, xi)


def vacuum():
    """Material with ``eps = 1`` everywhere."""
    return Material("vacuum", OscillatorModel())


def _is_scalar(x):
    return not isinstance(x, (np.ndarray, list, tuple))


def eval_oscillator(model, xi):
    """Evaluate an oscillator model at imaginary frequency ``i xi``.

    Scalars of any real number type (float, ``mpmath.mpf``) are evaluated with
    plain arithmetic, so the function can run at extended precision.

    Parameters
    ----------
    model : OscillatorModel
    xi : float or array_like
        Imaginary frequency in rad/s, ``xi >= 0``; ``xi = 0`` only without a Drude term.

    Returns
    -------
    float or ndarray
    """
    x = xi if _is_scalar(xi) else np.asarray(xi, dtype=float)
    if np.any(np.less(x, 0)):
        raise MaterialError("imaginary frequency must be non-negative")
    if model.drude is not None and np.any(np.equal(x, 0)):
        raise MaterialError("Drude permittivity diverges at zero frequency")
    eps = model.eps_inf + 0 * x
    for osc in model.oscillators:
        w2 = osc.omega_res**2
        eps = eps + osc.strength * w2 / (w2 + x * x + osc.damping * x)
    if model.drude is not None:
        d = model.drude
        eps = eps + d.omega_p**2 / (x * (x + d.gamma))
    return eps


def _drude_below(drude, w_min, xi):
    """Kramers-Kronig contribution of Drude loss on ``0 < omega < w_min``.

    Closed form of ``(2/pi) int_0^W wp^2 gamma/((w^2 + gamma^2)(w^2 + xi^2)) dw``.
    """
    wp2, g, W = drude.omega_p**2, drude.gamma, w_min
    xi = np.asarray(xi, dtype=float)
    out = np.empty_like(xi)
    near = np.abs(xi - g) <= 1e-6 * max(g, 1e-300)
    far = ~near
    x = xi[far]
    out[far] = wp2 * (np.arctan2(W, g) - g / x * np.arctan(W / x)) / (x * x - g * g)
    if np.any(near):
        # xi -> gamma limit: g'(gamma)/(2 gamma) with g(x) = atan(W/gamma) - (gamma/x) atan(W/x)
        out[near] = wp2 * (np.arctan(W / g) / g + W / (g * g + W * W)) / (2.0 * g)
    return 2.0 / np.pi * out


@lru_cache(maxsize=64)
def _kk_rule(data, subdivisions):
    """Nodes and weights for ``int omega eps''/(omega^2 + xi^2) d omega`` over the table.

    Works in ``t = ln omega`` with piecewise power-law (log-log) interpolation;
    intervals touching a zero loss value use linear interpolation. Returns
    ``(w2, weight)`` such that the integral is ``sum weight/(w2 + xi^2)``.
    """
    w = np.asarray(data.omega)
    e = np.asarray(data.eps_imag)
    if w.size < 2:
        return np.zeros(0), np.zeros(0)
    x, gw = np.polynomial.legendre.leggauss(16)
    t0, t1 = np.log(w[:-1]), np.log(w[1:])
    # sub-panels inside each table interval
    frac = np.arange(subdivisions + 1) / subdivisions
    edges = t0[:, None] + (t1 - t0)[:, None] * frac[None, :]
    a, b = edges[:, :-1], edges[:, 1:]
    half = 0.5 * (b - a)
    t = (0.5 * (a + b))[..., None] + half[..., None] * x
    wt = half[..., None] * gw
    pos = (e[:-1] > 0.0) & (e[1:] > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(pos, np.log(e[1:] / np.where(pos, e[:-1], 1.0)) / (t1 - t0), 0.0)
    tt = t - t0[:, None, None]
    loglog = e[:-1, None, None] * np.exp(slope[:, None, None] * tt)
    lin = e[:-1, None, None] + (e[1:] - e[:-1])[:, None, None] * (np.exp(t) - w[:-1, None, None]) / (w[1:] - w[:-1])[:, None, None]
    loss = np.where(pos[:, None, None], loglog, lin)
    om2 = np.exp(2.0 * t)
    return om2.ravel(), (wt * om2 * loss).ravel()


def _kk_sum(rule, xi2):
    w2, weight = rule
    out = np.empty_like(xi2)
    step = 256
    for i in range(0, xi2.size, step):
        blk = xi2[i:i + step]
        out[i:i + step] = (weight[None, :] / (w2[None, :] + blk[:, None])).sum(axis=1)
    return out


def eval_tabulated(data, xi):
    """Kramers-Kronig continuation of tabulated loss data to ``i xi``.

    ``eps(i xi) = 1 + (2/pi) int_0^inf omega eps''(omega)/(omega^2 + xi^2) d omega``,
    with the table integrated under log-log interpolation (sub-panels doubled
    until successive estimates agree to 1e-8 absolute plus relative) and the
    Drude extension integrated in closed form below the first row. Loss above
    the last row is taken as zero.

    Parameters
    ----------
    data : TabulatedLossData
    xi : float or array_like
        Imaginary frequency in rad/s; ``xi = 0`` only without an extension.

    Returns
    -------
    float or ndarray
    """
    scalar = _is_scalar(xi)
    x = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any(x < 0.0):
        raise MaterialError("imaginary frequency must be non-negative")
    if data.low_freq_extension is not None and np.any(x == 0.0):
        raise MaterialError("Drude permittivity diverges at zero frequency")
    xi2 = x * x
    sub = 1
    prev = _kk_sum(_kk_rule(data, sub), xi2)
    while True:
        sub *= 2
        cur = _kk_sum(_kk_rule(data, sub), xi2)
        if np.all(np.abs(cur - prev) <= KK_TOL * (1.0 + np.abs(cur))):
            break
        if sub >= 256:
            raise MaterialError("Kramers-Kronig quadrature did not reach 1e-8 with 256 sub-panels")
        prev = cur
    eps = 1.0 + 2.0 / np.pi * cur
    if data.low_freq_extension is not None:
        eps = eps + _drude_below(data.low_freq_extension, data.omega[0], x)
    return float(eps[0]) if scalar else eps.reshape(np.shape(xi))


def eval_material(material, xi):
    """Permittivity of ``material`` at ``i xi``."""
    if isinstance(material.model, OscillatorModel):
        return eval_oscillator(material.model, xi)
    return eval_tabulated(material.model, xi)


def eps_static(material):
    """Static permittivity ``eps(0)`` of a dielectric.

    Raises
    ------
    MaterialError
        If the material is metallic (has a Drude term).
    """
    if material.is_metallic:
        raise MaterialError(f"{material.name} is metallic at zero frequency")
    m = material.model
    if isinstance(m, OscillatorModel):
        return m.eps_inf + sum(o.strength for o in m.oscillators)
    return eval_tabulated(m, 0.0)


def _drude_from_block(block, where):
    try:
        return DrudeTerm(ev_to_angular(block["omega_p_ev"]), ev_to_angular(block["gamma_ev"]))
    except KeyError as exc:
        raise MaterialError(f"{where}: drude block is missing field {exc.args[0]!r}") from None
    except ValueError as exc:
        raise MaterialError(f"{where}: drude: {exc}") from None


def load_loss_table(path, low_freq_extension=None):
    """Read a two-column loss table (omega in eV, eps'') with '#' comments."""
    path = Path(path)
    try:
        with warnings.catch_warnings():
            # an empty file is reported below as a MaterialError
            warnings.simplefilter("ignore", UserWarning)
            arr = np.loadtxt(path, comments="#", ndmin=2)
    except OSError as exc:
        raise MaterialError(f"cannot read loss table {path}: {exc}") from None
    except ValueError as exc:
        raise MaterialError(f"{path}: malformed loss table: {exc}") from None
    if arr.size == 0:
        raise MaterialError(f"{path}: loss table is empty")
    if arr.shape[1] != 2:
        raise MaterialError(f"{path}: expected two columns, found {arr.shape[1]}")
    try:
        return TabulatedLossData(tuple(ev_to_angular(arr[:, 0])), tuple(arr[:, 1]), low_freq_extension)
    except ValueError as exc:
        raise MaterialError(f"{path}: {exc}") from None


def material_from_dict(doc, where="<material>", base_dir=None):
    """Build a :class:`Material` from a parsed TOML document."""
    known = {"name", "eps_inf", "drude", "oscillators", "table_path", "description"}
    unknown = set(doc) - known
    if unknown:
        raise MaterialError(f"{where}: unknown field(s) {sorted(unknown)}")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise MaterialError(f"{where}: field 'name' must be a non-empty string")
    drude = _drude_from_block(doc["drude"], where) if "drude" in doc else None
    if "table_path" in doc:
        if "oscillators" in doc:
            raise MaterialError(f"{where}: 'table_path' and 'oscillators' are mutually exclusive")
        table = Path(doc["table_path"])
        if not table.is_absolute() and base_dir is not None:
            table = Path(base_dir) / table
        return Material(name, load_loss_table(table, drude))
    oscillators = []
    for i, osc in enumerate(doc.get("oscillators", [])):
        try:
            oscillators.append(
                LorentzOscillator(
                    float(osc["C"]),
                    ev_to_angular(osc["omega_ev"]),
                    ev_to_angular(osc.get("damping_ev", 0.0)),
                )
            )
        except KeyError as exc:
            raise MaterialError(f"{where}: oscillators[{i}] is missing field {exc.args[0]!r}") from None
        except ValueError as exc:
            raise MaterialError(f"{where}: oscillators[{i}]: {exc}") from None
    try:
        model = OscillatorModel(float(doc.get("eps_inf", 1.0)), drude, tuple(oscillators))
    except ValueError as exc:
        raise MaterialError(f"{where}: {exc}") from None
    return Material(name, model)


def load_material(path):
    """Load a material definition file (TOML)."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise MaterialError(f"cannot read material file {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise MaterialError(f"{path}: {exc}") from None
    return material_from_dict(doc, where=str(path), base_dir=path.parent)


def _data_dir():
    return resources.files("ioncasimir") / "data"


def shipped_material_names():
    """Names of the material files bundled with the package."""
    return sorted(p.name[:-5] for p in _data_dir().iterdir() if p.name.endswith(".toml"))


@lru_cache(maxsize=None)
def shipped_material(name):
    """Load a bundled material: ``silica``, ``water``, ``gold_drude`` or ``gold_tabulated``."""
    ref = _data_dir() / f"{name}.toml"
    if not ref.is_file():
        raise MaterialError(f"no shipped material {name!r}; available: {shipped_material_names()}")
    with resources.as_file(ref) as p:
        return load_material(p)
