"""Command-line front end: ``ioncasimir {epsilon,reflect,energy,hamaker,validate}``.

Every command reads an optional TOML run configuration (see
:mod:`ioncasimir.config`); flags override single fields. Tables are written as
CSV with ``#`` header lines naming the units, or as JSON.

Exit codes: 0 success, 2 configuration error, 3 convergence failure,
4 validation failure.
"""
import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .config import GOLD_MODELS, ConfigError, apply_overrides, load_config
from .electrolyte import eps_transverse, kinematics
from .engine import ZETA3, total_free_energy
from .materials import MaterialError, eps_static, eval_material
from .quadrature import ConvergenceError
from .quantities import matsubara, matsubara_xi1
from .reflection import (
    ReflectionError,
    half_space_block,
    slab_block,
    zero_freq_metal,
    zero_freq_metal_local,
    zero_freq_silica,
)
from .validation import run_all

__all__ = ["main", "cmd_epsilon", "cmd_reflect", "cmd_energy", "cmd_hamaker", "cmd_validate"]

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_VALIDATION = 0, 2, 3, 4
NM = 1e-9
#: Large-distance limit of the Hamaker function with the ions present.
H_ASYMPTOTE = 0.75 * ZETA3


class ValidationFailure(Exception):
    pass


class Table:
    """Column names, units and rows of one output table."""

    def __init__(self, columns, units, rows, meta=None):
        self.columns, self.units, self.rows = list(columns), list(units), rows
        self.meta = meta or {}

    def to_csv(self):
        lines = [f"# {k}: {v}" for k, v in self.meta.items()]
        lines.append("# units: " + ", ".join(f"{c} [{u}]" for c, u in zip(self.columns, self.units)))
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"

    def to_json(self):
        return {"meta": self.meta, "units": dict(zip(self.columns, self.units)),
                "rows": [dict(zip(self.columns, (_jsonable(v) for v in row))) for row in self.rows]}


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return "%.17g" % float(v)


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def _emit(payload, cfg):
    if cfg.output.format == "json":
        obj = payload.to_json() if isinstance(payload, Table) else payload
        text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    else:
        text = payload.to_csv() if isinstance(payload, Table) else _dict_csv(payload)
    if cfg.output.path in ("-", ""):
        sys.stdout.write(text)
    else:
        with open(cfg.output.path, "w") as fh:
            fh.write(text)


def _dict_csv(d):
    scalars = [(k, v) for k, v in d.items() if isinstance(v, (int, float, bool, str))]
    return "\n".join(["# energies in J/m^2, lengths in m, Hamaker in kB T",
                      ",".join(k for k, _ in scalars), ",".join(_fmt(v) for _, v in scalars)]) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_epsilon(cfg, count=71):
    """Permittivities on ``xi`` in [1e11, 1e18] rad/s plus a row at ``xi_1``."""
    st = cfg.stack
    xi1 = matsubara_xi1(st.temperature)
    grid = np.geomspace(1e11, 1e18, count)
    xis = np.sort(np.append(grid, xi1))
    rows = []
    for xi in xis:
        rows.append((xi, float(eval_material(st.half_space, xi)), float(eps_transverse(st.gap, xi)),
                     float(eval_material(st.slab, xi)), bool(xi == xi1)))
    return Table(["xi", "eps1", "eps3", "eps2", "is_xi1"], ["rad/s", "1", "1", "1", "flag"], rows,
                 {"half_space": st.half_space.name, "gap": st.gap.water.name, "slab": st.slab.name,
                  "debye_length_m": st.gap.debye_length, "temperature_K": st.temperature})


def cmd_reflect(cfg, n=0, k_grid=None, limit_exponent=16):
    """All reflection amplitudes at Matsubara order ``n`` over ``k_grid`` (1/m).

    For ``n = 0`` the rows hold the closed forms; the ``p-l`` cross terms, which
    depend on the basis convention, are reported through their round-trip
    products evaluated at ``xi = xi_1 10^-limit_exponent``.
    """
    if int(n) != n or n < 0:
        raise ConfigError("--n: must be an integer >= 0")
    st, gap = cfg.stack, cfg.stack.gap
    k = np.geomspace(1e5, 1e10, 26) if k_grid is None else np.asarray(k_grid, dtype=float)
    if n == 0:
        r1pp, r1ll = zero_freq_silica(eps_static(st.half_space), gap.eps_b0, gap, k)
        if st.local_gap and gap.has_ions:
            r2pp = np.full_like(k, zero_freq_metal_local(gap, st.slab))
            r1ll = r2ll = np.zeros_like(k)
        else:
            r2pp, r2ll = zero_freq_metal(gap, st.slab, k)
        xi = matsubara_xi1(st.temperature) * 10.0 ** (-limit_exponent)
        kin = kinematics(gap, st.half_space, st.slab, xi, k)
        b1, b2 = half_space_block(gap, kin), slab_block(gap, kin, st.thickness)
        cols = ["k", "r1_pp", "r1_ll", "r2_pp", "r2_ll", "r1_pl_lp", "r2_pl_lp"]
        rows = list(zip(k, r1pp, r1ll, r2pp, r2ll, b1.rpl * b1.rlp, b2.rpl * b2.rlp))
        meta = {"n": 0, "xi_rad_s": 0.0, "cross_products_at_xi_rad_s": xi, "local_gap": st.local_gap}
    else:
        xi = matsubara(n, st.temperature).xi
        kin = kinematics(gap, st.half_space, st.slab, xi, k, ion_drude=True)
        b1, b2 = half_space_block(gap, kin), slab_block(gap, kin, st.thickness)
        cols = ["k"] + [f"r{i}_{a}" for i in (1, 2) for a in ("ss", "pp", "pl", "lp", "ll")] + ["r1_pl_lp", "r2_pl_lp"]
        rows = list(zip(k, b1.rss, b1.rpp, b1.rpl, b1.rlp, b1.rll, b2.rss, b2.rpp, b2.rpl, b2.rlp, b2.rll,
                        b1.rpl * b1.rlp, b2.rpl * b2.rlp))
        meta = {"n": int(n), "xi_rad_s": float(xi), "local_gap": st.local_gap}
    meta.update(thickness_m=st.thickness, debye_length_m=gap.debye_length)
    return Table(cols, ["1/m"] + ["1"] * (len(cols) - 1), rows, meta)


def _check_converged(b, spec):
    tail = b.diagnostics["tail_estimate"]
    if not tail <= spec.matsubara_tail_tol * abs(b.total):
        raise ConvergenceError(
            f"Matsubara sum not converged at the cap n={b.n_max_used} (tail {tail:.3g})",
            where=f"L={b.separation:.6g} m, n={b.n_max_used}")
    return b


def cmd_energy(cfg):
    """Full :class:`EnergyBreakdown` at the configured separation, as a dict."""
    b = _check_converged(total_free_energy(cfg.stack, cfg.spec), cfg.spec)
    return b.to_dict()


def _hamaker_point(args):
    stack, spec = args
    b = _check_converged(total_free_energy(stack, spec), spec)
    return (b.hamaker("total"), b.hamaker("total_minus_f0tm"), b.hamaker("zero_frequency_only"),
            b.total, b.f0_tm, b.f0_long, b.n_max_used)


def cmd_hamaker(cfg, jobs=1):
    """Hamaker functions over the configured sweep (L or lambda_D)."""
    sw = cfg.sweep
    grid = sw.grid()
    if sw.variable == "L":
        stacks = [cfg.stack.with_(separation=float(x)) for x in grid]
    else:
        stacks = [cfg.stack.with_(debye_length=float(x)) for x in grid]
    work = [(s, cfg.spec) for s in stacks]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_hamaker_point, work))
    else:
        results = [_hamaker_point(w) for w in work]
    rows = [(s.separation / NM, s.gap.debye_length / NM, *r, H_ASYMPTOTE) for s, r in zip(stacks, results)]
    cols = ["L_nm", "lambda_D_nm", "H_total", "H_minus_f0tm", "H_zero_freq",
            "F_total", "F0_TM", "F0_long", "n_max_used", "H_asymptote"]
    units = ["nm", "nm", "kB T", "kB T", "kB T", "J/m^2", "J/m^2", "J/m^2", "1", "kB T"]
    return Table(cols, units, rows, {"sweep": sw.variable, "slab": cfg.stack.slab.name,
                                     "temperature_K": cfg.stack.temperature,
                                     "local_gap": cfg.stack.local_gap})


def cmd_validate(cfg):
    """Run the cross-validation suite; returns ``(report, all_passed)``."""
    results = run_all(cfg.stack, cfg.spec)
    report = {"checks": [r.to_dict() for r in results], "passed": all(r.passed for r in results)}
    return report, report["passed"]


# ---------------------------------------------------------------------------
# argument handling


def _length_nm(text):
    v = float(text)
    return v * NM


def build_parser():
    p = argparse.ArgumentParser(prog="ioncasimir", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--L", type=_length_nm, metavar="NM", help="separation in nm")
    common.add_argument("--lambda-D", dest="lambda_D", type=_length_nm, metavar="NM",
                        help="Debye length in nm (inf: no ions)")
    common.add_argument("--temperature", type=float, metavar="K")
    common.add_argument("--thickness", type=_length_nm, metavar="NM", help="slab thickness in nm")
    common.add_argument("--gold-model", choices=sorted(GOLD_MODELS))
    common.add_argument("--local-water", action="store_true", help="local ionic response at zero frequency")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--output", metavar="PATH", help="output file ('-' for stdout)")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("epsilon", parents=[common], help="permittivities on the imaginary axis")
    e.add_argument("--count", type=int, default=71, help="grid points in [1e11, 1e18] rad/s")
    r = sub.add_parser("reflect", parents=[common], help="reflection amplitudes over k")
    r.add_argument("--n", type=int, default=0, help="Matsubara order")
    r.add_argument("--k-min", type=float, default=1e5, help="1/m")
    r.add_argument("--k-max", type=float, default=1e10, help="1/m")
    r.add_argument("--k-count", type=int, default=26)
    sub.add_parser("energy", parents=[common], help="free-energy breakdown at one separation")
    h = sub.add_parser("hamaker", parents=[common], help="Hamaker functions over a sweep")
    h.add_argument("--jobs", type=int, default=1, help="worker processes")
    sub.add_parser("validate", parents=[common], help="cross-validation checks")
    return p


def _run(args):
    cfg = load_config(args.config)
    cfg = apply_overrides(cfg, L=args.L, lambda_D=args.lambda_D, temperature=args.temperature,
                          gold_model=args.gold_model, local_water=args.local_water,
                          thickness=args.thickness, fmt=args.format, output=args.output)
    if args.command == "epsilon":
        if args.count < 2:
            raise ConfigError("--count: must be >= 2")
        _emit(cmd_epsilon(cfg, args.count), cfg)
    elif args.command == "reflect":
        if not (0 < args.k_min < args.k_max) or args.k_count < 2:
            raise ConfigError("--k-min/--k-max/--k-count: need 0 < k_min < k_max and k_count >= 2")
        _emit(cmd_reflect(cfg, args.n, np.geomspace(args.k_min, args.k_max, args.k_count)), cfg)
    elif args.command == "energy":
        _emit(cmd_energy(cfg), cfg)
    elif args.command == "hamaker":
        if args.jobs < 1:
            raise ConfigError("--jobs: must be >= 1")
        _emit(cmd_hamaker(cfg, args.jobs), cfg)
    elif args.command == "validate":
        report, ok = cmd_validate(cfg)
        _emit(report if cfg.output.format == "json" else _validate_table(report), cfg)
        if not ok:
            raise ValidationFailure("validation failed: " + ", ".join(
                c["name"] for c in report["checks"] if c["status"] == "fail"))


def _validate_table(report):
    rows = [(c["name"], c["status"], c["value"], c["tolerance"]) for c in report["checks"]]
    return Table(["check", "status", "value", "tolerance"], ["-", "-", "1", "1"], rows)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        _run(args)
    except (ConfigError, MaterialError) as exc:
        print(f"ioncasimir: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, ReflectionError) as exc:
        print(f"ioncasimir: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ValidationFailure as exc:
        print(f"ioncasimir: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
