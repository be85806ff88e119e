"""Command-line front end.

Every subcommand reads a flat ``key = value`` config (``--config``), applies
``--override key=value`` on top and writes its CSV/report files to ``--out``.
Exit codes: 0 success, 2 configuration or pattern-class error, 3 runtime abort.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .gas import GasParams, State
from .harness import SigmaRegion, SweepRow, SweepSetup, asymptotic_gap, jump_series, limit_sweep
from .profiles import BVPError, ProfilePositivityError, build_profile_set, residuals, superposition_eval
from .riemann import PatternClassError, eval_exact_array, solve_pattern
from .solver import Grid1D, SolverAbort, SolverConfig, integrate

log = logging.getLogger("visclimit")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class ConfigError(ValueError):
    pass


def _flist(text):
    return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (parser, default, check, check description)
_pos = (lambda x: x > 0, "must be positive")
_nonneg = (lambda x: x >= 0, "must be >= 0")
_any = (lambda x: True, "")
KEYS = {
    "gamma": (float, 5.0 / 3.0, (lambda x: x > 1, "must exceed 1")),
    "R": (float, 1.0, _pos),
    "v_left": (float, 1.0, _pos), "u_left": (float, 0.0, _any), "theta_left": (float, 1.0, _pos),
    "v_right": (float, 1.1, _pos), "u_right": (float, 0.15, _any), "theta_right": (float, 1.05, _pos),
    "mode": (str, "scaled", (lambda x: x in ("scaled", "physical"), "must be 'scaled' or 'physical'")),
    "nu": (float, 1.0, _pos), "epsilon": (float, 1.0, _pos), "kappa": (float, 1.0, _pos),
    "cfl": (float, 0.8, (lambda x: 0 < x < 1, "must lie in (0, 1)")),
    "smoothing_cells": (int, 0, _nonneg),
    "tau_end": (float, 1.0, _pos),
    "snapshot_times": (_flist, [], (lambda x: all(t >= 0 for t in x), "must be >= 0")),
    "nu_min": (float, 1e-3, _pos), "nu_max": (float, 1e3, _pos),
    "half_width": (float, 40.0, _pos),
    "n_cells": (int, 800, (lambda x: x > 0 and x % 2 == 0, "must be a positive even integer")),
    "check_domain": (_bool, True, _any),
    "h": (float, 0.5, _pos),
    "alpha": (float, 0.25, (lambda x: 0 <= x < 0.5, "must lie in [0, 1/2)")),
    "one_sided": (_bool, False, _any),
    "output_dir": (str, "visclimit_out", _any),
    # riemann
    "dump": (_bool, False, _any),
    "t_list": (_flist, [1.0], (lambda x: len(x) > 0 and all(t > 0 for t in x), "must be positive times")),
    "x_min": (float, -2.0, _any), "x_max": (float, 2.0, _any),
    "n_x": (int, 101, (lambda x: x >= 2, "must be >= 2")),
    # profile
    "tau_list": (_flist, [1.0, 10.0], (lambda x: len(x) > 0 and all(t > 0 for t in x), "must be positive times")),
    "y_min": (float, -20.0, _any), "y_max": (float, 20.0, _any),
    "n_y": (int, 401, (lambda x: x >= 2, "must be >= 2")),
    # limit
    "epsilons": (_flist, [0.1, 0.05, 0.025], _any),
    "sweep_half_width": (float, 6.0, _pos),
    "sweep_t_end": (float, 2.0, _pos),
    "dy_scaled": (float, 0.1, _pos),
    "snapshot_dt": (float, 0.25, _pos),
}


@dataclass
class RunSpec:
    gas: GasParams
    left: State
    right: State
    solver: SolverConfig
    region: SigmaRegion
    grid: Grid1D
    output_dir: Path
    values: dict = field(default_factory=dict)
    sources: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]


def parse_pairs(text: str, origin: str = "config"):
    """``{key: (raw value, where)}`` from ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{origin} line {n}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key in out:
            raise ConfigError(f"{where}: key {key!r} already set at {out[key][1]}")
        out[key] = (raw, where)
    return out


def build_spec(pairs: dict) -> RunSpec:
    """Convert and validate raw pairs; every error names the key and where it was set."""
    values, sources = {}, {}
    for key, (raw, where) in pairs.items():
        if key not in KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        conv, _, (check, msg) = KEYS[key]
        try:
            val = conv(raw)
        except ValueError:
            raise ConfigError(f"{where}: {key}: cannot parse {raw!r} as {getattr(conv, '__name__', conv)}")
        if not check(val):
            raise ConfigError(f"{where}: {key} = {raw} {msg}")
        values[key], sources[key] = val, where
    for key, (_, default, _) in KEYS.items():
        values.setdefault(key, default)
        sources.setdefault(key, "default")

    def build(what, keys, fn):
        try:
            return fn()
        except ValueError as exc:
            loc = ", ".join(f"{k} ({sources[k]})" for k in keys)
            raise ConfigError(f"{what} [{loc}]: {exc}") from None

    gas = build("gas", ("gamma", "R"), lambda: GasParams(values["gamma"], values["R"]))
    left = build("left state", ("v_left", "u_left", "theta_left"),
                 lambda: State(values["v_left"], values["u_left"], values["theta_left"]))
    right = build("right state", ("v_right", "u_right", "theta_right"),
                  lambda: State(values["v_right"], values["u_right"], values["theta_right"]))
    snaps = values["snapshot_times"] or [values["tau_end"]]
    solver = build(
        "solver", ("mode", "nu", "epsilon", "kappa", "nu_min", "nu_max"),
        lambda: SolverConfig(mode=values["mode"], nu=values["nu"], epsilon=values["epsilon"],
                             kappa=values["kappa"], cfl=values["cfl"],
                             smoothing_cells=values["smoothing_cells"], tau_end=values["tau_end"],
                             snapshot_times=snaps, nu_bounds=(values["nu_min"], values["nu_max"])))
    region = build("region", ("h", "alpha", "epsilon"),
                   lambda: SigmaRegion(values["h"], values["alpha"], values["epsilon"], values["one_sided"]))
    grid = build("grid", ("half_width", "n_cells"), lambda: Grid1D(values["half_width"], values["n_cells"]))
    for lo, hi in (("x_min", "x_max"), ("y_min", "y_max")):
        if not values[lo] < values[hi]:
            raise ConfigError(f"{lo} ({sources[lo]}) must be below {hi} ({sources[hi]})")
    return RunSpec(gas, left, right, solver, region, grid, Path(values["output_dir"]), values, sources)


def load_spec(config_path=None, overrides=(), out=None) -> RunSpec:
    pairs = {}
    if config_path is not None:
        try:
            text = Path(config_path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}")
        pairs = parse_pairs(text, str(config_path))
    for i, item in enumerate(overrides, 1):
        if "=" not in item:
            raise ConfigError(f"--override #{i}: expected key=value, got {item!r}")
        key, raw = (s.strip() for s in item.split("=", 1))
        pairs[key] = (raw, f"--override {key}")
    if out is not None:
        pairs["output_dir"] = (str(out), "--out")
    return build_spec(pairs)


def _outdir(spec: RunSpec) -> Path:
    spec.output_dir.mkdir(parents=True, exist_ok=True)
    return spec.output_dir


def _print_kv(items: dict):
    for k, v in items.items():
        print(f"{k} = {io.fmt(v)}")


# ------------------------------------------------------------- subcommands


def cmd_riemann(spec: RunSpec) -> int:
    try:
        pattern = solve_pattern(spec.gas, spec.left, spec.right)
    except PatternClassError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    info = pattern.summary()
    info["pressure_mismatch"] = abs(info["p_star"] - info["p_star_upper"])
    info["velocity_mismatch"] = abs(info["u_star"] - info["u_star_upper"])
    _print_kv(info)
    if spec["dump"]:
        x = np.linspace(spec["x_min"], spec["x_max"], spec["n_x"])
        rows = []
        for t in spec["t_list"]:
            v, u, th = eval_exact_array(pattern, t, x)
            rows.extend(zip(np.full_like(x, t), x, v, u, th))
        path = io.write_csv(_outdir(spec) / "riemann.csv", ("t", "x", "v", "u", "theta"), rows)
        print(f"wrote {path}")
    return EXIT_OK


PROFILE_COLUMNS = ("tau", "y", "V", "U", "Theta", "Vy", "Uy", "Thetay", "Q1", "Q2", "Qcd")


def profile_table(ps, tau_list, y):
    rows = []
    for tau in tau_list:
        pv = superposition_eval(ps, tau, y)
        res = residuals(ps, tau, y)
        rows.extend(zip(np.full_like(y, tau), y, pv.V, pv.U, pv.Theta, pv.V_y, pv.U_y, pv.Theta_y,
                        res.Q1, res.Q2, res.Q_cd))
    return rows


def cmd_profile(spec: RunSpec, tau_list=None) -> int:
    tau_list = spec["tau_list"] if tau_list is None else list(tau_list)
    if not tau_list or any(t <= 0 for t in tau_list):
        print("error: tau_list must contain positive times", file=sys.stderr)
        return EXIT_CONFIG
    try:
        pattern = solve_pattern(spec.gas, spec.left, spec.right)
        ps = build_profile_set(pattern, spec["nu"], (spec["nu_min"], spec["nu_max"]))
    except (PatternClassError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BVPError as exc:
        print(f"error: contact profile: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    y = np.linspace(spec["y_min"], spec["y_max"], spec["n_y"])
    try:
        rows = profile_table(ps, tau_list, y)
    except (ProfilePositivityError, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    path = io.write_csv(_outdir(spec) / "profile.csv", PROFILE_COLUMNS, rows)
    print(f"contact_a = {io.fmt(ps.contact.a)}")
    print(f"contact_half_width = {io.fmt(ps.contact.half_width)}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_solve(spec: RunSpec) -> int:
    out = _outdir(spec)
    cfg, grid = spec.solver, spec.grid
    try:
        res = integrate(grid, cfg, spec.gas, spec.left, spec.right,
                        check_domain_size=spec["check_domain"], raise_on_abort=False)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = {"gamma": spec.gas.gamma, "R": spec.gas.R}
    report.update({f"{k}_left": x for k, x in zip("v u theta".split(), spec.left.as_tuple())})
    report.update({f"{k}_right": x for k, x in zip("v u theta".split(), spec.right.as_tuple())})
    report.update(res.report())
    report["snapshots"] = len(res.snapshots)
    for snap in res.snapshots:
        io.write_snapshot(out, snap, grid)
    if res.status == "ok" and cfg.mode == "scaled" and len(res.snapshots) >= 2:
        io.write_decay_series(out / "jump_series.csv", jump_series(res.snapshots, grid))
        try:
            ps = build_profile_set(solve_pattern(spec.gas, spec.left, spec.right), cfg.nu, cfg.nu_bounds)
            io.write_decay_series(out / "gap_series.csv", asymptotic_gap(res.snapshots, grid, ps))
        except (PatternClassError, BVPError, ValueError) as exc:
            report["gap_series"] = f"skipped: {exc}"
    io.write_report(out / "report.txt", report)
    print(f"status = {res.status}")
    print(f"steps = {res.steps}")
    if res.status != "ok":
        print(f"error: {res.message}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_limit(spec: RunSpec, epsilons=None) -> int:
    eps = spec["epsilons"] if epsilons is None else list(epsilons)
    if not eps:
        print("error: empty epsilon list", file=sys.stderr)
        return EXIT_CONFIG
    if any(e <= 0 for e in eps):
        print("error: epsilons must be positive", file=sys.stderr)
        return EXIT_CONFIG
    unique = list(dict.fromkeys(eps))
    if len(unique) < len(eps):
        log.warning("duplicate epsilon values removed: %d -> %d", len(eps), len(unique))
    setup = SweepSetup(spec.gas, spec.left, spec.right, nu=spec["nu"],
                       half_width=spec["sweep_half_width"], t_end=spec["sweep_t_end"],
                       dy_scaled=spec["dy_scaled"], snapshot_dt=spec["snapshot_dt"],
                       h=spec["h"], alpha=spec["alpha"], cfl=spec["cfl"], one_sided=spec["one_sided"])
    try:
        rows = limit_sweep(setup, unique)
    except PatternClassError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    path = io.write_csv(_outdir(spec) / "sweep.csv", SweepRow.CSV_COLUMNS,
                        [[getattr(r, c) for c in SweepRow.CSV_COLUMNS] for r in rows])
    for r in rows:
        print(f"epsilon = {io.fmt(r.epsilon)}  sup_error = {io.fmt(r.sup_error)}  status = {r.status}")
    print(f"wrote {path}")
    return EXIT_OK if any(r.status == "ok" for r in rows) else EXIT_RUNTIME


# -------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--out", help="output directory (overrides output_dir)")
    common.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key; repeatable")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="visclimit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("riemann", parents=[common], help="solve the Euler Riemann problem")
    sp = sub.add_parser("profile", parents=[common], help="dump the superposed wave profile")
    sp.add_argument("--tau", type=_flist, help="comma-separated times (overrides tau_list)")
    sub.add_parser("solve", parents=[common], help="integrate Navier-Stokes from Riemann data")
    sp = sub.add_parser("limit", parents=[common], help="zero-dissipation sweep over epsilon")
    sp.add_argument("--eps", type=_flist, help="comma-separated epsilons (overrides epsilons)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        spec = load_spec(args.config, args.override, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "riemann":
            return cmd_riemann(spec)
        if args.command == "profile":
            return cmd_profile(spec, args.tau)
        if args.command == "solve":
            return cmd_solve(spec)
        return cmd_limit(spec, args.eps)
    except SolverAbort as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
