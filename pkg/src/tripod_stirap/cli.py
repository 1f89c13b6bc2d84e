"""Command-line front end: simulate | sweep | figures | constants.

Every run emits plot-ready CSV (12 significant digits, '#' comment line with
the resolved configuration) plus a JSON manifest with checksums.  Identical
invocations produce byte-identical CSV files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, analysis, dk, effective, liouville
from .errors import TripodError, WrongOrdering, ZeroDelay
from .pulses import DephasingMatrix, Ordering, PulseConfig
from .tripod import geometric_phase

C_S_REF, C_U_REF, C_TOL = 2.42, 0.68, 0.01


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def _parse_grid(text: str) -> np.ndarray:
    """Accept 'a:b:n' (inclusive linspace) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be a:b:n, got {text!r}")
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise ValueError("range must request at least one point")
        return np.linspace(a, b, n)
    values = np.array([float(tok) for tok in text.split(",") if tok.strip() != ""])
    if values.size == 0:
        raise ValueError("empty value list")
    return values


def _load_config_file(path: str) -> dict:
    data = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line must be key=value, got {raw.strip()!r}")
            key, value = line.split("=", 1)
            data[key.strip().lower().replace("-", "_")] = value.strip()
    return data


class _Settings:
    """Precedence: command-line flag, then config-file key, then default."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file = _load_config_file(args.config) if getattr(args, "config", None) else {}

    def get(self, key: str, default, cast):
        flag = getattr(self.args, key, None)
        if flag is not None:
            # numeric flags are already cast by argparse; string flags are not
            return cast(flag) if isinstance(flag, str) and cast is not str else flag
        if key in self.file:
            return cast(self.file[key])
        return default


def _resolve_gamma(s: _Settings):
    """DephasingMatrix plus the (key, value) pair recorded in the config line."""
    if getattr(s.args, "gamma", None) is not None and getattr(s.args, "gamma_file", None):
        raise ValueError("specify either --gamma or --gamma-file, not both")
    if getattr(s.args, "gamma_file", None):
        return DephasingMatrix.from_file(s.args.gamma_file), ("gamma_file", s.args.gamma_file)
    if getattr(s.args, "gamma", None) is not None:
        return DephasingMatrix.equal(s.args.gamma), ("gamma", s.args.gamma)
    if "gamma_file" in s.file:
        return DephasingMatrix.from_file(s.file["gamma_file"]), ("gamma_file", s.file["gamma_file"])
    value = float(s.file.get("gamma", 0.0))
    return DephasingMatrix.equal(value), ("gamma", value)


def _build_config(s: _Settings):
    ordering = s.get("ordering", None, Ordering.parse)
    if ordering is None:
        raise ValueError("an ordering is required (flag --ordering or config key ordering)")
    if isinstance(ordering, str):
        ordering = Ordering.parse(ordering)
    gamma, gamma_entry = _resolve_gamma(s)
    cfg = PulseConfig(
        ordering=ordering,
        omega0=s.get("omega0", 50.0, float),
        tau=s.get("tau", 1.5, float),
        gamma=gamma,
        width=s.get("width", 1.0, float),
        t_start=s.get("t_start", None, float),
        t_end=s.get("t_end", None, float),
    )
    entries = {
        "ordering": cfg.ordering.value,
        "omega0": cfg.omega0,
        "tau": cfg.tau,
        "width": cfg.width,
        gamma_entry[0]: gamma_entry[1],
        "t_start": cfg.start,
        "t_end": cfg.end,
    }
    return cfg, entries


def _config_line(entries: dict) -> str:
    return " ".join(f"{k}={_fmt(v)}" for k, v in entries.items())


def _write_csv(path: Path, entries: dict, header: list[str], rows) -> dict:
    lines = ["# " + _config_line(entries), ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    blob = ("\n".join(lines) + "\n").encode("utf-8")
    path.write_bytes(blob)
    return {"path": path.name, "sha256": hashlib.sha256(blob).hexdigest(), "bytes": len(blob)}


def _write_manifest(path: Path, command: str, entries: dict, outputs: list[dict],
                    elapsed: float) -> None:
    manifest = {
        "command": command,
        "config": {k: (v if isinstance(v, str) else float(v)) for k, v in entries.items()},
        "outputs": outputs,
        "version": __version__,
        "wall_clock_s": round(elapsed, 6),
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _pmap(fn, values):
    threads = analysis.default_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, values))
    return [fn(v) for v in values]


# ---------------------------------------------------------------- simulate

def cmd_simulate(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    s = _Settings(args)
    cfg, entries = _build_config(s)
    engine = s.get("engine", "master", str).lower()
    basis = s.get("basis", "bare", str).lower()
    samples = s.get("samples", 2000, int)
    if engine not in ("master", "effective"):
        raise ValueError(f"simulate engine must be master or effective, got {engine!r}")
    if basis not in ("bare", "adiabatic"):
        raise ValueError(f"basis must be bare or adiabatic, got {basis!r}")
    if engine == "effective" and basis == "adiabatic":
        raise ValueError("basis selection applies to the master engine")
    entries = {"command": "simulate", "engine": engine, "basis": basis,
               "samples": samples, **entries}

    if engine == "master":
        traj = liouville.integrate(cfg, basis=liouville.Basis(basis), samples=samples)
    else:
        traj = effective.integrate_suv(cfg, samples=samples)

    header = ["t", "rho11", "rho22", "rho33", "rho44",
              "rho_a11", "rho_a22", "rho_a33", "rho_a44",
              "re_rho_a12", "im_rho_a12", "F2"]
    rows = []
    for i in range(len(traj.t)):
        rows.append([traj.t[i],
                     *(np.real(traj.rho[i, j, j]) for j in range(4)),
                     *(np.real(traj.rho_a[i, j, j]) for j in range(4)),
                     np.real(traj.rho_a[i, 0, 1]), np.imag(traj.rho_a[i, 0, 1]),
                     traj.fidelity[i]])

    out = Path(args.out)
    outputs = [_write_csv(out, entries, header, rows)]
    _write_manifest(out.with_name(out.name + ".manifest.json"), "simulate", entries,
                    outputs, time.perf_counter() - t0)
    return 0


# ------------------------------------------------------------------- sweep

def cmd_sweep(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    s = _Settings(args)
    cfg, entries = _build_config(s)
    engine_name = s.get("engine", "master", str).lower()
    try:
        engine = analysis.Engine(engine_name)
    except ValueError:
        raise ValueError(f"engine must be master, effective or analytic, got {engine_name!r}") from None
    samples = s.get("samples", 2000, int)
    eps = s.get("epsilon", 0.1, float)
    t_max_eval = s.get("t_max_eval", None, float)
    axis = s.get("axis", None, str)
    if axis is None:
        raise ValueError("an axis is required (flag --axis or config key axis)")

    if getattr(args, "values", None) is not None and getattr(args, "range", None) is not None:
        raise ValueError("specify either --values or --range, not both")
    grid_text = getattr(args, "values", None) or getattr(args, "range", None) \
        or s.file.get("values") or s.file.get("range")
    if grid_text is None:
        raise ValueError("sweep needs --values or --range")
    values = _parse_grid(grid_text)

    result = analysis.sweep(cfg, axis, values, engine, samples=samples, eps=eps,
                            t_max_eval=t_max_eval)
    entries = {"command": "sweep", "engine": engine.value, "axis": axis,
               "values": ",".join(_fmt(v) for v in values),
               "samples": samples, "epsilon": eps,
               "t_max_eval": t_max_eval if t_max_eval is not None else 5.0 * cfg.width,
               **entries}

    header = [axis, "F2_final", "F2_tmax", "T_tr", "theta_g", "error_marker"]
    rows = []
    for p in result.points:
        marker = (p.error or "").replace(",", ";")
        rows.append([p.value, p.F2_final, p.F2_tmax, p.T_tr, p.theta_g, marker])

    out = Path(args.out)
    outputs = [_write_csv(out, entries, header, rows)]
    _write_manifest(out.with_name(out.name + ".manifest.json"), "sweep", entries,
                    outputs, time.perf_counter() - t0)
    if result.succeeded() == 0:
        print("error: every sweep point failed", file=sys.stderr)
        return 3
    return 0


# ----------------------------------------------------------------- figures

def _final_f2(cfg: PulseConfig, samples: int) -> float:
    return float(liouville.integrate(cfg, samples=samples).fidelity[-1])


def _fig3(s: _Settings, samples: int):
    gammas = s.get("gamma_grid", None, _parse_grid)
    gammas = np.linspace(0.0, 2.0, 9) if gammas is None else np.asarray(gammas, float)
    base = PulseConfig(ordering=Ordering.OVERLAP, omega0=50.0, tau=1.5)

    def numeric_row(g):
        traj = liouville.integrate(base.with_updates(gamma=DephasingMatrix.equal(g)),
                                   samples=samples)
        return [g, *traj.populations[-1]]

    rows_num = _pmap(numeric_row, gammas)
    rows_ana = []
    for g in gammas:
        p = dk.analytic_dark_observables(g, base, 0.0)[0]
        q = 0.5 - p
        rows_ana.append([g, q, q, p, p])

    header = ["gamma", "rho11", "rho22", "rho33", "rho44"]
    common = {"ordering": "overlap", "omega0": 50.0, "tau": 1.5, "samples": samples}
    return [("fig3_numeric.csv", {**common, "engine": "master"}, header, rows_num),
            ("fig3_analytic.csv", {**common, "engine": "analytic"}, header, rows_ana)]


def _fig4(s: _Settings, samples: int):
    gammas = s.get("gamma_grid", None, _parse_grid)
    gammas = np.linspace(0.0, 2.0, 9) if gammas is None else np.asarray(gammas, float)
    t_max_eval = s.get("t_max_eval", 5.0, float)
    base = PulseConfig(ordering=Ordering.OVERLAP, omega0=50.0, tau=1.5)

    f2_master = _pmap(lambda g: _final_f2(
        base.with_updates(gamma=DephasingMatrix.equal(g)), samples), gammas)
    rows = []
    for g, fm in zip(gammas, f2_master):
        rows.append([g, fm,
                     dk.analytic_fidelity(g, base, t_max_eval),
                     dk.analytic_fidelity(g, base, math.inf)])
    header = ["gamma", "f2_master", "f2_analytic_tmax", "f2_analytic_final"]
    entries = {"ordering": "overlap", "omega0": 50.0, "tau": 1.5,
               "t_max_eval": t_max_eval, "samples": samples}
    return [("fig4.csv", entries, header, rows)]


def _fig5(s: _Settings, samples: int, gamma: float, filename: str):
    taus = s.get("tau_grid", None, _parse_grid)
    taus = np.linspace(0.25, 2.5, 10) if taus is None else np.asarray(taus, float)
    omegas = s.get("omega0_list", None, _parse_grid)
    omegas = np.array([20.0, 50.0, 100.0, 200.0]) if omegas is None else np.asarray(omegas, float)

    def column(om):
        return [_final_f2(PulseConfig(ordering=Ordering.OVERLAP, omega0=om, tau=t,
                                      gamma=DephasingMatrix.equal(gamma)), samples)
                for t in taus]

    columns = _pmap(column, omegas)
    header = ["tau"] + [f"f2_omega_{om:g}" for om in omegas]
    analytic = None
    if gamma > 0.0:
        header.append("f2_analytic_final")
        analytic = [dk.analytic_fidelity(gamma, PulseConfig(
            ordering=Ordering.OVERLAP, omega0=50.0, tau=t), math.inf) for t in taus]
    rows = []
    for i, t in enumerate(taus):
        row = [t] + [col[i] for col in columns]
        if analytic is not None:
            row.append(analytic[i])
        rows.append(row)
    entries = {"ordering": "overlap", "gamma": gamma,
               "omega0_list": ",".join(f"{om:g}" for om in omegas), "samples": samples}
    return [(filename, entries, header, rows)]


def _gamma_family(s: _Settings, samples: int, ordering: Ordering, taus, filename: str):
    gammas = s.get("gamma_grid", None, _parse_grid)
    gammas = np.linspace(0.0, 2.0, 9) if gammas is None else np.asarray(gammas, float)

    def column(tau):
        return [_final_f2(PulseConfig(ordering=ordering, omega0=200.0, tau=tau,
                                      gamma=DephasingMatrix.equal(g)), samples)
                for g in gammas]

    columns = _pmap(column, taus)
    header = ["gamma"] + [f"f2_tau_{t:g}" for t in taus]
    rows = [[g] + [col[i] for col in columns] for i, g in enumerate(gammas)]
    entries = {"ordering": ordering.value, "omega0": 200.0,
               "tau_list": ",".join(f"{t:g}" for t in taus), "samples": samples}
    return [(filename, entries, header, rows)]


def _transition_family(s: _Settings, samples: int, ordering: Ordering,
                       default_taus: np.ndarray, filename: str):
    taus = s.get("tau_grid", None, _parse_grid)
    taus = default_taus if taus is None else np.asarray(taus, float)
    base = PulseConfig(ordering=ordering, omega0=200.0, tau=float(taus[0]))
    result = analysis.sweep(base, "tau", taus, analysis.Engine.MASTER, samples=samples)
    rows = [[p.value, p.T_tr, (p.error or "").replace(",", ";")] for p in result.points]
    header = ["tau", "T_tr", "error_marker"]
    entries = {"ordering": ordering.value, "omega0": 200.0, "gamma": 0.0,
               "epsilon": 0.1, "samples": samples}
    return [(filename, entries, header, rows)]


def _fig9a(s: _Settings, samples: int):
    taus = s.get("tau_grid", None, _parse_grid)
    taus = np.array([0.5, 1.0, 1.5]) if taus is None else np.asarray(taus, float)
    rows = []
    for t in taus:
        traj = liouville.integrate(PulseConfig(ordering=Ordering.FRACTIONAL,
                                               omega0=200.0, tau=float(t)), samples=samples)
        for i in range(len(traj.t)):
            rows.append([t, traj.t[i], traj.fidelity[i]])
    header = ["tau", "t", "f2"]
    entries = {"ordering": "fractional", "omega0": 200.0, "gamma": 0.0,
               "tau_list": ",".join(f"{t:g}" for t in taus), "samples": samples}
    return [("fig9a.csv", entries, header, rows)]


FIGURES = ("fig3", "fig4", "fig5a", "fig5b", "fig6", "fig7", "fig8", "fig9a", "fig9b")


def cmd_figures(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    s = _Settings(args)
    name = args.name.lower()
    if name not in FIGURES:
        raise ValueError(f"unknown figure {args.name!r} (expected one of: {', '.join(FIGURES)})")
    samples = s.get("samples", 2000, int)

    if name == "fig3":
        specs = _fig3(s, samples)
    elif name == "fig4":
        specs = _fig4(s, samples)
    elif name == "fig5a":
        specs = _fig5(s, samples, 0.0, "fig5a.csv")
    elif name == "fig5b":
        specs = _fig5(s, samples, 1.0, "fig5b.csv")
    elif name == "fig6":
        specs = _gamma_family(s, samples, Ordering.SCP, np.array([1.0, 1.5, 2.0]), "fig6.csv")
    elif name == "fig7":
        specs = _transition_family(s, samples, Ordering.SCP,
                                   np.linspace(0.5, 2.5, 9), "fig7.csv")
    elif name == "fig8":
        specs = _gamma_family(s, samples, Ordering.FRACTIONAL,
                              np.array([0.5, 1.0, 1.5]), "fig8.csv")
    elif name == "fig9a":
        specs = _fig9a(s, samples)
    else:
        # The lower threshold (1 + eps) * cos^2(theta_g) must stay below both 1
        # and 1 - eps, which for eps = 0.1 needs theta_g > 0.44, i.e. tau > ~0.7.
        specs = _transition_family(s, samples, Ordering.FRACTIONAL,
                                   np.linspace(0.75, 1.5, 4), "fig9b.csv")

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    entries_all = {"command": "figures", "figure": name}
    for filename, entries, header, rows in specs:
        outputs.append(_write_csv(out_dir / filename,
                                  {**entries_all, **entries}, header, rows))
    _write_manifest(out_dir / f"{name}.manifest.json", "figures", entries_all,
                    outputs, time.perf_counter() - t0)
    return 0


# --------------------------------------------------------------- constants

def cmd_constants(args: argparse.Namespace) -> int:
    epsabs = args.epsabs if args.epsabs is not None else 1e-10
    cfg = PulseConfig(ordering=Ordering.OVERLAP, omega0=50.0, tau=1.5)
    ai = dk.adiabatic_integrals(1.0, cfg, epsabs=epsabs)
    ok_s = abs(ai.c_s - C_S_REF) <= C_TOL
    ok_u = abs(ai.c_u - C_U_REF) <= C_TOL
    print(f"c_s = {ai.c_s:.9f} (reference {C_S_REF} +- {C_TOL}) "
          f"[{'ok' if ok_s else 'FAIL'}]")
    print(f"c_u = {ai.c_u:.9f} (reference {C_U_REF} +- {C_TOL}) "
          f"[{'ok' if ok_u else 'FAIL'}]")
    print("geometric angle samples:")
    for ordering, taus in ((Ordering.SCP, (1.0, 1.5, 2.0)),
                           (Ordering.FRACTIONAL, (0.5, 1.0, 1.5))):
        for tau in taus:
            thg = geometric_phase(PulseConfig(ordering=ordering, omega0=200.0, tau=tau))
            print(f"  {ordering.value:10s} tau = {tau:.1f}T: theta_g = {thg:+.6f}")
    return 0 if (ok_s and ok_u) else 1


# ------------------------------------------------------------------ parser

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ordering", help="overlap | scp | csp | fractional")
    parser.add_argument("--omega0", type=float, help="peak Rabi frequency in 1/T (default 50)")
    parser.add_argument("--tau", type=float, help="pulse delay in T (default 1.5)")
    parser.add_argument("--width", type=float, help="pulse width T (default 1)")
    parser.add_argument("--gamma", type=float, help="equal dephasing rate in 1/T")
    parser.add_argument("--gamma-file", help="path to a 4x4 dephasing-rate matrix")
    parser.add_argument("--t-start", type=float, help="window start (default -(6 width + tau))")
    parser.add_argument("--t-end", type=float, help="window end (default 6 width + tau)")
    parser.add_argument("--samples", type=int, help="output samples per window (default 2000)")
    parser.add_argument("--config", help="key=value config file; flags take precedence")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tripod",
                                     description="Dephasing STIRAP toolkit for tripod systems")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="integrate one trajectory and dump it as CSV")
    _add_common(p_sim)
    p_sim.add_argument("--engine", help="master | effective (default master)")
    p_sim.add_argument("--basis", help="bare | adiabatic (master engine only)")
    p_sim.add_argument("--out", required=True, help="output CSV path")
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="scan gamma or tau and tabulate scalar outputs")
    _add_common(p_sweep)
    p_sweep.add_argument("--axis", help="gamma | tau")
    p_sweep.add_argument("--values", help="comma-separated axis values")
    p_sweep.add_argument("--range", help="a:b:n inclusive linspace")
    p_sweep.add_argument("--engine", help="master | effective | analytic (default master)")
    p_sweep.add_argument("--epsilon", type=float, help="transition-time threshold (default 0.1)")
    p_sweep.add_argument("--t-max-eval", type=float,
                         help="finite evaluation time for F2_tmax (default 5 width)")
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.set_defaults(func=cmd_sweep)

    p_fig = sub.add_parser("figures", help="reproduce a figure dataset")
    p_fig.add_argument("name", help="one of: " + ", ".join(FIGURES))
    p_fig.add_argument("--out-dir", default=".", help="output directory (default .)")
    p_fig.add_argument("--samples", type=int, help="samples per trajectory (default 2000)")
    p_fig.add_argument("--gamma-grid", help="override gamma grid (a:b:n or comma list)")
    p_fig.add_argument("--tau-grid", help="override tau grid (a:b:n or comma list)")
    p_fig.add_argument("--omega0-list", help="override peak Rabi list (fig5 only)")
    p_fig.add_argument("--t-max-eval", type=float, help="finite evaluation time (fig4)")
    p_fig.add_argument("--config", help="key=value config file")
    p_fig.set_defaults(func=cmd_figures)

    p_const = sub.add_parser("constants", help="recompute decay constants and angle samples")
    p_const.add_argument("--epsabs", type=float, help="quadrature tolerance (default 1e-10)")
    p_const.set_defaults(func=cmd_constants)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, WrongOrdering, ZeroDelay) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TripodError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
