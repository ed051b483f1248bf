"""Command-line front end: simulate, steady, sweep and cascade.

Floats are written in shortest round-trip form (``repr``) with -0.0
folded to 0.0, so a fixed config in fixed-step mode gives identical bytes.
Regime warnings and other diagnostics never share the data stream.
"""
import argparse
from concurrent.futures import ProcessPoolExecutor
import csv
import io
import json
import math
import sys

import numpy as np

from .bath import BathSpec, FlatBand
from .cascade import (CascadeParams, evolve_cascade, initial_cascade_state,
                      semiclassical_p1, truncation_for, uq_identity)
from .config import load_config
from .core import SystemParams, from_bloch_views
from .dynamics import (deviation_first_order, evolve, initial_state,
                       steady_state_fme_analytic, steady_state_numeric,
                       steady_state_obe_analytic, validity_check)
from .errors import ConfigError, ObeThermoError
from .generators import fme_generator, fme_rates, gbe_generator, obe_generator
from .thermo import (coherence_split, fme_flows, generator_flows, obe_flow_arrays,
                     obe_flows)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PARTIAL = 0, 1, 2, 3

FLOW_COLUMNS = ["U", "U_cl", "U_q", "W_dot", "Q_dot", "Q_cl_dot", "Q_q_dot",
                "E_R_dot", "sigma_dot", "S"]
SIMULATE_COLUMNS = ["family", "t", "P1", "Re_s", "Im_s"] + FLOW_COLUMNS
SWEEP_COLUMNS = (["index", "family", "g_over_gamma", "delta_over_gamma", "gamma_over_omega_L",
                  "beta_L", "g", "delta", "gamma", "P1", "Re_s", "Im_s", "P1_numeric",
                  "Re_s_numeric", "Im_s_numeric", "numeric_minus_analytic"]
                 + FLOW_COLUMNS
                 + ["D", "D_q", "D_cl", "dP1", "dRe_s", "dIm_s", "dP1_first_order",
                    "dRe_s_first_order", "dIm_s_first_order", "obe_valid", "fme_valid",
                    "error"])
CASCADE_COLUMNS = ["alpha", "n_max", "t", "P1_cascade", "P1_semiclassical", "U_q",
                   "identity_residual"]


def fmt(x):
    """Shortest round-trip text for numbers; -0.0 becomes 0.0."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return repr(x + 0.0) if x == x else "nan"
    return "" if x is None else str(x)


def _json_value(x):
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return None if not math.isfinite(x) else x + 0.0
    return x


def rows_to_text(columns, rows, kind):
    if kind == "json":
        records = [{c: _json_value(r.get(c)) for c in columns} for r in rows]
        return json.dumps(records, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


# ---------------------------------------------------------------- model setup

def build_params(cfg):
    """SystemParams with omega_L = 1 from the ratio keys of ``cfg.system``."""
    sysd = cfg.system
    gam = sysd["gamma_over_omega_L"]
    if "delta_over_gamma" in sysd:
        delta = sysd["delta_over_gamma"] * gam
    else:
        delta = sysd["delta_over_omega_L"]
    if "g_over_gamma" in sysd:
        g = sysd["g_over_gamma"] * gam
    elif "g_over_delta" in sysd:
        g = sysd["g_over_delta"] * abs(delta)
    else:
        g = sysd["g_over_omega_L"]
    return SystemParams(omega_L=1.0, delta=delta, g=g, gamma=gam, beta_L=sysd["beta_L"])


def build_bath(cfg, params):
    """Continuum bath, normalized so Gamma(omega_qb) = gamma where that makes sense."""
    T, gam, w = params.temperature, params.gamma, params.omega_qb
    if cfg.bath_model == "flat":
        return BathSpec.flat(gam, T)
    if cfg.bath_model == "ohmic":
        return BathSpec.ohmic(gam, w, cfg.cutoff_over_omega_L, T)
    if cfg.bath_model == "lorentzian":
        return BathSpec.lorentzian(gam, w, cfg.width_over_omega_L, T)
    return BathSpec.load_table(cfg.table, T)


def build_generator(family, cfg, params):
    """(generator, fme rates or None) of one equation family."""
    if family == "obe":
        return obe_generator(params), None
    bath = build_bath(cfg, params)
    if family == "fme":
        rates = fme_rates(params, bath, flat_occupation=cfg.fme_occupation == "flat")
        return fme_generator(rates, params), rates
    density = FlatBand(params) if cfg.bath_model == "flat" else bath
    return gbe_generator(params, density), None


def _flows(family, state, params, gen, rates):
    if family == "obe":
        return obe_flows(state, params)
    if family == "fme":
        return fme_flows(state, params, rates)
    return generator_flows(state, params, gen)


def _report_regime(params, cfg, diag):
    try:
        rep = validity_check(params, build_bath(cfg, params))
    except ObeThermoError as exc:
        print(f"regime check skipped: {exc}", file=diag)
        return None
    if "obe" in cfg.families and not rep.obe_valid:
        print(f"warning: Bloch regime margin {rep.obe_margin:.3g} < {rep.threshold}", file=diag)
    if "fme" in cfg.families and not rep.fme_valid:
        print(f"warning: Floquet regime margin {rep.fme_margin:.3g} < {rep.threshold}",
              file=diag)
    if "fme" in cfg.families and rep.fme_thermal_margin < rep.threshold:
        print(f"warning: Omega/(gamma nbar) = {rep.fme_thermal_margin:.3g}: "
              "Floquet equation unreliable at this temperature", file=diag)
    return rep


# ---------------------------------------------------------------- subcommands

def cmd_simulate(cfg, fixed_step=None, diag=sys.stderr):
    """Trajectory rows with flows at every time point, one block per family."""
    if cfg.t_end is None:
        raise ConfigError(f"{cfg.source}: simulate needs a [time] section")
    if cfg.axes:
        raise ConfigError(f"{cfg.source}: simulate takes a [time] grid, not a [sweep]")
    params = build_params(cfg)
    _report_regime(params, cfg, diag)
    unit = 1.0 / params.gamma if cfg.time_unit == "gamma" else 1.0
    t = np.linspace(0.0, cfg.t_end, cfg.points) * unit
    step = None if fixed_step is None else fixed_step * unit
    rng = np.random.default_rng(cfg.seed)
    rho0 = initial_state(cfg.initial, params, rng)
    rows = []
    for family in cfg.families:
        gen, rates = build_generator(family, cfg, params)
        traj = evolve(gen, rho0, t, fixed_step=step)
        p1, s = traj.p1, traj.s
        if family == "obe":
            arr = obe_flow_arrays(params, p1, s)
        per_state = [_flows(family, traj.states[i], params, gen, rates) for i in range(len(t))]
        for i, ti in enumerate(t):
            fl = per_state[i].as_dict()
            if family == "obe":
                # closed forms keep exact zeros exact (e.g. gamma = 0)
                fl.update({k: float(arr[k][i]) for k in arr if k in fl})
            row = {"family": family, "t": float(ti), "P1": float(p1[i]),
                   "Re_s": float(s[i].real), "Im_s": float(s[i].imag)}
            row.update({k: fl[k] for k in FLOW_COLUMNS})
            rows.append(row)
    return SIMULATE_COLUMNS, rows


def _steady_family(family, cfg, params):
    gen, rates = build_generator(family, cfg, params)
    num = steady_state_numeric(gen)
    if family == "obe":
        p1, s = steady_state_obe_analytic(params)
    elif family == "fme":
        p1, s, _ = steady_state_fme_analytic(
            params, build_bath(cfg, params), flat_occupation=cfg.fme_occupation == "flat")
    else:
        p1, s = num.p1, num.s
    state = from_bloch_views(p1, s)
    flows = _flows(family, state, params, gen, rates).as_dict()
    split = coherence_split(state, params)
    diff = max(abs(num.p1 - p1), abs(num.s - s))
    return dict(P1=p1, Re_s=s.real, Im_s=s.imag, P1_numeric=num.p1, Re_s_numeric=num.s.real,
                Im_s_numeric=num.s.imag, numeric_minus_analytic=diff,
                D=split.D_total, D_q=split.D_q, D_cl=split.D_cl,
                **{k: flows[k] for k in FLOW_COLUMNS})


def steady_point(cfg, params):
    """Per-family steady values plus the Floquet-minus-Bloch deviations."""
    out, errors = {}, {}
    for family in dict.fromkeys(tuple(cfg.families) + ("obe", "fme")):
        try:
            out[family] = _steady_family(family, cfg, params)
        except ObeThermoError as exc:
            errors[family] = f"{type(exc).__name__}: {exc}"
    dev = {}
    if "obe" in out and "fme" in out:
        o, f = out["obe"], out["fme"]
        dev = dict(dP1=f["P1"] - o["P1"], dRe_s=f["Re_s"] - o["Re_s"],
                   dIm_s=f["Im_s"] - o["Im_s"])
    first = deviation_first_order(params)
    dev.update(dP1_first_order=first[0], dRe_s_first_order=first[1],
               dIm_s_first_order=first[2])
    return out, errors, dev


def cmd_steady(cfg, diag=sys.stderr):
    """One JSON-ready record with analytic, numeric and difference per family."""
    if cfg.axes:
        raise ConfigError(f"{cfg.source}: steady takes no [sweep] grid")
    params = build_params(cfg)
    rep = _report_regime(params, cfg, diag)
    out, errors, dev = steady_point(cfg, params)
    if not out:
        raise ObeThermoError("; ".join(f"{k}: {v}" for k, v in errors.items()))
    record = {"params": {"omega_L": params.omega_L, "g": params.g, "delta": params.delta,
                         "gamma": params.gamma, "beta_L": params.beta_L,
                         "nbar": params.nbar, "rabi": params.rabi},
              "families": {}}
    for family in cfg.families:
        if family in errors:
            record["families"][family] = {"error": errors[family]}
            continue
        v = out[family]
        record["families"][family] = {
            "analytic": {"P1": v["P1"], "Re_s": v["Re_s"], "Im_s": v["Im_s"]},
            "numeric": {"P1": v["P1_numeric"], "Re_s": v["Re_s_numeric"],
                        "Im_s": v["Im_s_numeric"]},
            "numeric_minus_analytic": v["numeric_minus_analytic"],
            "flows": {k: v[k] for k in FLOW_COLUMNS},
            "relative_entropy": {"D": v["D"], "D_q": v["D_q"], "D_cl": v["D_cl"]},
        }
    record["deviations"] = dev
    record["regime"] = rep.as_dict() if rep is not None else None
    return record


def _grid(cfg):
    axes = cfg.axes
    vals = [a.values() for a in axes]
    if len(axes) == 1:
        return [((i,), {axes[0].key: float(x)}) for i, x in enumerate(vals[0])]
    return [((i, j), {axes[0].key: float(x), axes[1].key: float(y)})
            for i, x in enumerate(vals[0]) for j, y in enumerate(vals[1])]


def _sweep_point(job):
    """Rows for one grid point; never raises."""
    order, index, cfg, changes = job
    base = {"index": index}
    try:
        point = cfg.with_system(**changes)
        params = build_params(point)
        rep = validity_check(params, build_bath(point, params))
        base.update(g_over_gamma=params.g / params.gamma if params.gamma else math.nan,
                    delta_over_gamma=params.delta / params.gamma if params.gamma else math.nan,
                    gamma_over_omega_L=params.gamma, beta_L=params.beta_L, g=params.g,
                    delta=params.delta, gamma=params.gamma, obe_valid=rep.obe_valid,
                    fme_valid=rep.fme_valid)
        out, errors, dev = steady_point(point, params)
    except ObeThermoError as exc:
        return order, [dict(base, family=f, error=f"{type(exc).__name__}: {exc}")
                       for f in cfg.families]
    rows = []
    for family in cfg.families:
        row = dict(base, family=family, **dev)
        if family in errors:
            row["error"] = errors[family]
        else:
            row.update(out[family])
        rows.append(row)
    return order, rows


def cmd_sweep(cfg, workers=1):
    """Long-format rows over the sweep grid and the number of error rows."""
    if not cfg.axes:
        raise ConfigError(f"{cfg.source}: sweep needs a [sweep] section")
    if cfg.t_end is not None:
        raise ConfigError(f"{cfg.source}: sweep takes a [sweep] grid, not a [time] grid")
    grid = _grid(cfg)
    jobs = [(k, ":".join(map(str, idx)), cfg, ch) for k, (idx, ch) in enumerate(grid)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_sweep_point(j) for j in jobs]
    results.sort(key=lambda r: r[0])
    rows = [row for _, block in results for row in block]
    columns = list(SWEEP_COLUMNS)
    for a in cfg.axes:
        if a.key not in columns:
            columns.insert(2, a.key)
    for (idx, ch), block in zip(grid, (b for _, b in results)):
        for row in block:
            row.update(ch)
    n_err = sum(1 for r in rows if r.get("error"))
    return columns, rows, n_err


def cmd_cascade(cfg, fixed_step=None):
    """Cascade and semiclassical populations per alpha with g0 alpha held fixed."""
    c = cfg.cascade
    if not c:
        raise ConfigError(f"{cfg.source}: cascade needs a [cascade] section")
    delta = c["delta_over_omega_L"]
    omega_L = 1.0
    rows = []
    for alpha in c["alphas"]:
        if "g0_over_omega_L" in c:
            g0 = c["g0_over_omega_L"] if alpha > 0 else 0.0
            g = 2 * g0 * alpha
        else:
            g = c["g_over_omega_L"] if alpha > 0 else 0.0
            g0 = g / (2 * alpha) if alpha > 0 else 0.0
        rabi = math.hypot(g, delta)
        if "t_end_over_omega_L" in c:
            t_end = c["t_end_over_omega_L"]
        elif rabi > 0:
            t_end = c["periods"] * 2 * math.pi / rabi
        else:
            raise ConfigError(f"{cfg.source}: [cascade] zero Rabi frequency; "
                              "give t_end_over_omega_L instead of periods")
        t = np.linspace(0.0, t_end, c["points"])
        n_max = truncation_for(alpha)
        cp = CascadeParams(omega_qb=omega_L + delta, omega_L=omega_L, g0=g0, n_max=n_max)
        traj = evolve_cascade(initial_cascade_state(alpha, n_max), cp, t, fixed_step=fixed_step)
        rep = uq_identity(traj)
        semi = semiclassical_p1(cp, alpha, t)
        uq = g * traj.s.real
        for i, ti in enumerate(t):
            rows.append({"alpha": float(alpha), "n_max": n_max, "t": float(ti),
                         "P1_cascade": float(traj.p1[i]), "P1_semiclassical": float(semi[i]),
                         "U_q": float(uq[i]), "identity_residual": float(rep.residual[i])})
    return CASCADE_COLUMNS, rows


# ---------------------------------------------------------------- entry point

def make_parser():
    ap = argparse.ArgumentParser(prog="obethermo",
                                 description="Driven qubit thermodynamics: Bloch and Floquet equations.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (("simulate", "time evolution with flows at every step"),
                       ("steady", "analytic and numeric steady state of one point"),
                       ("sweep", "steady states over a parameter grid"),
                       ("cascade", "qubit coupled to a quantized drive mode")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", metavar="PATH",
                       help="INI file or the name of a shipped preset")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="SECTION.KEY=VALUE", help="override one config entry")
        p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), help="output format")
        p.add_argument("--fixed-step", type=float, metavar="DT",
                       help="fixed RK4 step; in the time unit of [time], or 1/omega_L for cascade")
        p.add_argument("--workers", type=int, default=1, metavar="N",
                       help="worker processes for sweep")
        p.add_argument("--diagnostics", metavar="PATH", help="diagnostics file (default: stderr)")
    return ap


def _write(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    args = make_parser().parse_args(argv)
    diag_fh = None
    try:
        cfg = load_config(args.config, args.overrides)
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        if args.fixed_step is not None and not args.fixed_step > 0:
            raise ConfigError("--fixed-step must be positive")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_path = args.out or cfg.out_path
    kind = args.format or cfg.out_format
    diag_path = args.diagnostics or cfg.diagnostics
    diag = sys.stderr
    if diag_path:
        diag_fh = diag = open(diag_path, "w")
    code = EXIT_OK
    try:
        if args.command == "simulate":
            cols, rows = cmd_simulate(cfg, args.fixed_step, diag)
            text = rows_to_text(cols, rows, kind)
        elif args.command == "steady":
            record = cmd_steady(cfg, diag)
            if kind == "json":
                text = json.dumps(_json_value(record), indent=1) + "\n"
            else:
                text = rows_to_text(*_steady_rows(record), "csv")
        elif args.command == "sweep":
            cols, rows, n_err = cmd_sweep(cfg, args.workers)
            text = rows_to_text(cols, rows, kind)
            if n_err:
                print(f"{n_err} grid rows failed; see the error column", file=diag)
                code = EXIT_PARTIAL
        else:
            cols, rows = cmd_cascade(cfg, args.fixed_step)
            text = rows_to_text(cols, rows, kind)
        _write(text, out_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        code = EXIT_CONFIG
    except (ObeThermoError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = EXIT_NUMERIC
    finally:
        if diag_fh is not None:
            diag_fh.close()
    return code


def _steady_rows(record):
    cols = ["family", "quantity", "analytic", "numeric"]
    rows = []
    for family, v in record["families"].items():
        if "error" in v:
            rows.append({"family": family, "quantity": "error", "analytic": v["error"]})
            continue
        for q in ("P1", "Re_s", "Im_s"):
            rows.append({"family": family, "quantity": q, "analytic": v["analytic"][q],
                         "numeric": v["numeric"][q]})
        for q, val in list(v["flows"].items()) + list(v["relative_entropy"].items()):
            rows.append({"family": family, "quantity": q, "analytic": val})
    for q, val in record["deviations"].items():
        rows.append({"family": "fme-obe", "quantity": q, "analytic": val})
    return cols, rows


if __name__ == "__main__":
    sys.exit(main())
