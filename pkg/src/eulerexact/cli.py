"""Batch front end.

Subcommands: ``integrate`` (trajectory JSONL), ``sample`` (field CSV),
``verify`` (residual report JSON), ``classify`` (verdict JSON; in 2D the
periodicity report), ``sweep`` (classification summary CSV over a Cartesian
parameter grid).  Configuration comes from an optional ``--config`` file with
per-key flag overrides.  Exit codes: 0 success, 2 configuration error,
3 blowup-truncated output, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys

import numpy as np

from .classify import GLOBAL, classify_3d, detect_period_2d
from .config import (MODES, SWEEPABLE, ConfigError, RunConfig, _SCHEMA,
                     build_config, parse_entries)
from .emden import EmdenState2D, EmdenState3D, integrate
from .fields import Field2D, Field3D
from .profiles import PhysParams
from .verify import SnapshotFieldSource, refined_residual

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_NUMERIC = 4

_DEFAULT_OUT = {
    "integrate": "trajectory.jsonl",
    "sample": "field.csv",
    "verify": "verify.json",
    "classify": "classify.json",
    "sweep": "sweep.csv",
}

FIELD_CSV_HEADER = "x,y,z,t,rho,u1,u2,u3,s,p"

# (flag, config key); every value is taken as a raw string and run through
# the same parser as the config file so diagnostics and semantics match
_FLAGS = [
    ("--dim", "dim"),
    ("--K", "K"),
    ("--gamma", "gamma"),
    ("--lambda", "lambda"),
    ("--alpha", "alpha"),
    ("--xi", "xi"),
    ("--mu", "mu"),
    ("--a0", "a0"),
    ("--a1", "a1"),
    ("--b0", "b0"),
    ("--b1", "b1"),
    ("--t-end", "t_end"),
    ("--times", "times"),
    ("--grid-x", "grid.x"),
    ("--grid-y", "grid.y"),
    ("--grid-z", "grid.z"),
    ("--rel-tol", "rel_tol"),
    ("--abs-tol", "abs_tol"),
    ("--max-steps", "max_steps"),
    ("--eps-blow", "eps_blow"),
    ("--method", "method"),
    ("--out", "out"),
    ("--verify-points", "verify.points"),
    ("--verify-seed", "verify.seed"),
    ("--verify-h", "verify.h"),
    ("--verify-time", "verify.time"),
    ("--sweep-t-end", "sweep.t_end"),
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eulerexact",
        description="Exact rotational reference solutions of the compressible "
                    "Euler equations: integrate, sample, verify, classify, sweep.")
    sub = parser.add_subparsers(dest="mode", required=True)
    helps = {
        "integrate": "integrate the scale-factor system and write a JSONL trajectory",
        "sample": "evaluate the exact field on a grid and write a CSV field file",
        "verify": "finite-difference residual report on the exact field (JSON)",
        "classify": "lifespan verdict (3D) or periodicity report (2D) as JSON",
        "sweep": "classification summary CSV over a Cartesian parameter grid",
    }
    for mode in MODES:
        sp = sub.add_parser(mode, help=helps[mode])
        sp.add_argument("--config", metavar="PATH", help="key=value config file")
        for flag, key in _FLAGS:
            sp.add_argument(flag, dest="opt_" + key.replace(".", "_").replace("-", "_"),
                            metavar="VALUE", default=None)
        sp.add_argument("--sweep", action="append", default=[], metavar="PARAM=V1,V2,...",
                        help="sweep axis (repeatable)")
    return parser


def _load_config(args) -> RunConfig:
    entries: dict[str, object] = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as f:
                text = f.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config!r}: {exc}") from None
        entries.update(parse_entries(text))
    for _, key in _FLAGS:
        raw = getattr(args, "opt_" + key.replace(".", "_").replace("-", "_"))
        if raw is None:
            continue
        attr, parser = _SCHEMA[key]
        entries[attr] = parser(key, raw)
    if args.sweep:
        sweep = dict(entries.get("sweep", {}))
        for item in args.sweep:
            if "=" not in item:
                raise ConfigError(f"--sweep expects PARAM=V1,V2,..., got {item!r}")
            param, raw = (part.strip() for part in item.split("=", 1))
            if param not in SWEEPABLE:
                raise ConfigError(f"--sweep: {param!r} is not sweepable "
                                  f"(choose from {', '.join(SWEEPABLE)})")
            values = [float(v) for v in raw.split(",") if v.strip()]
            if not values:
                raise ConfigError(f"--sweep {param}: empty value list")
            sweep[param] = values
        entries["sweep"] = sweep
    entries["mode"] = args.mode
    return build_config(entries)


def _params(cfg: RunConfig) -> PhysParams:
    return PhysParams(K=cfg.K, gamma=cfg.gamma, lam=cfg.lam, alpha=cfg.alpha,
                      xi=cfg.xi, mu=cfg.mu)


def _initial_state(cfg: RunConfig):
    if cfg.dim == 3:
        return EmdenState3D(0.0, cfg.a0, cfg.a1, cfg.b0, cfg.b1)
    return EmdenState2D(0.0, cfg.a0, cfg.a1)


def _integrate(cfg: RunConfig, t_end: float, dense_times=None):
    return integrate(_params(cfg), _initial_state(cfg), t_end,
                     rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
                     max_steps=cfg.max_steps, dense_times=dense_times,
                     eps_blow=cfg.eps_blow, method=cfg.method)


def _report_termination(termination) -> None:
    print(json.dumps({"termination": termination.to_dict()}), file=sys.stderr)


def run_integrate(cfg: RunConfig) -> int:
    traj = _integrate(cfg, cfg.t_end, dense_times=cfg.times or None)
    out = cfg.out or _DEFAULT_OUT["integrate"]
    traj.write_jsonl(out)
    print(f"wrote {out} ({len(traj.states)} samples, {traj.termination.kind})")
    if traj.termination.kind == "blowup":
        _report_termination(traj.termination)
        return EXIT_BLOWUP
    if traj.termination.kind == "step_failure":
        _report_termination(traj.termination)
        return EXIT_NUMERIC
    return EXIT_OK


def _axis_points(axis) -> np.ndarray:
    lo, hi, count = axis
    return np.linspace(lo, hi, count)


def _csv_float(v) -> str:
    return repr(float(v))


def run_sample(cfg: RunConfig) -> int:
    for name, axis in (("grid.x", cfg.grid_x), ("grid.y", cfg.grid_y)):
        if axis is None:
            raise ConfigError(f"missing required key: {name}")
    if cfg.dim == 3 and cfg.grid_z is None:
        raise ConfigError("missing required key: grid.z")
    if not cfg.times:
        raise ConfigError("missing required key: times")

    params = _params(cfg)
    ic = _initial_state(cfg)
    t_max = cfg.times[-1]
    termination = None
    if t_max > 0.0:
        traj = _integrate(cfg, t_max, dense_times=cfg.times)
        states = {st.t: st for st in traj.states}
        if 0.0 in cfg.times:
            states[0.0] = ic
        termination = traj.termination
    else:
        states = {0.0: ic}

    xs = _axis_points(cfg.grid_x)
    ys = _axis_points(cfg.grid_y)
    zs = _axis_points(cfg.grid_z) if cfg.dim == 3 else np.array([0.0])

    out = cfg.out or _DEFAULT_OUT["sample"]
    rows = 0
    truncated = False
    with open(out, "w", encoding="utf-8", newline="\n") as f:
        f.write(FIELD_CSV_HEADER + "\n")
        for t in cfg.times:
            state = states.get(t)
            if state is None:
                truncated = True
                continue
            if cfg.dim == 3:
                field = Field3D.from_params(params, state)
                X, Y, Z = np.meshgrid(xs, ys, zs, indexing="ij", sparse=True)
                g = field.eval_grid(X, Y, Z)
                cols = (g["rho"], g["u1"], g["u2"], g["u3"], g["s"], g["p"])
            else:
                field = Field2D.from_params(params, state)
                X, Y = np.meshgrid(xs, ys, indexing="ij", sparse=True)
                g = field.eval_grid(X, Y)
                zero = np.zeros_like(g["rho"][..., None])
                cols = (g["rho"][..., None], g["u1"][..., None], g["u2"][..., None],
                        zero, g["eta"][..., None], g["p"][..., None])
            # x varies fastest, then y, then z: Fortran ravel of [ix, iy, iz]
            flat = [c.ravel(order="F") for c in cols]
            xi_idx, yi_idx, zi_idx = np.meshgrid(xs, ys, zs, indexing="ij", sparse=False)
            coords = [c.ravel(order="F") for c in (xi_idx, yi_idx, zi_idx)]
            for i in range(flat[0].size):
                f.write(",".join((
                    _csv_float(coords[0][i]), _csv_float(coords[1][i]),
                    _csv_float(coords[2][i]), _csv_float(t),
                    _csv_float(flat[0][i]), _csv_float(flat[1][i]),
                    _csv_float(flat[2][i]), _csv_float(flat[3][i]),
                    _csv_float(flat[4][i]), _csv_float(flat[5][i]),
                )) + "\n")
                rows += 1
    print(f"wrote {out} ({rows} rows)")
    if truncated and termination is not None:
        _report_termination(termination)
        return EXIT_BLOWUP if termination.kind == "blowup" else EXIT_NUMERIC
    return EXIT_OK


def _interior_points(field: Field3D, rng: np.random.Generator, count: int):
    """Random points inside (and away from) the density support."""
    st = field.state
    sstar = field.profile.cutoff_s
    s_hi = 0.7 * sstar if sstar is not None else 2.0
    points = []
    for _ in range(count):
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        s_target = rng.uniform(0.05, 1.0) * s_hi
        vx, vy, vz = direction
        denom = (vx * vx + vy * vy) / (st.a * st.a) + vz * vz / (st.b * st.b)
        scale = float(np.sqrt(s_target / denom))
        points.append((float(scale * vx), float(scale * vy), float(scale * vz)))
    return points


def run_verify(cfg: RunConfig) -> int:
    if cfg.dim != 3:
        raise ConfigError("verify supports dim = 3 only")
    params = _params(cfg)
    ic = _initial_state(cfg)
    t = cfg.verify_time
    if t > 0.0:
        traj = _integrate(cfg, t)
        if traj.termination.kind != "reached_t_end":
            _report_termination(traj.termination)
            return (EXIT_BLOWUP if traj.termination.kind == "blowup" else EXIT_NUMERIC)
        state = traj.state_at(t)
    else:
        state = ic
    field = Field3D.from_params(params, state)
    source = SnapshotFieldSource(field)
    rng = np.random.default_rng(cfg.verify_seed)
    reports = [refined_residual(source, t, x, y, z, cfg.verify_h, mu=cfg.mu)
               for (x, y, z) in _interior_points(field, rng, cfg.verify_points)]

    mass = np.array([abs(r.mass_residual) for r in reports])
    mom = np.array([max(abs(m) for m in r.momentum_residual) for r in reports])
    orders = np.array([r.observed_order for r in reports if r.observed_order is not None])
    summary = {
        "points": len(reports),
        "mass_abs": {"p50": float(np.percentile(mass, 50)),
                     "p90": float(np.percentile(mass, 90)),
                     "max": float(mass.max())},
        "momentum_abs": {"p50": float(np.percentile(mom, 50)),
                         "p90": float(np.percentile(mom, 90)),
                         "max": float(mom.max())},
        "observed_order": {"p50": float(np.percentile(orders, 50)) if orders.size else None,
                           "min": float(orders.min()) if orders.size else None,
                           "max": float(orders.max()) if orders.size else None},
    }
    doc = {
        "time": t,
        "stencil_h": cfg.verify_h,
        "mu": cfg.mu,
        "state": {"a": state.a, "a_dot": state.a_dot, "b": state.b, "b_dot": state.b_dot},
        "summary": summary,
        "points": [r.to_dict() for r in reports],
    }
    out = cfg.out or _DEFAULT_OUT["verify"]
    with open(out, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
    print(f"wrote {out} ({len(reports)} points, "
          f"median order {summary['observed_order']['p50']})")
    return EXIT_OK


def _params_dict(cfg: RunConfig) -> dict:
    return {"K": cfg.K, "gamma": cfg.gamma, "lambda": cfg.lam, "alpha": cfg.alpha,
            "xi": cfg.xi, "mu": cfg.mu}


def _ic_dict(cfg: RunConfig) -> dict:
    d = {"a0": cfg.a0, "a1": cfg.a1}
    if cfg.dim == 3:
        d.update({"b0": cfg.b0, "b1": cfg.b1})
    return d


def run_classify(cfg: RunConfig) -> int:
    out = cfg.out or _DEFAULT_OUT["classify"]
    doc = {"params": _params_dict(cfg), "ic": _ic_dict(cfg)}
    if cfg.dim == 3:
        result = classify_3d(_params(cfg), _initial_state(cfg))
        doc.update(result.to_dict())
        summary = result.verdict
    else:
        estimate = detect_period_2d(_params(cfg), _initial_state(cfg),
                                    cfg.t_end, tol=cfg.rel_tol)
        doc["period"] = estimate.to_dict() if estimate is not None else None
        summary = ("period {:.6g}".format(estimate.period)
                   if estimate is not None else "no period detected")
    with open(out, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
    print(f"wrote {out} ({summary})")
    return EXIT_OK


def run_sweep(cfg: RunConfig) -> int:
    if cfg.dim != 3:
        raise ConfigError("sweep supports dim = 3 only")
    if not cfg.sweep:
        raise ConfigError("missing required key: sweep.<param> (at least one axis)")
    horizon = cfg.sweep_t_end if cfg.sweep_t_end is not None else cfg.t_end
    names = list(cfg.sweep)
    out = cfg.out or _DEFAULT_OUT["sweep"]
    count = 0
    with open(out, "w", encoding="utf-8", newline="\n") as f:
        f.write("gamma,K,lambda,alpha,xi,mu,a0,a1,b0,b1,verdict,basis,T_est\n")
        for combo in itertools.product(*(cfg.sweep[n] for n in names)):
            values = {attr: getattr(cfg, attr)
                      for attr in ("K", "gamma", "lam", "alpha", "xi", "mu",
                                   "a0", "a1", "b0", "b1")}
            values.update({_SCHEMA[n][0]: v for n, v in zip(names, combo)})
            params = PhysParams(K=values["K"], gamma=values["gamma"],
                                lam=values["lam"], alpha=values["alpha"],
                                xi=values["xi"], mu=values["mu"])
            ic = EmdenState3D(0.0, values["a0"], values["a1"],
                              values["b0"], values["b1"])
            result = classify_3d(params, ic)
            t_est = result.T
            if t_est is None and result.verdict != GLOBAL:
                traj = integrate(params, ic, horizon, rel_tol=cfg.rel_tol,
                                 abs_tol=cfg.abs_tol, max_steps=cfg.max_steps,
                                 method=cfg.method)
                if traj.termination.kind == "blowup":
                    t_est = traj.termination.t_est
            f.write(",".join([
                _csv_float(values["gamma"]), _csv_float(values["K"]),
                _csv_float(values["lam"]), _csv_float(values["alpha"]),
                _csv_float(values["xi"]), _csv_float(values["mu"]),
                _csv_float(values["a0"]), _csv_float(values["a1"]),
                _csv_float(values["b0"]), _csv_float(values["b1"]),
                result.verdict, result.basis,
                "" if t_est is None else _csv_float(t_est),
            ]) + "\n")
            count += 1
    print(f"wrote {out} ({count} parameter points)")
    return EXIT_OK


_RUNNERS = {
    "integrate": run_integrate,
    "sample": run_sample,
    "verify": run_verify,
    "classify": run_classify,
    "sweep": run_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        return _RUNNERS[cfg.mode](cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
