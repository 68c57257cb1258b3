"""Command-line front end: reproducible experiments emitted as CSV.

Every subcommand writes a single CSV whose header block (``#``-prefixed)
echoes the tool version, the effective configuration and the master seed;
identical configurations produce byte-identical files.  A plain-text
``key = value`` config file can seed any flags, with explicit flags
winning.  The OPPSCHED_OUTDIR environment variable relocates relative
output paths.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Iterable, Sequence

import numpy as np

from . import __version__, converse, estimation, infometrics, kernels, optimal, policies, system

SUBCOMMANDS = ("simulate", "gap", "measure", "region", "regret", "measure-est", "info", "fig1")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def parse_config_file(path: str) -> dict[str, str]:
    """Read ``key = value`` lines; blank lines and # comments are ignored."""
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def parse_header_config(text: str) -> dict[str, str]:
    """Recover the config block from an emitted CSV header (round-trip check)."""
    out: dict[str, str] = {}
    for line in text.splitlines():
        if line.startswith("# config: "):
            key, value = line[len("# config: "):].split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _write_csv(out_path: str, subcommand: str, config: dict, columns: Sequence[str],
               rows: Iterable[Sequence], extra_header: dict | None = None) -> None:
    lines = [f"# oppsched {__version__}", f"# subcommand: {subcommand}"]
    for key in sorted(config):
        lines.append(f"# config: {key} = {_fmt(config[key])}")
    for key, value in (extra_header or {}).items():
        lines.append(f"# {key}: {_fmt(value)}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if out_path == "-":
        sys.stdout.write(text)
        return
    if not os.path.isabs(out_path):
        out_path = os.path.join(os.environ.get("OPPSCHED_OUTDIR", "."), out_path)
    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _estimator_from_spec(spec: str) -> estimation.EstimatorSpec:
    if spec == "empirical-mean":
        return estimation.empirical_mean()
    if spec.startswith("constant:"):
        return estimation.constant_estimator(float(spec.split(":", 1)[1]))
    raise ValueError(f"unknown estimator spec {spec!r} (use empirical-mean or constant:<c>)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oppsched",
        description="Opportunistic-scheduling and Bernoulli-estimation experiment runner; "
                    "all outputs are CSV with a '#' header block echoing the configuration.")
    parser.add_argument("--config", default=None, help="key = value config file; flags override")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", default=f"{name}.csv",
                       help="output CSV path ('-' for stdout); relative paths land in "
                            "$OPPSCHED_OUTDIR when set")
        return p

    p = add("simulate", "single policy run over one trace: t,s,x1,x2,xbar1,xbar2,z,theta")
    p.add_argument("--policy", default=None, help="greedy | plugin | fw-vanishing | "
                                                  "fw-constant:<eta> | genie:<q>")
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = add("gap", "gap-inequality experiment: T,phi_hat,se,gap,scaled_gap,bound_rhs")
    p.add_argument("--policy", default=None)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--horizons", default=None, help="comma list, e.g. 100,1000,10000")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)

    p = add("measure", "scaled gaps over q sampled uniformly on [1/4,3/4]: q,scaled_gap")
    p.add_argument("--policy", default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)

    p = add("region", "region boundary data: curve,param,x1,x2")
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--grid", type=int, default=None)

    p = add("regret", "estimator regret series: n,per_step,cumulative,V_n,normalized")
    p.add_argument("--estimator", default=None, help="empirical-mean | constant:<c>")
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--mode", default=None, choices=["auto", "exact", "monte-carlo"])
    p.add_argument("--mc-samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = add("measure-est", "normalized regret over sampled p: p,normalized")
    p.add_argument("--estimator", default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--mc-samples", type=int, default=None)

    p = add("info", "tv/KL/bound table: p,q,n,tv,kl_pq,kl_qp,tv_bound,pinsker_rhs,...")
    p.add_argument("--p", default=None, help="comma list of p values")
    p.add_argument("--q", default=None, help="comma list of q values")
    p.add_argument("--n", default=None, help="comma list of dimensions")

    p = add("fig1", "decision curve and Shannon FDM curve: u,dec_x1,dec_x2,fdm_x1,fdm_x2")
    p.add_argument("--B", type=float, default=None)
    p.add_argument("--snr", type=float, default=None)
    p.add_argument("--grid", type=int, default=None)

    return parser


# casts applied to config-file strings (flags are typed by argparse already)
_PARAM_TYPES: dict[str, type] = {
    "q": float, "p": float, "alpha": float, "B": float, "snr": float,
    "horizon": int, "reps": int, "seed": int, "grid": int, "m": int,
    "samples": int, "threads": int, "mc-samples": int,
}


def _merge(args: argparse.Namespace, file_config: dict[str, str],
           defaults: dict[str, object]) -> dict[str, object]:
    """Effective config: explicit flag > config file > subcommand default."""
    merged: dict[str, object] = {}
    for key, default in defaults.items():
        flag_val = getattr(args, key.replace("-", "_"), None)
        if flag_val is not None:
            merged[key] = flag_val
        elif key in file_config:
            merged[key] = _PARAM_TYPES.get(key, str)(file_config[key])
        else:
            if default is None:
                raise ValueError(f"missing required parameter {key!r}")
            merged[key] = default
    return merged


def _validate_common(cfg: dict) -> None:
    if "q" in cfg and not 0.0 <= float(cfg["q"]) <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {cfg['q']}")
    if "alpha" in cfg and not 0.0 < float(cfg["alpha"]) <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {cfg['alpha']}")
    if "reps" in cfg and int(cfg["reps"]) < 1:
        raise ValueError(f"reps must be >= 1, got {cfg['reps']}")
    if "grid" in cfg and int(cfg["grid"]) < 2:
        raise ValueError(f"grid must be >= 2, got {cfg['grid']}")


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    file_config = parse_config_file(args.config) if args.config else {}

    try:
        return _dispatch(args, file_config)
    except (ValueError, ImportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args: argparse.Namespace, file_config: dict[str, str]) -> int:
    cmd = args.subcommand
    default_threads = os.cpu_count() or 1

    if cmd == "simulate":
        cfg = _merge(args, file_config,
                     {"policy": None, "q": None, "horizon": None, "seed": 0})
        _validate_common(cfg)
        trace = system.generate_trace(cfg["q"], cfg["horizon"], cfg["seed"])
        rec = policies.run_policy(cfg["policy"], trace)
        converse.fill_theta_series(rec)
        xbar = np.cumsum(rec.decisions, axis=0) / np.arange(1, trace.horizon + 1)[:, None]
        rows = ((t, int(trace.states[t]),
                 rec.decisions[t, 0], rec.decisions[t, 1],
                 xbar[t, 0], xbar[t, 1],
                 rec.z_series[t], rec.theta_series[t])
                for t in range(trace.horizon))
        _write_csv(args.out, cmd, cfg,
                   ["t", "s", "x1", "x2", "xbar1", "xbar2", "z", "theta"], rows,
                   {"seed": cfg["seed"], "backend": kernels.BACKEND})
        return 0

    if cmd == "gap":
        cfg = _merge(args, file_config,
                     {"policy": None, "q": None, "horizons": None, "reps": None,
                      "seed": 0, "threads": default_threads})
        _validate_common(cfg)
        horizons = _int_list(cfg["horizons"]) if isinstance(cfg["horizons"], str) else cfg["horizons"]
        series = converse.gap_experiment(cfg["policy"], cfg["q"], horizons,
                                         cfg["reps"], cfg["seed"], threads=cfg["threads"])
        rows = [(pt.horizon, pt.phi_hat, pt.se, pt.gap, pt.scaled_gap, pt.bound_rhs)
                for pt in series.points]
        _write_csv(args.out, cmd, cfg,
                   ["T", "phi_hat", "se", "gap", "scaled_gap", "bound_rhs"], rows,
                   {"seed": cfg["seed"], "phi_star": series.phi_star,
                    "backend": kernels.BACKEND})
        return 0

    if cmd == "measure":
        cfg = _merge(args, file_config,
                     {"policy": None, "samples": None, "horizon": None, "reps": None,
                      "seed": 0, "threads": default_threads})
        _validate_common(cfg)
        res = converse.measure_experiment(cfg["policy"], cfg["samples"], cfg["horizon"],
                                          cfg["reps"], cfg["seed"], threads=cfg["threads"])
        _write_csv(args.out, cmd, cfg, ["q", "scaled_gap"], res.entries,
                   {"seed": cfg["seed"], "threshold": res.threshold,
                    "fraction_above": res.fraction_above,
                    "note": f"finite-horizon proxy at T={cfg['horizon']}; "
                            "the limsup itself is not computable",
                    "backend": kernels.BACKEND})
        return 0

    if cmd == "region":
        cfg = _merge(args, file_config, {"q": None, "grid": 200})
        _validate_common(cfg)
        if not 0.0 < cfg["q"] <= 1.0:
            raise ValueError("region requires q in (0, 1]")
        grid = int(cfg["grid"])
        rows = []
        for i in range(grid + 1):
            r = i / grid
            x1, x2 = optimal.boundary_point(cfg["q"], r)
            rows.append(("upper", r, float(x1), float(x2)))
        for i in range(grid + 1):
            x1 = (1.0 - cfg["q"]) + i / grid * cfg["q"]
            rows.append(("lower", x1, x1, 1.0 - x1))
        _write_csv(args.out, cmd, cfg, ["curve", "param", "x1", "x2"], rows,
                   {"seed": 0})
        return 0

    if cmd == "regret":
        cfg = _merge(args, file_config,
                     {"estimator": None, "p": None, "alpha": None, "m": None,
                      "mode": "auto", "mc-samples": 100_000, "seed": 0})
        _validate_common(cfg)
        if not 0.0 <= float(cfg["p"]) <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {cfg['p']}")
        est = _estimator_from_spec(cfg["estimator"])
        series = estimation.regret_series(est, cfg["p"], cfg["m"], cfg["alpha"],
                                          mode=cfg["mode"], mc_samples=cfg["mc-samples"],
                                          seed=cfg["seed"])
        rows = [(n + 1, series.per_step[n], series.cumulative[n], series.normalizers[n],
                 series.cumulative[n] / series.normalizers[n])
                for n in range(cfg["m"])]
        _write_csv(args.out, cmd, cfg,
                   ["n", "per_step", "cumulative", "V_n", "normalized"], rows,
                   {"seed": cfg["seed"], "mode": series.mode})
        return 0

    if cmd == "measure-est":
        cfg = _merge(args, file_config,
                     {"estimator": None, "samples": None, "m": None, "alpha": None,
                      "seed": 0, "mc-samples": 100_000})
        _validate_common(cfg)
        est = _estimator_from_spec(cfg["estimator"])
        res = estimation.measure_proxy_experiment(est, cfg["samples"], cfg["m"],
                                                  cfg["alpha"], cfg["seed"],
                                                  mc_samples=cfg["mc-samples"])
        _write_csv(args.out, cmd, cfg, ["p", "normalized"], res.entries,
                   {"seed": cfg["seed"], "threshold": res.threshold,
                    "fraction_above": res.fraction_above, "mode": res.mode,
                    "note": f"finite-horizon proxy at m={cfg['m']}; "
                            "the limsup itself is not computable"})
        return 0

    if cmd == "info":
        cfg = _merge(args, file_config, {"p": None, "q": None, "n": None})
        ps = _float_list(cfg["p"]) if isinstance(cfg["p"], str) else cfg["p"]
        qs = _float_list(cfg["q"]) if isinstance(cfg["q"], str) else cfg["q"]
        ns = _int_list(cfg["n"]) if isinstance(cfg["n"], str) else cfg["n"]
        rows = []
        for p in ps:
            for q in qs:
                for n in ns:
                    tvc = infometrics.tv_bound_check(p, q, n)
                    pin = infometrics.pinsker_check(p, q, n)
                    rows.append((p, q, n, tvc.tv,
                                 infometrics.kl_product(p, q, n),
                                 infometrics.kl_product(q, p, n),
                                 tvc.bound, pin.pinsker_rhs,
                                 tvc.holds, pin.holds))
        _write_csv(args.out, cmd, cfg,
                   ["p", "q", "n", "tv", "kl_pq", "kl_qp", "tv_bound",
                    "pinsker_rhs", "tv_bound_holds", "pinsker_holds"], rows,
                   {"seed": 0})
        return 0

    if cmd == "fig1":
        cfg = _merge(args, file_config, {"B": 0.7, "snr": 3.0, "grid": 200})
        _validate_common(cfg)
        grid = int(cfg["grid"])
        rows = []
        for i in range(grid + 1):
            u = i / grid
            dec = system.decision_set_point(1, u)
            fdm = system.shannon_fdm_point(u, cfg["B"], cfg["snr"])
            rows.append((u, dec.x1, dec.x2, fdm.x1, fdm.x2))
        _write_csv(args.out, cmd, cfg,
                   ["u", "dec_x1", "dec_x2", "fdm_x1", "fdm_x2"], rows, {"seed": 0})
        return 0

    raise ValueError(f"unknown subcommand {cmd!r}")


if __name__ == "__main__":
    sys.exit(main())
