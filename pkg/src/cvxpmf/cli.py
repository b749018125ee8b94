"""Command-line entry point: ``cvxpmf <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .estimator import fenchel_check, h_diagnostic, lse
from .experiments import (
    CATALOG_IDS,
    ExperimentConfig,
    catalog,
    config_dict,
    convergence_experiment,
    knot_capture_experiment,
    resolve_pmf,
)
from .io import read_sample, weights_to_json, write_csv
from .limit import sample_limit_distribution
from .pmf import is_convex, knots, laplacians, mixture_decompose


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(out: Path, command: str, args, started: float, extra=None):
    data = {
        "command": command,
        "seed": args.seed,
        "tol": args.tol,
        "full_scale": args.full_scale,
        "versions": {
            "cvxpmf": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "elapsed_seconds": round(time.perf_counter() - started, 3),
    }
    if extra:
        data.update(extra)
    (out / f"{command}_manifest.json").write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def write_diagnostics(sample, out: Path, tol: float = 1e-8) -> dict:
    """CSV diagnostics for one sample: estimate, Laplacian, scaled H residual, knots."""
    res = lse(sample, tol=tol)
    diag = h_diagnostic(sample, res)
    size = diag.z.size
    p_hat = np.zeros(size)
    p_hat[: res.values.size] = res.values
    p_n = np.zeros(size)
    p_n[: res.empirical.size] = res.empirical
    lap = laplacians(p_hat[:-1])
    knot_set = set(diag.knots)
    rows = [
        (int(z), p_n[z], p_hat[z], lap[z] if z >= 1 else None, diag.value[z], z in knot_set)
        for z in diag.z
    ]
    write_csv(out / "diagnostics.csv", ["z", "p_n", "p_hat", "laplacian", "h_residual_scaled", "is_knot"], rows)
    cert = res.certificate
    write_csv(
        out / "certificate.csv",
        ["n", "grid_len", "min_residual", "max_knot_gap", "feasibility", "passed", "knots"],
        [(res.n, res.grid_len, cert.min_residual, cert.max_knot_gap, cert.feasibility, cert.passed,
          " ".join(str(k) for k in res.knots))],
    )
    return {"n": res.n, "grid_len": res.grid_len, "knots": list(res.knots), "certificate_passed": cert.passed}


def cmd_estimate(args):
    started = time.perf_counter()
    out = _out_dir(args)
    sample = read_sample(args.sample_file)
    info = write_diagnostics(sample, out, tol=args.tol)
    _manifest(out, "estimate", args, started, {"sample_file": str(args.sample_file), **info})
    print(f"n={info['n']} knots={info['knots']} certificate={'pass' if info['certificate_passed'] else 'FAIL'}")


def cmd_catalog(args):
    p = catalog(args.id)
    payload = {"id": args.id, "mass": [float(x) for x in p.mass], "interior_knots": list(knots(p).interior)}
    if is_convex(p):
        payload["pi"] = json.loads(weights_to_json(mixture_decompose(p)))["pi"]
    text = json.dumps(payload, indent=2)
    if args.out:
        out = _out_dir(args)
        (out / f"catalog_{args.id}.json").write_text(text + "\n")
        write_csv(out / f"catalog_{args.id}.csv", ["k", "mass"], enumerate(p.mass))
    print(text)


def cmd_limit_sample(args):
    started = time.perf_counter()
    out = _out_dir(args)
    p = resolve_pmf(args.pmf)
    draws = sample_limit_distribution(p, args.N, args.seed)
    S = p.S
    rows = []
    for i, (w, ls) in enumerate(draws):
        for k in range(S + 3):
            if k <= S + 1:
                rows.append((i, k, w.w[k], ls.g_hat[k], ls.G_hat[k], ls.H_hat[k]))
            else:
                rows.append((i, k, None, None, None, ls.H_hat[k]))
    write_csv(out / "limit_sample.csv", ["draw", "k", "w", "g_hat", "G_hat", "H_hat"], rows)
    failed = [i for i, (_, ls) in enumerate(draws) if not ls.certificate.passed]
    _manifest(out, "limit-sample", args, started, {"pmf": args.pmf, "N": args.N, "certificate_failures": failed})
    print(f"{args.N} draws written to {out / 'limit_sample.csv'}; certificate failures: {len(failed)}")


def _load_config(args, defaults: dict) -> ExperimentConfig:
    data = dict(defaults)
    if args.config:
        data.update(json.loads(Path(args.config).read_text()))
    if args.seed is not None:
        data["seed"] = args.seed
    data["tol"] = args.tol
    if args.workers is not None:
        data["workers"] = args.workers
    cfg = ExperimentConfig(**data)
    return cfg.full_scale() if args.full_scale else cfg


def cmd_knot_capture(args):
    started = time.perf_counter()
    out = _out_dir(args)
    cfg = _load_config(args, {"sample_sizes": [50, 200, 800, 3200]})
    rows = knot_capture_experiment(cfg)
    write_csv(
        out / "knot_capture.csv",
        ["pmf", "n", "replications", "counted", "captured", "frequency_pct", "support_ok_pct",
         "certificate_failures"],
        [(r.pmf, r.n, r.replications, r.counted, r.captured, r.frequency_pct, r.support_ok_pct,
          r.certificate_failures) for r in rows],
    )
    _manifest(out, "knot-capture", args, started, {"config": config_dict(cfg)})
    for r in rows:
        print(f"{r.pmf:>3} n={r.n:<6} {r.frequency_pct:6.1f}%  (failures: {r.certificate_failures})")


def cmd_convergence(args):
    started = time.perf_counter()
    out = _out_dir(args)
    cfg = _load_config(
        args, {"pmfs": ["p0"], "sample_sizes": [50, 100, 500, 1000, 5000, 10000]}
    )
    results = convergence_experiment(cfg)
    write_csv(
        out / "convergence_D.csv",
        ["pmf", "n", "repetition", "D"],
        [(r.pmf, r.n, i, d) for r in results for i, d in enumerate(r.D)],
    )
    keys = ("min", "q1", "median", "q3", "max")
    write_csv(
        out / "convergence_summary.csv",
        ["pmf", "n", *keys],
        [(r.pmf, r.n, *(r.summary[k] for k in keys)) for r in results],
    )
    _manifest(out, "convergence", args, started, {"config": config_dict(cfg)})
    for r in results:
        print(f"{r.pmf:>3} n={r.n:<7} median D = {r.summary['median']:.4f}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (u64)")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--tol", type=float, default=1e-8, help="certificate tolerance")
    common.add_argument("--full-scale", action="store_true", help="use M=1000, M'=5000, 100 repetitions")

    parser = argparse.ArgumentParser(prog="cvxpmf", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", parents=[common], help="convex LSE and diagnostics for a sample file")
    p.add_argument("sample_file")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("catalog", parents=[common], help="print a catalog pmf")
    p.add_argument("id", choices=CATALOG_IDS)
    p.set_defaults(func=cmd_catalog, out=None)

    p = sub.add_parser("limit-sample", parents=[common], help="draws from the weak limit")
    p.add_argument("--pmf", required=True, help="catalog id or pmf JSON file")
    p.add_argument("-N", type=int, default=1000)
    p.set_defaults(func=cmd_limit_sample)

    for name, func in (("knot-capture", cmd_knot_capture), ("convergence", cmd_convergence)):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--config", help="experiment config JSON")
        p.add_argument("--workers", type=int, default=None)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command in ("estimate", "limit-sample") and args.seed is None:
        args.seed = 0
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
