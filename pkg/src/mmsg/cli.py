"""Command-line entry point: ``mmsg {simulate,estimate,diagnose,experiment,realdata}``.

Every subcommand accepts ``--config PATH`` (a JSON object); explicit flags
override config values. Outputs go to ``--out`` and are byte-identical for
identical inputs. Sample and component indices in outputs are 1-based.

Exit codes: 0 success, 2 usage, 3 invalid configuration, 4 I/O, 5 data
format, 6 numerical failure, 7 experiment cell failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments, realdata
from .diagnostics import diagnostics
from .errors import IO_EXIT_CODE, InvalidConfig, MMSGError
from .estimators import DEGENERATE_RULES, spg, wsc
from .linalg import DEFAULT_EIG_TOL
from .metrics import aligned_l1_error
from .model import NoiseScenario, load_instance, read_matrix, save_instance, synthesize, write_matrix

log = logging.getLogger("mmsg")


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _methods(choice: str | None) -> tuple | None:
    if choice is None:
        return None
    return ("spg", "wsc") if choice == "both" else (choice,)


def _scenarios(choice: str | None) -> tuple | None:
    if choice is None:
        return None
    return ("ghe", "she") if choice == "both" else (choice,)


def _read_config(path) -> dict:
    if path is None:
        return {}
    p = Path(path)
    try:
        cfg = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{p}: not valid JSON ({exc})") from exc
    if not isinstance(cfg, dict):
        raise InvalidConfig(f"{p}: config must be a JSON object")
    return cfg


def _pick(flag, cfg: dict, key: str, default=None):
    if flag is not None:
        return flag
    return cfg.get(key, default)


def _threads() -> int:
    raw = os.environ.get("MMSG_THREADS", "1")
    try:
        jobs = int(raw)
    except ValueError:
        raise InvalidConfig(f"MMSG_THREADS must be an integer, got {raw!r}") from None
    if jobs < 0:
        raise InvalidConfig("MMSG_THREADS must be >= 0")
    return jobs or (os.cpu_count() or 1)


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _out_dir(args, cfg: dict) -> Path:
    out = Path(_pick(args.out, cfg, "output_dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- subcommands ---------------------------------------------------------------

SIM_KEYS = ("n", "p", "K", "delta", "c_delta", "n_pure", "alpha", "eta", "scenario")


def cmd_simulate(args) -> int:
    cfg = _read_config(args.config)
    params = {k: _pick(getattr(args, k.lower()), cfg, k) for k in SIM_KEYS}
    missing = [k for k in ("n", "p", "K", "n_pure") if params[k] is None]
    if missing:
        raise InvalidConfig(f"simulate needs {', '.join(missing)}")
    n, p, k, n_pure = (int(params[key]) for key in ("n", "p", "K", "n_pure"))
    if params["delta"] is None:
        delta = experiments.delta_formula(float(params["c_delta"] or 10.0), k, n, p)
    else:
        delta = float(params["delta"])
    scenario = NoiseScenario(params["scenario"] or "ghe", float(params["eta"] or 1.0))
    seed = _pick(args.seed, cfg, "seed", experiments.DEFAULT_SEED)
    out = _out_dir(args, cfg)
    x, inst = synthesize(n, p, k, delta, n_pure, float(params["alpha"] or 0.5), scenario, int(seed))
    manifest = save_instance(out, x, inst)
    print(f"wrote x.csv, theta.csv, pi.csv, manifest.json to {out} (delta={manifest['delta']:.6g})")
    return 0


def cmd_estimate(args) -> int:
    cfg = _read_config(args.config)
    src = _pick(args.input, cfg, "input")
    if src is None:
        raise InvalidConfig("estimate needs --input (an x.csv file or a simulate output directory)")
    src = Path(src)
    if not src.exists():
        raise FileNotFoundError(f"input not found: {src}")
    truth = None
    k = _pick(args.k, cfg, "K")
    if src.is_dir():
        x, inst, manifest = load_instance(src)
        truth = inst.pi
        k = k if k is not None else manifest["K"]
    else:
        x = read_matrix(src)
    if k is None:
        raise InvalidConfig("estimate needs --k when the input is a bare matrix")
    k = int(k)
    methods = _methods(args.method) or tuple(cfg.get("methods", ("spg",)))
    eig_tol = float(_pick(args.eig_tol, cfg, "eig_tol", DEFAULT_EIG_TOL))
    degenerate = _pick(args.degenerate, cfg, "degenerate", "uniform")
    seed = int(_pick(args.seed, cfg, "seed", experiments.DEFAULT_SEED))
    out = _out_dir(args, cfg)

    report: dict = {"K": k, "n": int(x.shape[1]), "p": int(x.shape[0]), "methods": list(methods)}
    if "spg" in methods:
        est = spg(x, k, eig_tol=eig_tol, degenerate=degenerate)
        write_matrix(out / "pi_hat_spg.csv", est.pi_hat)
        report["spg"] = {
            "vertex_indices": [int(i) + 1 for i in est.vertex_indices],
            "eigenvalues": [float(v) for v in est.lambda_hat],
            "degenerate_rows": est.degenerate_rows,
            "degenerate_rule": degenerate,
        }
        if truth is not None:
            report["spg"]["aligned_l1_error"] = aligned_l1_error(est.pi_hat, truth)
    if "wsc" in methods:
        hc = wsc(x, k, rng=np.random.default_rng(seed))
        write_matrix(out / "pi_hat_wsc.csv", hc.one_hot)
        report["wsc"] = {"seed": seed, "cluster_sizes": np.bincount(hc.labels, minlength=k).tolist()}
        if truth is not None:
            report["wsc"]["aligned_l1_error"] = aligned_l1_error(hc.one_hot, truth)
    _write_json(out / "estimate.json", report)
    for m in methods:
        err = report[m].get("aligned_l1_error")
        print(f"{m}: wrote pi_hat_{m}.csv" + (f", aligned l1 error {err:.6f}" if err is not None else ""))
    return 0


def cmd_diagnose(args) -> int:
    cfg = _read_config(args.config)
    src = _pick(args.input, cfg, "input")
    if src is None:
        raise InvalidConfig("diagnose needs --input (a simulate output directory)")
    src = Path(src)
    if not src.is_dir():
        raise FileNotFoundError(f"not a directory: {src}")
    _, inst, manifest = load_instance(src)
    report = diagnostics(inst.theta, inst.pi, eta=manifest.get("eta"))
    out = _out_dir(args, cfg)
    _write_json(out / "diagnostics.json", report.to_dict())
    lemmas = report.lemma_checks()
    print(", ".join(f"{name}={'ok' if ok else 'VIOLATED'}" for name, ok in lemmas.items()))
    return 0


def cmd_experiment(args) -> int:
    cfg = _read_config(args.config)
    if args.id is not None:
        cfg["experiment_id"] = args.id
    if args.scale is not None:
        cfg["scale"] = args.scale
    if args.seed is not None:
        cfg["base_seed"] = args.seed
    if args.replicates is not None:
        cfg["replicates"] = args.replicates
    if args.method is not None:
        cfg["methods"] = list(_methods(args.method))
    if args.scenario is not None:
        cfg["scenarios"] = list(_scenarios(args.scenario))
    if "experiment_id" not in cfg:
        raise InvalidConfig("experiment needs --id or an experiment_id in the config")
    spec = experiments.spec_from_dict(cfg)
    out = _out_dir(args, cfg)
    if not spec.cells:
        print(f"{spec.experiment_id}: empty grid, nothing to run")
        return 0
    result = experiments.run_experiment(spec, jobs=_threads())
    csv_path = out / cfg.get("csv", f"{spec.experiment_id}.csv")
    svg_path = out / cfg.get("svg", f"{spec.experiment_id}.svg")
    experiments.emit_results(result, csv_path, svg_path)
    print(f"wrote {csv_path} and {svg_path}")
    return 0


def _realdata_one(name: str, path: Path, standardize: bool, degenerate: str, out: Path) -> dict:
    spec = realdata.DATASETS[name]
    x, _, info = realdata.load_dataset(path, spec)
    analysis = realdata.analyze_real(x, spec.k, standardize_features=standardize, degenerate=degenerate)
    payload = realdata.stats_payload(analysis, name)
    payload["dropped_rows"] = info["dropped_rows"]
    realdata.write_stats(out / f"{name}_stats.json", payload)
    if analysis.ternary is not None:
        realdata.emit_ternary(analysis.ternary, out / f"{name}_ternary.csv", out / f"{name}_ternary.svg",
                              title=name.capitalize())
    return payload


def cmd_realdata(args) -> int:
    cfg = _read_config(args.config)
    name = _pick(args.dataset, cfg, "dataset")
    if name is None:
        raise InvalidConfig("realdata needs --dataset")
    names = sorted(realdata.DATASETS) if name == "all" else [name]
    for nm in names:
        if nm not in realdata.DATASETS:
            raise InvalidConfig(f"unknown dataset {nm!r}; choose from {sorted(realdata.DATASETS)}")
    src = _pick(args.input, cfg, "input")
    if src is not None and len(names) > 1:
        raise InvalidConfig("--input names a single file; use --data-dir with --dataset all")
    data_dir = Path(_pick(args.data_dir, cfg, "data_dir", realdata.default_data_dir()))
    paths = {nm: Path(src) if src is not None else data_dir / realdata.DATASETS[nm].filename for nm in names}
    for p in paths.values():
        if not p.is_file():
            raise FileNotFoundError(f"dataset file not found: {p}")
    standardize = bool(args.standardize or cfg.get("standardize", False))
    degenerate = _pick(args.degenerate, cfg, "degenerate", "reflect")
    out = _out_dir(args, cfg)
    for nm in names:
        payload = _realdata_one(nm, paths[nm], standardize, degenerate, out)
        print(f"{nm}: n={payload['n']} p={payload['p']} K={payload['K']} tau_pure={payload['tau_pure']:.4f} "
              f"tau_mixed={payload['tau_mixed']:.4f} kappa={payload['kappa_pi_hat']}")
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmsg", description="Mixed membership sub-Gaussian model toolkit.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--config", type=Path, help="JSON config; explicit flags take precedence")
        p.add_argument("--out", type=Path, help="output directory (default: current directory)")
        if seed:
            p.add_argument("--seed", type=_u64, help=f"RNG seed (default {experiments.DEFAULT_SEED:#x})")

    p = sub.add_parser("simulate", help="draw a synthetic instance")
    common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--n-pure", dest="n_pure", type=int)
    p.add_argument("--delta", type=float, help="centre separation (overrides --c-delta)")
    p.add_argument("--c-delta", dest="c_delta", type=float, help="separation constant (default 10)")
    p.add_argument("--alpha", type=float, help="Dirichlet parameter for mixed rows (default 0.5)")
    p.add_argument("--eta", type=float, help="upper end of the noise scale range (default 1)")
    p.add_argument("--scenario", choices=experiments.SCENARIOS)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate memberships from a data matrix")
    common(p)
    p.add_argument("--input", type=Path, help="x.csv (p rows, n columns) or a simulate output directory")
    p.add_argument("--k", type=int)
    p.add_argument("--method", choices=("spg", "wsc", "both"))
    p.add_argument("--eig-tol", dest="eig_tol", type=float)
    p.add_argument("--degenerate", choices=DEGENERATE_RULES, help="rule for rows that clip to zero")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("diagnose", help="theory parameters and condition ratios of an instance")
    common(p, seed=False)
    p.add_argument("--input", type=Path, help="a simulate output directory")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("experiment", help="run a Monte Carlo benchmark grid")
    common(p)
    p.add_argument("--id", choices=("exp1", "exp2", "exp3", "exp4", "custom"))
    p.add_argument("--scale", choices=("desk", "full"))
    p.add_argument("--replicates", type=int)
    p.add_argument("--method", choices=("spg", "wsc", "both"))
    p.add_argument("--scenario", choices=("ghe", "she", "both"))
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("realdata", help="mixing statistics of a benchmark dataset")
    common(p, seed=False)
    p.add_argument("--dataset", choices=(*sorted(realdata.DATASETS), "all"))
    p.add_argument("--input", type=Path, help="dataset file (default: <data-dir>/<name>.data)")
    p.add_argument("--data-dir", dest="data_dir", type=Path,
                   help=f"directory holding the dataset files (default ${realdata.DATA_DIR_ENV} or ./data)")
    p.add_argument("--standardize", action="store_true", help="z-score each feature first")
    p.add_argument("--degenerate", choices=DEGENERATE_RULES)
    p.set_defaults(func=cmd_realdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except MMSGError as exc:
        print(f"mmsg {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"mmsg {args.command}: I/O error: {exc}", file=sys.stderr)
        return IO_EXIT_CODE


if __name__ == "__main__":
    sys.exit(main())
