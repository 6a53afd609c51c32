"""Command-line entry point: ``mocont run | oracle | compare | recipes``.

Exit codes: 0 on success, 2 for configuration or input errors, 3 when a
run produced no critical point beyond its start.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .driver import ContinuationConfig, nondominance_filter, run
from .errors import InconsistentData, UnknownProblem
from .io import RunManifest, read_front, write_front_csv, write_points_csv
from .oracles import (grid_pareto_critical, hausdorff, lasso_homotopy, normalization, uncovered_fraction,
                      weighted_sum_sweep)
from .problems import (LeastSquares, build_sindy, make_iris_mlp, make_paper_problem, random_lasso_instance,
                       simulate_lorenz)

EXIT_OK, EXIT_CONFIG, EXIT_EMPTY = 0, 2, 3

ANALYTIC = ("example1", "example2", "example3", "toy4_1", "split", "polynomial")
PROBLEMS = ANALYTIC + ("lasso", "sindy", "mlp")
HESSIAN_FLAGS = {"analytic": "analytic", "fd": "finite_difference", "sr1": "sr1"}

# (problem id, parameter defaults) for the problems with knobs
DEFAULTS = {
    "polynomial": {"n": 1000, "seed": 0},
    "lasso": {"n": 5, "m": 20, "seed": 0},
    "sindy": {"steps": 2000, "noise": 1e-3, "seed": 0, "poly_order": 3, "normalize": True},
    "mlp": {"seed": 0, "train_fraction": 0.7},
}

log = logging.getLogger("mocont")


class ConfigError(Exception):
    pass


def build_problem(name: str, params: dict | None = None):
    """Instantiate a problem from its id and the (JSON-safe) parameter dict."""
    if name not in PROBLEMS:
        raise UnknownProblem(f"unknown problem {name!r}; choose from {', '.join(PROBLEMS)}")
    p = dict(DEFAULTS.get(name, {}))
    p.update(params or {})
    if name == "polynomial":
        return make_paper_problem(name, n=int(p["n"]), seed=int(p["seed"]))
    if name in ANALYTIC:
        return make_paper_problem(name)
    if name == "lasso":
        return random_lasso_instance(int(p["seed"]), m=int(p["m"]), n=int(p["n"]))
    if name == "sindy":
        traj = simulate_lorenz(steps=int(p["steps"]), noise=float(p["noise"]), seed=int(p["seed"]))
        return build_sindy(traj, poly_order=int(p["poly_order"]), normalize=bool(p["normalize"]))
    return make_iris_mlp(seed=int(p["seed"]), train_fraction=float(p["train_fraction"]))


def _problem_params(args) -> dict:
    params = dict(DEFAULTS.get(args.problem, {}))
    if args.problem in ("polynomial", "lasso") and args.dim is not None:
        params["n"] = args.dim
    if "seed" in params and args.seed is not None:
        params["seed"] = args.seed
    for key, val in (args.param or []):
        if key not in params:
            raise ConfigError(f"problem {args.problem!r} has no parameter {key!r}")
        params[key] = type(params[key])(json.loads(val)) if not isinstance(params[key], bool) \
            else val.lower() in ("1", "true", "yes")
    return params


def _parse_param(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError("expected KEY=VALUE")
    k, v = text.split("=", 1)
    return k.strip(), v.strip()


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------
def _config_from_args(args) -> ContinuationConfig:
    kw = {"tau": args.tau, "kkt_tol": args.kkt_tol, "eps_pa": args.eps_pa, "greedy": args.greedy,
          "max_steps": args.max_steps,
          "restarts": args.restarts, "seed": args.seed if args.seed is not None else 0}
    if args.hessian is not None:
        kw["hessian_mode"] = HESSIAN_FLAGS[args.hessian]
    if args.threads is not None:
        kw["threads"] = args.threads
    try:
        return ContinuationConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def execute_run(problem: str, params: dict, config: ContinuationConfig, out: str | Path):
    """Run continuation and write ``<out>.csv``, ``<out>.front.csv`` and ``<out>.manifest.json``."""
    model = build_problem(problem, params)
    archive = run(model, config)
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_points_csv(out.with_name(out.name + ".csv"), archive.points, model.dim)
    write_points_csv(out.with_name(out.name + ".front.csv"), archive.front, model.dim)
    manifest = RunManifest(problem=problem, problem_params=params, config=config.to_dict(), seed=config.seed,
                           version=__version__, elapsed=archive.elapsed, terminations=archive.terminations(),
                           n_points=len(archive.points), n_front=len(archive.front))
    manifest.save(out.with_name(out.name + ".manifest.json"))
    return archive, manifest


def cmd_run(args) -> int:
    if args.from_manifest:
        man = RunManifest.load(args.from_manifest)
        problem, params = man.problem, man.problem_params
        config = ContinuationConfig.from_dict(man.config)
    else:
        if args.problem is None:
            raise ConfigError("--problem is required")
        problem = args.problem
        if problem not in PROBLEMS:
            raise UnknownProblem(f"unknown problem {problem!r}; choose from {', '.join(PROBLEMS)}")
        params = _problem_params(args)
        config = _config_from_args(args)
    archive, man = execute_run(problem, params, config, args.out)
    done = [b for b in archive.branches if len(b.points) > 1]
    summary = {"points": man.n_points, "front": man.n_front, "branches": len(archive.branches),
               "elapsed": round(man.elapsed, 3),
               "terminations": sorted({b.termination for b in archive.branches})}
    print(json.dumps(summary))
    if not done:
        print("no critical point found beyond the start", file=sys.stderr)
        return EXIT_EMPTY
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------
def _least_squares_data(model):
    if isinstance(model, LeastSquares):
        return model.A, model.b, model.scale
    if hasattr(model, "as_least_squares"):
        A, b = model.as_least_squares()
        return A, b, 1.0
    raise ConfigError(f"problem {model.name!r} is not a linear least-squares objective")


def cmd_oracle(args) -> int:
    if args.problem not in PROBLEMS:
        raise UnknownProblem(f"unknown problem {args.problem!r}")
    params = _problem_params(args)
    model = build_problem(args.problem, params)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    report: dict = {"oracle": args.kind, "problem": args.problem, "params": params}
    if args.kind == "lasso":
        A, b, scale = _least_squares_data(model)
        path = lasso_homotopy(A, b)
        F = path.objectives(per_segment=args.samples, scale=scale)
        report.update(breakpoints=len(path.breakpoints), ties=len(path.ties))
    elif args.kind == "weighted-sum":
        g0 = model.gradient(np.zeros(model.dim))
        lam_max = float(np.max(np.abs(g0)))
        lams = lam_max * np.logspace(-3, 0, args.lambdas)
        sols = weighted_sum_sweep(model, lams, starts=args.starts, seed=args.seed or 0, method=args.method,
                                  iters=args.iters)
        F = np.array([s.objectives for s in sols])
        report.update(solves=len(sols), lam_max=lam_max)
    else:  # grid
        if args.box is None:
            raise ConfigError("--box is required for the grid oracle")
        box = np.asarray(args.box, dtype=float).reshape(-1, 2)
        res = grid_pareto_critical(model, box, args.resolution)
        crit = res.critical_points
        with out.with_name(out.name + ".critical.csv").open("w", encoding="utf-8") as fh:
            fh.write(",".join(f"x_{i + 1}" for i in range(model.dim)) + "\n")
            for row in crit:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
        F = res.front
        report.update(nodes=int(res.nodes.shape[0]), critical=int(crit.shape[0]))
    keep = np.sort(nondominance_filter(F)) if args.filter else np.arange(len(F))
    write_front_csv(out.with_name(out.name + ".front.csv"), F[keep])
    report["front_points"] = int(len(keep))
    print(json.dumps(report, default=float))
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------
def compare_fronts(A, B, radius: float = 0.05) -> dict:
    """Hausdorff distances (raw, normalized, polyline) and coverage of A by B."""
    A = np.asarray(A, dtype=float).reshape(-1, 2)
    B = np.asarray(B, dtype=float).reshape(-1, 2)
    return {
        "n_a": int(A.shape[0]),
        "n_b": int(B.shape[0]),
        "hausdorff": hausdorff(A, B),
        "hausdorff_polyline": hausdorff(A, B, polyline=True),
        "hausdorff_normalized": hausdorff(A, B, normalize=True),
        "uncovered_fraction": uncovered_fraction(A, B, radius),
        "radius": radius,
        "normalization": [list(map(float, v)) for v in normalization(A)],
    }


def cmd_compare(args) -> int:
    A = read_front(args.front_a)
    B = read_front(args.front_b)
    print(json.dumps(compare_fronts(A, B, args.radius), indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# recipes
# ---------------------------------------------------------------------------
RECIPES = [
    ("toy problem, six structure changes", "mocont run --problem toy4_1 --tau 0.05 --out toy"),
    ("polynomial scale test", "mocont run --problem polynomial --dim 1000 --tau 0.25 --seed 7 --out poly"),
    ("polynomial with SR1", "mocont run --problem polynomial --dim 1000 --tau 0.25 --seed 7 --hessian sr1 --out poly_sr1"),
    ("split example", "mocont run --problem split --tau 0.05 --out split"),
    ("Lasso vs homotopy", "mocont run --problem lasso --dim 8 --seed 3 --tau 0.05 --out lasso && "
                          "mocont oracle lasso --problem lasso --dim 8 --seed 3 --out lasso_h && "
                          "mocont compare lasso.front.csv lasso_h.front.csv"),
    ("SINDy on Lorenz data", "mocont run --problem sindy --tau 0.1 --eps-pa 1e-9 --out sindy && "
                             "mocont oracle weighted-sum --problem sindy --starts 1 --out sindy_ws && "
                             "mocont compare sindy_ws.front.csv sindy.front.csv"),
    ("non-convex gap", "mocont run --problem toy4_1 --tau 0.05 --out toy && "
                       "mocont oracle weighted-sum --problem toy4_1 --lambdas 50 --starts 10 --out toy_ws && "
                       "mocont compare toy.front.csv toy_ws.front.csv --radius 0.05"),
    ("MLP with restarts", "mocont run --problem mlp --tau 0.1 --restarts 3 --out mlp"),
]


def cmd_recipes(args) -> int:
    for title, line in RECIPES:
        print(f"# {title}\n{line}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------
def _common_problem(p):
    p.add_argument("--problem", help=f"one of: {', '.join(PROBLEMS)}")
    p.add_argument("--dim", type=int, help="dimension (polynomial, lasso)")
    p.add_argument("--seed", type=int)
    p.add_argument("--param", type=_parse_param, action="append", metavar="KEY=VALUE",
                   help="extra problem parameter, e.g. noise=0.01")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mocont", description="Continuation of the Pareto critical set "
                                                                "of min (f(x), ||x||_1).")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the continuation")
    _common_problem(p)
    p.add_argument("--tau", type=float, default=0.1)
    p.add_argument("--kkt-tol", type=float, default=1e-6)
    p.add_argument("--eps-pa", type=float, default=1e-6,
                   help="tie tolerance of the potentially active set (lower it for tiny gradients)")
    p.add_argument("--greedy", action="store_true")
    p.add_argument("--hessian", choices=sorted(HESSIAN_FLAGS))
    p.add_argument("--max-steps", type=int, default=2000)
    p.add_argument("--restarts", type=int, default=0)
    p.add_argument("--threads", type=int)
    p.add_argument("--from-manifest", help="repeat the run described by a manifest file")
    p.add_argument("--out", default="mocont_run", help="output prefix")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="run a reference method")
    p.add_argument("kind", choices=("lasso", "weighted-sum", "grid"))
    _common_problem(p)
    p.add_argument("--samples", type=int, default=20, help="lasso: samples per path segment")
    p.add_argument("--lambdas", type=int, default=50)
    p.add_argument("--starts", type=int, default=10)
    p.add_argument("--method", choices=("prox_grad", "adaptive_moment"), default="prox_grad")
    p.add_argument("--iters", type=int, default=5000)
    p.add_argument("--box", type=float, nargs="+", help="grid: lo1 hi1 lo2 hi2 ...")
    p.add_argument("--resolution", type=float, default=1e-2)
    p.add_argument("--filter", action="store_true", help="keep only non-dominated points")
    p.add_argument("--out", default="mocont_oracle")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("compare", help="compare two fronts")
    p.add_argument("front_a")
    p.add_argument("front_b")
    p.add_argument("--radius", type=float, default=0.05)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("recipes", help="print command lines for the standard experiments")
    p.set_defaults(func=cmd_recipes)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UnknownProblem, InconsistentData, ValueError, FileNotFoundError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"mocont: error: {msg}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
