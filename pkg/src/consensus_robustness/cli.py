"""Command-line front end.

Commands write JSON reports for single-instance runs and CSV (with a fitted
footer) for sweeps; report paths that produce CSV also render a matplotlib
figure next to it unless --no-figure is given. Exit codes: 0 success,
1 domain error (machine-readable error object on stdout), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, convergence, gramian, projection, recipes, stochastic, topology
from .errors import ConsensusNetworkError, UsageError

SCHEMA_VERSION = 1

EPSILON_CLASS_WARNING = (
    "warning: epsilon >= 1 is outside the equivalence class; "
    "the resulting time is not topology-informative"
)


def _report(command, config, results, artifacts=None, checks=None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "results": results,
    }
    if artifacts:
        doc["artifacts"] = {k: str(v) for k, v in artifacts.items()}
    if checks is not None:
        doc["checks"] = [{"name": c.name, "ok": c.ok, "detail": _jsonable(c.detail)} for c in checks]
    return doc


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value


def _emit(doc, out_path) -> None:
    text = json.dumps(doc, indent=2, sort_keys=False)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _figure_path(csv_path) -> str:
    return str(Path(csv_path).with_suffix(".png"))


def _add_input_args(parser, families_only=False):
    group = parser.add_argument_group("input")
    group.add_argument("--family", help=f"topology family ({', '.join(topology.family_names())})")
    group.add_argument("--n", type=int, help="network dimension for --family")
    group.add_argument("--p", type=float, help="edge probability (flocking-random)")
    group.add_argument("--seed", type=int, default=0, help="seed for random families (default 0)")
    if not families_only:
        group.add_argument("--matrix-file", help="read the network from a matrix file instead")


def _add_output_args(parser, csv_help=None):
    group = parser.add_argument_group("output")
    group.add_argument("--out", help="write the JSON report here (default: stdout)")
    if csv_help:
        group.add_argument("--csv", help=csv_help)
        group.add_argument(
            "--no-figure",
            action="store_true",
            help="do not render the PNG figure next to the CSV",
        )


def _load_matrix(args, require_input=True) -> stochastic.StochasticMatrix:
    has_family = args.family is not None
    has_file = getattr(args, "matrix_file", None) is not None
    if has_family and has_file:
        raise UsageError("give exactly one input: --family or --matrix-file")
    if has_family:
        if args.n is None:
            raise UsageError("--family requires --n")
        return topology.family_matrix(args.family, args.n, p=args.p, seed=args.seed)
    if has_file:
        raw = stochastic.read_matrix(args.matrix_file)
        return stochastic.validate_stochastic(raw, provenance=f"file:{args.matrix_file}")
    if require_input:
        raise UsageError("an input is required: --family with --n, or --matrix-file")
    return None


def _input_config(args) -> dict:
    config = {"seed": args.seed}
    if args.family is not None:
        config.update({"family": args.family, "n": args.n})
        if args.p is not None:
            config["p"] = args.p
    if getattr(args, "matrix_file", None) is not None:
        config["matrix_file"] = args.matrix_file
    return config


def cmd_generate(args) -> int:
    A = _load_matrix(args)
    stochastic.write_matrix(args.matrix_out, A)
    primitive = stochastic.is_primitive(A)
    doc = _report(
        "generate",
        _input_config(args),
        {
            "n": A.n,
            "provenance": A.provenance,
            "primitive": primitive.primitive,
            "primitivity_reason": primitive.reason,
        },
        artifacts={"matrix": args.matrix_out},
    )
    _emit(doc, args.out)
    return 0


def cmd_analyze(args) -> int:
    A = _load_matrix(args)
    primitive = stochastic.is_primitive(A)
    results = {
        "n": A.n,
        "provenance": A.provenance,
        "primitive": primitive.primitive,
        "primitivity_reason": primitive.reason,
        "primitivity_period": primitive.period,
    }
    if primitive:
        pi = stochastic.invariant_distribution(A)
        results["pi_residual"] = pi.residual
        results["pi_min"] = float(np.min(pi.pi))
        results["pi_max"] = float(np.max(pi.pi))
        results["pi_ratio"] = float(np.max(pi.pi) / np.min(pi.pi))
        try:
            results["var0"] = analysis.var0(A)
            results["consensus_already_reached"] = False
        except ConsensusNetworkError:
            results["var0"] = None
            results["consensus_already_reached"] = True
        for label, proj in (
            ("uniform", projection.projector_uniform(A.n)),
            ("pi_weighted", projection.projector_pi(pi)),
        ):
            net = projection.project(A, proj)
            results[f"spectral_radius_{label}"] = net.spectral_radius
    doc = _report("analyze", _input_config(args), results)
    _emit(doc, args.out)
    return 0


def cmd_convergence(args) -> int:
    if not (0.0 < args.epsilon < 2.0):
        raise UsageError(f"--epsilon must be in (0, 2), got {args.epsilon}")
    if args.epsilon >= 1.0:
        print(EPSILON_CLASS_WARNING, file=sys.stderr)
    A = _load_matrix(args)
    report = convergence.convergence_time(A, args.epsilon)
    results = {
        "epsilon": report.epsilon,
        "t": report.t,
        "monotone_ok": report.monotone_ok,
        "in_equivalence_class": report.in_equivalence_class,
        "probes": [[k, d] for k, d in report.probes],
        "distance_at_t": report.distance_at_t,
    }
    artifacts = {}
    if args.csv:
        pairs = sorted(report.probes)
        lines = ["k,distance"] + [f"{k},{d:.12g}" for k, d in pairs]
        Path(args.csv).write_text("\n".join(lines) + "\n", encoding="utf-8")
        artifacts["csv"] = args.csv
        if not args.no_figure:
            from . import plotting

            fig = _figure_path(args.csv)
            plotting.render_curve(
                pairs, fig, title="distance to consensus", ylabel="||A^k - 1 pi^T||_inf"
            )
            artifacts["figure"] = fig
    config = _input_config(args)
    config["epsilon"] = args.epsilon
    _emit(_report("convergence", config, results, artifacts), args.out)
    return 0


def cmd_gramian(args) -> int:
    A = _load_matrix(args)
    config = _input_config(args)
    config.update({"variant": args.variant, "method": args.method, "projector": args.projector})
    if args.variant == "flocking":
        report = gramian.flocking_weighted_gramian(A, tol=args.tol)
    else:
        if args.projector == "pi":
            proj = projection.projector_pi(stochastic.invariant_distribution(A))
        else:
            proj = projection.projector_uniform(A.n)
        M = projection.project(A, proj)
        if args.variant == "observability":
            report = gramian.observability_gramian(M, tol=args.tol, cap=args.direct_cap)
        elif args.method == "direct":
            report = gramian.solve_lyapunov_direct(M, cap=args.direct_cap)
        elif args.method == "series":
            report = gramian.solve_lyapunov_series(M, tol=args.tol)
        elif A.n <= args.direct_cap:
            report = gramian.solve_lyapunov_direct(M, cap=args.direct_cap)
        else:
            report = gramian.solve_lyapunov_series(M, tol=args.tol)
    results = {
        "variant": report.variant,
        "method": report.method,
        "n": report.n,
        "trace": report.trace,
        "sigma1": report.sigma1,
        "residual": report.residual,
        "tail_bound": report.tail_bound,
        "wall_time_ms": report.wall_time_ms,
        "doublings": report.doublings,
    }
    if args.variant == "flocking":
        results["lambda2"] = report.lambda2
    else:
        results["projector"] = "pi_weighted" if args.projector == "pi" else "uniform"
        results["spectral_radius"] = M.spectral_radius
    _emit(_report("gramian", config, results), args.out)
    return 0


def cmd_simulate(args) -> int:
    A = _load_matrix(args)
    rng = np.random.default_rng(args.shock_seed)
    if args.shock == "random":
        omega = rng.standard_normal(A.n)
    else:  # basis-diff
        omega = np.zeros(A.n)
        omega[0] = 1.0
        omega[1] = -1.0
    t_half = convergence.convergence_time(A, 0.5).t
    horizon = args.horizon if args.horizon is not None else 8 * t_half
    response = convergence.simulate_shock(A, omega, horizon)
    rho = projection.project(A, projection.projector_uniform(A.n)).spectral_radius
    results = {
        "horizon": response.horizon,
        "alpha_estimate": response.alpha_estimate,
        "rho_qa": rho,
        "initial_norm_xq": response.norms_xq[0],
        "final_norm_xq": response.norms_xq[-1],
    }
    artifacts = {}
    if args.csv:
        lines = ["k,norm_x,norm_xq"]
        for k in range(response.horizon + 1):
            lines.append(f"{k},{response.norms_x[k]:.12g},{response.norms_xq[k]:.12g}")
        Path(args.csv).write_text("\n".join(lines) + "\n", encoding="utf-8")
        artifacts["csv"] = args.csv
        if not args.no_figure:
            from . import plotting

            fig = _figure_path(args.csv)
            plotting.render_shock(response, fig)
            artifacts["figure"] = fig
    config = _input_config(args)
    config.update({"shock": args.shock, "shock_seed": args.shock_seed, "horizon": horizon})
    _emit(_report("simulate", config, results, artifacts), args.out)
    return 0


def _parse_ns(text) -> list[int]:
    try:
        ns = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"--ns must be a comma-separated integer list, got {text!r}")
    if not ns:
        raise UsageError("--ns must not be empty")
    return ns


def _sweep_results(result) -> dict:
    return {
        "family": result.family,
        "ns": list(result.ns),
        "rows": [
            {
                "n": row.n,
                "trace_P": row.trace_P,
                "sigma1_P": row.sigma1_P,
                "t_half": row.t_half,
                "var0": row.var0,
                "rho_QA": row.rho_QA,
                "lower_ratio": row.lower_ratio,
                "upper_ratio": row.upper_ratio,
                "sigma_ratio": row.sigma_ratio,
            }
            for row in result.rows
        ],
        "fits": {
            metric: {
                "slope": fit.slope,
                "intercept": fit.intercept,
                "r_squared": fit.r_squared,
            }
            for metric, fit in result.fits.items()
        },
        "failures": {str(n): msg for n, msg in result.failures.items()},
    }


def cmd_sweep(args) -> int:
    if args.family is None:
        raise UsageError("sweep requires --family")
    ns = _parse_ns(args.ns)
    result = analysis.sweep(args.family, ns, p=args.p, seed=args.seed, jobs=args.jobs)
    artifacts = {}
    if args.csv:
        Path(args.csv).write_text(analysis.sweep_to_csv(result), encoding="utf-8")
        artifacts["csv"] = args.csv
        if not args.no_figure:
            from . import plotting

            fig = _figure_path(args.csv)
            plotting.render_sweep(result, fig)
            artifacts["figure"] = fig
    config = {"family": args.family, "ns": ns, "seed": args.seed, "jobs": args.jobs}
    if args.p is not None:
        config["p"] = args.p
    _emit(_report("sweep", config, _sweep_results(result), artifacts), args.out)
    return 0


def cmd_ratio_plot(args) -> int:
    if args.family is None:
        raise UsageError("ratio-plot requires --family")
    ns = _parse_ns(args.ns)
    if len(ns) < 3:
        raise UsageError(f"ratio-plot requires >= 3 grid points, got {len(ns)}")
    result = analysis.ratio_constancy(args.family, ns, p=args.p, seed=args.seed)
    artifacts = {}
    if args.csv:
        lines = ["n,sigma_ratio"] + [f"{n},{r:.12g}" for n, r in result.points]
        Path(args.csv).write_text("\n".join(lines) + "\n", encoding="utf-8")
        artifacts["csv"] = args.csv
        if not args.no_figure:
            from . import plotting

            fig = _figure_path(args.csv)
            plotting.render_ratio(result.points, result.family, fig)
            artifacts["figure"] = fig
    results = {
        "family": result.family,
        "points": [[n, r] for n, r in result.points],
        "spread": result.spread,
        "constant_ok": result.constant_ok,
    }
    config = {"family": args.family, "ns": ns, "seed": args.seed}
    if args.p is not None:
        config["p"] = args.p
    _emit(_report("ratio-plot", config, results, artifacts), args.out)
    return 0


def cmd_verify(args) -> int:
    checks = []
    config = {}
    results = {}
    artifacts = {}
    if args.recipe and args.family:
        raise UsageError("give either --recipe/--all or --family, not both")
    if args.all:
        names = list(recipes.RECIPES)
    elif args.recipe:
        if args.recipe not in recipes.RECIPES:
            raise UsageError(
                f"unknown recipe {args.recipe!r}; known: {', '.join(recipes.RECIPES)}"
            )
        names = [args.recipe]
    elif args.family:
        names = []
    else:
        raise UsageError("verify needs --family with --ns, --recipe NAME, or --all")

    if names:
        config["recipes"] = names
        for name in names:
            for check in recipes.run_recipe(name):
                check.name = f"{name}: {check.name}"
                checks.append(check)
    else:
        ns = _parse_ns(args.ns)
        config.update({"family": args.family, "ns": ns, "seed": args.seed})
        result = analysis.sweep(args.family, ns, p=args.p, seed=args.seed, jobs=args.jobs)
        results = _sweep_results(result)
        for row in result.rows:
            A = recipes.grid_matrix(args.family, row.n) if args.family in recipes.GRID_FAMILIES else topology.family_matrix(args.family, row.n, p=args.p, seed=args.seed)
            bounds = analysis.verify_theorem_bounds(A)
            checks.append(
                recipes.CheckResult(
                    f"{args.family} n={row.n}: trace/sigma1 sandwich",
                    bounds.all_ok,
                    {
                        "trace_upper_ok": bounds.trace_upper_ok,
                        "sigma_upper_ok": bounds.sigma_upper_ok,
                        "sigma_lower_ok": bounds.sigma_lower_ok,
                    },
                )
            )
        if args.csv:
            Path(args.csv).write_text(analysis.sweep_to_csv(result), encoding="utf-8")
            artifacts["csv"] = args.csv
            if not args.no_figure:
                from . import plotting

                fig = _figure_path(args.csv)
                plotting.render_sweep(result, fig)
                artifacts["figure"] = fig

    for check in checks:
        print(check.line())
    all_ok = all(check.ok for check in checks)
    results = dict(results)
    results["all_ok"] = all_ok
    _emit(_report("verify", config, results, artifacts, checks=checks), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="consensus-robustness",
        description=(
            "Consensus-network robustness toolkit: stochastic matrix validation, "
            "projected Gramians, epsilon-convergence times, and scaling-law sweeps."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a topology and write its matrix file")
    _add_input_args(p, families_only=True)
    p.add_argument("--matrix-out", required=True, help="path of the matrix file to write")
    _add_output_args(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("analyze", help="validate a network and report its basic spectral data")
    _add_input_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("convergence", help="epsilon-convergence time with probe curve")
    _add_input_args(p)
    p.add_argument("--epsilon", type=float, default=0.5, help="threshold (default 0.5)")
    _add_output_args(p, csv_help="write the probed (k, distance) curve as CSV")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("gramian", help="solve the projected-network Lyapunov equation")
    _add_input_args(p)
    p.add_argument(
        "--variant",
        choices=("controllability", "observability", "flocking"),
        default="controllability",
        help="which fixed-point equation to solve",
    )
    p.add_argument(
        "--method",
        choices=("auto", "direct", "series"),
        default="auto",
        help="solver selection (auto: direct up to --direct-cap, series above)",
    )
    p.add_argument(
        "--projector",
        choices=("uniform", "pi"),
        default="uniform",
        help="projection operator for the projected network",
    )
    p.add_argument("--tol", type=float, default=gramian.SERIES_TOL_DEFAULT, help="series tail tolerance")
    p.add_argument(
        "--direct-cap",
        type=int,
        default=gramian.DIRECT_CAP_DEFAULT,
        help="largest n for the dense linearized solver",
    )
    _add_output_args(p)
    p.set_defaults(func=cmd_gramian)

    p = sub.add_parser("simulate", help="shock response of the consensus dynamics")
    _add_input_args(p)
    p.add_argument(
        "--shock",
        choices=("random", "basis-diff"),
        default="random",
        help="shock vector: seeded standard normal, or e_0 - e_1",
    )
    p.add_argument("--shock-seed", type=int, default=0, help="seed for the random shock")
    p.add_argument(
        "--horizon", type=int, default=None, help="steps to simulate (default 8 t(1/2))"
    )
    _add_output_args(p, csv_help="write the trajectory norms as CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="per-n metrics over a family with fitted exponents")
    _add_input_args(p, families_only=True)
    p.add_argument("--ns", required=True, help="comma-separated n grid, e.g. 16,32,64,128")
    p.add_argument("--jobs", type=int, default=1, help="concurrent grid evaluations")
    _add_output_args(p, csv_help="write the sweep table (with fit footer) as CSV")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ratio-plot", help="sigma1/t(1/2) ratio data over an n grid")
    _add_input_args(p, families_only=True)
    p.add_argument("--ns", required=True, help="comma-separated n grid (>= 3 points)")
    _add_output_args(p, csv_help="write the (n, sigma_ratio) table as CSV")
    p.set_defaults(func=cmd_ratio_plot)

    p = sub.add_parser("verify", help="run reproduction recipes or family bound checks")
    _add_input_args(p, families_only=True)
    p.add_argument("--ns", help="comma-separated n grid for --family mode")
    p.add_argument("--recipe", help=f"one of: {', '.join(recipes.RECIPES)}")
    p.add_argument("--all", action="store_true", help="run every recipe")
    p.add_argument("--jobs", type=int, default=1, help="concurrent grid evaluations")
    _add_output_args(p, csv_help="write the family sweep CSV (family mode)")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        _emit({"error": {"type": "UsageError", "message": str(exc), "details": {}}}, None)
        return 2
    except ConsensusNetworkError as exc:
        doc = {
            "error": {
                "type": type(exc).__name__,
                "message": str(exc),
                "details": _jsonable(exc.details()),
            }
        }
        _emit(doc, None)
        return 1


if __name__ == "__main__":
    sys.exit(main())
