"""Command-line interface: solve, converge, validate."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import case_csv_row, convergence_study, rates_pass, run_case
from .mesh import generate_mesh, load_mesh, validate
from .problems import get_problem


def parse_gen_spec(spec: str):
    """Parse a generator spec like 'quad:nx=8,ny=8' into (family, kwargs)."""
    family, _, params = spec.partition(":")
    kwargs = {}
    if params:
        for item in params.split(","):
            key, _, value = item.partition("=")
            if not value:
                raise ValueError(f"bad generator parameter {item!r} in {spec!r}")
            kwargs[key.strip()] = int(value)
    unknown = set(kwargs) - {"nx", "ny"}
    if unknown:
        raise ValueError(f"unknown generator parameters {sorted(unknown)} in {spec!r}")
    return family, kwargs


def mesh_from_args(args) -> "Mesh":
    if getattr(args, "mesh", None):
        return load_mesh(args.mesh)
    if getattr(args, "gen", None):
        family, kwargs = parse_gen_spec(args.gen)
        return generate_mesh(kwargs.get("nx", 4), kwargs.get("ny", kwargs.get("nx", 4)), family)
    raise ValueError("one of --gen or --mesh is required")


def load_config(path) -> dict:
    """Read `key = value` lines; values are coerced to int or float when possible."""
    config = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key = key.strip().replace("-", "_")
        value = value.strip()
        for cast in (int, float):
            try:
                value = cast(value)
                break
            except ValueError:
                continue
        config[key] = value
    return config


def _add_common(parser):
    parser.add_argument("--config", help="config file with 'key = value' lines (CLI flags win)")
    parser.add_argument("--k", type=int, default=2, help="interior polynomial degree")
    parser.add_argument("--p", type=int, default=2, help="edge trace degree")
    parser.add_argument("--q", type=int, default=1, help="edge gradient degree")
    parser.add_argument("--r-override", type=int, default=None,
                        help="force the weak-Hessian projection degree on every element")
    parser.add_argument("--solver", choices=("auto", "cholesky", "cg"), default="auto")
    parser.add_argument("--tol", type=float, default=1e-10, help="relative residual tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wgbiharm",
                                     description="Weak Galerkin solver for the biharmonic equation on polygonal meshes")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one case and report its errors")
    solve.add_argument("--problem", default="sinsin")
    solve.add_argument("--gen", help="mesh generator spec, e.g. quad:nx=8,ny=8")
    solve.add_argument("--mesh", help="mesh JSON file")
    _add_common(solve)
    solve.add_argument("--out", help="CSV output path")

    conv = sub.add_parser("converge", help="run a refinement study and check observed orders")
    conv.add_argument("--problem", default="sinsin")
    conv.add_argument("--family", choices=("quad", "triangle", "nonconvex_L"), default="quad")
    conv.add_argument("--levels", type=int, default=4)
    conv.add_argument("--nx0", type=int, default=4, help="cells per side on the coarsest level")
    _add_common(conv)
    conv.add_argument("--out", help="CSV output path (a gnuplot .dat file is written alongside)")

    val = sub.add_parser("validate", help="validate a mesh JSON file")
    val.add_argument("--mesh", required=True)
    return parser


def _apply_config(parser, argv):
    """Pre-scan for --config and install its values as subcommand defaults."""
    if "--config" not in argv:
        return
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return  # argparse will report the missing value
    config = load_config(argv[idx + 1])
    command = argv[0] if argv and not argv[0].startswith("-") else None
    for action in parser._subparsers._group_actions:
        for name, subparser in action.choices.items():
            if command and name != command:
                continue
            valid = {a.dest for a in subparser._actions}
            unknown = set(config) - valid
            if unknown:
                raise ValueError(f"unknown config keys {sorted(unknown)} for command {name!r}")
            subparser.set_defaults(**config)


def _solver_name(arg: str) -> str:
    return {"cg": "cg_jacobi"}.get(arg, arg)


def cmd_solve(args) -> int:
    problem = get_problem(args.problem)
    mesh = mesh_from_args(args)
    result = run_case(problem, mesh, args.k, args.p, args.q,
                      r_override=args.r_override,
                      solver=_solver_name(args.solver), tol=args.tol)
    text = case_csv_row(result)
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")
    print(f"# solved {args.problem}: {result.n_free} free DOFs, "
          f"energy error {result.errors.triple_bar:.3e}, "
          f"L2 error {result.errors.l2_interior:.3e} "
          f"({result.report.method}, {result.report.iterations} iterations)")
    return 0


def cmd_converge(args) -> int:
    problem = get_problem(args.problem)
    report = convergence_study(problem, args.family, args.levels,
                               args.k, args.p, args.q, nx0=args.nx0,
                               r_override=args.r_override,
                               solver=_solver_name(args.solver), tol=args.tol)
    if args.out:
        report.to_csv(args.out)
        report.to_gnuplot(Path(args.out).with_suffix(".dat"))
    print(report.csv_text(), end="")
    ok, messages = rates_pass(report)
    for message in messages:
        print(f"# {message}")
    return 0 if ok else 1


def cmd_validate(args) -> int:
    mesh = load_mesh(args.mesh)
    report = validate(mesh)
    print(report)
    return 0 if report.ok else 1


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "converge":
            return cmd_converge(args)
        return cmd_validate(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # stage failures must surface as nonzero exits
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
