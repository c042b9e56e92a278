"""Command-line entry point.

Examples::

    snakeprox gtf --graph fb.txt --lambda auto --solver snake --L nodes \\
        --schedule inv_n:0.1V --seed 7 --out trace.csv
    snakeprox gen-sbm --blocks 4x1000 --p-in 0.1 --p-out 0.005 --seed 1 --out sbm.txt
    snakeprox bench --problem gtf --sbm 4x50 --solvers snake,pg-dual --out-dir traces/
"""
from __future__ import annotations

import argparse
import logging
import math
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import baselines, graph as graphmod, problems, snake

log = logging.getLogger("snakeprox")

_SCALED = re.compile(r"^\s*(?P<coef>[0-9.eE+-]*)\s*\*?\s*V\s*(?:/\s*(?P<div>[0-9.eE+]+))?\s*$")


class ConfigError(Exception):
    """Bad command-line configuration (exit code 2)."""


def parse_scaled(text: str, num_nodes: int) -> float:
    """Number, possibly in units of the node count: ``10``, ``V``,
    ``0.1V``, ``4*V``, ``V/10``; ``nodes`` is an alias of ``V``."""
    t = text.strip()
    if t == "nodes":
        return float(num_nodes)
    try:
        return float(t)
    except ValueError:
        pass
    m = _SCALED.match(t)
    if not m:
        raise ConfigError(f"cannot parse {text!r} (expected a number or a multiple of V)")
    coef = float(m["coef"]) if m["coef"] not in ("", "+") else 1.0
    div = float(m["div"]) if m["div"] else 1.0
    return coef * num_nodes / div


def parse_budget(text: str, num_nodes: int) -> int:
    L = round(parse_scaled(text, num_nodes))
    if L < 1:
        raise ConfigError(f"--L must be >= 1, got {text!r}")
    return int(L)


def parse_schedule(text: str, num_nodes: int) -> snake.StepSchedule:
    """``inv_n:SCALE`` or ``inv_sqrt_n:SCALE[@SWITCH]``."""
    kinds = {"inv_n": "inverse_n", "inv_sqrt_n": "inverse_sqrt_n"}
    try:
        kind, rest = text.split(":", 1)
    except ValueError:
        raise ConfigError(f"bad --schedule {text!r}; expected KIND:SCALE") from None
    if kind not in kinds:
        raise ConfigError(f"unknown schedule kind {kind!r}; choose from {sorted(kinds)}")
    switch = None
    if "@" in rest:
        rest, sw = rest.split("@", 1)
        switch = int(sw)
    try:
        return snake.StepSchedule(kinds[kind], parse_scaled(rest, num_nodes), switch)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_blocks(text: str) -> list[int]:
    """``4x1000`` or ``1000,1000,500``."""
    if "x" in text:
        k, size = text.split("x", 1)
        return [int(size)] * int(k)
    return [int(b) for b in text.split(",")]


def _load_graph(args) -> graphmod.Graph:
    if args.graph and args.sbm:
        raise ConfigError("give exactly one of --graph and --sbm")
    if args.graph:
        with open(args.graph, encoding="utf-8") as fh:
            return graphmod.load_edge_list(fh)
    if args.sbm:
        return graphmod.sample_sbm(parse_blocks(args.sbm), args.p_in, args.p_out, args.sbm_seed)
    raise ConfigError("a graph source is required (--graph or --sbm)")


def _load_signal(args, g: graphmod.Graph) -> np.ndarray:
    if args.signal:
        with open(args.signal, encoding="utf-8") as fh:
            return problems.read_signal_csv(fh, g)
    return problems.gaussian_signal(g.num_nodes, args.gaussian_seed)


def build_problem(args, g: graphmod.Graph):
    y = _load_signal(args, g)
    if args.command == "gtf":
        lam = problems.calibrate_lambda(g) if args.lam == "auto" else float(args.lam)
        return problems.TrendFiltering(g, y, lam)
    if args.command == "inpaint":
        if args.mask:
            with open(args.mask, encoding="utf-8") as fh:
                mask = problems.read_mask_csv(fh, g)
        else:
            order = graphmod.make_rng(args.mask_seed).permutation(g.num_nodes)
            mask = np.zeros(g.num_nodes, dtype=bool)
            mask[order[: int(round(args.observed_fraction * g.num_nodes))]] = True
        return problems.Inpainting(g, y, mask)
    return problems.LaplacianSystem(g, y, center=True)


def _default_schedule(problem, V: int) -> str:
    if isinstance(problem, problems.LaplacianSystem):
        return "inv_n:V/2"
    return "inv_n:V/10"


def run_solver(solver: str, problem, args, L: int | None = None,
               max_iters: int | None = None) -> snake.SolverTrace:
    V = problem.walk_graph.num_nodes
    if solver == "snake":
        budget = L if L is not None else parse_budget(args.L, V)
        sched = parse_schedule(args.schedule or _default_schedule(problem, V), V)
        try:
            cfg = snake.SolverConfig(budget, sched, seed=args.seed,
                                     max_outer_iterations=max_iters or args.max_iters,
                                     max_wall_time=args.max_time, eval_every=args.eval_every)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return snake.run(problem, cfg)
    if solver == "pg-dual":
        if not isinstance(problem, problems.TrendFiltering):
            raise ConfigError("pg-dual solves trend filtering only")
        res = baselines.pg_dual_tv(problem.graph, problem.y, problem.lam, max_iters=args.max_iters,
                                   tol=args.tol, accelerated=args.accelerated,
                                   record_every=args.eval_every)
        return res.trace
    if solver == "cg":
        if isinstance(problem, problems.LaplacianSystem):
            res = baselines.conjugate_gradient(problem.lap, problem.b, problem.x0, tol=args.tol,
                                               max_iters=args.max_iters)
            return res.trace
        if isinstance(problem, problems.Inpainting):
            A, b = problem.interior_system()
            res = baselines.conjugate_gradient(A, b, problem.x0, tol=args.tol,
                                               max_iters=args.max_iters, report=problem.objective)
            return res.trace
        raise ConfigError("cg solves inpainting and Laplacian systems only")
    raise ConfigError(f"unknown solver {solver!r}")


def _write_trace(trace: snake.SolverTrace, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        snake.write_trace_csv(trace, fh)


def _summary(trace: snake.SolverTrace, seconds: float) -> str:
    return (f"FINAL objective={trace.final_objective:.17g} "
            f"iters={trace.outer_iterations} seconds={seconds:.3f}")


def cmd_solve(args) -> int:
    g = _load_graph(args)
    problem = build_problem(args, g)
    t0 = time.monotonic()
    trace = run_solver(args.solver, problem, args)
    elapsed = time.monotonic() - t0
    if args.out:
        _write_trace(trace, args.out)
    if args.solution:
        with open(args.solution, "w", encoding="utf-8", newline="") as fh:
            problems.write_signal_csv(fh, g, problem.full_signal(trace.x))
    print(_summary(trace, elapsed))
    return 0


def cmd_gen_sbm(args) -> int:
    g = graphmod.sample_sbm(parse_blocks(args.blocks), args.p_in, args.p_out, args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"# sbm blocks={args.blocks} p_in={args.p_in} p_out={args.p_out} seed={args.seed}\n")
        graphmod.write_edge_list(g, fh)
    isolated = int((g.degrees == 0).sum())
    if isolated:
        log.warning("%d isolated node(s) are not representable in the edge list", isolated)
    print(f"nodes={g.num_nodes} edges={g.num_edges}")
    return 0


def cmd_bench(args) -> int:
    g = _load_graph(args)
    args.command = args.problem
    problem = build_problem(args, g)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    V = problem.walk_graph.num_nodes
    for solver in args.solvers.split(","):
        budgets = [parse_budget(s, V) for s in args.L.split(",")] if solver == "snake" else [None]
        for L in budgets:
            iters = None
            if args.work and L is not None:
                # same number of edge visits for every budget
                iters = max(1, math.ceil(parse_scaled(args.work, V) / L))
            t0 = time.monotonic()
            trace = run_solver(solver, problem, args, L=L, max_iters=iters)
            name = f"{args.problem}_{solver}" + (f"_L{L}" if L is not None else "") + ".csv"
            _write_trace(trace, out_dir / name)
            print(f"{name}: " + _summary(trace, time.monotonic() - t0))
    return 0


def _add_problem_args(p: argparse.ArgumentParser, solver_default: str) -> None:
    src = p.add_argument_group("graph")
    src.add_argument("--graph", help="edge-list file (u v per line)")
    src.add_argument("--sbm", help="generate an SBM with these blocks, e.g. 4x50")
    src.add_argument("--p-in", type=float, default=0.1)
    src.add_argument("--p-out", type=float, default=0.005)
    src.add_argument("--sbm-seed", type=int, default=0)
    sig = p.add_argument_group("signal")
    sig.add_argument("--signal", help="CSV with header node,value")
    sig.add_argument("--gaussian-seed", type=int, default=0,
                     help="seed for a standard Gaussian signal when --signal is absent")
    sig.add_argument("--mask", help="inpainting: CSV with header node,observed")
    sig.add_argument("--observed-fraction", type=float, default=0.5)
    sig.add_argument("--mask-seed", type=int, default=0)
    p.add_argument("--lambda", dest="lam", default="auto", help="GTF penalty or 'auto'")
    p.add_argument("--solver", default=solver_default, choices=["snake", "pg-dual", "cg"])
    p.add_argument("--L", default="nodes", help="walk budget: integer or multiple of V")
    p.add_argument("--schedule", help="inv_n:SCALE or inv_sqrt_n:SCALE[@SWITCH]; SCALE may use V")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--max-time", type=float, default=math.inf, help="seconds")
    p.add_argument("--eval-every", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-10, help="baseline tolerance")
    p.add_argument("--accelerated", action="store_true", help="pg-dual with momentum")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="snakeprox", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("gtf", "graph trend filtering"),
                           ("inpaint", "harmonic inpainting"),
                           ("lapsys", "Laplacian system L x = b")):
        p = sub.add_parser(name, help=helptext)
        _add_problem_args(p, "snake")
        p.add_argument("--out", help="trace CSV path")
        p.add_argument("--solution", help="write the final signal as node,value CSV")
    p = sub.add_parser("gen-sbm", help="sample a stochastic block model edge list")
    p.add_argument("--blocks", required=True, help="e.g. 4x1000")
    p.add_argument("--p-in", type=float, required=True)
    p.add_argument("--p-out", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p = sub.add_parser("bench", help="run several solvers / budgets on one problem")
    p.add_argument("--problem", required=True, choices=["gtf", "inpaint", "lapsys"])
    p.add_argument("--solvers", default="snake")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--work", help="snake edge-visit budget per run, e.g. 500V; "
                                   "overrides --max-iters with ceil(work / L)")
    _add_problem_args(p, "snake")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    handlers = {"gtf": cmd_solve, "inpaint": cmd_solve, "lapsys": cmd_solve,
                "gen-sbm": cmd_gen_sbm, "bench": cmd_bench}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"snakeprox: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, NotImplementedError) as exc:
        print(f"snakeprox: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
