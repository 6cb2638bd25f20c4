"""Command-line front end: generate graphs, compute controllability curves,
place drivers, verify placements, and run benchmark grids.

Exit codes: 0 success, 1 usage or input error, 2 infeasible request,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .edcp import CoverInfeasibleError, edcp, naive_placement
from .elpgm import ElpgmConfig, elpgm_optimize
from .graph import (
    DEFAULT_WEIGHT_SEED,
    DirectedGraph,
    GraphFormatError,
    generate_ba,
    generate_er,
    parse_edge_list,
    serialize_edge_list,
)
from .lti import ControlPlacement, UncontrollableError, control_cost, drive_to_origin, output_controllable
from .pathcover import controllability_curve, curve_to_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    """argparse's default usage-error exit code is 2; this tool uses 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_out(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _load_graph(path: str) -> DirectedGraph:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return DirectedGraph.from_json(text)
    return parse_edge_list(text)


def _realized_adjacency(g: DirectedGraph) -> np.ndarray:
    weighted = any(w != 1.0 for _, _, w in g.edges)
    return g.adjacency() if weighted else g.randomized_adjacency(DEFAULT_WEIGHT_SEED)


def _format_cost(value: float) -> str:
    """Plain decimal below 1e4, compact scientific (2.35E04 style) above."""
    if value != value:  # NaN
        return "nan"
    if abs(value) >= 1e4:
        mantissa, _, exponent = f"{value:.2E}".partition("E")
        return f"{mantissa}E{int(exponent):02d}"
    return f"{value:.6g}"


def cmd_gen(args) -> int:
    if args.model == "er":
        g = generate_er(args.n, args.mu, args.seed)
    else:
        g = generate_ba(args.n, args.m, args.seed)
    _write_out(serialize_edge_list(g), args.out)
    return EXIT_OK


def cmd_curve(args) -> int:
    g = _load_graph(args.graph)
    curve = controllability_curve(g)
    if args.format == "json":
        payload = [
            {"M": p.m, "rmax": p.rmax, "frac_controllable": p.frac_controllable,
             "frac_drivers_normalized": p.frac_drivers}
            for p in curve
        ]
        _write_out(json.dumps(payload, indent=2), args.out)
    else:
        _write_out(curve_to_csv(curve), args.out)
    return EXIT_OK


def _resolve_r(args, n: int) -> int:
    if args.r is not None:
        return args.r
    if args.fraction is not None:
        if not (0 < args.fraction <= 1):
            raise ValueError("fraction must be in (0, 1]")
        return max(1, int(np.ceil(args.fraction * n)))
    raise ValueError("one of -R or --fraction is required")


def cmd_place(args) -> int:
    g = _load_graph(args.graph)
    r_size = _resolve_r(args, g.n)
    if r_size > g.n:
        raise ValueError(f"R = {r_size} exceeds the {g.n}-node graph")
    if args.m > r_size:
        raise ValueError(f"M = {args.m} exceeds R = {r_size}")
    if args.algo == "edcp":
        result = edcp(g, args.m, r_size, args.tf)
        _write_out(result.to_json(g), args.out)
    else:
        a = _realized_adjacency(g)
        cfg = ElpgmConfig(seed=args.seed, t_f=args.tf)
        placement, e_best = elpgm_optimize(a, args.m, r_size, cfg)
        ext = g.internal_to_external()
        payload = {
            "drivers": [ext[v] for v in placement.drivers],
            "controlled": [ext[v] for v in placement.controlled],
            "segments": None,
            "E_estimate": None,
            "E_exact": e_best,
        }
        _write_out(json.dumps(payload, indent=2), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    g = _load_graph(args.graph)
    try:
        payload = json.loads(Path(args.placement).read_text())
        inv = {ext: internal for ext, internal in g.id_map.items()}
        drivers = tuple(inv[int(v)] for v in payload["drivers"])
        controlled = tuple(inv[int(v)] for v in payload["controlled"])
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise GraphFormatError(f"bad placement file: {exc}") from exc
    placement = ControlPlacement(drivers=drivers, controlled=controlled, t_f=args.tf)
    a = _realized_adjacency(g)
    controllable = output_controllable(a, placement.b_matrix(g.n), placement.c_matrix(g.n))
    report = {"controllable": controllable, "cost": None, "residual": None}
    if controllable:
        try:
            report["cost"] = control_cost(a, placement)
            x0 = np.random.default_rng(args.seed).normal(size=g.n)
            _, residual, _ = drive_to_origin(a, placement, x0)
            report["residual"] = residual
        except UncontrollableError as exc:
            report["controllable"] = False
            report["condition"] = exc.condition
    if args.format == "json":
        _write_out(json.dumps(report, indent=2), args.out)
    else:
        lines = [f"controllable: {str(report['controllable']).lower()}"]
        if report["cost"] is not None:
            lines.append(f"cost: {_format_cost(report['cost'])}")
            lines.append(f"residual: {report['residual']:.3e}")
        _write_out("\n".join(lines), args.out)
    return EXIT_OK if report["controllable"] else EXIT_INFEASIBLE


def cmd_bench(args) -> int:
    if args.network == "er":
        g = generate_er(args.n, args.mu, args.seed)
        label = f"er-n{args.n}-mu{args.mu:g}"
    else:
        g = generate_ba(args.n, args.m_attach, args.seed)
        label = f"ba-n{args.n}-m{args.m_attach}"
    fractions = [float(f) for f in args.fractions.split(",")]
    algos = args.algos.split(",")
    rows = ["network,n,edges,fraction,M,algorithm,E,wall_time_s"]
    a = _realized_adjacency(g)
    for fraction in fractions:
        r_size = max(1, int(np.ceil(fraction * g.n)))
        for algo in algos:
            start = time.perf_counter()
            try:
                if algo == "edcp":
                    res = edcp(g, args.m, r_size, args.tf)
                    cost = res.e_exact if res.e_exact is not None else res.e_estimate
                elif algo == "naive":
                    res = naive_placement(g, args.m, r_size, args.tf)
                    cost = res.e_exact if res.e_exact is not None else res.e_estimate
                elif algo == "elpgm":
                    cfg = ElpgmConfig(seed=args.seed, t_f=args.tf)
                    _, cost = elpgm_optimize(a, args.m, r_size, cfg)
                else:
                    raise ValueError(f"unknown algorithm {algo!r}")
            except CoverInfeasibleError:
                cost = float("nan")
            elapsed = time.perf_counter() - start
            rows.append(
                f"{label},{g.n},{g.edge_count},{fraction:g},{args.m},{algo},"
                f"{_format_cost(float(cost))},{elapsed:.3f}"
            )
    _write_out("\n".join(rows) + "\n", args.out)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="netcontrol", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_gen = sub.add_parser("gen", help="generate a random graph edge list")
    gen_sub = p_gen.add_subparsers(dest="model", required=True, parser_class=_Parser)
    p_er = gen_sub.add_parser("er", help="uniform random digraph with round(mu*n/2) edges")
    p_er.add_argument("--n", type=int, required=True)
    p_er.add_argument("--mu", type=float, required=True, help="target mean total degree")
    p_er.add_argument("--seed", type=int, default=0)
    p_er.add_argument("--out", default=None)
    p_er.set_defaults(func=cmd_gen)
    p_ba = gen_sub.add_parser("ba", help="preferential-attachment digraph")
    p_ba.add_argument("--n", type=int, required=True)
    p_ba.add_argument("--m", type=int, required=True, help="attachments per new node")
    p_ba.add_argument("--seed", type=int, default=0)
    p_ba.add_argument("--out", default=None)
    p_ba.set_defaults(func=cmd_gen)

    p_curve = sub.add_parser("curve", help="controllers vs. controllable-node curve")
    p_curve.add_argument("graph")
    p_curve.add_argument("--format", choices=("csv", "json"), default="csv")
    p_curve.add_argument("--out", default=None)
    p_curve.set_defaults(func=cmd_curve)

    p_place = sub.add_parser("place", help="compute a driver/controlled placement")
    p_place.add_argument("graph")
    p_place.add_argument("--algo", choices=("edcp", "elpgm"), default="edcp")
    p_place.add_argument("-M", dest="m", type=int, required=True, help="number of controllers")
    p_place.add_argument("-R", dest="r", type=int, default=None, help="controlled-node count")
    p_place.add_argument("--fraction", type=float, default=None, help="controlled fraction of n")
    p_place.add_argument("--seed", type=int, default=0)
    p_place.add_argument("--tf", type=float, default=2.0)
    p_place.add_argument("--out", default=None)
    p_place.set_defaults(func=cmd_place)

    p_verify = sub.add_parser("verify", help="check a placement and its steering residual")
    p_verify.add_argument("graph")
    p_verify.add_argument("placement", help="placement JSON file")
    p_verify.add_argument("--tf", type=float, default=2.0)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--format", choices=("text", "json"), default="text")
    p_verify.add_argument("--out", default=None)
    p_verify.set_defaults(func=cmd_verify)

    p_bench = sub.add_parser("bench", help="cost table over coverage fractions")
    p_bench.add_argument("--network", choices=("er", "ba"), required=True)
    p_bench.add_argument("--n", type=int, default=100)
    p_bench.add_argument("--mu", type=float, default=6.0, help="ER mean total degree")
    p_bench.add_argument("--m-attach", type=int, default=4, help="BA attachments per node")
    p_bench.add_argument("-M", dest="m", type=int, required=True)
    p_bench.add_argument("--fractions", default="0.4,0.5,0.6,0.7,0.8,0.9,1.0")
    p_bench.add_argument("--algos", default="edcp,naive")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--tf", type=float, default=2.0)
    p_bench.add_argument("--out", default=None)
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (GraphFormatError, FileNotFoundError, OSError) as exc:
        print(f"netcontrol: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CoverInfeasibleError, ValueError) as exc:
        print(f"netcontrol: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (UncontrollableError, np.linalg.LinAlgError) as exc:
        print(f"netcontrol: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
