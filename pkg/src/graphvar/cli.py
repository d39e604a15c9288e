"""Command line interface.

Subcommands: solve, verify-embeddings, geometry, poincare, generate.
Exit codes: 0 on success (converged / all checks pass), 2 when a run does not
converge or a check fails, 1 on input errors.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .errors import GraphVarError, InputError
from .exhaustion import run_exhaustion
from .graphs import VertexFunction, ball
from .problems import default_origin, generate_graph, load_problem
from .reports import (
    fmt,
    render_embedding_fuzz,
    render_exhaustion,
    render_geometry,
    render_poincare,
    render_yamabe,
    summary_line,
    write_solution,
)
from .spaces import check_embeddings, poincare_constant, trudinger_moser_bound
from .yamabe import mp_geometry_check, solve_yamabe


def _add_io_flags(sub: argparse.ArgumentParser, with_out: bool = True) -> None:
    sub.add_argument("--graph", required=True, help="edge list file: 'x y w' per line")
    sub.add_argument("--measure", help="measure file: 'x mu' per line (missing vertices get 1)")
    sub.add_argument("--config", required=True, help="problem config: 'key = value' lines")
    sub.add_argument("--report", help="write the delimited report here instead of stdout")
    if with_out:
        sub.add_argument("--out", help="write the witness-restricted solution TSV here")


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_solve(args: argparse.Namespace) -> int:
    graph, spec = load_problem(args.graph, args.config, args.measure)
    report = run_exhaustion(graph, spec, parallel=args.parallel_levels)
    text = render_exhaustion(report, graph, spec.descriptors)
    _emit(text, args.report)
    if args.report:
        print(summary_line(report))
    if args.out:
        write_solution(args.out, graph, report.u_star)
    if args.figures:
        from .figures import save_exhaustion_figures

        for path in save_exhaustion_figures(report, graph, args.figures):
            print(f"figure {path}")
    return 0 if report.converged else 2


def _cmd_verify_embeddings(args: argparse.Namespace) -> int:
    graph, spec = load_problem(args.graph, args.config, args.measure)
    rng = np.random.default_rng(args.seed)
    consts = spec.constants
    region = ball(graph, spec.center, spec.k_min)
    inside = np.zeros(len(graph), dtype=bool)
    inside[region.interior_idx] = True
    rho = graph.distances_from(spec.center)
    g_tm = VertexFunction.from_array(graph, np.exp(-rho.astype(float)))

    stats: dict[str, dict] = {}

    def tally(name: str, lhs: float, rhs: float, holds: bool) -> None:
        row = stats.setdefault(name, {"samples": 0, "failures": 0, "max_ratio": 0.0})
        row["samples"] += 1
        row["failures"] += 0 if holds else 1
        if rhs > 0.0:
            row["max_ratio"] = max(row["max_ratio"], lhs / rhs)

    for _ in range(args.samples):
        u = VertexFunction.from_array(graph, rng.standard_normal(len(graph)))
        emb = check_embeddings(graph, consts, u, origin=spec.center)
        for chk in emb.checks:
            tally(chk.name, chk.lhs, chk.rhs, chk.holds)
        if consts.mu0 is not None:
            masked = VertexFunction.from_array(graph, u.to_array(graph) * inside)
            for eps in (0.125, 0.25):
                lhs, rhs, holds = trudinger_moser_bound(
                    graph, region, consts, g_tm, masked, eps
                )
                tally(f"trudinger-moser-eps={fmt(eps)}", lhs, rhs, holds)

    rows = [{"check": name, **row} for name, row in sorted(stats.items())]
    _emit(render_embedding_fuzz(rows), args.report)
    return 0 if all(row["failures"] == 0 for row in rows) else 2


def _cmd_geometry(args: argparse.Namespace) -> int:
    graph, spec = load_problem(args.graph, args.config, args.measure)
    if spec.equation != "yamabe":
        raise InputError("the geometry command needs a yamabe problem")
    region = ball(graph, spec.center, spec.k_min)
    pilot = solve_yamabe(graph, region, spec.h, spec.q, spec.local_tol)
    geom = mp_geometry_check(graph, region, spec.h, spec.q, pilot.delta)
    _emit(render_yamabe(pilot) + render_geometry(geom), args.report)
    return 0 if geom.ok else 2


def _cmd_poincare(args: argparse.Namespace) -> int:
    graph, spec = load_problem(args.graph, args.config, args.measure)
    values: list[tuple[int, float]] = []
    note = ""
    for k in range(spec.k_min, spec.k_max + 1):
        region = ball(graph, spec.center, k)
        if len(region.interior_idx) == len(graph):
            note = f"stopped k={k} reason=ball-covers-graph\n"
            break
        values.append((k, poincare_constant(graph, region)))
    _emit(render_poincare(values) + note, args.report)
    if args.figures and values:
        from .figures import save_poincare_figure

        for path in save_poincare_figure(values, args.figures):
            print(f"figure {path}")
    return 0


def _cmd_generate(args: argparse.Namespace) -> int:
    graph = generate_graph(args.kind, args.weights, args.measure_rule)
    graph.save(args.out_graph, args.out_measure)
    print(f"origin {default_origin(args.kind)}")
    print(f"vertices {len(graph)} edges {graph.n_edges}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphvar",
        description=(
            "Solve elliptic variational equations on weighted graphs by the\n"
            "ball-exhaustion method, with runtime-certified energy bounds."
        ),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("solve", help="run the exhaustion sweep for a problem")
    _add_io_flags(sub)
    sub.add_argument(
        "--parallel-levels",
        action="store_true",
        help="solve the levels concurrently (no warm starting)",
    )
    sub.add_argument("--figures", metavar="DIR", help="also render figures into DIR")
    sub.set_defaults(handler=_cmd_solve)

    sub = subs.add_parser(
        "verify-embeddings", help="fuzz the embedding inequalities on random functions"
    )
    _add_io_flags(sub, with_out=False)
    sub.add_argument("--samples", type=int, default=200)
    sub.add_argument("--seed", type=int, default=0)
    sub.set_defaults(handler=_cmd_verify_embeddings)

    sub = subs.add_parser("geometry", help="check the mountain-pass landscape")
    _add_io_flags(sub, with_out=False)
    sub.set_defaults(handler=_cmd_geometry)

    sub = subs.add_parser("poincare", help="Poincare constants over the radius schedule")
    _add_io_flags(sub, with_out=False)
    sub.add_argument("--figures", metavar="DIR", help="also render figures into DIR")
    sub.set_defaults(handler=_cmd_poincare)

    sub = subs.add_parser("generate", help="write a generated graph and measure to files")
    sub.add_argument("--kind", required=True, help="path:N, grid:NxM, or tree:BxD")
    sub.add_argument("--weights", default="const:1", help="const:<v> or exp-rho:<b>")
    sub.add_argument("--measure-rule", default="const:1", help="coefficient descriptor for mu")
    sub.add_argument("--out-graph", required=True)
    sub.add_argument("--out-measure", required=True)
    sub.set_defaults(handler=_cmd_generate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except GraphVarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
