"""Delimited, deterministic report and solution rendering.

All floats are printed with 17 significant digits so that writing and
re-reading reproduces every value bit-exactly.  Reports carry no timestamps
or environment data: the same inputs yield byte-identical bytes.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .errors import LoadError
from .exhaustion import ExhaustionReport, LevelRecord
from .graphs import VertexFunction, WeightedGraph, _data_lines
from .yamabe import GeometryReport, YamabeReport

__all__ = [
    "fmt",
    "write_solution",
    "read_solution",
    "render_exhaustion",
    "summary_line",
    "render_geometry",
    "render_yamabe",
    "render_poincare",
    "render_embedding_fuzz",
]


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    if value is None:
        return "none"
    return format(float(value), ".17g")


def kv(**pairs) -> str:
    return " ".join(f"{key}={fmt(val)}" for key, val in pairs.items())


def write_solution(path: str, graph: WeightedGraph, u: VertexFunction) -> None:
    """Tab-separated `x value` lines over all vertices, zero-extended."""
    with open(path, "w", encoding="utf-8") as fh:
        for x in graph.ids:
            fh.write(f"{x}\t{fmt(u(x))}\n")


def read_solution(path: str) -> dict[str, float]:
    out: dict[str, float] = {}
    for lineno, parts in _data_lines(path):
        if len(parts) != 2:
            raise LoadError(f"{path}:{lineno}: expected 'x value', got {' '.join(parts)!r}")
        try:
            out[parts[0]] = float(parts[1])
        except ValueError:
            raise LoadError(f"{path}:{lineno}: bad value {parts[1]!r}") from None
    return out


def summary_line(report: ExhaustionReport) -> str:
    word = "CONVERGED" if report.converged else "NO-CONVERGENCE"
    return (
        f"{word} k={report.final_k} gap={fmt(report.cauchy_gap)} "
        f"residual={fmt(report.global_residual)}"
    )


def _level_line(rec: LevelRecord) -> str:
    pairs = {
        "k": rec.k,
        "energy": rec.energy,
        "norm": rec.norm,
        "residual": rec.residual,
        "gap": rec.gap,
        "global_residual": rec.global_residual,
        "umin": rec.umin,
        "umax": rec.umax,
        "iterations": rec.iterations,
    }
    if rec.gamma is not None:
        pairs["gamma"] = rec.gamma
    if rec.positive is not None:
        pairs["positive"] = rec.positive
    pairs["doubling_lhs"] = rec.doubling_lhs
    pairs["doubling_rhs"] = rec.doubling_rhs
    return "level " + kv(**pairs)


def render_exhaustion(
    report: ExhaustionReport,
    graph: WeightedGraph,
    descriptors: Mapping[str, str] | None = None,
) -> str:
    lines = [
        kv(
            equation=report.equation,
            vertices=len(graph),
            edges=graph.n_edges,
            center=report.center,
            k_min=report.k_min,
            k_max=report.k_max,
            witness_radius=report.witness_radius,
            tol=report.tol,
            finite_graph_mode=report.finite_graph_mode,
            parallel=report.parallel,
        )
    ]
    for key in sorted(descriptors or {}):
        lines.append(f"coefficient {key}={descriptors[key]}")
    lines.extend(_level_line(rec) for rec in report.levels)
    lines.append(summary_line(report))
    return "\n".join(lines) + "\n"


def render_yamabe(report: YamabeReport) -> str:
    return (
        kv(
            energy=report.energy,
            nehari_defect=report.nehari_defect,
            residual=report.residual,
            delta=report.delta,
            bracket_lo=report.bracket_lo,
            bracket_hi=report.bracket_hi,
            iterations=report.iterations,
            restarts=report.restarts,
        )
        + "\n"
    )


def render_geometry(report: GeometryReport) -> str:
    lines = [
        "origin " + kv(value=report.origin_value, ok=report.origin_ok),
        "sphere " + kv(delta=report.delta, min=report.sphere_min, ok=report.sphere_ok),
        "spike "
        + kv(
            scale=report.spike_scale,
            norm=report.spike_norm,
            value=report.spike_value,
            ok=report.spike_ok,
        ),
        "geometry " + kv(ok=report.ok),
    ]
    return "\n".join(lines) + "\n"


def render_poincare(values: list[tuple[int, float]]) -> str:
    lines = ["poincare " + kv(k=k, constant=c) for k, c in values]
    if values:
        monotone = all(b >= a - 1e-12 for (_, a), (_, b) in zip(values, values[1:]))
        lines.append("nondecreasing " + kv(ok=monotone))
    return "\n".join(lines) + "\n"


def render_embedding_fuzz(rows: list[dict]) -> str:
    """One line per check name: samples, failures, worst slack ratio."""
    lines = []
    for row in rows:
        lines.append(
            "embedding "
            + kv(
                check=row["check"],
                samples=row["samples"],
                failures=row["failures"],
                max_ratio=row["max_ratio"],
            )
        )
    total = sum(row["failures"] for row in rows)
    lines.append("embedding-summary " + kv(failures=total, ok=total == 0))
    return "\n".join(lines) + "\n"
