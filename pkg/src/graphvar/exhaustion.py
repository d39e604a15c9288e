"""Local-to-global solving: sweep balls of growing radius until stabilization.

Each level k solves the chosen equation on the interior of B_k with zero
boundary data, warm starting from the previous level.  Convergence is
declared when two successive levels agree on the witness ball B_l (the
Cauchy gap) and the full-graph equation residual on B_l is below tolerance.
Levels below k_min count as the zero function, so a problem whose data
vanishes near the center can converge at k_min itself.

Per level the driver certifies the energy bracket (inside the solvers), the
norm doubling inequality, the monotonicity of the level energies where it is
guaranteed (plain for the linear equation, shifted by the integral of g for
the negative mean field equation), and the pointwise level bounds of the
negative mean field problem on the witness set.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError
from .graphs import Ball, VertexFunction, WeightedGraph, ball
from .meanfield import (
    MeanFieldState,
    gamma_bracket_check,
    local_bound_check,
    solve_meanfield_negative,
    solve_meanfield_normalized,
)
from .problems import ProblemSpec
from .schrodinger import check_positivity, solve_local_schrodinger
from .spaces import SLACK, h_norm, local_dirichlet_energy
from .yamabe import solve_yamabe

__all__ = [
    "LevelRecord",
    "ExhaustionReport",
    "doubling_check",
    "run_exhaustion",
]


def doubling_check(
    graph: WeightedGraph,
    region: Ball,
    u: VertexFunction,
    h: VertexFunction | None = None,
) -> tuple[float, float, bool]:
    """Global H-energy of a ball-supported u against twice its local energy.

    For u vanishing outside the interior the global energy cannot exceed
    twice the local Dirichlet energy; with the edge convention used here the
    two agree exactly, so the factor two is pure headroom.
    """
    if h is not None:
        lhs = h_norm(graph, u, h) ** 2
    else:
        arr = u.to_array(graph)
        diff = arr[graph.edge_v] - arr[graph.edge_u]
        lhs = float(np.dot(graph.edge_w, diff * diff))
    rhs = 2.0 * local_dirichlet_energy(graph, region, u, h)
    return lhs, rhs, lhs <= rhs + SLACK + 1e-12 * rhs


@dataclass(frozen=True)
class LevelRecord:
    k: int
    energy: float
    norm: float
    residual: float
    gap: float
    global_residual: float
    umin: float
    umax: float
    iterations: int
    gamma: float | None = None
    positive: bool | None = None
    doubling_lhs: float = 0.0
    doubling_rhs: float = 0.0


@dataclass(frozen=True)
class ExhaustionReport:
    equation: str
    center: str
    witness_radius: int
    k_min: int
    k_max: int
    tol: float
    levels: tuple[LevelRecord, ...]
    u_star: VertexFunction
    u_final: VertexFunction
    final_k: int
    cauchy_gap: float
    global_residual: float
    converged: bool
    finite_graph_mode: bool
    parallel: bool = False


def _laplacian_at(graph: WeightedGraph, arr: np.ndarray, i: int) -> float:
    nbr = graph._nbr[i]
    return float(np.dot(graph._nbrw[i], arr[nbr] - arr[i]) / graph.mu[i])


def _global_residual(
    graph: WeightedGraph,
    problem: ProblemSpec,
    region: Ball,
    arr: np.ndarray,
    witness_idx: np.ndarray,
) -> float:
    """Equation residual at witness vertices, with full-graph neighborhoods."""
    eq = problem.equation
    worst = 0.0
    if eq == "meanfield-normalized":
        garr = problem.g.to_array(graph)
        idx = region.interior_idx
        gamma = float(np.dot(graph.mu[idx] * garr[idx], np.exp(arr[idx])))
    for i in witness_idx:
        x = graph.ids[i]
        lap = _laplacian_at(graph, arr, i)
        if eq == "schrodinger":
            r = -lap + problem.h(x) * arr[i] - problem.f(x)
        elif eq == "meanfield-negative":
            r = lap - problem.f(x) + problem.g(x) * math.exp(arr[i])
        elif eq == "meanfield-normalized":
            r = -lap + problem.h(x) * arr[i] + problem.f(x) - problem.g(x) * math.exp(arr[i]) / gamma
        else:  # yamabe
            r = -lap + problem.h(x) * arr[i] - abs(arr[i]) ** (problem.q - 2.0) * arr[i]
        worst = max(worst, abs(r))
    return worst


def _solve_level(
    graph: WeightedGraph,
    problem: ProblemSpec,
    region: Ball,
    start: VertexFunction | None,
):
    """Dispatch one local solve; returns (array, energy, residual, gamma, positive, iters)."""
    eq = problem.equation
    tol = problem.local_tol
    if eq == "schrodinger":
        sol = solve_local_schrodinger(graph, region, problem.h, problem.f, tol, start=start)
        farr = problem.f.to_array(graph)
        positive = check_positivity(graph, region, sol.u, problem.f) if farr.min() >= 0.0 else None
        return sol.u.to_array(graph), sol.energy, sol.residual, None, positive, sol.iterations
    if eq == "meanfield-negative":
        state = solve_meanfield_negative(graph, region, problem.f, problem.g, tol, start=start)
        return state.u.to_array(graph), state.energy, state.residual, None, None, state.iterations
    if eq == "meanfield-normalized":
        state = solve_meanfield_normalized(
            graph, region, problem.h, problem.f, problem.g, tol, start=start
        )
        return state.u.to_array(graph), state.energy, state.residual, state.gamma, None, state.iterations
    report = solve_yamabe(graph, region, problem.h, problem.q, tol, start=start)
    return (
        report.u.to_array(graph),
        report.energy,
        report.residual,
        None,
        None,
        report.iterations,
    )


def run_exhaustion(
    graph: WeightedGraph,
    problem: ProblemSpec,
    parallel: bool = False,
    stop_on_convergence: bool = True,
    check_invariants: bool = True,
) -> ExhaustionReport:
    """Run the radius sweep for a validated problem and certify each level."""
    problem.validate(graph)
    origin = problem.center
    ell = problem.witness
    witness_ball = ball(graph, origin, ell)
    witness_idx = witness_ball.interior_idx
    ecc = int(graph.distances_from(origin).max())
    finite_mode = ecc <= problem.k_max

    ks = list(range(problem.k_min, problem.k_max + 1))
    solutions: dict[int, tuple] = {}
    if parallel:
        regions = {k: ball(graph, origin, k) for k in ks}
        with ThreadPoolExecutor(max_workers=min(8, len(ks))) as pool:
            futures = {
                k: pool.submit(_solve_level, graph, problem, regions[k], None) for k in ks
            }
            for k in ks:
                solutions[k] = futures[k].result()

    records: list[LevelRecord] = []
    prev = np.zeros(len(graph))
    prev_monotone: float | None = None
    converged = False
    final_k = ks[0]
    cauchy_gap = math.inf
    gres = math.inf
    arr = prev
    region = None

    for k in ks:
        region = ball(graph, origin, k) if not parallel else regions[k]
        if parallel:
            arr, energy, residual, gamma, positive, iters = solutions[k]
        else:
            start = VertexFunction.from_array(graph, prev) if prev.any() else None
            arr, energy, residual, gamma, positive, iters = _solve_level(
                graph, problem, region, start
            )
        u_vf = VertexFunction.from_array(graph, arr, domain="ball", keep=region.interior)
        cauchy_gap = float(np.max(np.abs(arr[witness_idx] - prev[witness_idx])))
        gres = _global_residual(graph, problem, region, arr, witness_idx)
        dl, dr, d_ok = doubling_check(graph, region, u_vf, problem.h)

        if check_invariants:
            if not d_ok:
                raise InvariantError(f"doubling inequality failed at level {k}: {dl} > {dr}")
            monotone_value = energy
            if problem.equation == "meanfield-negative":
                garr = problem.g.to_array(graph)
                monotone_value = energy + float(
                    np.dot(graph.mu[region.interior_idx], garr[region.interior_idx])
                )
                wit_ids = witness_ball.interior
                state = MeanFieldState(u=u_vf, energy=energy, residual=residual, iterations=iters)
                *_, bounds_ok = local_bound_check(
                    graph, region, problem.f, problem.g, state, wit_ids
                )
                if not bounds_ok:
                    raise InvariantError(f"pointwise level bounds failed at level {k}")
            if problem.equation == "meanfield-normalized":
                state = MeanFieldState(
                    u=u_vf, energy=energy, residual=residual, iterations=iters, gamma=gamma
                )
                *_, g_ok = gamma_bracket_check(
                    graph, region, problem.constants, problem.h, problem.g, state
                )
                if not g_ok:
                    raise InvariantError(f"gamma bracket failed at level {k}")
            if problem.equation in ("schrodinger", "meanfield-negative"):
                if prev_monotone is not None and monotone_value > prev_monotone + SLACK + 1e-12 * abs(
                    prev_monotone
                ):
                    raise InvariantError(
                        f"level energy rose from {prev_monotone} to {monotone_value} at level {k}"
                    )
                prev_monotone = monotone_value

        records.append(
            LevelRecord(
                k=k,
                energy=energy,
                norm=math.sqrt(local_dirichlet_energy(graph, region, u_vf, problem.h)),
                residual=residual,
                gap=cauchy_gap,
                global_residual=gres,
                umin=float(arr[region.interior_idx].min()),
                umax=float(arr[region.interior_idx].max()),
                iterations=iters,
                gamma=gamma,
                positive=positive,
                doubling_lhs=dl,
                doubling_rhs=dr,
            )
        )
        prev = arr
        final_k = k
        if cauchy_gap <= problem.tol and gres <= problem.tol:
            converged = True
            if stop_on_convergence:
                break

    u_star = VertexFunction.from_array(graph, arr, domain="ball", keep=witness_ball.interior)
    u_final = VertexFunction.from_array(graph, arr, domain="ball", keep=region.interior)
    return ExhaustionReport(
        equation=problem.equation,
        center=origin,
        witness_radius=ell,
        k_min=problem.k_min,
        k_max=problem.k_max,
        tol=problem.tol,
        levels=tuple(records),
        u_star=u_star,
        u_final=u_final,
        final_k=final_k,
        cauchy_gap=cauchy_gap,
        global_residual=gres,
        converged=converged,
        finite_graph_mode=finite_mode,
        parallel=parallel,
    )
