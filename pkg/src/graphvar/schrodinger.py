"""Local Dirichlet problems for -Laplacian u + h u = f and their certificates.

The local problem on a ball minimizes J(u) = (1/2)||u||_{W0}^2 - int f u over
functions vanishing outside the interior.  Its Euler-Lagrange system is
symmetric positive definite and is solved by conjugate gradients; the
converged energy is certified against the a-priori bracket
-||f||_{L^2(V)}^2 / a0 <= J <= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import HypothesisError, InputError, InvariantError, NumericalError
from .graphs import Ball, VertexFunction, WeightedGraph, ball, dirichlet_matrix
from .spaces import (
    SLACK,
    HypothesisConstants,
    local_dirichlet_energy,
    lq_norm,
    lp_embedding_constant,
)

__all__ = [
    "LocalLinearSystem",
    "LocalSolution",
    "UniformBoundReport",
    "build_local_system",
    "conjugate_gradient",
    "solve_local_schrodinger",
    "jk_energy",
    "check_positivity",
    "uniform_bound_check",
]


@dataclass(frozen=True)
class LocalLinearSystem:
    """Assembled interior system A u = b with the interior measure alongside.

    The residual of a candidate u in equation form is (A u - b) / mu, i.e.
    the pointwise defect of -Laplacian u + h u = f at interior vertices.
    """

    interior_ids: tuple[str, ...]
    matrix: sp.csr_matrix
    rhs: np.ndarray
    mu: np.ndarray

    def residual(self, x: np.ndarray) -> float:
        return float(np.max(np.abs(self.matrix @ x - self.rhs) / self.mu)) if self.mu.size else 0.0


def build_local_system(
    graph: WeightedGraph,
    region: Ball,
    h: VertexFunction | None,
    f: VertexFunction,
) -> LocalLinearSystem:
    """Assemble mu * (-Lap + h) on the interior with right-hand side mu * f."""
    mat = dirichlet_matrix(graph, region, h)
    asym = abs(mat - mat.T)
    if asym.nnz and asym.max() > 1e-12:
        raise InvariantError("assembled local system is not symmetric")
    idx = region.interior_idx
    rhs = graph.mu[idx] * f.to_array(graph)[idx]
    return LocalLinearSystem(
        interior_ids=region.interior,
        matrix=mat,
        rhs=rhs,
        mu=graph.mu[idx].copy(),
    )


def conjugate_gradient(
    mat: sp.csr_matrix,
    rhs: np.ndarray,
    mu: np.ndarray,
    tol: float,
    x0: np.ndarray | None = None,
    max_iter: int | None = None,
) -> tuple[np.ndarray, int]:
    """Conjugate gradients stopping on max |A x - b| / mu <= tol.

    The recurrence residual is replaced by the true residual before the
    stopping test is trusted.  Raises NumericalError at the iteration cap.
    """
    n = rhs.size
    if n == 0:
        return np.zeros(0), 0
    if max_iter is None:
        max_iter = 1000 + 20 * n
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = rhs - mat @ x
    if float(np.max(np.abs(r) / mu)) <= tol:
        return x, 0
    p = r.copy()
    rr = float(np.dot(r, r))
    for it in range(1, max_iter + 1):
        ap = mat @ p
        alpha = rr / float(np.dot(p, ap))
        x += alpha * p
        r -= alpha * ap
        rr_new = float(np.dot(r, r))
        if float(np.max(np.abs(r) / mu)) <= tol:
            r_true = rhs - mat @ x
            if float(np.max(np.abs(r_true) / mu)) <= tol:
                return x, it
            # drift between recurrence and true residual; restart direction
            r = r_true
            rr_new = float(np.dot(r, r))
            p = r.copy()
            rr = rr_new
            continue
        p = r + (rr_new / rr) * p
        rr = rr_new
    raise NumericalError(
        f"conjugate gradients stalled at residual "
        f"{float(np.max(np.abs(rhs - mat @ x) / mu)):.3e} after {max_iter} iterations"
    )


@dataclass(frozen=True)
class LocalSolution:
    u: VertexFunction
    energy: float
    residual: float
    iterations: int


def solve_local_schrodinger(
    graph: WeightedGraph,
    region: Ball,
    h: VertexFunction,
    f: VertexFunction,
    tol: float = 1e-10,
    start: VertexFunction | None = None,
) -> LocalSolution:
    """Solve -Laplacian u + h u = f on the ball interior, zero outside.

    Certifies the energy bracket -||f||_{L^2(V)}^2 / min h <= J(u) <= 0 and
    returns the solution with its converged energy and equation residual.
    """
    harr = h.to_array(graph)
    i = int(np.argmin(harr))
    if harr[i] <= 0.0:
        raise HypothesisError(f"h({graph.ids[i]!r}) = {harr[i]!r} is not positive")
    system = build_local_system(graph, region, h, f)
    x0 = start.to_array(graph)[region.interior_idx] if start is not None else None
    x, iterations = conjugate_gradient(system.matrix, system.rhs, system.mu, tol, x0=x0)
    u = VertexFunction.from_array(graph, _scatter(graph, region, x), domain="ball",
                                  keep=region.interior)
    energy = jk_energy(graph, region, h, f, u)
    lower = -lq_norm(graph, f, 2.0) ** 2 / float(harr.min())
    if not (lower - SLACK <= energy <= SLACK):
        raise InvariantError(
            f"local energy {energy!r} leaves its bracket [{lower!r}, 0]"
        )
    return LocalSolution(u=u, energy=energy, residual=system.residual(x), iterations=iterations)


def _scatter(graph: WeightedGraph, region: Ball, x: np.ndarray) -> np.ndarray:
    arr = np.zeros(len(graph))
    arr[region.interior_idx] = x
    return arr


def jk_energy(
    graph: WeightedGraph,
    region: Ball,
    h: VertexFunction,
    f: VertexFunction,
    u: VertexFunction,
) -> float:
    """J(u) = (1/2) ||u||_{W0(B)}^2 - int_B f u dmu for ball-supported u."""
    idx = region.interior_idx
    ua = u.to_array(graph)
    fa = f.to_array(graph)
    return float(
        0.5 * local_dirichlet_energy(graph, region, u, h)
        - np.dot(graph.mu[idx] * fa[idx], ua[idx])
    )


def check_positivity(
    graph: WeightedGraph, region: Ball, u: VertexFunction, f: VertexFunction
) -> bool:
    """Maximum-principle verdict for f >= 0: u >= 0, strictly if f != 0 somewhere.

    True when u is nonnegative on the interior and, if f does not vanish
    identically on the interior, strictly positive there.
    """
    idx = region.interior_idx
    ua = u.to_array(graph)[idx]
    fa = f.to_array(graph)[idx]
    j = int(np.argmin(fa)) if fa.size else 0
    if fa.size and fa[j] < 0.0:
        raise HypothesisError(
            f"positivity check needs f >= 0, but f({graph.ids[idx[j]]!r}) = {fa[j]!r}"
        )
    if fa.size == 0:
        return True
    if np.any(fa != 0.0):
        return bool(np.all(ua > 0.0))
    return bool(np.all(ua >= 0.0))


@dataclass(frozen=True)
class UniformBoundReport:
    """k-independent energy bounds against the realized local norms."""

    case: str
    bound: float
    max_norm2: float
    norms2: tuple[float, ...]
    holds: bool


def uniform_bound_check(
    graph: WeightedGraph,
    origin: str,
    h: VertexFunction,
    f: VertexFunction,
    levels: list[tuple[int, VertexFunction]],
    consts: HypothesisConstants,
) -> tuple[UniformBoundReport, ...]:
    """Check ||u_k||_{W0}^2 against every bound the supplied constants allow.

    Cases: "l2" uses 4 ||f||_2^2 / a0; "l1" uses 4 ||f||_1^2 / mu0; "lp" uses
    4 C^2 ||f||_{p/(p-1)}^2 with the explicit distance-growth constant (p = 1
    reads the conjugate exponent as infinity).  Returns one report per
    applicable case; holds=False flags a solver bug rather than raising.
    """
    consts.validate_against(graph, h)
    norms2 = tuple(
        local_dirichlet_energy(graph, ball(graph, origin, k), u, h) for k, u in levels
    )
    worst = max(norms2) if norms2 else 0.0
    reports = []

    def add(case: str, bound: float) -> None:
        ok = worst <= bound + SLACK + 1e-12 * bound
        reports.append(UniformBoundReport(case, bound, worst, norms2, ok))

    add("l2", 4.0 * lq_norm(graph, f, 2.0) ** 2 / consts.a0)
    if consts.mu0 is not None:
        add("l1", 4.0 * lq_norm(graph, f, 1.0) ** 2 / consts.mu0)
    if consts.w0 is not None and consts.p is not None:
        rho = graph.distances_from(origin).astype(float)
        rho_p = float(np.dot(graph.mu, rho ** consts.p) ** (1.0 / consts.p))
        c = (
            lp_embedding_constant(consts.w0, graph.measure_of(origin), consts.p)
            * (rho_p + 1.0)
            * max(1.0, 1.0 / math.sqrt(consts.a0))
        )
        conj = math.inf if consts.p == 1.0 else consts.p / (consts.p - 1.0)
        add("lp", 4.0 * c**2 * lq_norm(graph, f, conj) ** 2)
    return tuple(reports)
