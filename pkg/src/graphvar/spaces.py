"""Sobolev-type norms on graphs and runtime checks of the embedding bounds.

Gradient energies sum over undirected edges: for an edge {x, y} of weight w
the contribution to the squared gradient norm is w * (u(y) - u(x))**2.  With
this convention the Euler-Lagrange equations of the local functionals hold
exactly, with full-graph neighborhoods, at interior vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse.linalg as spla

from .errors import (
    DegenerateInputError,
    HypothesisError,
    InputError,
    NumericalError,
)
from .graphs import Ball, VertexFunction, WeightedGraph, dirichlet_matrix

__all__ = [
    "HypothesisConstants",
    "EmbeddingCheck",
    "EmbeddingReport",
    "lq_norm",
    "w12_norm",
    "h_norm",
    "h_inner",
    "local_dirichlet_energy",
    "lp_embedding_constant",
    "dirichlet_lq_constant",
    "check_embeddings",
    "pointwise_distance_bound",
    "interpolation_check",
    "trudinger_moser_bound",
    "poincare_constant",
]

# Absolute slack applied when certifying inequalities whose exact form is
# proved elsewhere; quantities are O(1) in the intended regimes, and a tiny
# relative term keeps the checks meaningful for large norms.
SLACK = 1e-10


def _slackened(rhs: float) -> float:
    return rhs + SLACK + 1e-12 * abs(rhs)


@dataclass(frozen=True)
class HypothesisConstants:
    """Structural constants a graph/problem pair is assumed to satisfy.

    a0 is a positive lower bound for the potential h, mu0 for the vertex
    measure, w0 for the edge weights; p and q are integrability exponents.
    Optional entries switch the corresponding checks on or off.
    """

    a0: float = 1.0
    mu0: float | None = None
    w0: float | None = None
    p: float | None = None
    q: float | None = None

    def __post_init__(self) -> None:
        if not (self.a0 > 0.0):
            raise HypothesisError(f"a0 must be positive, got {self.a0!r}")
        if self.mu0 is not None and not (self.mu0 > 0.0):
            raise HypothesisError(f"mu0 must be positive, got {self.mu0!r}")
        if self.w0 is not None and not (self.w0 > 0.0):
            raise HypothesisError(f"w0 must be positive, got {self.w0!r}")
        if self.p is not None and not (self.p > 0.0):
            raise HypothesisError(f"p must be positive, got {self.p!r}")
        if self.q is not None and not (self.q >= 1.0):
            raise HypothesisError(f"q must be >= 1, got {self.q!r}")

    def validate_against(
        self, graph: WeightedGraph, h: VertexFunction | None = None
    ) -> None:
        """Raise HypothesisError, naming a witness, if the graph violates them."""
        if self.mu0 is not None:
            i = int(np.argmin(graph.mu))
            if graph.mu[i] < self.mu0:
                raise HypothesisError(
                    f"mu0={self.mu0!r} exceeds the measure {graph.mu[i]!r} "
                    f"of vertex {graph.ids[i]!r}"
                )
        if self.w0 is not None:
            k = int(np.argmin(graph.edge_w))
            if graph.edge_w[k] < self.w0:
                raise HypothesisError(
                    f"w0={self.w0!r} exceeds the weight {graph.edge_w[k]!r} of edge "
                    f"({graph.ids[graph.edge_u[k]]!r}, {graph.ids[graph.edge_v[k]]!r})"
                )
        if h is not None:
            harr = h.to_array(graph)
            i = int(np.argmin(harr))
            if harr[i] < self.a0:
                raise HypothesisError(
                    f"h({graph.ids[i]!r}) = {harr[i]!r} lies below a0 = {self.a0!r}"
                )


# -- norms -------------------------------------------------------------------


def lq_norm(graph: WeightedGraph, u: VertexFunction, q: float) -> float:
    """(integral of |u|^q dmu)^(1/q); q = inf gives the sup norm."""
    arr = np.abs(u.to_array(graph))
    if math.isinf(q):
        return float(arr.max())
    if q < 1.0:
        raise InputError(f"L^q norm needs q >= 1 or q = inf, got {q!r}")
    return float(np.dot(graph.mu, arr**q) ** (1.0 / q))


def _gradient_energy(graph: WeightedGraph, arr: np.ndarray) -> float:
    diff = arr[graph.edge_v] - arr[graph.edge_u]
    return float(np.dot(graph.edge_w, diff * diff))


def w12_norm(graph: WeightedGraph, u: VertexFunction) -> float:
    """(integral of |grad u|^2 + u^2 dmu)^(1/2) over the whole graph."""
    arr = u.to_array(graph)
    return float(np.sqrt(_gradient_energy(graph, arr) + np.dot(graph.mu, arr * arr)))


def h_inner(
    graph: WeightedGraph, u: VertexFunction, v: VertexFunction, h: VertexFunction
) -> float:
    """Bilinear form sum_E w (u-diff)(v-diff) + integral of h u v dmu."""
    harr = h.to_array(graph)
    _require_positive(graph, harr, "h")
    ua, va = u.to_array(graph), v.to_array(graph)
    du = ua[graph.edge_v] - ua[graph.edge_u]
    dv = va[graph.edge_v] - va[graph.edge_u]
    return float(np.dot(graph.edge_w, du * dv) + np.dot(graph.mu * harr, ua * va))


def h_norm(graph: WeightedGraph, u: VertexFunction, h: VertexFunction) -> float:
    """Norm induced by h_inner; requires h > 0 everywhere."""
    return float(np.sqrt(h_inner(graph, u, u, h)))


def _require_positive(graph: WeightedGraph, arr: np.ndarray, name: str) -> None:
    i = int(np.argmin(arr))
    if arr[i] <= 0.0:
        raise HypothesisError(f"{name}({graph.ids[i]!r}) = {arr[i]!r} is not positive")


def local_dirichlet_energy(
    graph: WeightedGraph,
    region: Ball,
    u: VertexFunction,
    h: VertexFunction | None = None,
) -> float:
    """Squared Dirichlet norm of a function supported in the ball interior.

    Sums w * (diff)^2 over every edge with at least one endpoint in the
    interior, plus the h-weighted mass over the interior.  u must vanish
    outside the interior; a nonzero value elsewhere is a support leak.
    """
    arr = u.to_array(graph)
    inside = np.zeros(len(graph), dtype=bool)
    inside[region.interior_idx] = True
    leak = np.flatnonzero((arr != 0.0) & ~inside)
    if leak.size:
        raise InputError(
            f"function is not supported in the ball interior: nonzero at "
            f"{graph.ids[int(leak[0])]!r}"
        )
    touch = inside[graph.edge_u] | inside[graph.edge_v]
    diff = arr[graph.edge_v] - arr[graph.edge_u]
    energy = float(np.dot(graph.edge_w[touch], diff[touch] ** 2))
    if h is not None:
        harr = h.to_array(graph)
        _require_positive(graph, harr, "h")
        ui = arr[region.interior_idx]
        energy += float(
            np.dot(graph.mu[region.interior_idx] * harr[region.interior_idx], ui * ui)
        )
    return energy


# -- explicit embedding constants ---------------------------------------------


def lp_embedding_constant(w0: float, mu_origin: float, p: float) -> float:
    """Explicit constant C(w0, mu(O), p) with ||u||_p <= C (||rho||_p + 1) ||u||_W12.

    Assembled from the pointwise bound |u(x)| <= (rho(x)/sqrt(w0) +
    1/sqrt(mu(O))) ||u||_W12 and ||1||_p <= 2^(1/p) max(||rho||_p,
    mu(O)^(1/p)); for p < 1 the triangle step costs an extra 2^(1/p) factor.
    """
    if w0 <= 0.0 or mu_origin <= 0.0 or p <= 0.0:
        raise InputError("lp_embedding_constant needs positive w0, mu(O), p")
    two = 2.0 ** (1.0 / p)
    base = max(1.0 / math.sqrt(w0) + two / math.sqrt(mu_origin),
               two * mu_origin ** (1.0 / p) / math.sqrt(mu_origin))
    m_p = 1.0 if p >= 1.0 else two
    return m_p * base


def dirichlet_lq_constant(q: float, mu0: float, a0: float) -> float:
    """Constant with ||u||_{L^q} <= C ||u||_{W0^{1,2}} for ball-supported u, q >= 2.

    Interpolates the L^2 bound (through a0) with the sup bound (through
    mu0 * a0); q = inf is allowed.
    """
    if q != math.inf and q < 2.0:
        raise InputError(f"dirichlet_lq_constant needs q >= 2, got {q!r}")
    if math.isinf(q):
        return 1.0 / math.sqrt(mu0 * a0)
    return (mu0 * a0) ** (-(q - 2.0) / (2.0 * q)) * a0 ** (-1.0 / q)


# -- embedding checks ----------------------------------------------------------


@dataclass(frozen=True)
class EmbeddingCheck:
    name: str
    lhs: float
    rhs: float
    constant: float
    holds: bool


@dataclass(frozen=True)
class EmbeddingReport:
    checks: tuple[EmbeddingCheck, ...]

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.checks)

    def __getitem__(self, name: str) -> EmbeddingCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def check_embeddings(
    graph: WeightedGraph,
    consts: HypothesisConstants,
    u: VertexFunction,
    origin: str | None = None,
) -> EmbeddingReport:
    """Evaluate both sides of each applicable embedding inequality for u.

    Which checks run depends on which constants are present: mu0 drives the
    sup bound, (w0, p, origin) the L^p bound, (p, q) the interpolation
    inequality.  Hypothesis violations raise; a false inequality is reported,
    not raised, since it would signal a bug rather than bad input.
    """
    consts.validate_against(graph)
    checks: list[EmbeddingCheck] = []
    n12 = w12_norm(graph, u)

    if consts.mu0 is not None:
        c = 1.0 / math.sqrt(consts.mu0)
        lhs = lq_norm(graph, u, math.inf)
        rhs = c * n12
        checks.append(EmbeddingCheck("sup", lhs, rhs, c, lhs <= _slackened(rhs)))

    if consts.w0 is not None and consts.p is not None:
        if origin is None:
            raise HypothesisError("the L^p check needs a base vertex (origin)")
        rho = graph.distances_from(origin).astype(float)
        c = lp_embedding_constant(consts.w0, graph.measure_of(origin), consts.p)
        rho_p = float(np.dot(graph.mu, rho ** consts.p) ** (1.0 / consts.p))
        lhs = _lp_seminorm(graph, u, consts.p)
        rhs = c * (rho_p + 1.0) * n12
        checks.append(EmbeddingCheck("lp", lhs, rhs, c, lhs <= _slackened(rhs)))

    if consts.p is not None and consts.q is not None and 1.0 < consts.q < consts.p:
        lhs, rhs = interpolation_check(graph, u, consts.q, consts.p)
        checks.append(EmbeddingCheck("interpolation", lhs, rhs, 1.0, lhs <= _slackened(rhs)))

    return EmbeddingReport(tuple(checks))


def _lp_seminorm(graph: WeightedGraph, u: VertexFunction, p: float) -> float:
    # Valid for any p > 0; for p >= 1 this is the usual norm.
    arr = np.abs(u.to_array(graph))
    return float(np.dot(graph.mu, arr**p) ** (1.0 / p))


def pointwise_distance_bound(
    graph: WeightedGraph,
    consts: HypothesisConstants,
    u: VertexFunction,
    x: str,
    origin: str,
) -> tuple[float, bool]:
    """Bound |u(x)| <= (rho(x)/sqrt(w0) + 1/sqrt(mu(O))) ||u||_W12.

    Returns (bound, holds); holds uses absolute slack 1e-12.
    """
    if consts.w0 is None:
        raise HypothesisError("pointwise distance bound needs w0")
    consts.validate_against(graph)
    rho = graph.rho(x, origin)
    bound = (rho / math.sqrt(consts.w0) + 1.0 / math.sqrt(graph.measure_of(origin))) * w12_norm(
        graph, u
    )
    return bound, abs(u(x)) <= bound + 1e-12


def interpolation_check(
    graph: WeightedGraph, u: VertexFunction, q: float, p: float
) -> tuple[float, float]:
    """Both sides of int |u|^q <= (int |u|)^lam (int |u|^p)^(1-lam), lam=(p-q)/(p-1)."""
    if not (1.0 < q < p):
        raise InputError(f"interpolation needs 1 < q < p, got q={q!r}, p={p!r}")
    arr = np.abs(u.to_array(graph))
    lam = (p - q) / (p - 1.0)
    lhs = float(np.dot(graph.mu, arr**q))
    rhs = float(np.dot(graph.mu, arr) ** lam * np.dot(graph.mu, arr**p) ** (1.0 - lam))
    return lhs, rhs


def trudinger_moser_bound(
    graph: WeightedGraph,
    region: Ball,
    consts: HypothesisConstants,
    g: VertexFunction,
    u: VertexFunction,
    eps: float,
    h: VertexFunction | None = None,
) -> tuple[float, float, bool]:
    """Exponential integrability bound for u supported in the ball interior.

    Checks log(int_B g e^u) <= log ||g||_L1 + 1/(4 eps mu0 a0) + eps ||u||^2,
    where the squared norm is the local Dirichlet energy with potential h
    (h = a0 constant when omitted, the tightest choice the constants allow).
    Needs g >= 0 with g not identically zero on the interior.
    """
    if eps <= 0.0:
        raise InputError(f"eps must be positive, got {eps!r}")
    if consts.mu0 is None:
        raise HypothesisError("trudinger_moser_bound needs mu0")
    consts.validate_against(graph)
    garr = g.to_array(graph)
    i = int(np.argmin(garr))
    if garr[i] < 0.0:
        raise HypothesisError(f"g({graph.ids[i]!r}) = {garr[i]!r} is negative")
    if h is None:
        h = VertexFunction.constant(graph, consts.a0)
    energy = local_dirichlet_energy(graph, region, u, h)
    uarr = u.to_array(graph)
    mass = float(
        np.dot(
            graph.mu[region.interior_idx] * garr[region.interior_idx],
            np.exp(uarr[region.interior_idx]),
        )
    )
    if mass <= 0.0:
        raise DegenerateInputError("g vanishes on the ball interior; log of zero mass")
    g_l1 = float(np.dot(graph.mu, np.abs(garr)))
    lhs = math.log(mass)
    rhs = math.log(g_l1) + 1.0 / (4.0 * eps * consts.mu0 * consts.a0) + eps * energy
    return lhs, rhs, lhs <= _slackened(rhs)


# -- Poincare constant ---------------------------------------------------------


def poincare_constant(
    graph: WeightedGraph,
    region: Ball,
    rel_tol: float = 1e-8,
    max_iter: int = 100_000,
) -> float:
    """Smallest C with int_B u^2 dmu <= C * grad-energy for u in W0(B).

    Computed as the reciprocal of the smallest generalized eigenvalue of the
    Dirichlet form against the mass matrix, by inverse power iteration with a
    sparse factorization; iterates until the eigenvalue settles to rel_tol.
    """
    n = len(region.interior_idx)
    if n == len(graph):
        raise InputError(
            "Poincare constant is undefined when the ball interior exhausts the "
            "graph (the Dirichlet form is singular)"
        )
    mat = dirichlet_matrix(graph, region, h=None).tocsc()
    m = graph.mu[region.interior_idx]
    if n == 1:
        return float(m[0] / mat[0, 0])
    lu = spla.splu(mat)
    x = np.ones(n)
    x /= math.sqrt(float(np.dot(m, x * x)))
    lam_prev = math.inf
    for _ in range(max_iter):
        y = lu.solve(m * x)
        ymy = float(np.dot(m, y * y))
        lam = float(np.dot(m * x, y) / ymy)  # Rayleigh quotient of y, since D y = M x
        x = y / math.sqrt(ymy)
        if abs(lam - lam_prev) <= rel_tol * abs(lam):
            return 1.0 / lam
        lam_prev = lam
    raise NumericalError(
        f"inverse power iteration did not settle within {max_iter} iterations"
    )
