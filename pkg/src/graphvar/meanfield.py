"""Local solvers for the two mean field problems on a ball.

Negative case: minimize E(u) = (1/2) int |grad u|^2 + int f u - int g e^u
with g <= f < 0; strictly convex, solved by damped Newton.  The potential h
plays no role here and the API deliberately has no h parameter.

Normalized case: minimize E(u) = (1/2) ||u||_{W0,h}^2 + int f u - log gamma,
gamma = int_B g e^u with g >= 0; solved by Barzilai-Borwein descent with a
fixed-step fallback.  gamma is recomputed from u at every evaluation and is
never cached across iterations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    DegenerateInputError,
    HypothesisError,
    InputError,
    InvariantError,
    NumericalError,
)
from .graphs import Ball, VertexFunction, WeightedGraph, dirichlet_matrix
from .spaces import (
    SLACK,
    HypothesisConstants,
    dirichlet_lq_constant,
    local_dirichlet_energy,
    lq_norm,
)

__all__ = [
    "MeanFieldState",
    "mf_energy_negative",
    "solve_meanfield_negative",
    "local_bound_check",
    "mf_energy_normalized",
    "solve_meanfield_normalized",
    "normalized_lower_bound",
    "gamma_bracket_check",
    "GammaLimitReport",
    "gamma_limit_check",
]


@dataclass(frozen=True)
class MeanFieldState:
    u: VertexFunction
    energy: float
    residual: float
    iterations: int
    gamma: float | None = None


def _interior_data(graph: WeightedGraph, region: Ball, func: VertexFunction) -> np.ndarray:
    return func.to_array(graph)[region.interior_idx]


def _check_negative_signs(
    graph: WeightedGraph, region: Ball, f: VertexFunction, g: VertexFunction
) -> None:
    fi = _interior_data(graph, region, f)
    gi = _interior_data(graph, region, g)
    for k, gidx in enumerate(region.interior_idx):
        x = graph.ids[gidx]
        if not fi[k] < 0.0:
            raise HypothesisError(f"need f < 0 on the interior, but f({x!r}) = {fi[k]!r}")
        if not gi[k] <= fi[k]:
            raise HypothesisError(
                f"need g <= f on the interior, but g({x!r}) = {gi[k]!r} > f({x!r}) = {fi[k]!r}"
            )


def mf_energy_negative(
    graph: WeightedGraph,
    region: Ball,
    f: VertexFunction,
    g: VertexFunction,
    u: VertexFunction,
) -> float:
    """E(u) for the negative mean field functional; u ball-supported."""
    _check_negative_signs(graph, region, f, g)
    grad2 = local_dirichlet_energy(graph, region, u, h=None)
    mu_i = graph.mu[region.interior_idx]
    ui = _interior_data(graph, region, u)
    fi = _interior_data(graph, region, f)
    gi = _interior_data(graph, region, g)
    return float(0.5 * grad2 + np.dot(mu_i * fi, ui) - np.dot(mu_i * gi, np.exp(ui)))


def solve_meanfield_negative(
    graph: WeightedGraph,
    region: Ball,
    f: VertexFunction,
    g: VertexFunction,
    tol: float = 1e-10,
    start: VertexFunction | None = None,
    max_iter: int = 100,
) -> MeanFieldState:
    """Damped Newton iteration for Laplacian u = f - g e^u on the interior.

    The Hessian D + diag(mu (-g) e^u) is positive definite, so each Newton
    direction is a descent direction.  A full step is taken whenever it
    already shrinks the gradient sup-norm (near the minimum the energy test
    cannot resolve the descent in floating point); otherwise an Armijo
    backtracking line search keeps the iteration inside the convex basin.
    The converged energy is certified against int_B (-f) dmu <= E <=
    ||g||_{L^1(V)}.
    """
    _check_negative_signs(graph, region, f, g)
    mat = dirichlet_matrix(graph, region, h=None).tocsc()
    idx = region.interior_idx
    mu_i = graph.mu[idx]
    fi = f.to_array(graph)[idx]
    gi = g.to_array(graph)[idx]
    mu_f = mu_i * fi
    mu_g = mu_i * gi

    def energy(vec: np.ndarray) -> float:
        return float(0.5 * np.dot(vec, mat @ vec) + np.dot(mu_f, vec) - np.dot(mu_g, np.exp(vec)))

    def gradient(vec: np.ndarray) -> np.ndarray:
        return mat @ vec + mu_f - mu_g * np.exp(vec)

    u = np.zeros(len(idx)) if start is None else start.to_array(graph)[idx]
    iterations = 0
    for _ in range(max_iter):
        expu = np.exp(u)
        grad = mat @ u + mu_f - mu_g * expu
        residual = float(np.max(np.abs(grad) / mu_i)) if len(idx) else 0.0
        if residual <= tol:
            break
        hess = mat + sp.diags(-mu_g * expu, format="csc")
        step = spla.splu(hess).solve(-grad)
        full = u + step
        if float(np.max(np.abs(gradient(full)) / mu_i)) < residual:
            u = full
            iterations += 1
            continue
        slope = float(np.dot(grad, step))
        t = 1.0
        e0 = energy(u)
        while energy(u + t * step) > e0 + 1e-4 * t * slope:
            t *= 0.5
            if t < 1e-14:
                raise NumericalError("Newton line search stalled; no admissible step")
        u = u + t * step
        iterations += 1
    else:
        raise NumericalError(
            f"Newton iteration did not reach tol={tol!r} within {max_iter} steps "
            f"(residual {residual:.3e})"
        )

    e_final = energy(u)
    lower = float(np.dot(mu_i, -fi))
    upper = float(np.dot(graph.mu, np.abs(g.to_array(graph))))
    if not (lower - SLACK <= e_final <= upper + SLACK):
        raise InvariantError(
            f"mean field energy {e_final!r} leaves its bracket [{lower!r}, {upper!r}]"
        )
    arr = np.zeros(len(graph))
    arr[idx] = u
    return MeanFieldState(
        u=VertexFunction.from_array(graph, arr, domain="ball", keep=region.interior),
        energy=e_final,
        residual=float(np.max(np.abs(mat @ u + mu_f - mu_g * np.exp(u)) / mu_i)) if len(idx) else 0.0,
        iterations=iterations,
    )


def local_bound_check(
    graph: WeightedGraph,
    region: Ball,
    f: VertexFunction,
    g: VertexFunction,
    state: MeanFieldState,
    witness: tuple[str, ...],
) -> tuple[float, float, float, float, bool]:
    """Level-k bounds on u over a witness set A inside the interior.

    Returns (neg_max, neg_bound, pos_max, pos_bound, holds) where
    neg_bound = (E - int_B g) / min_A mu|f| and pos_bound its square-root
    variant; both control u uniformly on A independent of the radius.
    """
    interior = set(region.interior)
    for x in witness:
        if x not in interior:
            raise InputError(f"witness vertex {x!r} is not interior to the ball")
    mu_f = np.array([graph.measure_of(x) * abs(f(x)) for x in witness])
    if np.any(mu_f == 0.0):
        raise HypothesisError("witness set touches a vertex where f vanishes")
    excess = state.energy - sum(graph.measure_of(x) * g(x) for x in region.interior)
    denom = float(mu_f.min())
    neg_bound = excess / denom
    pos_bound = math.sqrt(max(2.0 * excess / denom, 0.0))
    uvals = np.array([state.u(x) for x in witness])
    neg_max = float(np.max(np.maximum(-uvals, 0.0)))
    pos_max = float(np.max(np.maximum(uvals, 0.0)))
    holds = neg_max <= neg_bound + SLACK and pos_max <= pos_bound + SLACK
    return neg_max, neg_bound, pos_max, pos_bound, holds


# -- normalized problem --------------------------------------------------------


def _check_normalized_signs(
    graph: WeightedGraph, region: Ball, h: VertexFunction, g: VertexFunction
) -> None:
    hi = _interior_data(graph, region, h)
    gi = _interior_data(graph, region, g)
    for k, gidx in enumerate(region.interior_idx):
        x = graph.ids[gidx]
        if not hi[k] > 0.0:
            raise HypothesisError(f"need h > 0 on the interior, but h({x!r}) = {hi[k]!r}")
        if gi[k] < 0.0:
            raise HypothesisError(f"need g >= 0 on the interior, but g({x!r}) = {gi[k]!r}")
    if not np.any(gi > 0.0):
        raise DegenerateInputError("g vanishes on the whole interior; gamma would be zero")


def mf_energy_normalized(
    graph: WeightedGraph,
    region: Ball,
    h: VertexFunction,
    f: VertexFunction,
    g: VertexFunction,
    u: VertexFunction,
) -> float:
    """E(u) = (1/2)||u||_{W0,h}^2 + int f u - log(int_B g e^u)."""
    _check_normalized_signs(graph, region, h, g)
    idx = region.interior_idx
    mu_i = graph.mu[idx]
    ui = _interior_data(graph, region, u)
    gamma = float(np.dot(mu_i * _interior_data(graph, region, g), np.exp(ui)))
    return float(
        0.5 * local_dirichlet_energy(graph, region, u, h)
        + np.dot(mu_i * _interior_data(graph, region, f), ui)
        - math.log(gamma)
    )


def _newton_polish(
    mat: sp.csr_matrix,
    mu_i: np.ndarray,
    mu_f: np.ndarray,
    mu_g: np.ndarray,
    u: np.ndarray,
    tol: float,
    max_iter: int = 60,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Finish the normalized minimization with regularized Newton steps.

    Near the minimum the energy decrease per descent step drops below
    floating point resolution, so progress here is measured on the scaled
    gradient sup-norm instead.  Each step solves (H + lam I) s = -grad with
    H = A - diag(m)/gamma + m m^T / gamma^2, m = mu g e^u; the rank-one term
    is folded in via the Sherman-Morrison identity, and lam grows tenfold
    whenever a step fails to reduce the residual.
    """
    ident = sp.identity(len(u), format="csc")

    def gradient(vec: np.ndarray) -> np.ndarray:
        m = mu_g * np.exp(vec)
        return mat @ vec + mu_f - m / float(np.sum(m))

    grad = gradient(u)
    residual = float(np.max(np.abs(grad) / mu_i))
    scale = float(np.max(np.abs(mat.diagonal()))) + 1.0
    for it in range(max_iter):
        if residual <= tol:
            return u, grad, it
        m = mu_g * np.exp(u)
        gamma = float(np.sum(m))
        v = m / gamma
        lam = 0.0
        for _ in range(40):
            base = (mat - sp.diags(m / gamma) + lam * ident).tocsc()
            step = None
            try:
                lu = spla.splu(base)
                x = lu.solve(-grad)
                w = lu.solve(v)
                step = x - w * (np.dot(v, x) / (1.0 + np.dot(v, w)))
            except RuntimeError:
                pass
            if step is not None and np.all(np.isfinite(step)):
                cand = u + step
                grad_c = gradient(cand)
                res_c = float(np.max(np.abs(grad_c) / mu_i))
                if res_c < residual:
                    u, grad, residual = cand, grad_c, res_c
                    break
            lam = 1e-10 * scale if lam == 0.0 else lam * 10.0
        else:
            raise NumericalError(
                f"descent stagnated at residual {residual:.3e} (tol {tol!r})"
            )
    raise NumericalError(
        f"descent did not reach tol={tol!r} within {max_iter} polish steps "
        f"(residual {residual:.3e})"
    )


def solve_meanfield_normalized(
    graph: WeightedGraph,
    region: Ball,
    h: VertexFunction,
    f: VertexFunction,
    g: VertexFunction,
    tol: float = 1e-10,
    start: VertexFunction | None = None,
    max_iter: int = 100_000,
) -> MeanFieldState:
    """Gradient descent with Barzilai-Borwein steps for the normalized problem.

    Steps with negative curvature or failed descent fall back to a fixed 0.1
    step, halved until the energy decreases; once no decrease is resolvable
    at machine-level steps a regularized Newton polish drives the gradient
    the rest of the way to tol.  A start whose energy exceeds E(0) is
    discarded so the certified bound E <= E(0) = -log int_B g dmu survives
    warm starting.
    """
    _check_normalized_signs(graph, region, h, g)
    mat = dirichlet_matrix(graph, region, h)
    idx = region.interior_idx
    mu_i = graph.mu[idx]
    mu_f = mu_i * f.to_array(graph)[idx]
    mu_g = mu_i * g.to_array(graph)[idx]

    def gamma_of(vec: np.ndarray) -> float:
        return float(np.dot(mu_g, np.exp(vec)))

    def energy(vec: np.ndarray) -> float:
        return float(
            0.5 * np.dot(vec, mat @ vec) + np.dot(mu_f, vec) - math.log(gamma_of(vec))
        )

    def gradient(vec: np.ndarray) -> np.ndarray:
        return mat @ vec + mu_f - mu_g * np.exp(vec) / gamma_of(vec)

    u = np.zeros(len(idx))
    if start is not None:
        cand = start.to_array(graph)[idx]
        if energy(cand) <= energy(u):
            u = cand

    grad = gradient(u)
    e_u = energy(u)
    alpha = 0.1
    iterations = 0
    stalled = False
    for _ in range(max_iter):
        residual = float(np.max(np.abs(grad) / mu_i))
        if residual <= tol:
            break
        step = alpha
        cand = u - step * grad
        e_c = energy(cand)
        if not e_c < e_u:
            step = 0.1
            cand = u - step * grad
            e_c = energy(cand)
            while not e_c < e_u:
                step *= 0.5
                if step < 1e-16:
                    stalled = True
                    break
                cand = u - step * grad
                e_c = energy(cand)
            if stalled:
                break
        grad_new = gradient(cand)
        s = cand - u
        y = grad_new - grad
        sy = float(np.dot(s, y))
        alpha = float(np.dot(s, s)) / sy if sy > 0.0 else 0.1
        alpha = min(max(alpha, 1e-12), 1e6)
        u, grad, e_u = cand, grad_new, e_c
        iterations += 1
    else:
        raise NumericalError(
            f"descent did not reach tol={tol!r} within {max_iter} steps "
            f"(residual {residual:.3e})"
        )
    if float(np.max(np.abs(grad) / mu_i)) > tol:
        u, grad, extra = _newton_polish(mat, mu_i, mu_f, mu_g, u, tol)
        iterations += extra

    gamma = gamma_of(u)
    e_final = energy(u)
    upper = -math.log(float(np.dot(mu_i, g.to_array(graph)[idx])))
    if e_final > upper + SLACK:
        raise InvariantError(
            f"normalized energy {e_final!r} exceeds its bound {upper!r}"
        )
    arr = np.zeros(len(graph))
    arr[idx] = u
    return MeanFieldState(
        u=VertexFunction.from_array(graph, arr, domain="ball", keep=region.interior),
        energy=e_final,
        residual=float(np.max(np.abs(gradient(u)) / mu_i)),
        iterations=iterations,
        gamma=gamma,
    )


def normalized_lower_bound(
    graph: WeightedGraph,
    region: Ball,
    consts: HypothesisConstants,
    h: VertexFunction,
    f: VertexFunction,
    g: VertexFunction,
    u: VertexFunction,
) -> tuple[float, float, bool]:
    """Coercivity floor of the normalized energy, valid for every admissible u.

    E(u) >= (1/8)||u||^2 - C^2 ||f||_{L^q}^2 - log ||g||_{L^1} - 2/(mu0 a0),
    with C the dual-exponent embedding constant (q in [1, 2], q = 1 reading
    the dual exponent as infinity).  Returns (lhs, rhs, holds).
    """
    if consts.mu0 is None:
        raise HypothesisError("the lower bound needs mu0")
    q = consts.q if consts.q is not None else 2.0
    if not (1.0 <= q <= 2.0):
        raise HypothesisError(f"the source exponent q must lie in [1, 2], got {q!r}")
    consts.validate_against(graph, h)
    lhs = mf_energy_normalized(graph, region, h, f, g, u)
    dual = math.inf if q == 1.0 else q / (q - 1.0)
    c = dirichlet_lq_constant(dual, consts.mu0, consts.a0)
    energy = local_dirichlet_energy(graph, region, u, h)
    rhs = (
        energy / 8.0
        - c * c * lq_norm(graph, f, q) ** 2
        - math.log(float(np.dot(graph.mu, np.abs(g.to_array(graph)))))
        - 2.0 / (consts.mu0 * consts.a0)
    )
    return lhs, rhs, lhs >= rhs - SLACK - 1e-12 * abs(rhs)


def gamma_bracket_check(
    graph: WeightedGraph,
    region: Ball,
    consts: HypothesisConstants,
    h: VertexFunction,
    g: VertexFunction,
    state: MeanFieldState,
) -> tuple[float, float, bool]:
    """Two-sided bracket for gamma from the sup bound on ball-supported u.

    |u| <= ||u||_{W0,h} / sqrt(mu0 a0) pointwise, hence gamma lies within
    exp(+-B) of int_B g dmu.  Returns (lo, hi, holds).
    """
    if consts.mu0 is None:
        raise HypothesisError("gamma bracket needs mu0")
    consts.validate_against(graph, h)
    if state.gamma is None:
        raise InputError("state carries no gamma; solve the normalized problem first")
    energy = local_dirichlet_energy(graph, region, state.u, h)
    bound = math.sqrt(energy / (consts.mu0 * consts.a0))
    base = float(np.dot(graph.mu[region.interior_idx], g.to_array(graph)[region.interior_idx]))
    lo, hi = base * math.exp(-bound), base * math.exp(bound)
    holds = lo - SLACK - 1e-12 * abs(lo) <= state.gamma <= hi + SLACK + 1e-12 * abs(hi)
    return lo, hi, holds


@dataclass(frozen=True)
class GammaLimitReport:
    gamma: float
    integral: float
    gap: float
    tails: tuple[tuple[int, float], ...]
    holds: bool


def gamma_limit_check(
    graph: WeightedGraph,
    origin: str,
    g: VertexFunction,
    u_star: VertexFunction,
    gamma: float,
    tol: float = 1e-8,
) -> GammaLimitReport:
    """Compare the converged gamma with int_V g e^{u*} dmu.

    Meaningful when g is finitely supported inside the witness region, where
    u* is final; the tail masses sum mu |g| outside each radius and document
    why the truncated integral already equals the global one.
    """
    garr = g.to_array(graph)
    uarr = u_star.to_array(graph)
    integral = float(np.dot(graph.mu * garr, np.exp(uarr)))
    gap = abs(gamma - integral)
    rho = graph.distances_from(origin)
    support = np.flatnonzero(garr != 0.0)
    r_max = int(rho[support].max()) if support.size else 0
    tails = tuple(
        (r, float(np.dot(graph.mu[rho >= r], np.abs(garr[rho >= r]))))
        for r in range(r_max + 2)
    )
    return GammaLimitReport(gamma=gamma, integral=integral, gap=gap, tails=tails, holds=gap <= tol)
