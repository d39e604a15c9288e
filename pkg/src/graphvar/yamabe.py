"""Ground states of -Laplacian u + h u = |u|^(q-2) u on a ball, q > 2.

The solver runs the normalized fixed-point iteration: solve the linear
problem with right-hand side |u_n|^(q-2) u_n, then rescale the result onto
the Nehari set (||w||_H^2 = ||w||_q^q) before the next sweep.  Inner linear
solves reuse the conjugate gradient routine of the linear module.  Alongside
the solution the report carries the Nehari defect, the equation residual,
and a two-sided bracket for the minimax level: sampled small-sphere minimum
below, the realized ground-state energy above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HypothesisError, InputError, NumericalError
from .graphs import Ball, VertexFunction, WeightedGraph, dirichlet_matrix
from .schrodinger import conjugate_gradient
from .spaces import h_norm, local_dirichlet_energy

__all__ = [
    "nonlinearity",
    "yamabe_energy",
    "YamabeReport",
    "solve_yamabe",
    "GeometryReport",
    "mp_geometry_check",
]


def nonlinearity(s, q: float):
    """Power nonlinearity f(s) = |s|^(q-2) s and its primitive F(s) = |s|^q / q."""
    if q <= 2.0:
        raise InputError(f"the power nonlinearity needs q > 2, got {q!r}")
    arr = np.asarray(s, dtype=float)
    f = np.abs(arr) ** (q - 2.0) * arr
    big_f = np.abs(arr) ** q / q
    if np.isscalar(s) or arr.ndim == 0:
        return float(f), float(big_f)
    return f, big_f


def yamabe_energy(
    graph: WeightedGraph,
    region: Ball | None,
    h: VertexFunction,
    q: float,
    u: VertexFunction,
) -> float:
    """J(u) = (1/2)||u||_H^2 - int F(u) dmu, on a ball or on the whole graph."""
    arr = u.to_array(graph)
    _, big_f = nonlinearity(arr, q)
    if region is None:
        return float(0.5 * h_norm(graph, u, h) ** 2 - np.dot(graph.mu, big_f))
    idx = region.interior_idx
    return float(
        0.5 * local_dirichlet_energy(graph, region, u, h)
        - np.dot(graph.mu[idx], big_f[idx])
    )


def _check_h_interior(graph: WeightedGraph, region: Ball, h: VertexFunction) -> None:
    harr = h.to_array(graph)[region.interior_idx]
    k = int(np.argmin(harr))
    if harr[k] <= 0.0:
        raise HypothesisError(
            f"need h > 0 on the interior, but h({region.interior[k]!r}) = {harr[k]!r}"
        )


def _sphere_minimum(
    mat, mu_i: np.ndarray, q: float, delta: float, n_directions: int, rng: np.random.Generator
) -> float:
    """Minimum of J over sampled directions scaled to H-norm delta."""
    n = mu_i.size
    best = math.inf
    for _ in range(n_directions):
        v = rng.standard_normal(n)
        nv = math.sqrt(float(np.dot(v, mat @ v)))
        if nv == 0.0:
            continue
        v *= delta / nv
        value = 0.5 * delta * delta - float(np.dot(mu_i, np.abs(v) ** q)) / q
        best = min(best, value)
    return best


@dataclass(frozen=True)
class YamabeReport:
    u: VertexFunction
    energy: float
    nehari_defect: float
    residual: float
    delta: float
    bracket_lo: float
    bracket_hi: float
    iterations: int
    restarts: int


def solve_yamabe(
    graph: WeightedGraph,
    region: Ball,
    h: VertexFunction,
    q: float,
    tol: float = 1e-10,
    start: VertexFunction | None = None,
    max_iter: int = 5000,
    n_directions: int = 64,
    rng_seed: int = 0,
    delta: float | None = None,
) -> YamabeReport:
    """Nonnegative ground state of the local power-nonlinearity problem.

    Seeds with a spike at the ball center (or the given start), so all
    iterates stay nonnegative.  A collapsing iterate triggers a restart from
    a doubled spike; five restarts without progress is a failure.
    """
    if q <= 2.0:
        raise InputError(f"need q > 2, got {q!r}")
    _check_h_interior(graph, region, h)
    mat = dirichlet_matrix(graph, region, h)
    idx = region.interior_idx
    mu_i = graph.mu[idx]
    center_local = int(np.searchsorted(idx, graph.index(region.center)))
    inner_tol = tol / 50.0

    def residual_of(vec: np.ndarray) -> float:
        fvec = np.abs(vec) ** (q - 2.0) * vec
        return float(np.max(np.abs(mat @ vec - mu_i * fvec) / mu_i))

    spike_scale = 1.0
    u = start.to_array(graph)[idx] if start is not None else None
    if u is None or not np.any(u):
        u = np.zeros(len(idx))
        u[center_local] = spike_scale
    iterations = 0
    restarts = 0
    while True:
        collapsed = False
        for _ in range(max_iter):
            res = residual_of(u)
            if res <= tol:
                break
            rhs = mu_i * (np.abs(u) ** (q - 2.0) * u)
            w, _ = conjugate_gradient(mat, rhs, mu_i, inner_tol, x0=u)
            w_h2 = float(np.dot(w, mat @ w))
            w_q = float(np.dot(mu_i, np.abs(w) ** q))
            if not (w_h2 > 0.0 and w_q > 0.0 and np.isfinite(w_h2) and np.isfinite(w_q)):
                collapsed = True
                break
            t = (w_h2 / w_q) ** (1.0 / (q - 2.0))
            if not np.isfinite(t) or t <= 0.0:
                collapsed = True
                break
            u = t * w
            iterations += 1
        else:
            raise NumericalError(
                f"ground state iteration did not reach tol={tol!r} within "
                f"{max_iter} sweeps (residual {res:.3e})"
            )
        if not collapsed:
            break
        restarts += 1
        if restarts > 5:
            raise NumericalError("ground state iteration collapsed after 5 restarts")
        spike_scale *= 2.0
        u = np.zeros(len(idx))
        u[center_local] = spike_scale

    u_h2 = float(np.dot(u, mat @ u))
    u_q = float(np.dot(mu_i, np.abs(u) ** q))
    energy = 0.5 * u_h2 - u_q / q
    if delta is None:
        delta = 0.01 * math.sqrt(u_h2)
    rng = np.random.default_rng(rng_seed)
    bracket_lo = _sphere_minimum(mat, mu_i, q, delta, n_directions, rng)
    arr = np.zeros(len(graph))
    arr[idx] = u
    return YamabeReport(
        u=VertexFunction.from_array(graph, arr, domain="ball", keep=region.interior),
        energy=energy,
        nehari_defect=abs(u_h2 - u_q),
        residual=residual_of(u),
        delta=delta,
        bracket_lo=bracket_lo,
        bracket_hi=energy,
        iterations=iterations,
        restarts=restarts,
    )


@dataclass(frozen=True)
class GeometryReport:
    """Numerical witnesses for the three mountain-pass conditions."""

    origin_value: float
    origin_ok: bool
    sphere_min: float
    sphere_ok: bool
    spike_scale: float
    spike_norm: float
    spike_value: float
    spike_ok: bool
    delta: float

    @property
    def ok(self) -> bool:
        return self.origin_ok and self.sphere_ok and self.spike_ok


def mp_geometry_check(
    graph: WeightedGraph,
    region: Ball,
    h: VertexFunction,
    q: float,
    delta: float,
    n_directions: int = 64,
    rng_seed: int = 0,
) -> GeometryReport:
    """Check the mountain-pass landscape of J on the ball at scale delta.

    Conditions: J(0) = 0 exactly; J > 0 on a sampled delta-sphere; some
    multiple of the center spike has H-norm beyond delta and negative energy.
    A failed condition is reported, not raised, since the sampled sphere is
    only a certificate for the sampled directions.
    """
    if q <= 2.0:
        raise InputError(f"need q > 2, got {q!r}")
    if delta <= 0.0:
        raise InputError(f"need delta > 0, got {delta!r}")
    _check_h_interior(graph, region, h)
    mat = dirichlet_matrix(graph, region, h)
    idx = region.interior_idx
    mu_i = graph.mu[idx]

    origin_value = 0.5 * 0.0 - 0.0
    origin_ok = origin_value == 0.0

    rng = np.random.default_rng(rng_seed)
    sphere_min = _sphere_minimum(mat, mu_i, q, delta, n_directions, rng)
    sphere_ok = sphere_min > 0.0

    center_local = int(np.searchsorted(idx, graph.index(region.center)))
    spike = np.zeros(len(idx))
    spike[center_local] = 1.0
    spike_h = math.sqrt(float(np.dot(spike, mat @ spike)))
    mu_center = float(mu_i[center_local])
    t = 1.0
    spike_ok = False
    spike_norm = spike_value = 0.0
    for _ in range(400):
        spike_norm = t * spike_h
        spike_value = 0.5 * spike_norm**2 - (t**q) * mu_center / q
        if not math.isfinite(spike_value):
            break
        if spike_norm > delta and spike_value < 0.0:
            spike_ok = True
            break
        t *= 2.0
    return GeometryReport(
        origin_value=origin_value,
        origin_ok=origin_ok,
        sphere_min=sphere_min,
        sphere_ok=sphere_ok,
        spike_scale=t,
        spike_norm=spike_norm,
        spike_value=spike_value,
        spike_ok=spike_ok,
        delta=delta,
    )
