"""Weighted graphs, vertex functions, balls, and the discrete operators on them.

Conventions used throughout the package:

* vertices are opaque string ids, ordered lexicographically; every array
  exposed here follows that ordering,
* edge weights are symmetric and positive, the vertex measure mu is positive,
* the combinatorial distance rho counts hops and ignores weights,
* functions are extended by zero outside their stored support.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import InputError, InvariantError, LoadError

__all__ = [
    "WeightedGraph",
    "VertexFunction",
    "Ball",
    "laplacian",
    "gradient_form",
    "grad_norm",
    "integrate",
    "ball",
    "dirichlet_matrix",
]


class WeightedGraph:
    """Connected undirected graph with positive edge weights and vertex measure.

    Instances are immutable after construction and safe to share between
    threads.  Construction validates symmetry implicitly (edges are stored
    undirected), weight and measure positivity, and connectivity.
    """

    def __init__(
        self,
        edges: Iterable[tuple[str, str, float]],
        measure: Mapping[str, float] | None = None,
    ) -> None:
        edge_map: dict[tuple[str, str], float] = {}
        vertex_set: set[str] = set()
        for x, y, w in edges:
            x, y = str(x), str(y)
            if x == y:
                raise InputError(f"self loop at vertex {x!r} is not allowed")
            w = float(w)
            if not np.isfinite(w) or w <= 0.0:
                raise InputError(f"edge ({x!r}, {y!r}) has non-positive weight {w!r}")
            key = (x, y) if x < y else (y, x)
            if key in edge_map and edge_map[key] != w:
                raise InputError(
                    f"edge ({key[0]!r}, {key[1]!r}) given twice with conflicting "
                    f"weights {edge_map[key]!r} and {w!r}"
                )
            edge_map[key] = w
            vertex_set.add(x)
            vertex_set.add(y)

        measure = dict(measure) if measure else {}
        for x in measure:
            if x not in vertex_set:
                raise InputError(f"measure given for unknown vertex {x!r}")

        if not vertex_set:
            raise InputError("graph has no vertices")

        self.ids: tuple[str, ...] = tuple(sorted(vertex_set))
        self._index: dict[str, int] = {x: i for i, x in enumerate(self.ids)}
        n = len(self.ids)

        mu = np.ones(n)
        for x, m in measure.items():
            m = float(m)
            if not np.isfinite(m) or m <= 0.0:
                raise InputError(f"vertex {x!r} has non-positive measure {m!r}")
            mu[self._index[x]] = m
        self.mu: np.ndarray = mu

        ne = len(edge_map)
        self.edge_u = np.empty(ne, dtype=np.int64)
        self.edge_v = np.empty(ne, dtype=np.int64)
        self.edge_w = np.empty(ne)
        for pos, ((x, y), w) in enumerate(sorted(edge_map.items())):
            self.edge_u[pos] = self._index[x]
            self.edge_v[pos] = self._index[y]
            self.edge_w[pos] = w

        nbr: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for i, j, w in zip(self.edge_u, self.edge_v, self.edge_w):
            nbr[i].append((j, w))
            nbr[j].append((i, w))
        self._nbr: list[np.ndarray] = []
        self._nbrw: list[np.ndarray] = []
        for lst in nbr:
            lst.sort()
            self._nbr.append(np.array([j for j, _ in lst], dtype=np.int64))
            self._nbrw.append(np.array([w for _, w in lst]))

        self._check_connected()
        self._dist_cache: dict[str, np.ndarray] = {}

    def _check_connected(self) -> None:
        n = len(self.ids)
        seen = np.zeros(n, dtype=bool)
        queue: deque[int] = deque([0])
        seen[0] = True
        while queue:
            i = queue.popleft()
            for j in self._nbr[i]:
                if not seen[j]:
                    seen[j] = True
                    queue.append(j)
        if not seen.all():
            missing = self.ids[int(np.argmin(seen))]
            raise InputError(f"graph is not connected: vertex {missing!r} is unreachable")

    # -- basic queries ----------------------------------------------------

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, x: str) -> bool:
        return x in self._index

    def __iter__(self) -> Iterator[str]:
        return iter(self.ids)

    @property
    def n_edges(self) -> int:
        return len(self.edge_w)

    def index(self, x: str) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise InputError(f"unknown vertex {x!r}") from None

    def measure_of(self, x: str) -> float:
        return float(self.mu[self.index(x)])

    def neighbors(self, x: str) -> list[tuple[str, float]]:
        i = self.index(x)
        return [(self.ids[j], float(w)) for j, w in zip(self._nbr[i], self._nbrw[i])]

    def degree(self, x: str) -> int:
        return len(self._nbr[self.index(x)])

    def distances_from(self, origin: str) -> np.ndarray:
        """Hop-count distance from `origin` to every vertex (weights ignored)."""
        if origin in self._dist_cache:
            return self._dist_cache[origin]
        start = self.index(origin)
        dist = np.full(len(self.ids), -1, dtype=np.int64)
        dist[start] = 0
        queue: deque[int] = deque([start])
        while queue:
            i = queue.popleft()
            for j in self._nbr[i]:
                if dist[j] < 0:
                    dist[j] = dist[i] + 1
                    queue.append(j)
        dist.setflags(write=False)
        self._dist_cache[origin] = dist
        return dist

    def rho(self, x: str, origin: str) -> int:
        return int(self.distances_from(origin)[self.index(x)])

    # -- serialization -----------------------------------------------------

    def save(self, graph_path: str, measure_path: str | None = None) -> None:
        """Write edge list and, optionally, the measure file."""
        with open(graph_path, "w", encoding="utf-8") as fh:
            for i, j, w in zip(self.edge_u, self.edge_v, self.edge_w):
                fh.write(f"{self.ids[i]} {self.ids[j]} {w:.17g}\n")
        if measure_path is not None:
            with open(measure_path, "w", encoding="utf-8") as fh:
                for x, m in zip(self.ids, self.mu):
                    fh.write(f"{x} {m:.17g}\n")

    @classmethod
    def load(cls, graph_path: str, measure_path: str | None = None) -> "WeightedGraph":
        """Load a graph from an edge-list file and an optional measure file.

        Edge lines are `x y w`; measure lines are `x mu`; vertices missing
        from the measure file get mu = 1.  Blank lines and `#` comments are
        skipped in both files.
        """
        edges = []
        for lineno, parts in _data_lines(graph_path):
            if len(parts) != 3:
                raise LoadError(f"{graph_path}:{lineno}: expected 'x y w', got {' '.join(parts)!r}")
            try:
                w = float(parts[2])
            except ValueError:
                raise LoadError(f"{graph_path}:{lineno}: bad weight {parts[2]!r}") from None
            edges.append((parts[0], parts[1], w))
        measure = {}
        if measure_path is not None:
            for lineno, parts in _data_lines(measure_path):
                if len(parts) != 2:
                    raise LoadError(
                        f"{measure_path}:{lineno}: expected 'x mu', got {' '.join(parts)!r}"
                    )
                try:
                    measure[parts[0]] = float(parts[1])
                except ValueError:
                    raise LoadError(f"{measure_path}:{lineno}: bad measure {parts[1]!r}") from None
        try:
            return cls(edges, measure)
        except InputError as exc:
            raise LoadError(str(exc)) from None


def _data_lines(path: str):
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise LoadError(f"cannot open {path}: {exc}") from None
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line.split()


@dataclass(frozen=True)
class VertexFunction:
    """Real-valued function on vertices, zero outside its stored values.

    `domain` records intent only: "V" for globally defined data and "ball"
    for solutions supported in a ball.  Evaluation is the same either way.
    """

    values: Mapping[str, float]
    domain: str = "V"

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", dict(self.values))
        for x, v in self.values.items():
            if not np.isfinite(v):
                raise InputError(f"function value at vertex {x!r} is not finite: {v!r}")

    def __call__(self, x: str) -> float:
        return float(self.values.get(x, 0.0))

    @property
    def support(self) -> tuple[str, ...]:
        return tuple(sorted(x for x, v in self.values.items() if v != 0.0))

    def to_array(self, graph: WeightedGraph) -> np.ndarray:
        arr = np.zeros(len(graph))
        for x, v in self.values.items():
            arr[graph.index(x)] = v
        return arr

    @classmethod
    def from_array(
        cls,
        graph: WeightedGraph,
        arr: Sequence[float],
        domain: str = "V",
        keep: Sequence[str] | None = None,
    ) -> "VertexFunction":
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (len(graph),):
            raise InputError(f"array of length {arr.size} does not match graph of size {len(graph)}")
        ids = graph.ids if keep is None else tuple(keep)
        return cls({x: float(arr[graph.index(x)]) for x in ids}, domain=domain)

    @classmethod
    def constant(cls, graph: WeightedGraph, value: float) -> "VertexFunction":
        return cls({x: float(value) for x in graph.ids})

    @classmethod
    def dirac(cls, x: str, value: float = 1.0) -> "VertexFunction":
        return cls({x: float(value)})


@dataclass(frozen=True, eq=False)
class Ball:
    """Combinatorial ball: interior {rho < k} and boundary sphere {rho = k}.

    Vertex tuples are sorted; the index arrays refer to the graph the ball
    was built from.  Instances are immutable and shareable.
    """

    center: str
    radius: int
    interior: tuple[str, ...]
    boundary: tuple[str, ...]
    interior_idx: np.ndarray = field(repr=False)
    boundary_idx: np.ndarray = field(repr=False)

    @property
    def closure(self) -> tuple[str, ...]:
        return tuple(sorted(self.interior + self.boundary))


def ball(graph: WeightedGraph, origin: str, radius: int) -> Ball:
    """Ball of the given hop radius around `origin`.

    Every neighbor of an interior vertex lies in the closure; this closure
    property is what makes zero-extension of interior data consistent.
    """
    if radius < 1:
        raise InputError(f"ball radius must be >= 1, got {radius}")
    dist = graph.distances_from(origin)
    interior_idx = np.flatnonzero(dist < radius)
    boundary_idx = np.flatnonzero(dist == radius)
    for i in interior_idx:
        for j in graph._nbr[i]:
            if dist[j] > radius:  # pragma: no cover - BFS guarantees this
                raise InvariantError("ball closure property violated")
    interior_idx.setflags(write=False)
    boundary_idx.setflags(write=False)
    return Ball(
        center=origin,
        radius=int(radius),
        interior=tuple(graph.ids[i] for i in interior_idx),
        boundary=tuple(graph.ids[i] for i in boundary_idx),
        interior_idx=interior_idx,
        boundary_idx=boundary_idx,
    )


# -- pointwise operators ---------------------------------------------------


def laplacian(graph: WeightedGraph, u: VertexFunction, x: str) -> float:
    """(1/mu(x)) * sum over y ~ x of w_xy (u(y) - u(x))."""
    i = graph.index(x)
    ux = u(x)
    acc = 0.0
    for j, w in zip(graph._nbr[i], graph._nbrw[i]):
        acc += w * (u(graph.ids[j]) - ux)
    return acc / graph.mu[i]


def gradient_form(graph: WeightedGraph, u: VertexFunction, v: VertexFunction, x: str) -> float:
    """Gamma(u, v)(x) = (1/(2 mu(x))) * sum over y ~ x of w_xy (u(y)-u(x))(v(y)-v(x))."""
    i = graph.index(x)
    ux, vx = u(x), v(x)
    acc = 0.0
    for j, w in zip(graph._nbr[i], graph._nbrw[i]):
        y = graph.ids[j]
        acc += w * (u(y) - ux) * (v(y) - vx)
    return acc / (2.0 * graph.mu[i])


def grad_norm(graph: WeightedGraph, u: VertexFunction, x: str) -> float:
    """|grad u|(x) = sqrt(Gamma(u, u)(x))."""
    return float(np.sqrt(gradient_form(graph, u, u, x)))


def integrate(
    graph: WeightedGraph,
    f: VertexFunction,
    region: Iterable[str] | None = None,
) -> float:
    """Integral of f against mu over `region` (whole vertex set if None)."""
    if region is None:
        return float(np.dot(graph.mu, f.to_array(graph)))
    total = 0.0
    for x in region:
        total += graph.mu[graph.index(x)] * f(x)
    return float(total)


# -- Dirichlet operator assembly --------------------------------------------


def dirichlet_matrix(
    graph: WeightedGraph,
    region: Ball,
    h: VertexFunction | None = None,
) -> sp.csr_matrix:
    """Matrix of u -> mu * (-Laplacian u + h u) on the ball interior.

    Rows and columns follow the sorted interior vertex order; values on the
    boundary are treated as zero (Dirichlet condition).  Diagonal entries sum
    the weights of all incident edges, including those leading outside the
    interior, so the operator agrees with the full-graph Laplacian applied to
    zero-extended functions.  The result is symmetric positive definite
    whenever h > 0 or the interior is a proper subset of the vertex set.
    """
    interior = region.interior_idx
    local = {int(g): k for k, g in enumerate(interior)}
    n = len(interior)
    harr = h.to_array(graph) if h is not None else None

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for k, g in enumerate(interior):
        diag = float(np.sum(graph._nbrw[g]))
        if harr is not None:
            diag += graph.mu[g] * harr[g]
        rows.append(k)
        cols.append(k)
        vals.append(diag)
        for j, w in zip(graph._nbr[g], graph._nbrw[g]):
            kj = local.get(int(j))
            if kj is not None:
                rows.append(k)
                cols.append(kj)
                vals.append(-w)
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return mat
