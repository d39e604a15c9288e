"""Problem assembly: coefficient descriptors, config files, graph generators.

A coefficient descriptor is a "+"-separated sum of terms:

    const:<v>        constant v at every vertex
    file:<path>      values from a file of "x value" lines, zero elsewhere
    dirac:<x>:<c>    the single value c at vertex x
    rhopow:<a>       rho(x)^a with rho the hop distance from the base vertex
    exp-rho:<b>      exp(-b * rho(x))

Config files are line-oriented "key = value" with "#" comments.  Problems are
validated against the graph at load time so solvers can assume their
hypotheses; every violation is reported with the offending vertex.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisError, InputError, LoadError
from .graphs import VertexFunction, WeightedGraph, _data_lines
from .spaces import HypothesisConstants

__all__ = [
    "parse_coefficient",
    "materialize_coefficient",
    "parse_config",
    "ProblemSpec",
    "load_problem",
    "generate_graph",
    "default_origin",
]

EQUATIONS = ("schrodinger", "meanfield-negative", "meanfield-normalized", "yamabe")

CONFIG_KEYS = {
    "equation", "h", "f", "g", "q", "p", "a0", "mu0", "w0",
    "center", "k_min", "k_max", "witness_radius", "tol", "solver_tol",
}


def parse_coefficient(descriptor: str) -> list[tuple[str, ...]]:
    """Split a descriptor into validated (kind, *args) terms without a graph."""
    terms: list[tuple[str, ...]] = []
    for raw in descriptor.split("+"):
        part = raw.strip()
        if not part:
            raise InputError(f"empty term in coefficient descriptor {descriptor!r}")
        kind, _, rest = part.partition(":")
        if kind == "const":
            terms.append(("const", _float(rest, part)))
        elif kind == "file":
            if not rest:
                raise InputError(f"file term without a path in {descriptor!r}")
            terms.append(("file", rest))
        elif kind == "dirac":
            vertex, sep, value = rest.rpartition(":")
            if not sep or not vertex:
                raise InputError(f"dirac term needs dirac:<vertex>:<value>, got {part!r}")
            terms.append(("dirac", vertex, _float(value, part)))
        elif kind == "rhopow":
            alpha = _float(rest, part)
            if alpha < 0.0:
                raise InputError(
                    f"rhopow exponent must be >= 0 (rho vanishes at the base vertex), got {part!r}"
                )
            terms.append(("rhopow", alpha))
        elif kind == "exp-rho":
            terms.append(("exp-rho", _float(rest, part)))
        else:
            raise InputError(f"unknown coefficient term {part!r}")
    return terms


def _float(text: str, context: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise InputError(f"bad number {text!r} in {context!r}") from None


def materialize_coefficient(
    graph: WeightedGraph,
    descriptor: str,
    origin: str | None = None,
) -> VertexFunction:
    """Evaluate a descriptor on every vertex of the graph."""
    arr = np.zeros(len(graph))
    for term in parse_coefficient(descriptor):
        kind = term[0]
        if kind == "const":
            arr += term[1]
        elif kind == "file":
            for lineno, parts in _data_lines(term[1]):
                if len(parts) != 2:
                    raise LoadError(
                        f"{term[1]}:{lineno}: expected 'x value', got {' '.join(parts)!r}"
                    )
                if parts[0] not in graph:
                    raise LoadError(f"{term[1]}:{lineno}: unknown vertex {parts[0]!r}")
                arr[graph.index(parts[0])] += float(parts[1])
        elif kind == "dirac":
            arr[graph.index(term[1])] += term[2]
        elif kind in ("rhopow", "exp-rho"):
            if origin is None:
                raise InputError(f"term {kind!r} needs a base vertex")
            rho = graph.distances_from(origin).astype(float)
            if kind == "rhopow":
                arr += rho ** term[1]
            else:
                arr += np.exp(-term[1] * rho)
    return VertexFunction.from_array(graph, arr)


def parse_config(path: str) -> dict[str, str]:
    """Read `key = value` lines; unknown keys are rejected."""
    out: dict[str, str] = {}
    for lineno, parts in _data_lines(path):
        line = " ".join(parts)
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise LoadError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        if key not in CONFIG_KEYS:
            raise LoadError(f"{path}:{lineno}: unknown key {key!r}")
        if key in out:
            raise LoadError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


@dataclass(frozen=True)
class ProblemSpec:
    """A fully materialized problem: equation, coefficients, schedule, bounds."""

    equation: str
    center: str
    h: VertexFunction | None = None
    f: VertexFunction | None = None
    g: VertexFunction | None = None
    q: float | None = None
    p: float | None = None
    constants: HypothesisConstants = HypothesisConstants()
    k_min: int = 3
    k_max: int = 30
    witness_radius: int | None = None
    tol: float = 1e-8
    solver_tol: float | None = None
    descriptors: dict = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    @property
    def witness(self) -> int:
        if self.witness_radius is not None:
            return self.witness_radius
        return max(2, self.k_min - 2)

    @property
    def local_tol(self) -> float:
        if self.solver_tol is not None:
            return self.solver_tol
        return min(self.tol * 1e-2, 1e-10)

    def validate(self, graph: WeightedGraph) -> "ProblemSpec":
        """Check schedule, coefficients, and hypotheses against the graph."""
        if self.equation not in EQUATIONS:
            raise InputError(
                f"unknown equation {self.equation!r}; expected one of {', '.join(EQUATIONS)}"
            )
        graph.index(self.center)
        if not (1 <= self.witness < self.k_min <= self.k_max):
            raise InputError(
                f"need 1 <= witness_radius < k_min <= k_max, got "
                f"{self.witness}, {self.k_min}, {self.k_max}"
            )
        if not (self.tol > 0.0):
            raise InputError(f"tol must be positive, got {self.tol!r}")

        flags = list(self.flags)
        eq = self.equation
        if eq == "schrodinger":
            self._need("h", "f")
            self.constants.validate_against(graph, self.h)
            if self.constants.p == 1.0:
                flags.append("p=1: the dual exponent is read as infinity")
        elif eq == "meanfield-negative":
            self._need("f", "g")
            if self.h is not None:
                raise InputError("the negative mean field equation takes no h")
            farr = self.f.to_array(graph)
            garr = self.g.to_array(graph)
            bad = np.flatnonzero(~(farr < 0.0))
            if bad.size:
                x = graph.ids[int(bad[0])]
                raise HypothesisError(f"need f < 0 everywhere, but f({x!r}) = {farr[bad[0]]!r}")
            bad = np.flatnonzero(~(garr <= farr))
            if bad.size:
                x = graph.ids[int(bad[0])]
                raise HypothesisError(
                    f"need g <= f everywhere, but g({x!r}) = {garr[bad[0]]!r} > f({x!r})"
                )
        elif eq == "meanfield-normalized":
            self._need("h", "f", "g")
            if self.constants.mu0 is None:
                raise HypothesisError("the normalized mean field equation needs mu0")
            self.constants.validate_against(graph, self.h)
            garr = self.g.to_array(graph)
            bad = np.flatnonzero(garr < 0.0)
            if bad.size:
                x = graph.ids[int(bad[0])]
                raise HypothesisError(f"need g >= 0 everywhere, but g({x!r}) = {garr[bad[0]]!r}")
            if not np.any(garr > 0.0):
                raise HypothesisError("g vanishes identically")
            if self.q is not None and not (1.0 <= self.q <= 2.0):
                raise HypothesisError(f"the source exponent q must lie in [1, 2], got {self.q!r}")
        elif eq == "yamabe":
            self._need("h")
            self.constants.validate_against(graph, self.h)
            if self.q is None or self.q <= 2.0:
                raise InputError(f"the power exponent q must exceed 2, got {self.q!r}")
            if self.p is not None and not (self.q < self.p):
                raise HypothesisError(f"need q < p, got q={self.q!r}, p={self.p!r}")
        if tuple(flags) != self.flags:
            object.__setattr__(self, "flags", tuple(flags))
        return self

    def _need(self, *names: str) -> None:
        for name in names:
            if getattr(self, name) is None:
                raise InputError(f"the {self.equation} equation needs coefficient {name!r}")


def load_problem(
    graph_path: str,
    config_path: str,
    measure_path: str | None = None,
) -> tuple[WeightedGraph, ProblemSpec]:
    """Load graph, measure, and config files into a validated problem."""
    graph = WeightedGraph.load(graph_path, measure_path)
    raw = parse_config(config_path)
    if "equation" not in raw:
        raise InputError(f"{config_path}: missing 'equation'")
    if "center" not in raw:
        raise InputError(f"{config_path}: missing 'center'")
    center = raw["center"]
    graph.index(center)

    def coeff(key: str) -> VertexFunction | None:
        if key not in raw:
            return None
        return materialize_coefficient(graph, raw[key], origin=center)

    def num(key: str, default: float | None = None) -> float | None:
        if key not in raw:
            return default
        return _float(raw[key], f"{key} = {raw[key]}")

    def integer(key: str, default: int | None = None) -> int | None:
        if key not in raw:
            return default
        try:
            return int(raw[key])
        except ValueError:
            raise InputError(f"bad integer {raw[key]!r} for {key!r}") from None

    h = coeff("h")
    a0 = num("a0")
    if a0 is None:
        a0 = float(h.to_array(graph).min()) if h is not None else 1.0
    consts = HypothesisConstants(
        a0=a0, mu0=num("mu0"), w0=num("w0"), p=num("p"), q=num("q")
    )
    k_min = integer("k_min", 3)
    spec = ProblemSpec(
        equation=raw["equation"],
        center=center,
        h=h,
        f=coeff("f"),
        g=coeff("g"),
        q=num("q"),
        p=num("p"),
        constants=consts,
        k_min=k_min,
        k_max=integer("k_max", 30),
        witness_radius=integer("witness_radius"),
        tol=num("tol", 1e-8),
        solver_tol=num("solver_tol"),
        descriptors={k: raw[k] for k in ("h", "f", "g") if k in raw},
    )
    return graph, spec.validate(graph)


# -- generators ----------------------------------------------------------------


def _generator_edges(kind: str) -> tuple[list[tuple[str, str]], str]:
    name, _, rest = kind.partition(":")
    if name == "path":
        n = _positive_int(rest, kind)
        if n < 2:
            raise InputError(f"a path needs at least 2 vertices, got {kind!r}")
        width = len(str(n - 1))
        ids = [f"v{i:0{width}d}" for i in range(n)]
        edges = [(ids[i], ids[i + 1]) for i in range(n - 1)]
        return edges, ids[n // 2]
    if name == "grid":
        rows, _, cols = rest.partition("x")
        nr, nc = _positive_int(rows, kind), _positive_int(cols, kind)
        if nr * nc < 2:
            raise InputError(f"a grid needs at least 2 vertices, got {kind!r}")
        wr, wc = len(str(nr - 1)), len(str(nc - 1))
        def vid(i: int, j: int) -> str:
            return f"r{i:0{wr}d}c{j:0{wc}d}"
        edges = []
        for i in range(nr):
            for j in range(nc):
                if i + 1 < nr:
                    edges.append((vid(i, j), vid(i + 1, j)))
                if j + 1 < nc:
                    edges.append((vid(i, j), vid(i, j + 1)))
        return edges, vid(nr // 2, nc // 2)
    if name == "tree":
        branch, _, depth = rest.partition("x")
        b, d = _positive_int(branch, kind), _positive_int(depth, kind)
        total = (b ** (d + 1) - 1) // (b - 1) if b > 1 else d + 1
        width = len(str(total - 1))
        def nid(i: int) -> str:
            return f"n{i:0{width}d}"
        edges = []
        for i in range(total):
            for c in range(b * i + 1, b * i + b + 1):
                if c < total:
                    edges.append((nid(i), nid(c)))
        if not edges:
            raise InputError(f"a tree needs depth >= 1, got {kind!r}")
        return edges, nid(0)
    raise InputError(f"unknown graph kind {kind!r}; expected path:N, grid:NxM, or tree:BxD")


def _positive_int(text: str, context: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise InputError(f"bad size {text!r} in {context!r}") from None
    if value < 1:
        raise InputError(f"sizes must be >= 1 in {context!r}")
    return value


def default_origin(kind: str) -> str:
    """Canonical base vertex of a generated graph (middle vertex, root)."""
    return _generator_edges(kind)[1]


def generate_graph(
    kind: str,
    weight_rule: str = "const:1",
    measure_rule: str = "const:1",
    origin: str | None = None,
) -> WeightedGraph:
    """Build a named family member with rule-driven weights and measure.

    Weight rules: const:<v> or exp-rho:<b> (evaluated at the farther
    endpoint).  Measure rules take any coefficient descriptor; the result
    must be positive everywhere.  rho-based rules use the canonical origin
    unless one is given.
    """
    pairs, canonical = _generator_edges(kind)
    if origin is None:
        origin = canonical
    plain = WeightedGraph([(x, y, 1.0) for x, y in pairs])
    rho = plain.distances_from(origin)

    weights: list[tuple[str, str, float]] = []
    for term in parse_coefficient(weight_rule):
        if term[0] not in ("const", "exp-rho"):
            raise InputError(f"weight rules support const and exp-rho terms only, got {term[0]!r}")
    wfun = materialize_coefficient(plain, weight_rule, origin=origin).to_array(plain)
    for x, y in pairs:
        i, j = plain.index(x), plain.index(y)
        far = i if rho[i] >= rho[j] else j
        w = float(wfun[far])
        if w <= 0.0:
            raise InputError(f"weight rule {weight_rule!r} is not positive at {plain.ids[far]!r}")
        weights.append((x, y, w))

    marr = materialize_coefficient(plain, measure_rule, origin=origin).to_array(plain)
    bad = np.flatnonzero(~(marr > 0.0))
    if bad.size:
        raise InputError(
            f"measure rule {measure_rule!r} is not positive at {plain.ids[int(bad[0])]!r}"
        )
    measure = {x: float(marr[plain.index(x)]) for x in plain.ids}
    return WeightedGraph(weights, measure)
