"""Solvers for elliptic variational equations on weighted, locally finite graphs."""

from .errors import (
    DegenerateInputError,
    GraphVarError,
    HypothesisError,
    InputError,
    InvariantError,
    LoadError,
    NumericalError,
)
from .exhaustion import ExhaustionReport, LevelRecord, doubling_check, run_exhaustion
from .graphs import (
    Ball,
    VertexFunction,
    WeightedGraph,
    ball,
    dirichlet_matrix,
    grad_norm,
    gradient_form,
    integrate,
    laplacian,
)
from .meanfield import (
    GammaLimitReport,
    MeanFieldState,
    gamma_bracket_check,
    gamma_limit_check,
    local_bound_check,
    mf_energy_negative,
    mf_energy_normalized,
    normalized_lower_bound,
    solve_meanfield_negative,
    solve_meanfield_normalized,
)
from .problems import (
    ProblemSpec,
    default_origin,
    generate_graph,
    load_problem,
    materialize_coefficient,
    parse_coefficient,
    parse_config,
)
from .reports import (
    fmt,
    read_solution,
    render_embedding_fuzz,
    render_exhaustion,
    render_geometry,
    render_poincare,
    render_yamabe,
    summary_line,
    write_solution,
)
from .schrodinger import (
    LocalLinearSystem,
    LocalSolution,
    UniformBoundReport,
    build_local_system,
    check_positivity,
    conjugate_gradient,
    jk_energy,
    solve_local_schrodinger,
    uniform_bound_check,
)
from .spaces import (
    EmbeddingCheck,
    EmbeddingReport,
    HypothesisConstants,
    check_embeddings,
    dirichlet_lq_constant,
    h_inner,
    h_norm,
    interpolation_check,
    local_dirichlet_energy,
    lq_norm,
    pointwise_distance_bound,
    poincare_constant,
    lp_embedding_constant,
    trudinger_moser_bound,
    w12_norm,
)
from .yamabe import (
    GeometryReport,
    YamabeReport,
    mp_geometry_check,
    nonlinearity,
    solve_yamabe,
    yamabe_energy,
)

__version__ = "0.1.0"
