"""Central triangulations under parallel flips: predicates, flips, distances,
a center solver, instance tooling and a command line."""
from .distance import (
    BudgetExhausted,
    DistanceResult,
    FlipSequence,
    InvalidStep,
    NoProgress,
    distance_lower_bound,
    exact_distance,
    heuristic_distance,
    replay,
)
from .geometry import (
    DegenerateInput,
    DuplicatePoint,
    Orientation,
    Point,
    convex_hull,
    is_strictly_convex_quad,
    orientation,
    segments_conflict,
    segments_cross,
)
from .instances import (
    Instance,
    ParseError,
    ScoreTable,
    Solution,
    ValidationError,
    VerificationReport,
    generate_random_instance,
    generate_rirs_instance,
    read_instance,
    read_solution,
    score,
    verify_solution,
    write_instance,
    write_solution,
)
from .solver import (
    ExactModeUnavailable,
    Mode,
    ObjectiveValue,
    SolverConfig,
    evaluate,
    initial_candidates,
    local_search,
    solve,
)
from .triangulation import (
    FlippableEdge,
    NotATriangulation,
    NotFlippable,
    NotIndependent,
    ParallelFlipSet,
    PointSet,
    PointSetMismatch,
    Triangulation,
    UnknownEdge,
    apply_parallel_flip,
    build,
    crossing_number,
    flip,
    flippable_edges,
    greedy_random_triangulation,
    happy_edges,
    is_independent,
    maximal_independent_flippable_set,
)

__version__ = "0.1.0"
