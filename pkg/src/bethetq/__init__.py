"""High-precision ground-state Bethe roots of the periodic XXX spin-1/2
chain, for both the homogeneous and inhomogeneous Baxter functional
relations, with root-family classification and finite-size diagnostics."""

from .analysis import (
    LimitProbes,
    RootFamilyReport,
    StringStats,
    arc_and_limit_probes,
    check_ni_bounds,
    classify,
    compare_real_to_homogeneous,
    family_tags,
    string_ratio,
    string_ratio_direct,
    string_structure,
)
from .errors import (
    AmbiguousClassification,
    AnomalyFound,
    BetheTQError,
    BoundViolation,
    CountMismatch,
    DegenerateRoots,
    EscalationNeeded,
    IllConditionedInterpolation,
    MissingRange,
    MultiplicityCollision,
    NearRootDivision,
    NonConvergence,
    PrecisionExhausted,
    RootCertificationFailure,
    SingularClosure,
    StructuralAnomaly,
    SymmetryViolation,
)
from .homogeneous import (
    HomogeneousSolution,
    bethe_residual,
    ground_state_quantum_numbers,
    max_bethe_residual,
    solve_ground_state,
)
from .pipeline import SweepConfig, SweepResult, run_single, run_sweep
from .precision import PrecisionConfig
from .qsolver import (
    QGridValues,
    TQLinearSystem,
    build_system,
    cross_check_rel_diff,
    q_eval_inhomo,
    qtilde_eval,
    solve_grid,
    tq_residual,
)
from .rootfind import (
    InhomogeneousSolution,
    even_coefficients,
    find_roots,
    inhomo_bethe_residual,
    root_equation_residual,
)
from .storage import RunRecord, load_record, save_record, write_summary_csv
from .transfer import TGrid, TransferEvaluator, q_eval, t_eval, t_grid

__version__ = "0.1.0"
