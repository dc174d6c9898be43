"""fairaudit: group-fairness auditing for binary classification data.

Evaluates independence (statistical parity), sufficiency, and separation on
grouped confusion matrices, both through exact rate comparisons and through
conditional-independence checks on the induced joint distribution; verifies
the algebraic properties relating the measures on randomized instances; and
demonstrates gerrymandering attacks that preserve group verdicts while
violating individual fairness.
"""

__version__ = "0.1.0"

from .adversary import (
    LipschitzReport,
    LipschitzViolation,
    ReservoirAttackResult,
    ReservoirPlan,
    SwapAttackResult,
    lipschitz_violations,
    reservoir_attack,
    swap_attack,
)
from .confusion import (
    NEG,
    POS,
    ConfusionMatrix,
    Dataset,
    GroupStats,
    GroupedConfusion,
    Record,
    is_positive,
    stats,
    synthesize_dataset,
    tabulate,
    to_joint,
)
from .conservativeness import (
    FN_TO_TP,
    FP_TO_TN,
    BreakWitness,
    ConservativenessReport,
    GroupShift,
    Increment,
    JointIndependenceVerdict,
    ProportionalPreservationReport,
    apply_increment,
    check_conservativeness,
    check_joint_independence_iff,
    check_proportional_preservation,
    find_break,
    is_perfect,
)
from .distributions import (
    EPS_DEFAULT,
    CIResult,
    DeterministicMap,
    FiniteJoint,
    PropertyVerdict,
    apply_map,
    check_ci_property,
    ci_deviation,
    compose_ci,
    is_cond_independent,
    is_independent,
    marginal,
)
from .errors import AuditError, Infeasible, InputError, PreconditionError
from .measures import (
    INDEPENDENCE,
    MEASURES,
    SEPARATION,
    SUFFICIENCY,
    MeasureVerdict,
    evaluate_measure,
    independence,
    measure_via_distribution,
    separation,
    sufficiency,
)

__all__ = [
    "__version__",
    "AuditError",
    "BreakWitness",
    "CIResult",
    "ConfusionMatrix",
    "ConservativenessReport",
    "Dataset",
    "DeterministicMap",
    "EPS_DEFAULT",
    "FN_TO_TP",
    "FP_TO_TN",
    "FiniteJoint",
    "GroupShift",
    "GroupStats",
    "GroupedConfusion",
    "INDEPENDENCE",
    "Increment",
    "Infeasible",
    "InputError",
    "JointIndependenceVerdict",
    "LipschitzReport",
    "LipschitzViolation",
    "MEASURES",
    "MeasureVerdict",
    "NEG",
    "POS",
    "PreconditionError",
    "PropertyVerdict",
    "ProportionalPreservationReport",
    "Record",
    "ReservoirAttackResult",
    "ReservoirPlan",
    "SEPARATION",
    "SUFFICIENCY",
    "SwapAttackResult",
    "apply_increment",
    "apply_map",
    "check_ci_property",
    "check_conservativeness",
    "check_joint_independence_iff",
    "check_proportional_preservation",
    "ci_deviation",
    "compose_ci",
    "evaluate_measure",
    "find_break",
    "independence",
    "is_cond_independent",
    "is_independent",
    "is_perfect",
    "is_positive",
    "lipschitz_violations",
    "marginal",
    "measure_via_distribution",
    "reservoir_attack",
    "separation",
    "stats",
    "sufficiency",
    "swap_attack",
    "synthesize_dataset",
    "tabulate",
    "to_joint",
]
