"""Privacy of query profiles under query forgery.

Profiles are PMFs over query categories; privacy risk is the KL divergence
(in bits) of the profile an observer sees from the population's profile.
"""

from .errors import (
    CategoryMismatch,
    EmptyLog,
    InvalidGrid,
    InvalidProfile,
    QForgeError,
    RegimeExceeded,
    UnsupportedCategory,
    ZeroProbability,
)
from .optimizer import (
    SolveReport,
    TradeoffPoint,
    critical_redundancy,
    linear_grid,
    oracle_solve,
    solve,
    tradeoff_curve,
    verify_kkt,
)
from .profile import (
    CategoryCounts,
    Profile,
    check_rho,
    divergence_from_uniform,
    entropy,
    estimate_profile,
    kl_divergence,
    mix,
    privacy_risk,
)
from .simulate import (
    ConvergenceReport,
    QueryEvent,
    QueryStream,
    SimulationConfig,
    attacker_view,
    convergence_report,
    generate_stream,
)
from .types_lab import (
    TypeReport,
    TypeVector,
    class_size_check,
    divergence_exponent_gap,
    enumerate_types,
    log2_multinomial,
    mean_type,
    type_probability,
    type_report,
)

__version__ = "0.1.0"
