"""Exact Riemann solver and shock-admissibility laboratory for the
two-equation chemical flood system with a non-monotone fractional flow."""

from .errors import (
    ChemfloodError,
    CompatibilityError,
    ConnectionNotFoundError,
    DegenerateStateError,
    DomainError,
    NumericalError,
    RankineHugoniotError,
    StructureError,
    UnsupportedCaseError,
)
from .model import (
    FluxValues,
    Model,
    REFERENCE_CONFIG,
    State,
    ValidationReport,
    eval_adsorption,
    eval_flux,
    reference_model,
    validate_assumptions,
)
from .characteristics import (
    CharData,
    SaddlePoint,
    char_data,
    coincidence_point,
    find_saddle,
    lambda_c,
    lambda_s,
)
from .rarefaction import (
    KeyPoints,
    RarefactionCurve,
    Separatrices,
    critical_curve,
    critical_rarefaction_value,
    integrate_curve,
    key_points,
    separatrices,
)
from .shock import (
    Shock,
    classify_shock,
    connect_undercompressive,
    critical_shock_value,
    is_admissible,
    make_shock,
    rh_speed,
    tw_field,
)
from .riemann import (
    RegionLabel,
    RiemannSolution,
    RiemannSolver,
    Wave,
    classify_pair,
    evaluate_profile,
    profile_l1_distance,
    region_layout,
    s_wave_group,
    solve,
)
from .lagrange import (
    LagrangeShock,
    LagrangeState,
    check_zeta_entropy,
    lagrange_flux,
    map_shock,
    potential,
    to_lagrange,
)
from .viscous import GridSolution, ViscousParams, compare, convergence_ladder, simulate

__version__ = "0.1.0"
