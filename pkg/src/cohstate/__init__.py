"""Generalized coherent states over compact Lie algebras.

Numerical toolkit for coherent-state families built from a fiducial
vector and a unitary irrep: moment functionals, isotropy subalgebras and
the informative classification, side-by-side quantum/classical orbit
dynamics with the accumulated action, Haar-quadrature resolutions of
identity, Berry connection coefficients with quantization verdicts, and
discrete-time coherent-state path integrals.
"""

__version__ = "0.1.0"

from .config import DEFAULT_TOL, Tolerances
from .errors import (
    CohstateError,
    ChartExit,
    CanonicalizationRequired,
    ClosureFailure,
    ContainmentViolation,
    DegenerateOrbit,
    HermiticityFailure,
    NonsmoothPath,
    NormalizationError,
    ParseError,
    ProjectionResidual,
    QuadratureUnderresolved,
    QuadratureWarning,
    RankAmbiguous,
    ResourceLimit,
    ValidationError,
)
from .liealg import (
    GroupElement,
    HaarQuadrature,
    LieAlgebraRep,
    build_spin_rep,
    conjugate_generator,
    exactness_orders,
    exp_element,
    haar_quadrature,
    load_generator_file,
    validate_algebra,
)
from .family import (
    FiducialVector,
    IsotropyReport,
    IsotropySubalgebra,
    MomentVector,
    canonicalize,
    classify_informative,
    coherent_state,
    isotropy_moment,
    isotropy_state,
    load_fiducial_file,
    moment_map,
    preset_fiducial,
    su2_section_element,
)
from .dynamics import (
    HamiltonianSchedule,
    SectionChart,
    TrajectoryRecord,
    action_along_path,
    flow_coadjoint,
    propagate_quantum,
    section_su2,
    van_hove_check,
)
from .pathint import (
    BerryProfile,
    ConvergenceRecord,
    DiracVerdict,
    IdentityCheckResult,
    berry_connection,
    dirac_check,
    discrete_propagator,
    identity_resolution,
)
from .kernels import BACKEND as KERNEL_BACKEND

__all__ = [
    "__version__",
    "DEFAULT_TOL",
    "Tolerances",
    "CohstateError",
    "ChartExit",
    "CanonicalizationRequired",
    "ClosureFailure",
    "ContainmentViolation",
    "DegenerateOrbit",
    "HermiticityFailure",
    "NonsmoothPath",
    "NormalizationError",
    "ParseError",
    "ProjectionResidual",
    "QuadratureUnderresolved",
    "QuadratureWarning",
    "RankAmbiguous",
    "ResourceLimit",
    "ValidationError",
    "GroupElement",
    "HaarQuadrature",
    "LieAlgebraRep",
    "build_spin_rep",
    "conjugate_generator",
    "exactness_orders",
    "exp_element",
    "haar_quadrature",
    "load_generator_file",
    "validate_algebra",
    "FiducialVector",
    "IsotropyReport",
    "IsotropySubalgebra",
    "MomentVector",
    "canonicalize",
    "classify_informative",
    "coherent_state",
    "isotropy_moment",
    "isotropy_state",
    "load_fiducial_file",
    "moment_map",
    "preset_fiducial",
    "su2_section_element",
    "HamiltonianSchedule",
    "SectionChart",
    "TrajectoryRecord",
    "action_along_path",
    "flow_coadjoint",
    "propagate_quantum",
    "section_su2",
    "van_hove_check",
    "BerryProfile",
    "ConvergenceRecord",
    "DiracVerdict",
    "IdentityCheckResult",
    "berry_connection",
    "dirac_check",
    "discrete_propagator",
    "identity_resolution",
    "KERNEL_BACKEND",
]
