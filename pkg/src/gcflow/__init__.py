"""Great-circle flow laboratory on the unit 3-sphere.

Builds great-circle fibrations from graph maps between the two sphere
factors of the plane Grassmannian, evaluates the induced unit tangent
fields, and verifies their contact, shape-operator, and conformality
identities numerically to stated tolerances.
"""

from .conventions import CONVENTIONS, conventions_hash
from .errors import (
    BoundaryError,
    ConvergenceError,
    CoverageError,
    DegenerateVariationError,
    DomainError,
    FrameError,
    GCFlowError,
    SpecFormatError,
)
from .fibration import (
    FIXTURES,
    VALID_FIXTURES,
    FibrationMap,
    MapClass,
    classify_map,
    differential,
    eval_map,
    fibre_samples,
    locate_fibre,
    max_dilatation_scan,
    parse_fibration_spec,
    sigma_conjugate,
    vector_field,
)
from .flowlab import (
    ChiralityWitness,
    KerAlphaVector,
    SMPoint,
    apply_acs,
    chirality_witness,
    commutation_defect,
    dalpha,
    dflow_ker_alpha,
    E_membership_defect,
    geodesic_flow,
    push_forward,
)
from .geometry import (
    ContactReport,
    DefectReport,
    DefectScan,
    PerpFrame,
    ShapeOperator,
    apply_j,
    complex_structure_defect,
    conformal_defect,
    contact_report,
    covariant_derivative,
    defect_report,
    defect_scan,
    key_formula_residual,
    shape_operator,
)
from .grassmann import (
    GrassPoint,
    OrientedPlane,
    circle_point,
    membership_defect,
    pair_from_plane,
    plane_from_pair,
)
from .quat import (
    TangentVector,
    conjugate_rotate,
    cross3,
    imag_unit_quaternion,
    qconj,
    qmul,
    qnormalize,
    unit_quaternion,
    wedge_split,
)
from .suites import (
    SuiteConfig,
    classify_fibration,
    export_samples,
    run_verification_suite,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
