"""Extractable work from non-interacting fermionic modes.

Exact Fock-space ergotropy and passivity for a handful of modes, Gaussian
ergotropy from covariance matrices, and occupation-basis activation analysis.
The scikit-learn wrappers live in :mod:`fermiwork.estimators`.
"""

from .covariance import (
    CanonicalForm,
    CovarianceMatrix,
    OrthogonalTransform,
    canonical_form,
    energy_cm,
    is_pure,
    pfaffian_sign,
    standard_form_two_mode,
    thermal_cm,
    validate,
)
from .exceptions import (
    AsymmetryError,
    CapacityError,
    ConvergenceError,
    FermiworkError,
    ParseError,
    PatternError,
    RepresentationError,
    UnphysicalError,
    ValidationError,
)
from .fock import (
    FockOperator,
    FockState,
    activation_unitary_3mode,
    cm_to_density,
    density_to_cm,
    energy,
    ergotropy,
    extract_orthogonal_action,
    fock_gaussian_unitary,
    is_passive,
    thermal_state,
    work_extracted,
)
from .gaussian import (
    MinimizationTrace,
    gaussian_ergotropy,
    gaussian_minimize,
    is_gaussian_passive,
    minimal_energy,
    random_orthogonal_search,
    structural_gaussian_passive,
)
from .modes import ModeSystem
from .passivity import (
    ActivationReport,
    DiagonalState,
    activation_number,
    activation_work,
    diagonal_ergotropy,
    nonpassivity_witness,
    protocol_check,
)

__version__ = "0.1.0"
