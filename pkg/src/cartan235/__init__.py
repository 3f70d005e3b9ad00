"""Exact invariants of rank-2 distributions on 5-dimensional space.

Two independent pipelines compute the degree-4 invariant and the Ricci
density of a (2,3,5) distribution: a closed-form expression in the
structural functions of an adapted frame, and a jet-space recomputation
from the reduced curve of Lagrangian planes attached to the characteristic
flow.  A verifier for the classical structure-equation coframes ties the
quartic to the invariant with the exact factor -35.
"""

__version__ = "1.0.0"

from .errors import (
    Cartan235Error,
    ConventionError,
    DegenerateFrameError,
    ExpressionSyntaxError,
    GrowthVectorError,
    ModelError,
    OrderError,
    PoleError,
    SpanError,
    TangencyError,
    UnknownVariableError,
    ZeroDenominatorError,
)
from .ratfunc import (
    Polynomial,
    RationalFunction,
    differentiate,
    evaluate,
    parse_expression,
)
from .jets import MJet, LaurentJet, jet_of_rational, laurent_split
from .fields import (
    Coframe,
    Frame,
    OneForm,
    StructuralFunctions,
    TwoForm,
    VectorField,
    adapted_frame,
    dual_coframe,
    exterior_derivative,
    eval_form,
    growth_vector,
    lie_bracket,
    structural_functions,
    wedge,
)
from .fiber import (
    EulerField,
    FiberPolynomial,
    HField,
    alpha,
    b_scalars,
    h_apply,
    h_field,
    pi_theta_omega,
    poisson_bracket,
)
from .density import (
    MovingFrameCoeffs,
    QuarticForm,
    coeffs_a,
    frame_change_check,
    fundamental_density,
    invariants_from_structural_jets,
    ricci_density,
    tangential_form,
)
