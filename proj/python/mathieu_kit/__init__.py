"""Mathieu equation toolkit.

Bessel functions of integer order, the Bessel closed form of the damped
Mathieu equation, Floquet exponents, reductions of related equations to
Mathieu form, the flux-lattice response and an independent ODE oracle.
"""

from ._mathieu_kit import (
    AdmissibilityError,
    ConvergenceError,
    DampedParams,
    DegenerateError,
    DomainError,
    InvalidInput,
    MappingError,
    MathieuError,
    RangeError,
    ResonanceError,
    SingularityError,
    SpanError,
    StiffnessError,
    adjudicate,
    bessel_index,
    bessel_j,
    bessel_y,
    characteristic_exponent,
    classify_stability,
    closed_form_eval,
    exponent_class_distance,
    floquet_eval,
    floquet_solution,
    induced_field_model,
    integrate_mathieu,
    modulation_analysis,
    monodromy_exponent,
    normalize_exponent,
    particular_k0,
    reduce,
    run_cli,
)

__version__ = "0.1.0"
