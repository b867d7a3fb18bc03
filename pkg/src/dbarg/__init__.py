"""Bargmann-type representations of deformed oscillator algebras, checked numerically."""

__version__ = "0.1.0"

from .algebra import (
    Custom,
    ExpPoly,
    FactorialTable,
    LogPowerDerived,
    PsiSpec,
    QExp,
    Radii,
    Representation,
    coherent_vector,
    convergence_radii,
    factorial_table,
    ladder_coefficients,
    psi_eval,
    psi_factorial,
    series_window,
)
from .errors import ConvergenceError, DbargError, DomainError
from .kernel import (
    KernelEval,
    coherent_overlap,
    kernel_feq_residual,
    kernel_G,
    kernel_G_from_mellin,
    kernel_G_q_closed,
    pointwise_bound_check,
)
from .quadrature import (
    QuadratureReport,
    adjointness_residual,
    integrate,
    moment_recursion_check,
    parseval_check,
    radial_moment,
    reproducing_check,
)
from .ring import RingCase, no_weight_certificate, vanishing_propagation
from .transport import ExpSumChoice, TransportedPsi, psi2_induced, transport_weight
from .weight import (
    MellinTransform,
    Positivity,
    Provenance,
    WeightFunction,
    expoly_mellin,
    inverse_mellin_admissible,
    inverse_mellin_numeric,
    inverse_mellin_weight,
    kernel_growth_witness,
    mellin_hat_expoly,
    psi_from_weight,
    q_mellin,
    q_weight,
    weight_feq_residual,
    weight_q_closed,
)
