"""Effectively Hamiltonian forms of autonomous ODEs.

Reservoir variables, effectively conserved quantities, skew-gradient and
Poisson structures, Casimir reduction, geometric integrators and a
mass-action reaction-network compiler.
"""

from hamform.core import (
    Orthant,
    PhaseState,
    ScalarField,
    SystemDef,
    canonical_matrix,
    divergence,
    hamiltonian_field,
    hamiltonian_system,
    poisson_bracket,
)
from hamform.diagnostics import HydroReport, bernoulli_check, commutator_anomaly, density_factor
from hamform.errors import (
    ConfigurationError,
    ConvergenceError,
    DegenerateGradientError,
    DimensionError,
    DomainError,
    HamformError,
    IntegrationError,
    NetworkSyntaxError,
    PreconditionError,
    UnsupportedReductionError,
)
from hamform.integrators import (
    IntegratorConfig,
    convergence_order,
    integrate,
    step_discrete_gradient,
    step_implicit_midpoint,
    step_rk4,
)
from hamform.reactions import (
    ReactionNetwork,
    linear_invariants,
    mass_action_odes,
    parse_network,
    serialize_network,
    stoichiometric_matrix,
)
from hamform.reservoir import (
    EffectiveInvariant,
    PfaffianForm,
    ReservoirSpec,
    accumulate,
    effective_K,
    k_field,
    pfaffian_contract,
)
from hamform.skew import (
    CasimirSpec,
    SkewField,
    casimir_lift,
    casimir_reduce,
    check_jacobi,
    check_skew,
    quispel_capel,
    verify_casimir,
)
from hamform.trajectory import Trajectory
from hamform.zoo import ZooEntry, build

__version__ = "0.1.0"
