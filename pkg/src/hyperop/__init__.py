"""Superoperator calculus and response theory on dense finite operators.

Submodules
----------
operators
    Operators, spectra, scalar function families, finite-difference oracle.
hyperops
    Commutator superoperators, divided-difference derivative kernels,
    derivative series and convergence diagnostics.
taylor
    Higher-order derivatives, the operator Taylor expansion, and static
    nonlinear response terms.
nonequilibrium
    Unitary evolution and the adiabatically switched entropy-operator series.
response
    Dressed currents, canonical correlations, conductivity, ergodicity.
dissipative
    Master-equation factorization, ordered exponentials, entropy operator.
models
    Spin-chain model zoo.
verify
    Self-contained verification battery used by the CLI and the test suite.
"""

from .operators import (
    Operator,
    ScalarFunction,
    Spectrum,
    apply_scalar_function,
    gateaux_fd,
    operator_norm,
    spectral_decompose,
)
from .hyperops import (
    DividedDifferenceKernel,
    HyperOperator,
    alpha_estimate,
    convergence_verdict,
    corollary_bound,
    d_exp_neg,
    d_inverse,
    d_log,
    delta_hyperop,
    inequality_check,
    inner_derivation,
    quantum_derivative,
    series_derivative,
)
from .taylor import (
    HigherDerivativeRequest,
    alpha_n_estimate,
    formula_A_d2,
    higher_derivative,
    higher_derivative_apply,
    nonlinear_response_density,
    nonlinear_response_terms,
    taylor_sum,
)
from .nonequilibrium import (
    EntropyExpansion,
    EvolutionResult,
    ForceProtocol,
    eta1,
    eta_n,
    eta_prime_ode,
    eta_terms,
    von_neumann_evolve,
    verify_formula3,
    zubarev_density,
)
from .response import (
    ConductivityResult,
    ResponseSetup,
    canonical_correlation,
    conductivity,
    conductivity_large_omega,
    conductivity_series,
    conductivity_time_integral,
    current_from,
    dressed_current,
    ergodic_decomposition,
    linear_response_average,
    sigma0_divergence_scan,
)
from .dissipative import (
    DissipativeModel,
    Factorization,
    entropy_operator,
    functional_derivative_check,
    master_evolve,
    ordered_exp,
    structured_solution,
)
from .models import ModelSpec, build_model

__version__ = "0.1.0"
