"""Unitary evolution and the renormalized entropy-operator expansion.

A time-dependent Hamiltonian H(t) = H - A F(t) drives the density matrix
through i*hbar d(rho)/dt = [H(t), rho].  Writing rho(t) = exp(-eta(t)), the
correction eta'(t) = eta(t) - Phi - beta*H obeys the exact inhomogeneous
equation

    d eta'/dt = (1/(i hbar)) [H(t), eta'(t)] - beta F(t) Adot,
    Adot = (1/(i hbar)) [A, H],          eta'(t_start) = 0,

whose order-by-order solution in powers of the force gives the terms

    eta_1(t) = -beta  int F(u) Adot(u - t) du,
    eta_n(t) = -(1/(i hbar)) int F(u) [A, eta_{n-1}(u)](u - t) du   (n >= 2),

with X(s) the Heisenberg evolution exp(i s H / hbar) X exp(-i s H / hbar)
and all integrals running from the switch-on cutoff t_start up to t.  The
force carries its adiabatic ramp exp(epsilon * u) (for u <= 0) in absolute
time, so the nested quadratures and the nonlinear ODE describe the same
physical drive and can be compared order by order.

The nonperturbative ODE trajectory (``eta_prime_ode``) is the oracle for the
series: || eta'_ODE - sum_{n<=N} eta_n || scales as O(F^(N+1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._integrate import cumtrapz_matrices, rk4_with_halving
from .errors import DomainViolation, QuadratureBudgetExceeded
from .operators import Operator, ScalarFunction, Spectrum, spectral_decompose

__all__ = [
    "ForceProtocol",
    "EvolutionResult",
    "EntropyExpansion",
    "von_neumann_evolve",
    "verify_formula3",
    "eta1",
    "eta_n",
    "eta_terms",
    "eta_prime_ode",
    "zubarev_density",
    "protocol_hamiltonian",
    "heisenberg",
]

#: The switch-on cutoff must satisfy exp(epsilon * t_start) <= this value, so
#: the discarded tail of the adiabatic integrals is below test tolerances.
CUTOFF_TAIL = 1e-8

#: Default cost cap for nested quadratures, in units of grid points * d^3.
DEFAULT_QUAD_BUDGET = 4e9

WAVEFORMS = ("step", "cos")


@dataclass(frozen=True)
class ForceProtocol:
    """Adiabatically switched external force F(t).

    The physical force is ``amplitude * ramp(t) * w(t)`` with
    ``ramp(t) = exp(epsilon * min(t, 0))`` and ``w`` either 1 (``step``,
    constant after switch-on) or ``cos(omega t)`` (``cos``).  ``t_start``
    approximates the infinitely remote switch-on time; the constructor
    requires exp(epsilon * t_start) <= 1e-8 so the truncated tail is
    negligible.
    """

    amplitude: float
    waveform: str
    epsilon: float
    t_start: float
    omega: float = 0.0

    def __post_init__(self):
        if self.waveform not in WAVEFORMS:
            raise ValueError(f"waveform must be one of {WAVEFORMS}")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if math.exp(self.epsilon * self.t_start) > CUTOFF_TAIL * (1 + 1e-9):
            raise ValueError(
                "t_start too late: exp(epsilon * t_start) = "
                f"{math.exp(self.epsilon * self.t_start):.3e} > {CUTOFF_TAIL}"
            )

    @classmethod
    def auto_start(
        cls, amplitude: float, waveform: str, epsilon: float, omega: float = 0.0
    ) -> "ForceProtocol":
        """Protocol with t_start chosen so the discarded tail is exactly CUTOFF_TAIL."""
        t_start = math.log(CUTOFF_TAIL) / epsilon
        return cls(amplitude, waveform, epsilon, t_start, omega)

    def force(self, t):
        """Physical force at absolute time t (scalar or array)."""
        t = np.asarray(t, dtype=float)
        ramp = np.exp(self.epsilon * np.minimum(t, 0.0))
        wave = np.cos(self.omega * t) if self.waveform == "cos" else 1.0
        return self.amplitude * ramp * wave


@dataclass(frozen=True)
class EvolutionResult:
    """Sampled operator trajectory with integrator metadata."""

    grid: np.ndarray
    states: np.ndarray  # (N, d, d)
    method_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        g = np.array(self.grid, dtype=float)
        s = np.array(self.states, dtype=complex)
        if s.shape[0] != g.size:
            raise ValueError("states and grid lengths differ")
        g.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "states", s)

    def state(self, k: int) -> Operator:
        return Operator(self.states[k])

    @property
    def final(self) -> Operator:
        return Operator(self.states[-1])


@dataclass(frozen=True)
class EntropyExpansion:
    """Normalization constant, inverse temperature, and the series terms
    eta_1 .. eta_N of the entropy-operator correction at a fixed time."""

    phi: float
    beta: float
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))


def protocol_hamiltonian(h: Operator, a_op: Operator, protocol: ForceProtocol):
    """Callable t -> H - A F(t)."""

    def h_of_t(t: float) -> Operator:
        return Operator(h.mat - a_op.mat * float(protocol.force(t)))

    return h_of_t


def heisenberg(spectrum: Spectrum, mat: np.ndarray, s: float, hbar: float = 1.0) -> np.ndarray:
    """exp(i s H / hbar) M exp(-i s H / hbar) evaluated spectrally."""
    freq = (spectrum.eigenvalues[:, None] - spectrum.eigenvalues[None, :]) / hbar
    phase = np.exp(1j * s * freq)
    return spectrum.from_eigenbasis(phase * spectrum.to_eigenbasis(mat))


def _as_h_of_t(h_of_t):
    if isinstance(h_of_t, Operator):
        const = h_of_t
        return lambda t: const
    return h_of_t


def von_neumann_evolve(
    h_of_t,
    rho0: Operator,
    grid,
    hbar: float = 1.0,
    rtol: float = 1e-10,
    max_halvings: int = 8,
    psd_tol: float = 1e-10,
) -> EvolutionResult:
    """Unitary trajectory of i*hbar d(rho)/dt = [H(t), rho].

    ``h_of_t`` is a constant Operator or a callable t -> Operator.  The
    initial state must be a density matrix: Hermitian, unit trace, positive
    semidefinite (within ``psd_tol``).  Classical RK4 with whole-trajectory
    step halving; trace and spectrum are conserved up to the reported defect.
    """
    hfun = _as_h_of_t(h_of_t)
    rho0.check()
    if abs(rho0.trace() - 1.0) > 1e-8:
        raise ValueError(f"initial state trace {rho0.trace():.6g} != 1")
    eigs = np.linalg.eigvalsh(rho0.hermitian_part().mat)
    if np.min(eigs) < -psd_tol:
        raise ValueError("initial state has a negative eigenvalue")

    def rhs(t: float, rho: np.ndarray) -> np.ndarray:
        hm = hfun(t).mat
        return (hm @ rho - rho @ hm) / (1j * hbar)

    states, meta = rk4_with_halving(rhs, rho0.mat, np.asarray(grid, float), rtol, max_halvings)
    return EvolutionResult(np.asarray(grid, float), states, meta)


def verify_formula3(f: ScalarFunction, evo: EvolutionResult, h_of_t, hbar: float = 1.0) -> float:
    """Defect of the invariance law for f along a unitary trajectory.

    Any function of the state inherits the equation of motion:
    i*hbar d f(rho)/dt = [H(t), f(rho)].  Returns the max over interior grid
    points of the norm of (i*hbar * central time difference of f(rho))
    minus [H(t), f(rho)]; expected O(step^2) plus the integrator defect.
    """
    hfun = _as_h_of_t(h_of_t)
    grid = evo.grid
    fvals = []
    for k in range(grid.size):
        spec = spectral_decompose(Operator(evo.states[k]))
        f.check_domain(spec.eigenvalues)
        fvals.append(spec.map_eigenvalues(f.value(spec.eigenvalues)).mat)
    worst = 0.0
    for k in range(1, grid.size - 1):
        dt = grid[k + 1] - grid[k - 1]
        lhs = 1j * hbar * (fvals[k + 1] - fvals[k - 1]) / dt
        hm = hfun(grid[k]).mat
        rhs = hm @ fvals[k] - fvals[k] @ hm
        worst = max(worst, float(np.linalg.norm(lhs - rhs, 2)))
    return worst


# -- entropy-operator series --------------------------------------------------


def _series_grid(protocol: ForceProtocol, t: float, dt: float) -> np.ndarray:
    if t < protocol.t_start:
        raise ValueError("evaluation time precedes the switch-on cutoff")
    span = t - protocol.t_start
    steps = max(2, int(math.ceil(span / dt)))
    return np.linspace(protocol.t_start, t, steps + 1)


def _eta_terms_on_grid(
    spectrum: Spectrum,
    a_eig: np.ndarray,
    protocol: ForceProtocol,
    beta: float,
    grid: np.ndarray,
    n_max: int,
    hbar: float,
) -> list[np.ndarray]:
    """Final-time values of eta_1..eta_N in the eigenbasis of H."""
    energies = spectrum.eigenvalues
    freq = (energies[:, None] - energies[None, :]) / hbar
    phases = np.exp(1j * grid[:, None, None] * freq[None, :, :])
    forces = protocol.force(grid)[:, None, None]
    h_step = float(grid[1] - grid[0])

    adot = (a_eig * energies[None, :] - energies[:, None] * a_eig) / (1j * hbar)

    terms = []
    integrand = forces * phases * adot[None, :, :]
    kcum = cumtrapz_matrices(integrand, h_step)
    eta = -beta * np.conj(phases) * kcum
    terms.append(eta[-1])
    for _ in range(2, n_max + 1):
        comm = np.matmul(a_eig, eta) - np.matmul(eta, a_eig)
        integrand = forces * phases * comm
        kcum = cumtrapz_matrices(integrand, h_step)
        eta = -(1.0 / (1j * hbar)) * np.conj(phases) * kcum
        terms.append(eta[-1])
    return terms


def eta_terms(
    h: Operator,
    a_op: Operator,
    protocol: ForceProtocol,
    beta: float,
    t: float,
    n_max: int,
    hbar: float = 1.0,
    dt: float = 0.01,
    budget: float = DEFAULT_QUAD_BUDGET,
) -> list[Operator]:
    """Entropy-operator terms eta_1(t) .. eta_N(t) by nested time-ordered
    quadrature (cumulative trapezoid + one Richardson refinement).

    Raises
    ------
    QuadratureBudgetExceeded
        If grid length * d^3 * N would exceed ``budget``.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    spectrum = spectral_decompose(h)
    a_op.check()
    grid = _series_grid(protocol, t, dt)
    d = h.dim
    cost = 2.0 * grid.size * d**3 * n_max
    if cost > budget:
        raise QuadratureBudgetExceeded(
            f"nested quadrature cost {cost:.2e} exceeds budget {budget:.2e}"
        )
    a_eig = spectrum.to_eigenbasis(a_op.mat)

    fine_grid = np.linspace(grid[0], grid[-1], 2 * (grid.size - 1) + 1)
    coarse = _eta_terms_on_grid(spectrum, a_eig, protocol, beta, grid, n_max, hbar)
    fine = _eta_terms_on_grid(spectrum, a_eig, protocol, beta, fine_grid, n_max, hbar)
    out = []
    for c_term, f_term in zip(coarse, fine):
        extrap = (4.0 * f_term - c_term) / 3.0
        out.append(Operator(spectrum.from_eigenbasis(extrap)))
    return out


def eta1(
    h: Operator,
    a_op: Operator,
    protocol: ForceProtocol,
    beta: float,
    t: float,
    hbar: float = 1.0,
    dt: float = 0.01,
) -> Operator:
    """First-order entropy-operator term; Hermitian, vanishing when [A, H] = 0."""
    return eta_terms(h, a_op, protocol, beta, t, 1, hbar, dt)[0]


def eta_n(
    h: Operator,
    a_op: Operator,
    protocol: ForceProtocol,
    beta: float,
    t: float,
    n: int,
    hbar: float = 1.0,
    dt: float = 0.01,
    budget: float = DEFAULT_QUAD_BUDGET,
) -> Operator:
    """n-th order entropy-operator term (n >= 2); scales as amplitude^n."""
    if n < 2:
        raise ValueError("use eta1 for the first-order term")
    return eta_terms(h, a_op, protocol, beta, t, n, hbar, dt, budget)[n - 1]


def eta_prime_ode(
    h: Operator,
    a_op: Operator,
    protocol: ForceProtocol,
    beta: float,
    grid,
    hbar: float = 1.0,
    rtol: float = 1e-10,
    max_halvings: int = 6,
) -> EvolutionResult:
    """Nonperturbative trajectory of the entropy-operator correction.

    Integrates d eta'/dt = (1/(i hbar))[H - A F(t), eta'] - beta F(t) Adot
    from eta'(t_start) = 0 over ``grid`` (which must start at t_start).
    This is the oracle the order-by-order terms are checked against.
    """
    grid = np.asarray(grid, dtype=float)
    if abs(grid[0] - protocol.t_start) > 1e-12 * max(1.0, abs(protocol.t_start)):
        raise ValueError("grid must start at the protocol's t_start")
    h.check()
    a_op.check()
    hm = h.mat
    am = a_op.mat
    adot = (am @ hm - hm @ am) / (1j * hbar)

    def rhs(t: float, eta: np.ndarray) -> np.ndarray:
        ht = hm - am * float(protocol.force(t))
        return (ht @ eta - eta @ ht) / (1j * hbar) - beta * float(protocol.force(t)) * adot

    zero = np.zeros((h.dim, h.dim), dtype=complex)
    states, meta = rk4_with_halving(rhs, zero, grid, rtol, max_halvings)
    return EvolutionResult(grid, states, meta)


def zubarev_density(expansion: EntropyExpansion, h: Operator, tol: float | None = None) -> Operator:
    """Statistical operator exp(-Phi - beta*H - sum of terms), renormalized.

    The exponent must be Hermitian (each term is, by construction); the
    result is normalized to unit trace exactly, absorbing the O(F^2) trace
    drift of the truncated series into the normalization constant.
    """
    exponent = -expansion.beta * h.mat
    for term in expansion.terms:
        exponent = exponent - term.mat
    exp_op = Operator(exponent)
    if not exp_op.is_hermitian(tol):
        raise DomainViolation("entropy expansion terms must be Hermitian")
    spec = spectral_decompose(exp_op)
    shifted = spec.eigenvalues - np.max(spec.eigenvalues)
    weights = np.exp(shifted)
    rho = spec.map_eigenvalues(weights / np.sum(weights))
    return rho


def log_partition(h: Operator, beta: float) -> float:
    """log Tr exp(-beta H) -- the normalization constant at switch-on."""
    spec = spectral_decompose(h)
    x = -beta * spec.eigenvalues
    m = float(np.max(x))
    return m + float(np.log(np.sum(np.exp(x - m))))
