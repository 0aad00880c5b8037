"""Dissipative density-matrix dynamics and its single-exponential logarithm.

The unnormalized state of the master equation

    d rho/dt = (1/(i hbar)) [H, rho] + L rho + rho L+        (L bounded)

factorizes exactly through interaction-picture and ordered-exponential
substitutions:  with V(t) = exp(t H / (i hbar)),  L_s = V(-s) L V(s)... more
precisely L_s = e^{i s H/hbar} L e^{-i s H/hbar},

    P(s) = exp_+(-int_0^s L+_u du),      Q(s) = exp_-(int_0^s L+_u du) = P(s)^{-1},
    G(s) = Q(s) (L_s + L+_s) P(s),
    rho(t) = exp_+( int_0^t G(s, t) ds ) rho(t, 0),

where G(s, t) = W G(s) W^{-1} and rho(t, 0) = W rho(0) W^{-1} with
W = V(t) P(t).  The entropy operator -log rho(t) is reached by integrating

    d Phi/dx = k(delta_Phi) G(x, t),     k(z) = z / (e^z - 1),
    Phi(0) = log rho(t, 0),

whose solution satisfies exp(Phi(t)) = rho(t); the kernel acts through the
d^2 x d^2 commutator superoperator of the (generally non-Hermitian) Phi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._integrate import ordered_product_path, rk4_with_halving, romberg_combine
from .errors import KernelSingularity, LogFailure
from .nonequilibrium import EvolutionResult
from .operators import Operator, spectral_decompose

__all__ = [
    "DissipativeModel",
    "Factorization",
    "ordered_exp",
    "master_evolve",
    "structured_solution",
    "entropy_operator",
    "functional_derivative_check",
]

#: |z| below which the kernel z/(e^z - 1) switches to its Taylor branch.
KERNEL_SERIES_RADIUS = 1e-4

#: Distance to a nonzero multiple of 2*pi*i at which the kernel is singular.
KERNEL_SINGULARITY_TOL = 1e-12


@dataclass(frozen=True)
class DissipativeModel:
    """Hermitian Hamiltonian plus a bounded (otherwise unrestricted)
    dissipator L acting as L rho + rho L+."""

    h: Operator
    lam: Operator
    hbar: float = 1.0

    def __post_init__(self):
        self.h.check()
        if self.lam.dim != self.h.dim:
            raise ValueError("H and L must have matching dimension")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")


@dataclass(frozen=True)
class Factorization:
    """Intermediate objects of the structured solution at time t.

    ``l_st`` samples G(s, t) on ``l_st_grid``; ``eta_t0`` is the logarithm
    seed -log rho(t, 0) feeding the entropy-operator integration."""

    f_t: Operator
    g_t: Operator
    lambda_t: Operator
    l_t: Operator
    l_st_grid: np.ndarray
    l_st: np.ndarray
    rho_t0: Operator
    eta_t0: Operator


def _as_generator(gen_of_s):
    def call(s: float) -> np.ndarray:
        val = gen_of_s(s)
        return val.mat if isinstance(val, Operator) else np.asarray(val, dtype=complex)

    return call


def ordered_exp(
    gen_of_s,
    t0: float,
    t1: float,
    direction: str = "+",
    steps: int = 256,
    refine: int = 1,
) -> Operator:
    """Ordered exponential of a time-dependent generator over [t0, t1].

    Direction "+" puts later times leftmost, "-" rightmost.  Midpoint
    product factors give an h^2 scheme; ``refine`` Richardson levels over
    doubled step counts remove successive even error orders.  Anti-Hermitian
    generator families yield unitary results (up to the scheme error).
    """
    gen = _as_generator(gen_of_s)
    runs = [
        ordered_product_path(gen, t0, t1, steps * 2**level, direction)[-1]
        for level in range(refine + 1)
    ]
    return Operator(romberg_combine(runs))


def master_evolve(
    model: DissipativeModel,
    rho0: Operator,
    grid,
    rtol: float = 1e-10,
    max_halvings: int = 8,
) -> EvolutionResult:
    """RK4 trajectory of the dissipative master equation.

    Hermiticity of the state is preserved when rho0 is Hermitian, since the
    generator maps Hermitian matrices to Hermitian matrices.  The trace is
    not conserved (the state is unnormalized)."""
    hm = model.h.mat
    lm = model.lam.mat
    lmd = lm.conj().T
    hbar = model.hbar

    def rhs(t: float, rho: np.ndarray) -> np.ndarray:
        return (hm @ rho - rho @ hm) / (1j * hbar) + lm @ rho + rho @ lmd

    grid = np.asarray(grid, dtype=float)
    states, meta = rk4_with_halving(rhs, rho0.mat, grid, rtol, max_halvings)
    return EvolutionResult(grid, states, meta)


def _principal_log(mat: np.ndarray, what: str) -> np.ndarray:
    eigs = np.linalg.eigvals(mat)
    if np.any(eigs.real <= 0.0):
        raise LogFailure(
            f"{what} has eigenvalues off the positive half-plane; "
            "its principal logarithm is undefined"
        )
    return scipy.linalg.logm(mat)


class _Pipeline:
    """Tables shared by the structured solution and the entropy integration.

    ``outer_steps`` outer intervals are resolved by 2x finer nodes so every
    midpoint needed by product integrals and RK4 stages lies on the grid.
    """

    def __init__(self, model: DissipativeModel, rho0: Operator, t: float, outer_steps: int):
        if t <= 0:
            raise ValueError("t must be positive")
        self.model = model
        self.t = float(t)
        self.outer_steps = outer_steps
        m = 2 * outer_steps
        self.fine = np.linspace(0.0, t, m + 1)
        self.h_fine = t / m

        spectrum = spectral_decompose(model.h)
        energies = spectrum.eigenvalues
        freq = (energies[:, None] - energies[None, :]) / model.hbar
        lam_eig = spectrum.to_eigenbasis(model.lam.mat)

        def lam_at(s: float) -> np.ndarray:
            return spectrum.from_eigenbasis(np.exp(1j * s * freq) * lam_eig)

        self.lam_at = lam_at
        self.lam_dag_at = lambda s: lam_at(s).conj().T

        self.p_path = ordered_product_path(
            lambda s: -self.lam_dag_at(s), 0.0, t, m, "+"
        )
        self.q_path = ordered_product_path(
            lambda s: self.lam_dag_at(s), 0.0, t, m, "-"
        )

        self.l_table = np.empty_like(self.p_path)
        for j, s in enumerate(self.fine):
            ls = lam_at(s)
            self.l_table[j] = self.q_path[j] @ (ls + ls.conj().T) @ self.p_path[j]

        phase = np.exp(energies * (t / (1j * model.hbar)))
        v = spectrum.map_eigenvalues(phase).mat
        v_inv = spectrum.map_eigenvalues(1.0 / phase).mat
        self.w = v @ self.p_path[m]
        self.w_inv = self.q_path[m] @ v_inv

        self.l_st_table = self.w @ self.l_table @ self.w_inv
        self.rho_t0 = self.w @ rho0.mat @ self.w_inv

    def assemble_state(self) -> np.ndarray:
        """exp_+(int_0^t G(s,t) ds) rho(t,0) by midpoint factors over the
        outer grid (midpoints are the odd fine nodes)."""
        u = np.eye(self.rho_t0.shape[0], dtype=complex)
        step = 2.0 * self.h_fine
        for k in range(self.outer_steps):
            u = scipy.linalg.expm(step * self.l_st_table[2 * k + 1]) @ u
        return u @ self.rho_t0

    def interaction_state(self, rho0: Operator) -> np.ndarray:
        """g(t) = exp_+(int_0^t G(s) ds) rho(0)."""
        u = np.eye(self.rho_t0.shape[0], dtype=complex)
        step = 2.0 * self.h_fine
        for k in range(self.outer_steps):
            u = scipy.linalg.expm(step * self.l_table[2 * k + 1]) @ u
        return u @ rho0.mat

    def integrate_entropy_generator(self) -> np.ndarray:
        """RK4 for d Phi/dx = k(delta_Phi) G(x, t) from Phi(0) = log rho(t,0)."""
        phi = _principal_log(self.rho_t0, "rho(t, 0)")
        h = 2.0 * self.h_fine
        for k in range(self.outer_steps):
            l0 = self.l_st_table[2 * k]
            lm = self.l_st_table[2 * k + 1]
            l1 = self.l_st_table[2 * k + 2]
            k1 = _kernel_apply(phi, l0)
            k2 = _kernel_apply(phi + 0.5 * h * k1, lm)
            k3 = _kernel_apply(phi + 0.5 * h * k2, lm)
            k4 = _kernel_apply(phi + h * k3, l1)
            phi = phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return phi


def _kernel_scalar(z: np.ndarray) -> np.ndarray:
    """z / (e^z - 1) with a Taylor branch near zero."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < KERNEL_SERIES_RADIUS
    safe = np.where(small, 1.0, z)
    direct = safe / np.expm1(safe)
    series = 1.0 - z / 2.0 + z**2 / 12.0 - z**4 / 720.0
    return np.where(small, series, direct)


def _kernel_apply(phi: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Evaluate k(delta_Phi) target through the d^2 x d^2 commutator map.

    Uses a dense eigendecomposition of the superoperator with a Schur-based
    fallback when the eigenvector matrix is ill-conditioned.

    Raises
    ------
    KernelSingularity
        If delta_Phi has an eigenvalue within tolerance of a nonzero
        multiple of 2*pi*i, where the kernel pole is non-removable.
    """
    d = phi.shape[0]
    eye = np.eye(d)
    delta = np.kron(eye, phi) - np.kron(phi.T, eye)
    scale = max(1.0, float(np.linalg.norm(phi, 2)))

    vals = np.linalg.eigvals(delta)
    winding = np.round(vals.imag / (2.0 * np.pi))
    nonzero = winding != 0
    if np.any(nonzero):
        dist = np.abs(vals[nonzero] - 2j * np.pi * winding[nonzero])
        if np.min(dist) < KERNEL_SINGULARITY_TOL * scale:
            raise KernelSingularity(
                "commutator spectrum touches a nonzero multiple of 2*pi*i"
            )

    vec_target = target.reshape(-1, order="F")
    try:
        w, vr = np.linalg.eig(delta)
        if np.linalg.cond(vr) > 1e10:
            raise np.linalg.LinAlgError("ill-conditioned eigenbasis")
        out = vr @ (_kernel_scalar(w) * np.linalg.solve(vr, vec_target))
    except np.linalg.LinAlgError:
        kernel_mat = scipy.linalg.funm(delta, _kernel_scalar)
        out = kernel_mat @ vec_target
    return out.reshape((d, d), order="F")


def structured_solution(
    model: DissipativeModel,
    rho0: Operator,
    t: float,
    steps: int = 400,
    refine: int = 1,
) -> tuple[Operator, Factorization]:
    """Assembled solution of the master equation via its exact factorization.

    Returns the state at time t together with the intermediate objects; the
    assembled state must agree with direct integration (``master_evolve``).
    ``refine`` Richardson levels extrapolate the assembled state across
    doubled step counts.
    """
    pipes = [_Pipeline(model, rho0, t, steps * 2**lvl) for lvl in range(refine + 1)]
    state = romberg_combine([p.assemble_state() for p in pipes])
    fine = pipes[-1]
    g_t = fine.interaction_state(rho0)
    f_t = fine.p_path[-1] @ g_t @ fine.q_path[-1]
    fact = Factorization(
        f_t=Operator(f_t),
        g_t=Operator(g_t),
        lambda_t=Operator(fine.lam_at(t)),
        l_t=Operator(fine.l_table[-1]),
        l_st_grid=fine.fine.copy(),
        l_st=fine.l_st_table.copy(),
        rho_t0=Operator(fine.rho_t0),
        eta_t0=Operator(-_principal_log(fine.rho_t0, "rho(t, 0)")),
    )
    return Operator(state), fact


def entropy_operator(
    model: DissipativeModel,
    rho0: Operator,
    t: float,
    steps: int = 400,
    refine: int = 1,
) -> Operator:
    """Entropy operator -log rho(t) of the dissipative state.

    Integrates the generator ODE d Phi/dx = k(delta_Phi) G(x, t) from the
    logarithm of the twisted initial condition; the result satisfies
    || exp(Phi(t)) - rho(t) || within the scheme tolerance, and equals the
    principal branch connected to that initial logarithm.
    """
    phis = [
        _Pipeline(model, rho0, t, steps * 2**lvl).integrate_entropy_generator()
        for lvl in range(refine + 1)
    ]
    return Operator(-romberg_combine(phis))


def functional_derivative_check(
    h_of_t,
    dh: Operator,
    t: float,
    t1: float,
    hbar: float = 1.0,
    width: float = 1e-3,
    fd_step: float = 1e-5,
    steps: int = 1024,
    refine: int = 1,
) -> float:
    """Residual between the closed-form variation of an ordered exponential
    and its finite-difference evaluation.

    The closed form inserts the variation at time t1:

        exp_+( int_{t1}^t H/(i hbar) ) (dH/(i hbar)) exp_+( int_0^{t1} H/(i hbar) );

    the finite difference perturbs the Hamiltonian family by a normalized
    box bump of width ``width`` at t1 and differentiates centrally in the
    bump amplitude.  The residual decays as O(width) + O(fd_step)."""
    if not (0.0 < t1 < t):
        raise ValueError("t1 must lie strictly inside (0, t)")
    half = width / 2.0
    if t1 - half <= 0.0 or t1 + half >= t:
        raise ValueError("bump must lie strictly inside (0, t)")

    hfun = h_of_t if callable(h_of_t) else (lambda s: h_of_t)

    def gen(s: float) -> np.ndarray:
        val = hfun(s)
        m = val.mat if isinstance(val, Operator) else np.asarray(val, dtype=complex)
        return m / (1j * hbar)

    dgen = dh.mat / (1j * hbar)

    closed = (
        ordered_exp(gen, t1, t, "+", steps, refine).mat
        @ dgen
        @ ordered_exp(gen, 0.0, t1, "+", steps, refine).mat
    )

    def propagator(eps: float) -> np.ndarray:
        bump = eps / width

        def gen_bumped(s: float) -> np.ndarray:
            return gen(s) + bump * dgen

        seg_steps = max(16, steps // 16)
        u1 = ordered_exp(gen, 0.0, t1 - half, "+", steps, refine).mat
        u2 = ordered_exp(gen_bumped, t1 - half, t1 + half, "+", seg_steps, refine).mat
        u3 = ordered_exp(gen, t1 + half, t, "+", steps, refine).mat
        return u3 @ u2 @ u1

    fd = (propagator(fd_step) - propagator(-fd_step)) / (2.0 * fd_step)
    return float(np.linalg.norm(fd - closed, 2))
