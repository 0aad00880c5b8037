"""Kubo linear response on finite Hamiltonians: dressed currents, canonical
correlations, conductivity in resolvent / series / time-integral forms, and
the decomposition of a current over constants of motion.

All thermal structure lives in the eigenbasis of H.  The dressing map acts
entrywise as

    K[n, m] = (e^{beta (E_n - E_m)} - 1) / (beta (E_n - E_m)),  K[n, n] = 1,

and combines with the Gibbs weights w_n into the stable correlation weights

    S[n, m] = w_n K[n, m] = (w_m - w_n) / (beta (E_n - E_m)),

which are the Kubo-Mori metric coefficients: the canonical correlation is
<J : J(t)> = sum S[n, m] |J_{nm}|^2 e^{i t (E_m - E_n)/hbar}.  The
conductivity is its half-line Fourier transform, regularized by the
switch-on rate epsilon > 0 (never taken to zero):

    sigma(omega) = beta * sum  S[n, m] |J_{nm}|^2 /
                               (epsilon + i (omega - (E_m - E_n)/hbar)).

A conserved component of J puts weight on zero frequency and produces the
1/epsilon pole whose residue is the Drude weight beta * sum a_j^2 <H_j^2>.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceWarning, FitFailure, NotConserved, NotOrthogonal
from .nonequilibrium import ForceProtocol, eta1
from .operators import Operator, spectral_decompose

__all__ = [
    "ResponseSetup",
    "ConductivityResult",
    "ErgodicDecomposition",
    "dressed_current",
    "canonical_correlation",
    "conductivity",
    "conductivity_series",
    "conductivity_time_integral",
    "conductivity_large_omega",
    "conductivity_grid",
    "ergodic_decomposition",
    "sigma0_divergence_scan",
    "linear_response_average",
    "current_from",
]

#: Energy gaps below this (relative to ||H||) define the degenerate blocks
#: used both by the stable kernel limits and the off-diagonal projection.
DEGENERACY_RTOL = 1e-9


def current_from(h: Operator, a_op: Operator, hbar: float = 1.0) -> Operator:
    """Current conjugate to A: (1/(i hbar)) [A, H]."""
    return Operator((a_op.mat @ h.mat - h.mat @ a_op.mat) / (1j * hbar))


class ResponseSetup:
    """Hamiltonian, current, inverse temperature, and regularization.

    The current is centered at construction (its thermal average is
    subtracted) so that Tr J exp(-beta H) = 0 holds for every instance.
    Spectral data, Gibbs weights, and the dressing kernel are computed once
    and shared read-only.
    """

    def __init__(
        self,
        h: Operator,
        j: Operator,
        beta: float,
        epsilon: float,
        hbar: float = 1.0,
    ):
        if beta <= 0:
            raise ValueError("beta must be positive")
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if hbar <= 0:
            raise ValueError("hbar must be positive")
        self.h = h.check()
        self.beta = float(beta)
        self.epsilon = float(epsilon)
        self.hbar = float(hbar)
        self.spectrum = spectral_decompose(h)

        e = self.spectrum.eigenvalues
        shifted = np.exp(-beta * (e - np.min(e)))
        self.weights = shifted / np.sum(shifted)

        j = j.check()
        j_eig = self.spectrum.to_eigenbasis(j.mat)
        mean = float(np.real(np.sum(self.weights * np.diag(j_eig))))
        self.j = Operator(j.mat - mean * np.eye(h.dim))
        self.j_eig = j_eig - mean * np.eye(h.dim)

        gaps = e[:, None] - e[None, :]
        self._gap_tol = DEGENERACY_RTOL * max(1.0, self.spectrum.source_norm)
        degenerate = np.abs(gaps) <= self._gap_tol
        safe = np.where(degenerate, 1.0, beta * gaps)
        self.dress_kernel = np.where(degenerate, 1.0, np.expm1(beta * gaps) / safe)
        # Stable product w_n K[n,m] = (w_m - w_n) / (beta (E_n - E_m)).
        wn = self.weights[:, None]
        wm = self.weights[None, :]
        self.corr_weights_matrix = np.where(degenerate, wn, (wm - wn) / safe)
        #: c[n,m] = S[n,m] J_{nm} J_{mn}; correlation = sum c * e^{i t freq}
        self.corr_amplitudes = self.corr_weights_matrix * self.j_eig * self.j_eig.T
        #: freq[n,m] = (E_m - E_n)/hbar, the phase velocity of the (n,m) term
        self.corr_freqs = -gaps / hbar

    @property
    def dim(self) -> int:
        return self.h.dim

    def thermal_average(self, x: Operator) -> complex:
        x_eig = self.spectrum.to_eigenbasis(x.mat)
        return complex(np.sum(self.weights * np.diag(x_eig)))

    def with_epsilon(self, epsilon: float) -> "ResponseSetup":
        return ResponseSetup(self.h, self.j, self.beta, epsilon, self.hbar)


@dataclass(frozen=True)
class ConductivityResult:
    omega: float
    sigma: complex
    method: str  # resolvent | series | time-integral | large-omega
    order: int | None = None


def dressed_current(setup: ResponseSetup) -> Operator:
    """Thermally dressed current: the beta-average of e^{l H} J e^{-l H},
    equal to J whenever [H, J] = 0."""
    dressed = setup.dress_kernel * setup.j_eig
    return Operator(setup.spectrum.from_eigenbasis(dressed))


def canonical_correlation(setup: ResponseSetup, t: float) -> complex:
    """Kubo-Mori correlation <J : J(t)>; real and non-negative at t = 0."""
    return complex(np.sum(setup.corr_amplitudes * np.exp(1j * t * setup.corr_freqs)))


def _resolvent_sigma(setup: ResponseSetup, omega: float, epsilon: float) -> complex:
    denom = epsilon + 1j * (omega - setup.corr_freqs)
    return complex(setup.beta * np.sum(setup.corr_amplitudes / denom))


def conductivity(setup: ResponseSetup, omega: float) -> ConductivityResult:
    """Frequency-dependent conductivity, resolvent form (exact half-line
    Fourier transform of the canonical correlation at the setup's epsilon)."""
    return ConductivityResult(omega, _resolvent_sigma(setup, omega, setup.epsilon), "resolvent")


def conductivity_time_integral(
    setup: ResponseSetup,
    omega: float,
    dt: float = 0.005,
    tail: float = 1e-10,
) -> ConductivityResult:
    """Direct Simpson quadrature of beta * int_0^T e^{-eps s - i w s} <J : J(s)> ds.

    T is chosen so the discarded tail e^{-eps T} <J:J>(0) is below ``tail``
    relative to the t = 0 correlation.  Cross-checks the resolvent form.
    """
    t_max = -np.log(tail) / setup.epsilon
    steps = int(np.ceil(t_max / dt))
    steps += steps % 2  # Simpson needs an even interval count
    s = np.linspace(0.0, t_max, steps + 1)

    freqs = setup.corr_freqs.reshape(-1)
    amps = setup.corr_amplitudes.reshape(-1)
    corr = np.exp(1j * np.outer(s, freqs)) @ amps
    integrand = np.exp(-(setup.epsilon + 1j * omega) * s) * corr

    w = np.ones(steps + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    sigma = setup.beta * (s[1] - s[0]) / 3.0 * np.sum(w * integrand)
    return ConductivityResult(omega, complex(sigma), "time-integral")


def conductivity_series(
    setup: ResponseSetup, omega: float, n_terms: int
) -> ConductivityResult:
    """High-frequency expansion in powers of the commutator map over (hbar w):

        sigma_N = (beta/(i w)) * sum_{n<=N} < (dressed J) [(delta(H)/(hbar w))^n J] >.

    Converges to the epsilon -> 0 resolvent when hbar * omega exceeds the
    spectral spread; emits DivergenceWarning when term norms stop decaying.
    """
    if omega == 0:
        raise ValueError("the series form requires omega != 0")
    ratios = setup.corr_freqs / omega
    amps = setup.corr_amplitudes
    active = np.abs(amps) > 1e-15 * max(float(np.max(np.abs(amps))), 1e-300)
    if np.any(active) and float(np.max(np.abs(ratios[active]))) >= 1.0:
        warnings.warn(
            "successive series terms do not decay: hbar*omega is inside "
            "the spectral spread",
            DivergenceWarning,
        )
    total = 0.0 + 0.0j
    power = np.ones_like(ratios)
    for _ in range(n_terms + 1):
        total += setup.beta / (1j * omega) * np.sum(amps * power)
        power = power * ratios
    return ConductivityResult(omega, complex(total), "series", order=n_terms)


def conductivity_large_omega(setup: ResponseSetup, omega: float) -> ConductivityResult:
    """Leading high-frequency asymptote beta <(dressed J) J> / (i omega)."""
    if omega == 0:
        raise ValueError("the asymptote requires omega != 0")
    sigma = setup.beta / (1j * omega) * np.sum(setup.corr_amplitudes)
    return ConductivityResult(omega, complex(sigma), "large-omega")


def conductivity_grid(
    setup: ResponseSetup,
    omegas,
    method: str = "resolvent",
    n_terms: int = 12,
    threads: int = 1,
) -> list[ConductivityResult]:
    """Evaluate a conductivity method over a frequency grid.

    Frequencies are independent; with ``threads > 1`` they are evaluated in
    an order-preserving thread pool (results are identical to serial)."""
    dispatch = {
        "resolvent": lambda w: conductivity(setup, w),
        "series": lambda w: conductivity_series(setup, w, n_terms),
        "time-integral": lambda w: conductivity_time_integral(setup, w),
        "large-omega": lambda w: conductivity_large_omega(setup, w),
    }
    if method not in dispatch:
        raise ValueError(f"unknown method {method!r}")
    fn = dispatch[method]
    omegas = list(omegas)
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, omegas))
    return [fn(w) for w in omegas]


@dataclass(frozen=True)
class ErgodicDecomposition:
    """Current split J = sum a_j H_j + J' with J' off-diagonal in energy.

    The conserved quantities are thermally centered before fitting (the
    identity is the trivial constant of motion, and the setup's current is
    already mean-free); ``second_moments`` holds the centered <H_j^2>, so
    the zero-frequency pole strength is beta * sum a_j^2 second_moments[j].
    ``removed_norm`` reports the residual commutant block projected out of
    J' beyond the fitted conserved components."""

    a: tuple
    j_prime: Operator
    second_moments: tuple
    removed_norm: float


def ergodic_decomposition(
    setup: ResponseSetup,
    constants: list[Operator],
    comm_rtol: float = 1e-10,
    orth_rtol: float = 1e-10,
) -> ErgodicDecomposition:
    """Overlap coefficients a_j = <J H_j> / <H_j^2> and the off-diagonal rest.

    Every H_j must commute with H (NotConserved otherwise) and the centered
    family must be thermally orthogonal (NotOrthogonal otherwise).  The
    remainder is additionally projected onto the strictly off-diagonal
    energy sector; whatever block-diagonal part that removes is reported in
    the result.
    """
    h = setup.h
    eye = np.eye(h.dim)
    scale_h = max(1.0, float(np.linalg.norm(h.mat, 2)))
    centered: list[Operator] = []
    for idx, hj in enumerate(constants):
        defect = float(np.linalg.norm(h.mat @ hj.mat - hj.mat @ h.mat, 2))
        scale = scale_h * max(1.0, float(np.linalg.norm(hj.mat, 2)))
        if defect > comm_rtol * scale:
            raise NotConserved(f"constant {idx} has commutator norm {defect:.3e}")
        mean = float(np.real(setup.thermal_average(hj)))
        centered.append(Operator(hj.mat - mean * eye))

    moments = [float(np.real(setup.thermal_average(hj @ hj))) for hj in centered]
    for i in range(len(centered)):
        for k in range(i + 1, len(centered)):
            cross = abs(setup.thermal_average(centered[i] @ centered[k]))
            if cross > orth_rtol * max(1.0, np.sqrt(moments[i] * moments[k])):
                raise NotOrthogonal(
                    f"constants {i} and {k} overlap thermally: <Hi Hk> = {cross:.3e}"
                )

    a = []
    residual = setup.j.mat.copy()
    for hj, mj in zip(centered, moments):
        aj = float(np.real(setup.thermal_average(setup.j @ hj))) / mj
        a.append(aj)
        residual = residual - aj * hj.mat

    res_eig = setup.spectrum.to_eigenbasis(residual)
    e = setup.spectrum.eigenvalues
    offdiag_mask = np.abs(e[:, None] - e[None, :]) > setup._gap_tol
    projected = res_eig * offdiag_mask
    removed = float(np.linalg.norm(res_eig - projected, 2))
    j_prime = Operator(setup.spectrum.from_eigenbasis(projected))
    return ErgodicDecomposition(tuple(a), j_prime, tuple(moments), removed)


def sigma0_divergence_scan(setup: ResponseSetup, eps_list) -> tuple[float, float]:
    """Fit sigma(0; eps) ~ C/eps + D over a descending list of eps values.

    Returns (C, D).  C is the Drude pole strength: beta * sum a_j^2 <H_j^2>
    when J carries conserved components, zero for strictly off-diagonal J.

    Raises
    ------
    FitFailure
        If the scan data is non-monotone (inconsistent with a pole fit).
    """
    eps = np.asarray(list(eps_list), dtype=float)
    if eps.size < 2 or np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise ValueError("eps_list must be at least two positive descending values")
    sig = np.array([_resolvent_sigma(setup, 0.0, e).real for e in eps])
    diffs = np.diff(sig)
    scale = max(np.max(np.abs(sig)), 1e-300)
    slack = 1e-9 * scale
    if not (np.all(diffs >= -slack) or np.all(diffs <= slack)):
        raise FitFailure("sigma(0; eps) is not monotone across the scan")
    # Fit eps*sigma = C + D*eps; linear in eps, so the pole strength is the
    # intercept and the finite part the slope.
    coeffs = np.polyfit(eps, eps * sig, 1)
    return float(coeffs[1]), float(coeffs[0])


def linear_response_average(
    setup: ResponseSetup,
    protocol: ForceProtocol,
    a_op: Operator,
    t: float,
    dt: float = 0.01,
) -> float:
    """First-order average current Tr[drho(t) J] under the switched force.

    drho(t) = -rho_eq (dressing map applied to eta_1(t)); with J the current
    conjugate to A and a cosine drive this equals Re(sigma(omega) F e^{i w t})
    up to the finite switch-on rate.
    """
    e1 = eta1(setup.h, a_op, protocol, setup.beta, t, setup.hbar, dt)
    e1_eig = setup.spectrum.to_eigenbasis(e1.mat)
    val = -np.sum(setup.corr_weights_matrix * e1_eig * setup.j_eig.T)
    return float(np.real(val))
