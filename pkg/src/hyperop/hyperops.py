"""Commutator superoperators and first derivatives of matrix functions.

A superoperator (linear map on operators) is materialized as a d^2 x d^2
matrix under the column-stacking convention

    vec(X Y Z) = (Z^T kron X) vec(Y),

fixed here once for the whole package.  The derivative of a matrix function
of a Hermitian operand acts in the eigenbasis through the first divided
difference

    K[i, j] = (f(l_i) - f(l_j)) / (l_i - l_j),   K[i, i] = f'(l_i),

and the commutator map ``delta(A): Q -> [A, Q]`` has eigenvalues l_i - l_j
there.  The module also provides the power-series form of the derivative in
powers of the commutator map, together with the diagnostics that predict when
that series converges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainViolation
from .operators import (
    Operator,
    ScalarFunction,
    Spectrum,
    operator_norm,
    spectral_decompose,
)

__all__ = [
    "HyperOperator",
    "DividedDifferenceKernel",
    "inner_derivation",
    "delta_hyperop",
    "quantum_derivative",
    "d_exp_neg",
    "d_inverse",
    "d_log",
    "series_derivative",
    "alpha_estimate",
    "inequality_check",
    "corollary_bound",
    "vec",
    "unvec",
    "convergence_verdict",
]

VECTORIZATION = "column-stacking"

#: Relative splitting threshold below which a divided difference switches to
#: its confluent (derivative) limit, avoiding cancellation at near-degenerate
#: eigenvalue pairs.
DD_SPLIT_RTOL = 1e-7


def vec(mat: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(mat).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape((d, d), order="F")


def _left_mult(mat: np.ndarray) -> np.ndarray:
    """Matrix of Q -> M Q under column stacking."""
    d = mat.shape[0]
    return np.kron(np.eye(d), mat)


def _right_mult(mat: np.ndarray) -> np.ndarray:
    """Matrix of Q -> Q M under column stacking."""
    d = mat.shape[0]
    return np.kron(mat.T, np.eye(d))


@dataclass(frozen=True)
class HyperOperator:
    """Linear map on operators, stored as its d^2 x d^2 matrix."""

    dim: int
    mat: np.ndarray

    def __post_init__(self):
        m = np.array(self.mat, dtype=complex)
        dd = self.dim * self.dim
        if m.shape != (dd, dd):
            raise ValueError(f"expected shape ({dd}, {dd}), got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    def apply(self, b: Operator) -> Operator:
        if b.dim != self.dim:
            raise ValueError("operand dimension mismatch")
        return Operator(unvec(self.mat @ vec(b.mat), self.dim))

    def __matmul__(self, other: "HyperOperator") -> "HyperOperator":
        return HyperOperator(self.dim, self.mat @ other.mat)

    def __add__(self, other: "HyperOperator") -> "HyperOperator":
        return HyperOperator(self.dim, self.mat + other.mat)

    def __sub__(self, other: "HyperOperator") -> "HyperOperator":
        return HyperOperator(self.dim, self.mat - other.mat)

    def __mul__(self, c: complex) -> "HyperOperator":
        return HyperOperator(self.dim, self.mat * c)

    __rmul__ = __mul__

    @classmethod
    def identity(cls, d: int) -> "HyperOperator":
        return cls(d, np.eye(d * d))

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "matrix": {
                "dim": self.dim * self.dim,
                "re": self.mat.real.tolist(),
                "im": self.mat.imag.tolist(),
            },
            "vectorization": VECTORIZATION,
        }

    @classmethod
    def from_json(cls, data: dict) -> "HyperOperator":
        if data.get("vectorization") != VECTORIZATION:
            raise ValueError(
                f"refusing to load superoperator with vectorization "
                f"{data.get('vectorization')!r}; expected {VECTORIZATION!r}"
            )
        inner = data["matrix"]
        d = int(data["dim"])
        m = np.asarray(inner["re"], dtype=float) + 1j * np.asarray(inner["im"], dtype=float)
        return cls(d, m)


def _from_kernel(spectrum: Spectrum, table: np.ndarray) -> HyperOperator:
    """Materialize the map B -> U (table * (U+ B U)) U+."""
    u = spectrum.eigenvectors
    to_eig = np.kron(u.T, u.conj().T)
    from_eig = np.kron(u.conj(), u)
    return HyperOperator(spectrum.dim, from_eig @ (vec(table)[:, None] * to_eig))


def _split_threshold(spectrum: Spectrum) -> float:
    return DD_SPLIT_RTOL * max(1.0, spectrum.source_norm)


@dataclass(frozen=True)
class DividedDifferenceKernel:
    """First divided-difference table of f over an eigenvalue grid.

    ``table[i, j] = f[l_i, l_j]`` with the confluent limit f'((l_i+l_j)/2)
    whenever |l_i - l_j| falls below the splitting threshold.  Applying the
    kernel entrywise in the eigenbasis evaluates the derivative map of f.
    """

    base: Spectrum
    table: np.ndarray

    @classmethod
    def build(
        cls, base: Spectrum, f: ScalarFunction, threshold: float | None = None
    ) -> "DividedDifferenceKernel":
        f.check_domain(base.eigenvalues)
        if threshold is None:
            threshold = _split_threshold(base)
        lam = base.eigenvalues
        li = lam[:, None]
        lj = lam[None, :]
        gap = li - lj
        fvals = f.value(lam)
        close = np.abs(gap) < threshold
        safe_gap = np.where(close, 1.0, gap)
        quotient = (fvals[:, None] - fvals[None, :]) / safe_gap
        confluent = f.derivative(1)(0.5 * (li + lj))
        table = np.where(close, confluent, quotient).astype(complex)
        return cls(base, table)

    def apply(self, b: Operator) -> Operator:
        bt = self.base.to_eigenbasis(b.mat)
        return Operator(self.base.from_eigenbasis(self.table * bt))

    def materialize(self) -> HyperOperator:
        return _from_kernel(self.base, self.table)


def inner_derivation(a: Operator) -> HyperOperator:
    """Commutator map Q -> [A, Q] = AQ - QA as a materialized superoperator.

    For Hermitian A its eigenvalues are the gaps l_i - l_j.  Defined for any
    square A (non-Hermitian generators appear in the dissipative module).
    """
    return HyperOperator(a.dim, _left_mult(a.mat) - _right_mult(a.mat))


def _exprel_table(gaps: np.ndarray, threshold: float) -> np.ndarray:
    """(e^x - 1)/x elementwise with a series branch near x = 0."""
    close = np.abs(gaps) < threshold
    safe = np.where(close, 1.0, gaps)
    table = np.expm1(safe) / safe
    series = 1.0 + gaps / 2.0 + gaps**2 / 6.0
    return np.where(close, series, table).astype(complex)


def delta_hyperop(a: Operator, tol: float | None = None) -> HyperOperator:
    """The averaged conjugation map (e^{delta(A)} - 1) / delta(A).

    Equals the integral of e^{t A} B e^{-t A} over t in [0, 1]; in the
    eigenbasis it multiplies entry (i, j) by (e^{l_i - l_j} - 1)/(l_i - l_j),
    with value 1 on the diagonal, so operators commuting with A are fixed.
    """
    spectrum = spectral_decompose(a, tol)
    gaps = spectrum.eigenvalues[:, None] - spectrum.eigenvalues[None, :]
    table = _exprel_table(gaps, _split_threshold(spectrum))
    return _from_kernel(spectrum, table)


def quantum_derivative(
    f: ScalarFunction, a: Operator, tol: float | None = None
) -> HyperOperator:
    """Derivative map of f at Hermitian A, satisfying df(A) = (df/dA) dA.

    Acts through the divided-difference kernel f[l_i, l_j]; composed with the
    commutator map it reproduces B -> [f(A), B] exactly.
    """
    spectrum = spectral_decompose(a, tol)
    return DividedDifferenceKernel.build(spectrum, f).materialize()


def _kernel_apply(f: ScalarFunction, a: Operator, da: Operator) -> Operator:
    spectrum = spectral_decompose(a)
    return DividedDifferenceKernel.build(spectrum, f).apply(da)


def d_exp_neg(a: Operator, da: Operator) -> Operator:
    """Differential of exp(-A) in direction dA (Hermitian A)."""
    return _kernel_apply(ScalarFunction.exp_neg(), a, da)


def d_inverse(a: Operator, da: Operator) -> Operator:
    """Differential of A^{-1} in direction dA; equals -A^{-1} dA A^{-1}.

    Requires positive A.
    """
    return _kernel_apply(ScalarFunction.inverse(), a, da)


def d_log(a: Operator, da: Operator) -> Operator:
    """Differential of log(A) in direction dA; equals the integral over
    t in [0, inf) of (t+A)^{-1} dA (t+A)^{-1}.  Requires positive A."""
    return _kernel_apply(ScalarFunction.log(), a, da)


def series_derivative(
    f: ScalarFunction, a: Operator, da: Operator, n_terms: int
) -> Operator:
    """Partial sum of the derivative expansion in powers of the commutator map:

        sum_{n=0..N} (-1)^n / (n+1)!  f^(n+1)(A) [delta(A)^n dA].

    Truncation order ``n_terms`` is inclusive.  Convergence is governed by the
    ``alpha_estimate`` / ``convergence_verdict`` diagnostics; a divergent
    instance simply returns a large partial sum (no error is raised).
    """
    spectrum = spectral_decompose(a)
    f.check_domain(spectrum.eigenvalues)
    amat = a.mat
    x = da.mat.copy()
    coeff = 1.0
    total = np.zeros_like(x)
    for n in range(n_terms + 1):
        fn = spectrum.map_eigenvalues(f.derivative(n + 1)(spectrum.eigenvalues)).mat
        total = total + coeff * (fn @ x)
        x = amat @ x - x @ amat
        coeff = -coeff / (n + 2.0)
    return Operator(total)


def _positive_spectrum(a: Operator, what: str) -> Spectrum:
    spectrum = spectral_decompose(a)
    if np.min(spectrum.eigenvalues) <= 0.0:
        raise DomainViolation(f"{what} requires a positive operator")
    return spectrum


def alpha_estimate(a: Operator, da: Operator, n_max: int) -> np.ndarray:
    """Root-norm sequence a_n = ||(A^{-1} delta(A))^n dA||^(1/n), n = 1..n_max.

    The supremum of the tail estimates the reciprocal convergence radius of
    the derivative series in the direction dA.  Only the finite sequence is
    computable; see ``convergence_verdict`` for the reporting heuristic.
    """
    spectrum = _positive_spectrum(a, "alpha_estimate")
    ainv = spectrum.map_eigenvalues(1.0 / spectrum.eigenvalues).mat
    amat = a.mat
    x = da.mat.copy()
    out = np.empty(n_max)
    for n in range(1, n_max + 1):
        x = ainv @ (amat @ x - x @ amat)
        norm = float(np.linalg.norm(x, 2))
        out[n - 1] = norm ** (1.0 / n) if norm > 0.0 else 0.0
    return out


def convergence_verdict(roots: np.ndarray, tail: int = 3) -> float:
    """Max of the last ``tail`` root-norm terms; < 1 predicts convergence."""
    seq = np.asarray(roots, dtype=float)
    if seq.size == 0:
        return 0.0
    return float(np.max(seq[-tail:]))


def inequality_check(a: Operator, b: Operator, n: int) -> tuple[float, float]:
    """Both sides of  ||e^{-A} delta(A)^n B|| <= n^n e^{-n} ||(A^{-1} delta(A))^n B||.

    Holds for every positive A and integer n >= 1 because e^{-A} A^n has norm
    at most n^n e^{-n} and left multiplication commutes with the commutator
    map.  Returns (lhs, rhs).
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    spectrum = _positive_spectrum(a, "inequality_check")
    amat = a.mat
    ainv = spectrum.map_eigenvalues(1.0 / spectrum.eigenvalues).mat
    expneg = spectrum.map_eigenvalues(np.exp(-spectrum.eigenvalues)).mat

    delta_n = b.mat.copy()
    scaled = b.mat.copy()
    for _ in range(n):
        delta_n = amat @ delta_n - delta_n @ amat
        scaled = ainv @ (amat @ scaled - scaled @ amat)
    lhs = float(np.linalg.norm(expneg @ delta_n, 2))
    rhs = math.exp(n * math.log(n) - n) * float(np.linalg.norm(scaled, 2))
    return lhs, rhs


def corollary_bound(a: Operator, b: Operator, k_max: int, psd_tol: float = 1e-12) -> float:
    """M = max over k = 1..k_max of ||A^{-1} B^{1/k} A|| for PSD B, positive A.

    The derivative series in the direction B converges for |x| < 1/(M+1).
    Spectral roots B^{1/k} require positive semidefinite B; sign-indefinite
    operands are rejected.
    """
    spectrum = _positive_spectrum(a, "corollary_bound")
    b_spec = spectral_decompose(b)
    scale = max(1.0, b_spec.source_norm)
    if np.min(b_spec.eigenvalues) < -psd_tol * scale:
        raise DomainViolation("corollary_bound requires positive semidefinite B")
    b_eigs = np.clip(b_spec.eigenvalues, 0.0, None)
    ainv = spectrum.map_eigenvalues(1.0 / spectrum.eigenvalues).mat
    amat = a.mat
    best = 0.0
    for k in range(1, k_max + 1):
        root = b_spec.map_eigenvalues(b_eigs ** (1.0 / k)).mat
        best = max(best, float(np.linalg.norm(ainv @ root @ amat, 2)))
    return best
