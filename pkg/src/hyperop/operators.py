"""Dense complex operators, spectral decomposition, and matrix functions.

Everything in the package operates on dense complex square matrices.  Matrix
functions of Hermitian operands are evaluated spectrally: ``f(A) = U f(L) U+``
with ``A = U diag(L) U+``.  The central-difference directional derivative
``gateaux_fd`` is the independent oracle against which all closed-form
derivative kernels are checked.

Units: hbar = k_B = 1 unless a caller passes an explicit ``hbar``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DecompositionFailure, DomainViolation, NotHermitian

__all__ = [
    "Operator",
    "Spectrum",
    "ScalarFunction",
    "spectral_decompose",
    "apply_scalar_function",
    "operator_norm",
    "gateaux_fd",
    "hermiticity_tol",
]

#: Relative Hermiticity tolerance: ||O - O+||_F <= HERMITICITY_RTOL * max(1, ||O||_F)
HERMITICITY_RTOL = 1e-10


def hermiticity_tol(mat: np.ndarray, rtol: float = HERMITICITY_RTOL) -> float:
    """Absolute Hermiticity tolerance for a given matrix."""
    return rtol * max(1.0, float(np.linalg.norm(mat)))


@dataclass(frozen=True)
class Operator:
    """Immutable dense complex square matrix.

    Parameters
    ----------
    mat : array_like, shape (d, d)
        Matrix entries; copied and cast to complex on construction.
    """

    mat: np.ndarray

    def __post_init__(self):
        m = np.array(self.mat, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be a square matrix, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @classmethod
    def identity(cls, d: int) -> "Operator":
        return cls(np.eye(d))

    @classmethod
    def zeros(cls, d: int) -> "Operator":
        return cls(np.zeros((d, d)))

    def dagger(self) -> "Operator":
        return Operator(self.mat.conj().T)

    def hermitian_part(self) -> "Operator":
        """(O + O+)/2 -- makes Hermiticity constructible, not just assertable."""
        return Operator(0.5 * (self.mat + self.mat.conj().T))

    def herm_defect(self) -> float:
        """Frobenius norm of O - O+."""
        return float(np.linalg.norm(self.mat - self.mat.conj().T))

    def is_hermitian(self, tol: float | None = None) -> bool:
        if tol is None:
            tol = hermiticity_tol(self.mat)
        return self.herm_defect() <= tol

    def check(self, tol: float | None = None) -> "Operator":
        """Assert Hermiticity; returns self so calls can be chained."""
        if not self.is_hermitian(tol):
            raise NotHermitian(
                f"Hermiticity defect {self.herm_defect():.3e} exceeds tolerance"
            )
        return self

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.mat + other.mat)

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(self.mat - other.mat)

    def __neg__(self) -> "Operator":
        return Operator(-self.mat)

    def __mul__(self, c: complex) -> "Operator":
        return Operator(self.mat * c)

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        return Operator(self.mat @ other.mat)

    def commutator(self, other: "Operator") -> "Operator":
        return Operator(self.mat @ other.mat - other.mat @ self.mat)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        """JSON form shared by all modules and the CLI:
        {"dim": d, "re": [[...]], "im": [[...]]} with row-major nesting."""
        return {
            "dim": self.dim,
            "re": self.mat.real.tolist(),
            "im": self.mat.imag.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Operator":
        d = int(data["dim"])
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float)
        if re.shape != (d, d) or im.shape != (d, d):
            raise ValueError("operator JSON arrays do not match the declared dim")
        return cls(re + 1j * im)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues and orthonormal eigenbasis of a Hermitian operator.

    ``eigenvalues`` are real ascending; ``eigenvectors`` has the eigenvectors
    as columns, so ``U diag(L) U+`` reconstructs the source.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source_norm: float

    def __post_init__(self):
        ev = np.array(self.eigenvalues, dtype=float)
        u = np.array(self.eigenvectors, dtype=complex)
        ev.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "eigenvectors", u)

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> Operator:
        u = self.eigenvectors
        return Operator((u * self.eigenvalues) @ u.conj().T)

    def to_eigenbasis(self, mat: np.ndarray) -> np.ndarray:
        """U+ M U."""
        u = self.eigenvectors
        return u.conj().T @ mat @ u

    def from_eigenbasis(self, mat: np.ndarray) -> np.ndarray:
        """U M U+."""
        u = self.eigenvectors
        return u @ mat @ u.conj().T

    def map_eigenvalues(self, values: np.ndarray) -> Operator:
        """U diag(values) U+ for per-eigenvalue data ``values``."""
        u = self.eigenvectors
        return Operator((u * np.asarray(values)) @ u.conj().T)


@dataclass(frozen=True)
class ScalarFunction:
    """Analytic scalar function together with its derivatives of all orders.

    ``derivative(0)`` coincides with ``value``.  ``domain_floor`` is the
    largest value that eigenvalues must strictly exceed (-inf when the
    function is entire).
    """

    kind: str
    domain_floor: float
    _value: Callable[[np.ndarray], np.ndarray]
    _derivative: Callable[[int], Callable[[np.ndarray], np.ndarray]] = field(repr=False)

    def value(self, x):
        return self._value(np.asarray(x))

    def derivative(self, n: int) -> Callable:
        """Callable evaluating the n-th derivative elementwise."""
        if n < 0:
            raise ValueError("derivative order must be >= 0")
        if n == 0:
            return self._value
        return self._derivative(n)

    def check_domain(self, eigenvalues: np.ndarray) -> None:
        lo = float(np.min(eigenvalues))
        if lo <= self.domain_floor:
            raise DomainViolation(
                f"{self.kind}: eigenvalue {lo:.6g} <= domain floor {self.domain_floor:.6g}"
            )

    # -- built-in function families -----------------------------------------

    @classmethod
    def exp_neg(cls) -> "ScalarFunction":
        """x -> exp(-x); n-th derivative (-1)^n exp(-x)."""
        return cls(
            kind="exp_neg",
            domain_floor=-np.inf,
            _value=lambda x: np.exp(-x),
            _derivative=lambda n: (lambda x, s=(-1.0) ** n: s * np.exp(-x)),
        )

    @classmethod
    def exp_scaled(cls, c: float) -> "ScalarFunction":
        """x -> exp(c x); n-th derivative c^n exp(c x)."""
        return cls(
            kind=f"exp_scaled({c})",
            domain_floor=-np.inf,
            _value=lambda x: np.exp(c * x),
            _derivative=lambda n: (lambda x, a=c**n: a * np.exp(c * x)),
        )

    @classmethod
    def inverse(cls) -> "ScalarFunction":
        """x -> 1/x on x > 0; n-th derivative (-1)^n n! x^(-n-1)."""
        return cls(
            kind="inverse",
            domain_floor=0.0,
            _value=lambda x: 1.0 / x,
            _derivative=lambda n: (
                lambda x, a=(-1.0) ** n * math.factorial(n): a * x ** (-(n + 1.0))
            ),
        )

    @classmethod
    def log(cls) -> "ScalarFunction":
        """x -> log(x) on x > 0; n-th derivative (-1)^(n-1) (n-1)! x^(-n)."""
        return cls(
            kind="log",
            domain_floor=0.0,
            _value=np.log,
            _derivative=lambda n: (
                lambda x, a=(-1.0) ** (n - 1) * math.factorial(n - 1): a * x ** (-float(n))
            ),
        )

    @classmethod
    def custom(
        cls,
        value: Callable,
        derivative: Callable[[int], Callable],
        domain_floor: float = -np.inf,
        kind: str = "custom",
    ) -> "ScalarFunction":
        return cls(kind=kind, domain_floor=domain_floor, _value=value, _derivative=derivative)


BUILTIN_FUNCTIONS = {
    "exp_neg": ScalarFunction.exp_neg,
    "inverse": ScalarFunction.inverse,
    "log": ScalarFunction.log,
}


def spectral_decompose(a: Operator, tol: float | None = None) -> Spectrum:
    """Eigendecomposition of a Hermitian operator.

    Raises
    ------
    NotHermitian
        If ``||a - a+||_F`` exceeds the (relative) tolerance.
    DecompositionFailure
        If the eigensolver does not converge.
    """
    a.check(tol)
    herm = 0.5 * (a.mat + a.mat.conj().T)
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(herm)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eigh rarely fails
        raise DecompositionFailure(str(exc)) from exc
    norm = float(np.max(np.abs(eigenvalues))) if a.dim else 0.0
    return Spectrum(eigenvalues, eigenvectors, norm)


def apply_scalar_function(spectrum: Spectrum, f: ScalarFunction) -> Operator:
    """f(A) = U diag(f(eigenvalues)) U+ for the decomposed operator."""
    f.check_domain(spectrum.eigenvalues)
    return spectrum.map_eigenvalues(f.value(spectrum.eigenvalues))


def operator_norm(o: Operator) -> float:
    """Spectral norm (largest singular value)."""
    if o.dim == 0:
        return 0.0
    return float(np.linalg.norm(o.mat, 2))


def gateaux_fd(f: ScalarFunction, a: Operator, b: Operator, h: float = 1e-6) -> Operator:
    """Central-difference directional derivative [f(A+hB) - f(A-hB)] / (2h).

    This finite-difference quotient is the independent oracle for every
    closed-form first-derivative kernel in the package; its error is O(h^2)
    for analytic f.  Both A and B must be Hermitian so that the perturbed
    operands stay spectrally decomposable.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    plus = spectral_decompose(Operator(a.mat + h * b.mat))
    minus = spectral_decompose(Operator(a.mat - h * b.mat))
    f.check_domain(plus.eigenvalues)
    f.check_domain(minus.eigenvalues)
    fp = apply_scalar_function(plus, f)
    fm = apply_scalar_function(minus, f)
    return Operator((fp.mat - fm.mat) / (2.0 * h))
