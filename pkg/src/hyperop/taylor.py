"""Higher-order derivatives of matrix functions and the operator Taylor series.

The n-th derivative of f at Hermitian A, contracted with n copies of a
direction B, has the eigenbasis chain form

    [d^n f : B^n]_{i0, in} = n! * sum over chains i1..i_{n-1} of
        f[l_{i0}, l_{i1}, ..., l_{in}] * B_{i0 i1} B_{i1 i2} ... B_{i_{n-1} in},

where f[...] is the order-n divided difference (the exact value of the
simplex average of f^(n) over barycentric combinations of the chain's
eigenvalues).  Partial sums of

    f(A + xB) = sum_n  x^n / n! * d^n f : B^n

give the operator Taylor expansion; the same machinery expands a Gibbs
operator in powers of a conjugate external field, yielding the static
nonlinear response terms order by order.
"""

from __future__ import annotations

import itertools
import math
import string
from dataclasses import dataclass

import numpy as np

from .errors import DomainViolation
from .hyperops import DD_SPLIT_RTOL
from .operators import (
    Operator,
    ScalarFunction,
    Spectrum,
    apply_scalar_function,
    spectral_decompose,
)

__all__ = [
    "HigherDerivativeRequest",
    "higher_derivative_apply",
    "higher_derivative",
    "taylor_sum",
    "nonlinear_response_terms",
    "nonlinear_response_density",
    "formula_A_d2",
    "alpha_n_estimate",
    "divided_difference",
]

#: Cost guard: chain sums scale as d^(n+1); orders above this are refused
#: unless the caller raises the cap explicitly.
DEFAULT_ORDER_CAP = 6


def divided_difference(
    f: ScalarFunction, nodes, threshold: float = 0.0
) -> complex:
    """Divided difference f[x_0, ..., x_n] with confluent limits.

    Nodes closer than ``threshold`` are treated as coalescing: the recursive
    table entry for a run of equal nodes is f^(k)(mean)/k!.  Symmetric in the
    nodes, so they are sorted internally.
    """
    z = np.sort(np.asarray(nodes, dtype=float))
    m = z.size
    table = np.array(f.value(z), dtype=complex)
    for width in range(1, m):
        new = np.empty(m - width, dtype=complex)
        for i in range(m - width):
            j = i + width
            if z[j] - z[i] <= threshold:
                mid = 0.5 * (z[i] + z[j])
                new[i] = f.derivative(width)(mid) / math.factorial(width)
            else:
                new[i] = (table[i + 1] - table[i]) / (z[j] - z[i])
        table = new
    return complex(table[0])


def _dd_chain_tensor(
    f: ScalarFunction, eigenvalues: np.ndarray, order: int, threshold: float
) -> np.ndarray:
    """Tensor K[i0, ..., in] = f[l_{i0}, ..., l_{in}] over all index chains.

    Divided differences depend only on the multiset of nodes, so values are
    cached per sorted index tuple.
    """
    d = eigenvalues.size
    cache: dict[tuple, complex] = {}
    tensor = np.empty((d,) * (order + 1), dtype=complex)
    for chain in np.ndindex(*tensor.shape):
        key = tuple(sorted(chain))
        val = cache.get(key)
        if val is None:
            val = divided_difference(f, eigenvalues[list(key)], threshold)
            cache[key] = val
        tensor[chain] = val
    return tensor


def _chain_contract(kernel: np.ndarray, b_eig: np.ndarray, order: int) -> np.ndarray:
    """Contract K[i0..in] with B_{i0 i1} ... B_{i_{n-1} in} -> result[i0, in]."""
    letters = string.ascii_lowercase[: order + 1]
    operands = [kernel] + [b_eig] * order
    subs = [letters] + [letters[k : k + 2] for k in range(order)]
    out = letters[0] + letters[-1]
    return np.einsum(",".join(subs) + "->" + out, *operands)


@dataclass(frozen=True)
class HigherDerivativeRequest:
    """Inputs of an order-n derivative evaluation d^n f(A) : B^n."""

    f: ScalarFunction
    a: Operator
    b: Operator
    order: int
    order_cap: int = DEFAULT_ORDER_CAP

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("derivative order must be >= 1")
        if self.order > self.order_cap:
            raise ValueError(
                f"order {self.order} exceeds the cost cap {self.order_cap}; "
                "raise order_cap explicitly to proceed"
            )
        if self.a.dim != self.b.dim:
            raise ValueError("A and B must have matching dimension")


def higher_derivative_apply(req: HigherDerivativeRequest) -> Operator:
    """Evaluate d^n f(A) : B^n through the divided-difference chain sum."""
    spectrum = spectral_decompose(req.a)
    req.f.check_domain(spectrum.eigenvalues)
    threshold = DD_SPLIT_RTOL * max(1.0, spectrum.source_norm)
    kernel = _dd_chain_tensor(req.f, spectrum.eigenvalues, req.order, threshold)
    b_eig = spectrum.to_eigenbasis(req.b.mat)
    out = math.factorial(req.order) * _chain_contract(kernel, b_eig, req.order)
    return Operator(spectrum.from_eigenbasis(out))


def higher_derivative(
    f: ScalarFunction, a: Operator, b: Operator, order: int, order_cap: int = DEFAULT_ORDER_CAP
) -> Operator:
    """Convenience wrapper building the request inline."""
    return higher_derivative_apply(HigherDerivativeRequest(f, a, b, order, order_cap))


def taylor_sum(
    f: ScalarFunction,
    a: Operator,
    b: Operator,
    x: float,
    n_terms: int,
    order_cap: int | None = None,
) -> Operator:
    """Partial sum through order N of f(A + xB) = sum x^n/n! d^n f : B^n.

    The remainder against the exact f(A + xB) scales as O(x^(N+1)).
    """
    cap = n_terms if order_cap is None else order_cap
    spectrum = spectral_decompose(a)
    f.check_domain(spectrum.eigenvalues)
    # The series targets f(A + xB); reject inputs where that value is undefined.
    shifted = spectral_decompose(Operator(a.mat + x * b.mat))
    f.check_domain(shifted.eigenvalues)

    total = apply_scalar_function(spectrum, f).mat.copy()
    for n in range(1, n_terms + 1):
        term = higher_derivative(f, a, b, n, order_cap=cap)
        total += (x**n / math.factorial(n)) * term.mat
    return Operator(total)


def nonlinear_response_terms(
    h: Operator,
    q: Operator,
    beta: float,
    field: float,
    n_terms: int,
    order_cap: int | None = None,
) -> list[Operator]:
    """Order-by-order expansion of exp(-beta (H - field * Q)) in the field.

    Term n is (-field)^n / n! * d^n exp(-beta H) / dH^n : Q^n -- the n-th
    order static nonlinear response contribution to the Gibbs operator.
    Term 0 is exp(-beta H) itself (unnormalized).
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    cap = n_terms if order_cap is None else order_cap
    f = ScalarFunction.exp_scaled(-beta)
    spectrum = spectral_decompose(h)
    terms = [apply_scalar_function(spectrum, f)]
    for n in range(1, n_terms + 1):
        deriv = higher_derivative(f, h, q, n, order_cap=cap)
        terms.append(Operator(((-field) ** n / math.factorial(n)) * deriv.mat))
    return terms


def nonlinear_response_density(
    h: Operator,
    q: Operator,
    beta: float,
    field: float,
    n_terms: int,
    order_cap: int | None = None,
) -> Operator:
    """Partial sum of ``nonlinear_response_terms`` through order N."""
    terms = nonlinear_response_terms(h, q, beta, field, n_terms, order_cap)
    return Operator(sum(t.mat for t in terms))


def formula_A_d2(f: ScalarFunction, a: Operator, b: Operator, m_terms: int) -> Operator:
    """Second derivative d^2 f(A) : B.B as a power series in the slot maps.

    Summand m carries 2 (-1)^m / (m+2)! f^(m+2)(A) times the polynomial

        sum_{k=0..m} (D1 + D2)^k D1^(m-k),

    which is the telescoped form of [(D1 + D2)^(m+1) - D1^(m+1)] / D2 --
    the slot map D2 is singular, so the quotient is defined by this
    polynomial identity only, never by inversion.  D1 and D2 multiply a
    chain (i, j, k) by l_i - l_j and l_j - l_k respectively.
    """
    spectrum = spectral_decompose(a)
    f.check_domain(spectrum.eigenvalues)
    lam = spectrum.eigenvalues
    d = lam.size
    # Slot eigenvalues on chains (i, j, k).
    d1 = (lam[:, None] - lam[None, :])[:, :, None] * np.ones((1, 1, d))
    d12 = (lam[:, None] - lam[None, :])[:, None, :] * np.ones((1, d, 1))  # (D1+D2)(i,k)
    accum = np.zeros((d, d, d), dtype=complex)
    poly = np.ones((d, d, d))  # sum_{k<=m} (D1+D2)^k D1^(m-k), built iteratively
    d1_pow = np.ones((d, d, d))
    coeff = 1.0  # 2 (-1)^m / (m+2)! at m = 0
    for m in range(m_terms + 1):
        fm = f.derivative(m + 2)(lam)[:, None, None]
        accum += coeff * fm * poly
        d1_pow = d1_pow * d1
        poly = d12 * poly + d1_pow
        coeff = -coeff / (m + 3.0)
    b_eig = spectrum.to_eigenbasis(b.mat)
    out = np.einsum("ijk,ij,jk->ik", accum, b_eig, b_eig)
    return Operator(spectrum.from_eigenbasis(out))


def _simplex_monomial_integral(powers: tuple[int, ...]) -> float:
    """Integral of t_1^{k_1} ... t_n^{k_n} over 1 >= t_1 >= ... >= t_n >= 0."""
    n = len(powers)
    value = 1.0
    running = 0
    for j in range(n - 1, -1, -1):
        running += powers[j] + 1
        value /= running
    return value


def alpha_n_estimate(
    f: ScalarFunction,
    a: Operator,
    b: Operator,
    order: int,
    m_max: int,
) -> np.ndarray:
    """Root norms of the order-m terms of the slot-map expansion of d^n f : B^n.

    Term m is f^(n+m)(A)/m! times the simplex average of
    (t_1 D_1 + ... + t_n D_n)^m applied to the n-fold chain of B; the m-th
    roots of the term norms estimate the series' convergence (verdict < 1
    predicts uniform-norm convergence).
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    spectrum = spectral_decompose(a)
    f.check_domain(spectrum.eigenvalues)
    lam = spectrum.eigenvalues
    d = lam.size
    b_eig = spectrum.to_eigenbasis(b.mat)

    # Slot eigenvalues mu_j on a chain (i_0 ... i_n): l_{i_{j-1}} - l_{i_j},
    # shaped for broadcasting over the full chain tensor.
    gaps = lam[:, None] - lam[None, :]
    slot_axes = []
    for j in range(order):
        shape = [1] * (order + 1)
        shape[j] = d
        shape[j + 1] = d
        slot_axes.append(gaps.reshape(shape))

    f_left = [1] * (order + 1)
    f_left[0] = d

    roots = np.empty(m_max)
    for m in range(1, m_max + 1):
        coeff_tensor = np.zeros((d,) * (order + 1), dtype=complex)
        for comp in itertools.product(range(m + 1), repeat=order):
            if sum(comp) != m:
                continue
            weight = math.factorial(m)
            for k in comp:
                weight //= math.factorial(k)
            weight = weight * _simplex_monomial_integral(comp)
            prod = np.ones((1,) * (order + 1))
            for j, k in enumerate(comp):
                if k:
                    prod = prod * slot_axes[j] ** k
            coeff_tensor = coeff_tensor + weight * prod
        coeff_tensor = coeff_tensor * (
            f.derivative(order + m)(lam).reshape(f_left) / math.factorial(m)
        )
        out = _chain_contract(coeff_tensor, b_eig, order)
        norm = float(np.linalg.norm(spectrum.from_eigenbasis(out), 2))
        roots[m - 1] = norm ** (1.0 / m) if norm > 0.0 else 0.0
    return roots
