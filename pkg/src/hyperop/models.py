"""Spin-chain model zoo supplying concrete Hamiltonians and observables.

Pauli convention: a single site with field h has Hamiltonian h * sigma_z.
Chains couple nearest neighbours with open boundaries:

    H = sum_i [ Jxy/2 (sx_i sx_{i+1} + sy_i sy_{i+1}) + Jz/2 sz_i sz_{i+1} ]
        + h * sum_i sz_i

so the two-site XX chain at Jxy = 1 has spectrum {-1, 0, 0, 1}.  Both the XX
and XXZ chains conserve total sigma_z.  Named observables include the local
and total sigma_z / sigma_x / sigma_y, and the spin current

    j_i = Jxy/2 (sx_i sy_{i+1} - sy_i sx_{i+1}).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import DimensionCap
from .operators import Operator

__all__ = ["ModelSpec", "build_model", "PAULI", "kron_chain", "site_operator"]

PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

DEFAULT_SITE_CAP = 8

MODEL_KINDS = ("xx_chain", "xxz_chain", "custom")


def kron_chain(mats) -> np.ndarray:
    return reduce(np.kron, mats)


def site_operator(sites: int, which: str, site: int) -> np.ndarray:
    """Single-site Pauli embedded into the full chain Hilbert space."""
    factors = [PAULI["i"]] * sites
    factors[site] = PAULI[which]
    return kron_chain(factors)


def _two_site(sites: int, which_a: str, i: int, which_b: str, j: int) -> np.ndarray:
    factors = [PAULI["i"]] * sites
    factors[i] = PAULI[which_a]
    factors[j] = PAULI[which_b]
    return kron_chain(factors)


@dataclass(frozen=True)
class ModelSpec:
    """Declarative description of a chain model.

    ``kind`` is one of ``xx_chain`` (Jz forced to 0), ``xxz_chain``, or
    ``custom`` (Hamiltonian supplied directly as an Operator).
    """

    kind: str
    sites: int = 1
    jxy: float = 1.0
    jz: float = 0.0
    field: float = 0.0
    hamiltonian: Operator | None = None
    site_cap: int = DEFAULT_SITE_CAP

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "custom":
            if self.hamiltonian is None:
                raise ValueError("custom models require an explicit Hamiltonian")
            return
        if self.sites < 1:
            raise ValueError("sites must be >= 1")
        if self.sites > self.site_cap:
            raise DimensionCap(
                f"{self.sites} sites exceeds the cap of {self.site_cap} "
                f"(dimension {2**self.sites})"
            )

    @property
    def dim(self) -> int:
        if self.kind == "custom":
            return self.hamiltonian.dim
        return 2**self.sites


def build_model(spec: ModelSpec) -> tuple[Operator, dict[str, Operator]]:
    """Construct the Hamiltonian and the named-observable table.

    Returns (H, observables); H is Hermitian by construction.  For chain
    models the observable table holds per-site and total sigma_z/x/y, the
    local spin currents ``current_i`` and their sum ``current_total``.
    """
    if spec.kind == "custom":
        return spec.hamiltonian.check(), {}

    n = spec.sites
    dim = 2**n
    jz = 0.0 if spec.kind == "xx_chain" else spec.jz

    h = np.zeros((dim, dim), dtype=complex)
    for i in range(n - 1):
        h += 0.5 * spec.jxy * (_two_site(n, "x", i, "x", i + 1) + _two_site(n, "y", i, "y", i + 1))
        if jz:
            h += 0.5 * jz * _two_site(n, "z", i, "z", i + 1)
    for i in range(n):
        h += spec.field * site_operator(n, "z", i)

    obs: dict[str, Operator] = {}
    for axis in ("x", "y", "z"):
        total = np.zeros((dim, dim), dtype=complex)
        for i in range(n):
            local = site_operator(n, axis, i)
            obs[f"s{axis}_{i}"] = Operator(local)
            total += local
        obs[f"s{axis}_total"] = Operator(total)

    current_total = np.zeros((dim, dim), dtype=complex)
    for i in range(n - 1):
        local = 0.5 * spec.jxy * (
            _two_site(n, "x", i, "y", i + 1) - _two_site(n, "y", i, "x", i + 1)
        )
        obs[f"current_{i}"] = Operator(local)
        current_total += local
    obs["current_total"] = Operator(current_total)

    return Operator(h).check(), obs
