"""Internal fixed-step integrators shared by the trajectory modules.

All schemes are deterministic for fixed inputs: classical RK4 for matrix
ODEs, cumulative trapezoid sums for interaction-picture quadratures, and
midpoint-factor product integrals for ordered exponentials.  Error control
is by whole-trajectory step halving (reproducible, no adaptivity)."""

from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.linalg

from .errors import StepFailure


def rk4_trajectory(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    grid: np.ndarray,
    substeps: int = 1,
) -> np.ndarray:
    """Integrate dY/dt = rhs(t, Y) over ``grid``; returns samples (N, *Y.shape).

    Each grid interval is covered by ``substeps`` equal RK4 steps.
    """
    grid = np.asarray(grid, dtype=float)
    out = np.empty((grid.size,) + y0.shape, dtype=complex)
    y = np.array(y0, dtype=complex)
    out[0] = y
    for k in range(grid.size - 1):
        t = grid[k]
        h = (grid[k + 1] - grid[k]) / substeps
        for _ in range(substeps):
            k1 = rhs(t, y)
            k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
            k4 = rhs(t + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
        out[k + 1] = y
    return out


def rk4_with_halving(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    grid: np.ndarray,
    rtol: float = 1e-8,
    max_halvings: int = 6,
) -> tuple[np.ndarray, dict]:
    """RK4 trajectory with whole-run step-halving error control.

    The defect is the max norm difference between runs at ``substeps`` and
    ``2 * substeps``; halving repeats until the defect (relative to the
    solution scale) drops below ``rtol``.

    Raises
    ------
    StepFailure
        If the tolerance is still unmet at the maximum refinement.
    """
    substeps = 1
    coarse = rk4_trajectory(rhs, y0, grid, substeps)
    for _ in range(max_halvings):
        fine = rk4_trajectory(rhs, y0, grid, 2 * substeps)
        scale = max(1.0, float(np.max(np.abs(fine))))
        defect = float(np.max(np.abs(fine - coarse))) / scale
        if defect <= rtol:
            meta = {
                "dt": float((grid[1] - grid[0]) / (2 * substeps)) if grid.size > 1 else 0.0,
                "order": 4,
                "defect": defect,
            }
            return fine, meta
        coarse = fine
        substeps *= 2
    raise StepFailure(
        f"integrator defect {defect:.3e} above rtol {rtol:.1e} at max refinement"
    )


def cumtrapz_matrices(values: np.ndarray, h: float) -> np.ndarray:
    """Cumulative trapezoid integral of matrix samples along axis 0."""
    out = np.zeros_like(values)
    increments = 0.5 * h * (values[:-1] + values[1:])
    np.cumsum(increments, axis=0, out=out[1:])
    return out


def ordered_product_path(
    gen_of_s: Callable[[float], np.ndarray],
    t0: float,
    t1: float,
    steps: int,
    direction: str = "+",
) -> np.ndarray:
    """Midpoint-factor product integral of a generator family.

    Returns the path U(s_k) at the ``steps + 1`` grid nodes of [t0, t1],
    with U(t0) = 1.  Direction "+" composes later factors on the left
    (U(s + h) = exp(h G(s + h/2)) U(s)); direction "-" on the right.
    """
    if direction not in ("+", "-"):
        raise ValueError("direction must be '+' or '-'")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    h = (t1 - t0) / steps
    g0 = np.asarray(gen_of_s(t0 + 0.5 * h), dtype=complex)
    d = g0.shape[0]
    path = np.empty((steps + 1, d, d), dtype=complex)
    u = np.eye(d, dtype=complex)
    path[0] = u
    for k in range(steps):
        mid = t0 + (k + 0.5) * h
        factor = scipy.linalg.expm(h * np.asarray(gen_of_s(mid), dtype=complex))
        u = factor @ u if direction == "+" else u @ factor
        path[k + 1] = u
    return path


def richardson_pair(fine: np.ndarray, coarse: np.ndarray) -> np.ndarray:
    """One Richardson step for a quantity with a leading h^2 error term."""
    return (4.0 * fine - coarse) / 3.0


def romberg_combine(values: list) -> np.ndarray:
    """Romberg extrapolation of runs at doubled resolutions (coarse first),
    for quantities whose error expands in even powers of the step."""
    table = [np.asarray(v) for v in values]
    level = 1
    while len(table) > 1:
        factor = 4.0**level
        table = [
            (factor * table[i + 1] - table[i]) / (factor - 1.0)
            for i in range(len(table) - 1)
        ]
        level += 1
    return table[0]
