"""Exact oracles and verifiers for the three task families."""

from typing import Tuple

import numpy as np

from .models import Grid, LUPair, LURejectReason, LUVerdict, Matrix, Tolerances


LU_ENTRY_LOW = -9
LU_ENTRY_HIGH = 9
TRANSPOSE_ENTRY_LOW = 0
TRANSPOSE_ENTRY_HIGH = 99
LIFE_LIVE_PROBABILITY = 0.5


def transpose(m: Matrix) -> Matrix:
    """Return the cols x rows transpose of ``m``."""
    return Matrix.from_array(m.to_array().T)


def life_neighbor_counts(cells: np.ndarray) -> np.ndarray:
    """Live 8-neighbor counts with every cell outside the board dead."""
    padded = np.pad(cells.astype(np.int16), 1, mode="constant", constant_values=0)
    rows, cols = cells.shape
    counts = np.zeros((rows, cols), dtype=np.int16)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            counts += padded[1 + dr:1 + dr + rows, 1 + dc:1 + dc + cols]
    return counts


def life_step(g: Grid) -> Grid:
    """One synchronous Game of Life generation under zero padding."""
    cells = g.to_array()
    neighbors = life_neighbor_counts(cells)
    alive = cells == 1
    survives = alive & ((neighbors == 2) | (neighbors == 3))
    born = ~alive & (neighbors == 3)
    return Grid.from_array((survives | born).astype(np.int8))


def _triangular_factor(n: int, rng: np.random.Generator, lower: bool) -> np.ndarray:
    """Integer triangular factor; diagonal drawn from the nonzero part of the range."""
    free = rng.integers(LU_ENTRY_LOW, LU_ENTRY_HIGH + 1, size=(n, n), dtype=np.int64)
    nonzero = np.array([v for v in range(LU_ENTRY_LOW, LU_ENTRY_HIGH + 1) if v != 0], dtype=np.int64)
    diagonal = rng.choice(nonzero, size=n)
    factor = np.tril(free, -1) if lower else np.triu(free, 1)
    factor[np.diag_indices(n)] = diagonal
    return factor


def lu_generate(n: int, rng: np.random.Generator) -> Tuple[Matrix, LUPair]:
    """Draw integer triangular factors and return ``(L @ U, (L, U))``.

    Nonzero diagonals make A nonsingular with a pivot-free factorization.
    """
    if n < 2:
        raise ValueError(f"LU instances need n >= 2, got {n}")
    l = _triangular_factor(n, rng, lower=True)
    u = _triangular_factor(n, rng, lower=False)
    a = l @ u
    return Matrix.from_array(a), LUPair(l=Matrix.from_array(l), u=Matrix.from_array(u))


def lu_residual(a: Matrix, pair: LUPair) -> np.ndarray:
    """Elementwise L·U − A in float64; callers check shapes first."""
    with np.errstate(over="ignore", invalid="ignore"):
        return pair.l.to_array(np.float64) @ pair.u.to_array(np.float64) - a.to_array(np.float64)


def strict_upper_part(m: np.ndarray) -> np.ndarray:
    return np.triu(m, 1)


def strict_lower_part(m: np.ndarray) -> np.ndarray:
    return np.tril(m, -1)


def lu_verify(a: Matrix, pair: LUPair, tol: Tolerances = Tolerances()) -> LUVerdict:
    """Functional LU check: shapes, triangularity, then reconstruction.

    The first violated condition is reported. Non-finite entries never pass
    a tolerance comparison.
    """
    n = a.rows
    if not a.is_square or pair.l.shape != (n, n) or pair.u.shape != (n, n):
        return LUVerdict.reject(LURejectReason.SHAPE)

    l = pair.l.to_array(np.float64)
    u = pair.u.to_array(np.float64)
    if not np.all(np.abs(strict_upper_part(l)) <= tol.triangular_abs):
        return LUVerdict.reject(LURejectReason.L_NOT_LOWER)
    if not np.all(np.abs(strict_lower_part(u)) <= tol.triangular_abs):
        return LUVerdict.reject(LURejectReason.U_NOT_UPPER)

    residual = np.abs(lu_residual(a, pair))
    max_residual = float(np.max(residual))
    if not np.all(residual <= tol.reconstruction_abs):
        return LUVerdict.reject(LURejectReason.RECONSTRUCTION, max_residual)
    return LUVerdict.accept(max_residual)
