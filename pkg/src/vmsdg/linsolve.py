"""Dense direct solve with constraint elimination and diagnostics.

The assembled systems here are small (a few hundred unknowns), dense after
static condensation of facet couplings, and occasionally singular on purpose
(a consistency experiment with no penalty and no boundary model has a null
space).  We therefore use a plain LU factorization with partial pivoting and
surface three things the experiment runner wants: a hard error naming the
first unstable pivot, the verified residual of the returned solution, and a
1-norm condition estimate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.linalg.lapack import dgecon


class SingularSystemError(Exception):
    """Raised when elimination hits a pivot that is zero to round-off."""


@dataclass
class LinearSystem:
    """A x = b plus strong constraints x[dof] = value applied at solve time."""

    matrix: np.ndarray
    rhs: np.ndarray
    constraints: list[tuple[int, float]] = field(default_factory=list)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float)
        n = len(self.rhs)
        if self.matrix.shape != (n, n):
            raise ValueError(
                f"LinearSystem: matrix {self.matrix.shape} does not match rhs ({n},)"
            )

    def constrain(self, dof: int, value: float) -> None:
        self.constraints.append((int(dof), float(value)))


@dataclass(frozen=True)
class Solution:
    values: np.ndarray
    residual_norm: float        # max-norm of A x - b after constraint elimination
    condition_estimate: float   # 1-norm condition estimate of the solved matrix


#: Pivot magnitudes at or below PIVOT_RTOL * max|A| are treated as zero.
PIVOT_RTOL = 1e-14


def solve(system: LinearSystem) -> Solution:
    """Solve with LU + partial pivoting after eliminating constraints."""
    a = system.matrix.copy()
    b = system.rhs.copy()
    for dof, value in system.constraints:
        b -= a[:, dof] * value
        a[:, dof] = 0.0
        a[dof, :] = 0.0
        a[dof, dof] = 1.0
        b[dof] = value

    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        raise SingularSystemError("solve: zero matrix")
    anorm = float(np.linalg.norm(a, 1))
    with warnings.catch_warnings():
        # singularity is detected below and raised as a typed error
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(a)

    diag = np.abs(np.diag(lu))
    bad = np.flatnonzero(diag <= PIVOT_RTOL * scale)
    if len(bad):
        raise SingularSystemError(
            f"solve: singular to round-off, first zero pivot at elimination step"
            f" {int(bad[0])} (|pivot| = {diag[bad[0]]:.3e},"
            f" threshold = {PIVOT_RTOL * scale:.3e})"
        )

    x = lu_solve((lu, piv), b)
    rcond, info = dgecon(lu, anorm, norm="1")
    if info != 0:
        raise RuntimeError(f"solve: dgecon failed with info={info}")
    cond = float(1.0 / rcond) if rcond > 0 else float("inf")
    residual = float(np.max(np.abs(a @ x - b)))
    return Solution(values=x, residual_norm=residual, condition_estimate=cond)
