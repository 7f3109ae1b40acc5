"""Diagonal equilibration of box LPs for the solve/crossover harness.

Ruiz scaling iteratively divides rows and columns by the square root of
their max-magnitude, driving all row and column infinity norms toward one.
The change of variables is diagonal and positive, so it preserves the
objective value exactly, maps bounds to bounds, keeps reduced-cost signs,
and carries vertices to vertices with the same basis and the same set of
variables strictly inside their bounds.  The solver and crossover therefore
run on the scaled problem and their structural outputs (bases, supports,
statuses) transfer to the original unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .model import BoxLp

RUIZ_ITERATIONS = 10


@dataclass
class ScaledLp:
    """A scaled problem together with the diagonal factors.

    scaled.A = diag(1/row_scale) @ original.A @ diag(1/col_scale);
    x_scaled = col_scale * x;  y_scaled = row_scale * y.
    """

    lp: BoxLp
    row_scale: np.ndarray
    col_scale: np.ndarray
    original: BoxLp

    def unscale_x(self, x_scaled: np.ndarray) -> np.ndarray:
        return x_scaled / self.col_scale

    def unscale_y(self, y_scaled: np.ndarray) -> np.ndarray:
        return y_scaled / self.row_scale

    def scale_point(self, x: np.ndarray, y: np.ndarray):
        return x * self.col_scale, y * self.row_scale


def ruiz_equilibrate(lp: BoxLp, iterations: int = RUIZ_ITERATIONS) -> ScaledLp:
    """Equilibrate row and column norms by alternating sqrt-max scaling.

    Zero rows or columns keep a unit factor so bounds and duals stay
    untouched for variables that appear in no constraint.
    """
    A = lp.A.tocsr(copy=True)
    m, n = A.shape
    row_scale = np.ones(m)
    col_scale = np.ones(n)
    for _ in range(iterations):
        row_max = np.abs(A).max(axis=1).toarray().ravel()
        r = np.where(row_max > 0.0, np.sqrt(row_max), 1.0)
        A = sp.diags(1.0 / r) @ A
        row_scale *= r
        col_max = np.abs(A).max(axis=0).toarray().ravel()
        c = np.where(col_max > 0.0, np.sqrt(col_max), 1.0)
        A = A @ sp.diags(1.0 / c)
        col_scale *= c
    scaled = BoxLp(
        A=A.tocsc(),
        b=lp.b / row_scale,
        c=lp.c / col_scale,
        lower=lp.lower * col_scale,
        upper=lp.upper * col_scale,
        c0=lp.c0,
        name=lp.name,
    )
    return ScaledLp(lp=scaled, row_scale=row_scale, col_scale=col_scale,
                    original=lp)
