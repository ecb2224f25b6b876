"""Rank criterion for visible contours of the integral-map projection.

Over a base point of the Poisson sphere the fiber is the angular-velocity
space; a state projects to the generalized boundary exactly when the
fiber-restricted derivative of the integral map drops rank.  For the
gyrostat that derivative is the 3x3 matrix with rows

    d k1 / d omega = 2 A (A omega + lam)
    d k2 / d omega = 2 A omega
    d k3 / d omega = A nu

and its determinant equals ``-4 det(A) * [omega x (A omega + lam)] . nu``,
so the rank test and the scalar triple product are two routes to the same
criterion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GyrostatParams, State, angular_momentum

__all__ = ["FiberJacobian", "fiber_jacobian", "rank_defect", "contour_condition"]


@dataclass(frozen=True, eq=False)
class FiberJacobian:
    """Fiber-restricted Jacobian of the integral map with its singular values."""

    matrix: np.ndarray
    singular_values: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        sv = np.asarray(self.singular_values, dtype=float)
        if m.shape != (3, 3) or sv.shape != (3,):
            raise ValueError("expected a 3x3 matrix with 3 singular values")
        if np.any(np.diff(sv) > 0) or np.any(sv < 0):
            raise ValueError("singular values must be non-negative and non-increasing")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "singular_values", sv)


def fiber_jacobian(state: State, params: GyrostatParams) -> FiberJacobian:
    """Derivative of (k1, k2, k3) along fiber (angular-velocity) directions."""
    m = angular_momentum(state.omega, params)
    mat = np.stack([
        2.0 * params.A * m,
        2.0 * params.A * state.omega,
        params.A * state.nu,
    ])
    sv = np.linalg.svd(mat, compute_uv=False)
    return FiberJacobian(matrix=mat, singular_values=sv)


def rank_defect(state: State, params: GyrostatParams, eps: float = 1e-10) -> int:
    """3 minus the numerical rank of the fiber Jacobian.

    ``eps`` is relative: singular values above ``eps * max(singular
    values)`` count toward the rank, which keeps the test scale-free.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    sv = fiber_jacobian(state, params).singular_values
    thresh = eps * sv[0]
    return int(3 - np.count_nonzero(sv > thresh))


def contour_condition(state: State, params: GyrostatParams) -> float:
    """Scalar triple product ``[omega x (A omega + lam)] . nu``.

    Zero exactly on the preimage of the generalized boundary; its sign
    flips across a transversal crossing.
    """
    m = angular_momentum(state.omega, params)
    return float(np.cross(state.omega, m) @ state.nu)
