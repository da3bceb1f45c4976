"""Unconstrained inertia parameterization with guaranteed realizability.

Mass is trained as its logarithm, the center of mass is free, and the
rotational inertia is derived from a Cholesky-factored second-moment
matrix S via I = tr(S) 1 - S.  Any such I is symmetric positive
semi-definite with principal moments that satisfy the triangle
inequalities, so every gradient step stays physically realizable.
"""

from __future__ import annotations

import numpy as np

from ..dynamics.types import InertialParams

_TRIL = np.tril_indices(3)
_DIAG_FLOOR = 1e-5


class InertiaParameterization:
    def __init__(self, log_mass: float, com: np.ndarray, second_chol: np.ndarray):
        self.log_mass = float(log_mass)
        self.com = np.asarray(com, dtype=float).reshape(3)
        self.second_chol = np.tril(np.asarray(second_chol, dtype=float).reshape(3, 3))

    @classmethod
    def from_sphere(cls, mass: float, center: np.ndarray,
                    radius: float) -> "InertiaParameterization":
        inertia = (2.0 / 5.0) * mass * radius * radius * np.eye(3)
        return cls.from_params(InertialParams.from_matrix(mass, center, inertia))

    @classmethod
    def from_params(cls, params: InertialParams) -> "InertiaParameterization":
        inertia = params.inertia()
        second = 0.5 * np.trace(inertia) * np.eye(3) - inertia
        return cls(np.log(params.mass), params.com, np.linalg.cholesky(second))

    # -- materialized quantities -------------------------------------------

    @property
    def mass(self) -> float:
        return float(np.exp(self.log_mass))

    def second_moment(self) -> np.ndarray:
        return self.second_chol @ self.second_chol.T

    def inertia(self) -> np.ndarray:
        s = self.second_moment()
        return np.trace(s) * np.eye(3) - s

    def to_params(self) -> InertialParams:
        return InertialParams.from_matrix(self.mass, self.com, self.inertia())

    # -- flat parameter vector (for optimization and gradient checks) -------

    def vector(self) -> np.ndarray:
        return np.concatenate([[self.log_mass], self.com,
                               self.second_chol[_TRIL]])

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "InertiaParameterization":
        chol = np.zeros((3, 3))
        chol[_TRIL] = vec[4:10]
        return cls(vec[0], vec[1:4], chol)

    def clamp_diagonal(self, floor: float = _DIAG_FLOOR) -> None:
        """Keep the factor's diagonal positive so I stays invertible."""
        d = np.diag(self.second_chol).copy()
        np.fill_diagonal(self.second_chol, np.maximum(d, floor))


def inertia_gradient_to_chol(grad_inertia: np.ndarray,
                             second_chol: np.ndarray) -> np.ndarray:
    """Chain d(loss)/d(I) through I = tr(S) 1 - S, S = L L^T.

    Returns the lower-triangular gradient w.r.t. L.
    """
    g = 0.5 * (grad_inertia + grad_inertia.T)
    g_second = np.trace(g) * np.eye(3) - g
    return np.tril(2.0 * g_second @ second_chol)
