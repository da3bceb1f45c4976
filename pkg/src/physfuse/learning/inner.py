"""Batched inner solve: impulse hypotheses minimizing the violation loss.

The per-transition objective is a convex quadratic over the product of
two friction cones.  It is minimized by monotone accelerated projected
gradient descent from zero initialization: each iterate takes a
1/L-scaled gradient step projected exactly onto the cones, with Nesterov
extrapolation accepted only when it does not increase the objective, so
the recorded objective is non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

INNER_ITERATIONS = 500
INNER_GRAD_TOL = 1e-10
_CHECK_EVERY = 10


def project_cones(z: np.ndarray, mus: np.ndarray) -> np.ndarray:
    """Exact projection of (T, 6) impulses onto the two friction cones."""
    out = np.empty_like(z)
    for c, mu in enumerate(mus):
        block = z[:, 3 * c:3 * c + 3]
        jn = block[:, 0]
        jt = block[:, 1:]
        nt = np.linalg.norm(jt, axis=1)
        if mu == 0.0:
            proj = np.zeros_like(block)
            proj[:, 0] = np.maximum(jn, 0.0)
        else:
            inside = nt <= mu * jn
            polar = mu * nt <= -jn
            jn_new = (jn + mu * nt) / (1.0 + mu * mu)
            scale = np.where(nt > 0, mu * jn_new / np.maximum(nt, 1e-300), 0.0)
            proj = np.concatenate([jn_new[:, None], scale[:, None] * jt], axis=1)
            proj = np.where(polar[:, None], 0.0, proj)
            proj = np.where(inside[:, None], block, proj)
        out[:, 3 * c:3 * c + 3] = proj
    return out


@dataclass
class InnerSolveResult:
    impulses: np.ndarray                 # (T, 6)
    objective: np.ndarray                # (T,)
    grad_norm: np.ndarray                # (T,) projected-gradient norm
    iterations: int
    history: list = field(default_factory=list)


def solve_impulses(H: np.ndarray, g: np.ndarray, c0: np.ndarray,
                   mus: np.ndarray, iterations: int = INNER_ITERATIONS,
                   grad_tol: float = INNER_GRAD_TOL,
                   record_history: bool = False) -> InnerSolveResult:
    T = len(g)
    if T == 0:
        return InnerSolveResult(np.zeros((0, 6)), np.zeros(0), np.zeros(0), 0)

    lam = np.linalg.eigvalsh(H)[:, -1]
    L = np.maximum(lam, 1e-12)[:, None]

    def f(z):
        return 0.5 * np.einsum("ti,tij,tj->t", z, H, z) \
            + np.einsum("ti,ti->t", g, z) + c0

    def grad(z):
        return np.einsum("tij,tj->ti", H, z) + g

    z = np.zeros((T, 6))
    y = z.copy()
    fz = f(z)
    t_k = 1.0
    history = [float(fz.sum())] if record_history else []
    iterations_run = 0
    pg_norm = np.full(T, np.inf)
    for it in range(1, iterations + 1):
        iterations_run = it
        x = project_cones(y - grad(y) / L, mus)
        fx = f(x)
        accept = fx <= fz
        z_new = np.where(accept[:, None], x, z)
        fz_new = np.minimum(fx, fz)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k))
        y = z_new + (t_k / t_next) * (x - z_new) \
            + ((t_k - 1.0) / t_next) * (z_new - z)
        z, fz, t_k = z_new, fz_new, t_next
        if record_history:
            history.append(float(fz.sum()))
        if it % _CHECK_EVERY == 0 or it == iterations:
            step = project_cones(z - grad(z) / L, mus)
            pg_norm = np.linalg.norm((z - step) * L, axis=1)
            if np.all(pg_norm < grad_tol):
                break
    return InnerSolveResult(z, f(z), pg_norm, iterations_run, history)
