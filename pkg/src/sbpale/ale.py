"""Discrete ALE building blocks.

The mesh-velocity derivative is discretized in the split form

    Dm = 1/2 (diag(xdot) D + D diag(xdot)),

which inherits a combined SBP property from the underlying operator:

    diag(P) Dm + Dm^T diag(P) = E^T diag(P_surf) diag(n * xdot_surf) E.

That identity is the algebraic core of the discrete Reynolds transport
theorem.  The nodal Jacobian evolves by the geometric conservation law
d(sqrt J)/dt = 1/2 (div xdot) sqrt J, and the physical quadrature factors as
P = diag(J) P_hat against a constant reference quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

JACOBIAN_FLOOR = 1e-8


class DegenerateMeshError(RuntimeError):
    """The discrete mesh Jacobian lost positivity."""


def build_dm(op, xdot: np.ndarray) -> np.ndarray:
    """Split-form mesh-velocity derivative matrix for nodal velocities ``xdot``."""
    d = op.D
    return 0.5 * (xdot[:, None] * d + d * xdot[None, :])


def divergence_discrete(op, xdot: np.ndarray) -> np.ndarray:
    """Discrete velocity divergence D @ xdot (the free-stream-preserving choice)."""
    return op.D @ xdot


def jacobian_rhs(div_x: np.ndarray, jsqrt: np.ndarray) -> np.ndarray:
    """Right-hand side of the sqrt-Jacobian evolution, 1/2 div(xdot) * sqrt(J)."""
    if np.any(jsqrt <= 0.0):
        raise DegenerateMeshError("sqrt-Jacobian must stay positive")
    return 0.5 * div_x * jsqrt


@dataclass(eq=False)
class AleOperators:
    """Snapshot of the ALE machinery at one time instant.

    ``p_hat`` is the constant reference quadrature; the physical quadrature
    is ``jsqrt**2 * p_hat``.  Surface fields carry the endpoint restriction
    data needed by the energy audit.
    """

    dm: np.ndarray
    div_x: np.ndarray
    jsqrt: np.ndarray
    p_hat: np.ndarray
    surface_indices: tuple[int, ...]
    surface_weights: np.ndarray
    normal_velocity: np.ndarray

    @property
    def p(self) -> np.ndarray:
        return self.jsqrt**2 * self.p_hat


def build_ale_operators(op, xdot, jsqrt=None, div_x=None) -> AleOperators:
    """Assemble Dm, the divergence and quadrature split for one time instant.

    ``op`` is the spatial operator on the current mesh (op.P is the physical
    quadrature).  ``jsqrt`` defaults to ones (reference = current mesh) and
    ``div_x`` to the discrete divergence D @ xdot.
    """
    n = op.n
    if jsqrt is None:
        jsqrt = np.ones(n)
    if np.min(jsqrt) <= 0.0 or np.min(jsqrt**2) < JACOBIAN_FLOOR:
        raise DegenerateMeshError(f"Jacobian below floor {JACOBIAN_FLOOR}")
    if div_x is None:
        div_x = divergence_discrete(op, xdot)
    idx = tuple(op.surface_indices)
    return AleOperators(
        dm=build_dm(op, xdot),
        div_x=np.asarray(div_x, dtype=float),
        jsqrt=np.asarray(jsqrt, dtype=float),
        p_hat=op.P / jsqrt**2,
        surface_indices=idx,
        surface_weights=op.surface_weights,
        normal_velocity=op.surface_normals * xdot[list(idx)],
    )


@dataclass(eq=False)
class SystemMatrices:
    """Physical system matrix and its reference-variable counterpart."""

    m: np.ndarray
    m_hat: np.ndarray


def assemble(m_physical: np.ndarray, dm: np.ndarray, jsqrt: np.ndarray) -> SystemMatrices:
    """Form the reference-variable matrix diag(sqrtJ) (M + Dm) diag(sqrtJ)^-1."""
    if np.any(jsqrt <= 0.0):
        raise DegenerateMeshError("sqrt-Jacobian must stay positive")
    m_hat = (m_physical + dm) * (jsqrt[:, None] / jsqrt[None, :])
    return SystemMatrices(m=m_physical, m_hat=m_hat)


def reynolds_identity_residual(op, xdot: np.ndarray, p: np.ndarray | None = None) -> float:
    """Max-norm residual of the combined SBP identity for Dm.

    With ``p`` supplied, Dm is rebuilt from the derivative consistent with
    that quadrature (D = diag(p)^-1 Q); by default op.P is used.  The
    identity involves only Dm and the surface term, so it holds regardless
    of which divergence vector a scheme pairs with Dm.
    """
    if p is None:
        p = op.P
        d = op.D
    else:
        d = op.Q / p[:, None]
    dm = 0.5 * (xdot[:, None] * d + d * xdot[None, :])
    lhs = p[:, None] * dm + dm.T * p[None, :]
    for k, idx in enumerate(op.surface_indices):
        lhs[idx, idx] -= op.surface_weights[k] * op.surface_normals[k] * xdot[idx]
    return float(np.abs(lhs).max())
