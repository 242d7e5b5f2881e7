"""Boundary operators, lifting, and the boundary energy functional.

Boundary conditions enter the semi-discrete scheme weakly through a lifting
operator L = diag(P)^-1 delta^T diag(P_surf), which satisfies the adjoint
identity (u, L w)_P = (delta u, w)_{P_surf}.  The shipped operator pair is
the advection-diffusion set used throughout:

    B = [eps E_s D - (1 - xdot_s) E_s;  E_e]
    delta = [E_s;  -eps E_e D + 1/2 (1 - xdot_e) E_e]

(Robin inflow on the left, Dirichlet on the right, unit advection speed).
With these, the boundary energy functional reduces to the closed form
-eps ||D u||_P^2 - 1/2 (1 - xdot_s) u_s^2, non-positive whenever the left
boundary moves no faster than the advection speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(eq=False)
class BoundaryOperators:
    """Boundary operator rows B, lifting rows delta, and surface weights."""

    b: np.ndarray
    delta: np.ndarray
    surface_weights: np.ndarray = field(default_factory=lambda: np.ones(2))


def advection_diffusion_bcs(op, epsilon: float, xdot_s: float, xdot_e: float) -> BoundaryOperators:
    """Robin-inflow / Dirichlet-outflow operator pair on the current mesh.

    Raises ValueError when ``xdot_s > 1``: the left boundary then outruns the
    advection speed, the inflow closure no longer applies, and the energy
    bound is lost.
    """
    if xdot_s > 1.0:
        raise ValueError(
            f"left boundary velocity {xdot_s} exceeds the advection speed; "
            "the inflow boundary operator does not apply"
        )
    n = op.n
    d = op.D
    b = np.zeros((2, n))
    b[0] = epsilon * d[0]
    b[0, 0] -= 1.0 - xdot_s
    b[1, -1] = 1.0
    delta = np.zeros((2, n))
    delta[0, 0] = 1.0
    delta[1] = -epsilon * d[-1]
    delta[1, -1] += 0.5 * (1.0 - xdot_e)
    return BoundaryOperators(b=b, delta=delta)


def lifting_matrix(delta: np.ndarray, p: np.ndarray, surface_weights=None) -> np.ndarray:
    """L = diag(p)^-1 delta^T diag(P_surf), shape (n, n_surface)."""
    if surface_weights is None:
        surface_weights = np.ones(delta.shape[0])
    return (delta.T * surface_weights[None, :]) / p[:, None]


def lifting_apply(lifting: np.ndarray, psi_surface: np.ndarray) -> np.ndarray:
    """Carry surface penalty data into the volume."""
    return lifting @ psi_surface


def energy_functional(op, d_matrix: np.ndarray, bc: BoundaryOperators, xdot: np.ndarray, phi: np.ndarray) -> float:
    """Boundary energy functional of a state ``phi``.

    Evaluates (phi, D phi)_P + (delta phi, B phi)_{P_surf}
    + 1/2 (phi_surf, n*xdot phi_surf)_{P_surf} with ``d_matrix`` the physical
    system operator on the current mesh.
    """
    p = op.P
    idx = list(op.surface_indices)
    volume = phi @ (p * (d_matrix @ phi))
    penalty = (bc.delta @ phi) @ (bc.surface_weights * (bc.b @ phi))
    ntx = op.surface_normals * xdot[idx]
    surface = 0.5 * phi[idx] @ (bc.surface_weights * ntx * phi[idx])
    return float(volume + penalty + surface)
