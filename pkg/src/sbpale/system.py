"""Assembled two-block advection-diffusion system on a moving mesh.

Couples the pieces: SBP operators on the current mesh, the split-form
mesh-velocity derivative, weakly imposed boundary conditions, forcing and
boundary data.  The global Q matrix is time independent; all time dependence
of the spatial operators enters through the quadrature P(t) = J(t) * P_hat
and through the velocity-dependent boundary coefficients, so each stage only
rescales rather than reassembles.

The model is u_t = eps u_xx - u_x + F with a Robin inflow condition on the
left boundary and a homogeneous-friendly Dirichlet condition on the right;
the second derivative applies the first-derivative operator twice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ale, boundary, sbp
from .motion import MeshMotion


@dataclass(eq=False)
class _StageOps:
    t: float
    x: np.ndarray
    xdot: np.ndarray
    p: np.ndarray
    inv_p: np.ndarray
    div_x: np.ndarray
    xdot_s: float
    xdot_e: float
    d_last_over_p: np.ndarray


def freestream_data(motion: MeshMotion, u_inf: float):
    """Boundary data consistent with the constant state ``u_inf``."""

    def data(t: float) -> tuple[float, float]:
        return (-(1.0 - motion.xdot_s(t)) * u_inf, u_inf)

    return data


class AleSystem:
    """Semi-discrete right-hand side and dense matrices for the moving mesh.

    Args:
        motion: prescribed mesh motion (two blocks, duplicated interface).
        epsilon: diffusion coefficient, > 0.
        order: SBP accuracy pair per block.
        forcing: callable (x, t) -> nodal values, or None for zero.
        boundary_data: callable t -> (g_s, g_e), or None for zero data.
        divergence: "discrete" uses D @ xdot (free-stream preserving);
            "exact" uses the analytic per-block divergence.
    """

    def __init__(
        self,
        motion: MeshMotion,
        epsilon: float,
        order=(4, 2),
        forcing=None,
        boundary_data=None,
        divergence: str = "discrete",
    ):
        if epsilon <= 0.0:
            raise ValueError("diffusion coefficient must be positive")
        if divergence not in ("discrete", "exact"):
            raise ValueError(f"unknown divergence mode {divergence!r}")
        self.motion = motion
        self.epsilon = float(epsilon)
        self.order = tuple(order)
        self.forcing = forcing
        self.boundary_data = boundary_data
        self.divergence = divergence

        layout = motion.layout
        pos0 = motion.positions(0.0)
        nl, nr = layout.n_left, layout.n_right
        h_l0 = (pos0[nl] - pos0[0]) / nl
        h_r0 = (pos0[-1] - pos0[nl + 1]) / nr
        left = sbp.build_operator(self.order, nl + 1, h_l0)
        right = sbp.build_operator(self.order, nr + 1, h_r0)
        self.op0 = sbp.couple_blocks(
            left, right, left_end=pos0[nl], right_start=pos0[nl + 1]
        )
        self.n = self.op0.n
        self.q = self.op0.Q
        self.p_hat = self.op0.P.copy()
        self._q_last = self.q[-1].copy()
        self._cache: dict[float, _StageOps] = {}

    # -- stage operators ---------------------------------------------------

    def _stage(self, t: float) -> _StageOps:
        key = 0.0 if self.motion.time_invariant else float(t)
        st = self._cache.get(key)
        if st is not None:
            return st
        xdot = self.motion.velocities(t)
        p = self.motion.jacobian(t) * self.p_hat
        inv_p = 1.0 / p
        if self.divergence == "discrete":
            div_x = (self.q @ xdot) * inv_p
        else:
            div_x = self.motion.div_velocity(t)
        st = _StageOps(
            t=float(t),
            x=self.motion.positions(t),
            xdot=xdot,
            p=p,
            inv_p=inv_p,
            div_x=div_x,
            xdot_s=float(xdot[0]),
            xdot_e=float(xdot[-1]),
            d_last_over_p=(self._q_last / p[-1]) * inv_p,
        )
        if len(self._cache) > 256:
            self._cache.clear()
        self._cache[key] = st
        return st

    def _data(self, t: float) -> tuple[float, float]:
        if self.boundary_data is None:
            return 0.0, 0.0
        return self.boundary_data(t)

    # -- coupled-system interface -------------------------------------------

    def div_velocity(self, t: float) -> np.ndarray:
        return self._stage(t).div_x

    def quadrature(self, t: float) -> np.ndarray:
        return self._stage(t).p

    def exact_jsqrt(self, t: float) -> np.ndarray:
        return self.motion.jacobian_sqrt(t)

    def rhs(self, jsqrt: np.ndarray, u: np.ndarray, t: float) -> np.ndarray:
        st = self._stage(t)
        if st.xdot_s > 1.0:
            raise ValueError(f"left boundary outruns the advection speed at t = {t}")
        du = (self.q @ u) * st.inv_p
        ddu = (self.q @ du) * st.inv_p
        dxu = (self.q @ (st.xdot * u)) * st.inv_p
        out = self.epsilon * ddu - du + 0.5 * (st.xdot * du + dxu)

        g_s, g_e = self._data(t)
        r1 = self.epsilon * du[0] - (1.0 - st.xdot_s) * u[0] - g_s
        r2 = u[-1] - g_e
        out += (-self.epsilon * r2) * st.d_last_over_p
        out[0] += r1 * st.inv_p[0]
        out[-1] += 0.5 * (1.0 - st.xdot_e) * r2 * st.inv_p[-1]

        if self.forcing is not None:
            out += self.forcing(st.x, t)
        return jsqrt * out

    # -- dense assemblies for auditing and tests -----------------------------

    def operator_at(self, t: float) -> sbp.MultiblockOperator:
        layout = self.motion.layout
        pos = self.motion.positions(t)
        nl, nr = layout.n_left, layout.n_right
        left = sbp.build_operator(self.order, nl + 1, (pos[nl] - pos[0]) / nl)
        right = sbp.build_operator(self.order, nr + 1, (pos[-1] - pos[nl + 1]) / nr)
        return sbp.couple_blocks(left, right, left_end=pos[nl], right_start=pos[nl + 1])

    def boundary_at(self, t: float) -> boundary.BoundaryOperators:
        op = self.operator_at(t)
        xdot = self.motion.velocities(t)
        return boundary.advection_diffusion_bcs(
            op, self.epsilon, float(xdot[0]), float(xdot[-1])
        )

    def physical_matrix(self, op) -> np.ndarray:
        """Dense eps D^2 - D on the supplied operator."""
        return self.epsilon * (op.D @ op.D) - op.D

    def system_matrix(self, t: float) -> np.ndarray:
        """Dense M = D_phys + L B at time t."""
        op = self.operator_at(t)
        bc = boundary.advection_diffusion_bcs(
            op, self.epsilon, *self._edge_velocities(t)
        )
        lift = boundary.lifting_matrix(bc.delta, op.P, bc.surface_weights)
        return self.physical_matrix(op) + lift @ bc.b

    def matrices_at(self, t: float, jsqrt: np.ndarray | None = None):
        """(SystemMatrices, AleOperators) snapshot for the energy audit."""
        op = self.operator_at(t)
        xdot = self.motion.velocities(t)
        if jsqrt is None:
            jsqrt = self.exact_jsqrt(t)
        div_x = None if self.divergence == "discrete" else self.motion.div_velocity(t)
        ops = ale.build_ale_operators(op, xdot, jsqrt=jsqrt, div_x=div_x)
        matrices = ale.assemble(self.system_matrix(t), ops.dm, jsqrt)
        return matrices, ops

    def _edge_velocities(self, t: float) -> tuple[float, float]:
        xdot = self.motion.velocities(t)
        return float(xdot[0]), float(xdot[-1])
