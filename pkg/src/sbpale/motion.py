"""Prescribed two-block mesh motion.

The mesh is data to the problem: three boundary trajectories (left edge,
interface, right edge) define the nodal positions, each block stretching
affinely between its endpoints so a per-block uniform layout stays uniform.
Nodal velocities follow by differentiating the positions in time, which is
why the velocity field is affine per block and in general kinked at the
interface.  The interface node is duplicated, one copy per block.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

LAYER_WIDTH = np.pi / 3


@dataclass(frozen=True)
class BlockLayout:
    """Spacings per block and the (constant) width of the right boundary-layer block."""

    n_left: int
    n_right: int
    layer_width: float = LAYER_WIDTH

    def __post_init__(self):
        if self.n_left < 1 or self.n_right < 1:
            raise ValueError("each block needs at least one spacing")

    @property
    def n_nodes(self) -> int:
        return self.n_left + self.n_right + 2


class MeshMotion:
    """Nodal positions and velocities induced by three boundary trajectories.

    ``x_s``, ``x_m``, ``x_e`` and their time derivatives are callables of t.
    ``time_invariant`` marks frozen meshes so downstream stage caches can
    collapse to a single entry.
    """

    def __init__(
        self,
        layout: BlockLayout,
        x_s: Callable[[float], float],
        x_m: Callable[[float], float],
        x_e: Callable[[float], float],
        xdot_s: Callable[[float], float],
        xdot_m: Callable[[float], float],
        xdot_e: Callable[[float], float],
        time_invariant: bool = False,
    ):
        self.layout = layout
        self.x_s, self.x_m, self.x_e = x_s, x_m, x_e
        self.xdot_s, self.xdot_m, self.xdot_e = xdot_s, xdot_m, xdot_e
        self.time_invariant = time_invariant
        self._frac_l = np.arange(layout.n_left + 1) / layout.n_left
        self._frac_r = np.arange(layout.n_right + 1) / layout.n_right
        self._w_l0 = self.x_m(0.0) - self.x_s(0.0)
        self._w_r0 = self.x_e(0.0) - self.x_m(0.0)
        if self._w_l0 <= 0 or self._w_r0 <= 0:
            raise ValueError("degenerate block widths at t = 0")

    def positions(self, t: float) -> np.ndarray:
        xs, xm, xe = self.x_s(t), self.x_m(t), self.x_e(t)
        return np.concatenate(
            [xs + (xm - xs) * self._frac_l, xm + (xe - xm) * self._frac_r]
        )

    def velocities(self, t: float) -> np.ndarray:
        vs, vm, ve = self.xdot_s(t), self.xdot_m(t), self.xdot_e(t)
        return np.concatenate(
            [vs + (vm - vs) * self._frac_l, vm + (ve - vm) * self._frac_r]
        )

    def jacobian(self, t: float) -> np.ndarray:
        """Nodal volume ratio against the t = 0 layout (block width ratios)."""
        jl = (self.x_m(t) - self.x_s(t)) / self._w_l0
        jr = (self.x_e(t) - self.x_m(t)) / self._w_r0
        return np.concatenate(
            [np.full(self.layout.n_left + 1, jl), np.full(self.layout.n_right + 1, jr)]
        )

    def jacobian_sqrt(self, t: float) -> np.ndarray:
        return np.sqrt(self.jacobian(t))

    def div_velocity(self, t: float) -> np.ndarray:
        """Exact per-block velocity divergence of the affine block motion."""
        dl = (self.xdot_m(t) - self.xdot_s(t)) / (self.x_m(t) - self.x_s(t))
        dr = (self.xdot_e(t) - self.xdot_m(t)) / (self.x_e(t) - self.x_m(t))
        return np.concatenate(
            [np.full(self.layout.n_left + 1, dl), np.full(self.layout.n_right + 1, dr)]
        )

    def spacing_ratio(self, t: float) -> float:
        """Right-block spacing over left-block spacing."""
        h_l = (self.x_m(t) - self.x_s(t)) / self.layout.n_left
        h_r = (self.x_e(t) - self.x_m(t)) / self.layout.n_right
        return h_r / h_l

    def assert_nondegenerate(self, t: float) -> None:
        x = self.positions(t)
        nl = self.layout.n_left
        for block in (x[: nl + 1], x[nl + 1 :]):
            if np.any(np.diff(block) <= 0):
                raise ValueError(f"node ordering lost at t = {t}")


def boundary_layer_layout(n: int) -> BlockLayout:
    """Layout with ``n`` spacings in each block.

    With the oscillating trajectories below the left block is five times the
    width of the right boundary-layer block at t = 0, so equal spacing counts
    give a grid-spacing ratio of exactly 5 between the blocks.
    """
    return BlockLayout(n_left=n, n_right=n)


def oscillating_motion(layout: BlockLayout) -> MeshMotion:
    """Domain [-pi + sin t, pi - sin t]; the right block translates rigidly.

    The interface trails the right edge at the fixed layer width, so the
    right block keeps constant width (rigid motion, all its nodes share the
    edge velocity) while the left block stretches.
    """
    width = layout.layer_width
    return MeshMotion(
        layout,
        x_s=lambda t: -np.pi + np.sin(t),
        x_m=lambda t: np.pi - np.sin(t) - width,
        x_e=lambda t: np.pi - np.sin(t),
        xdot_s=np.cos,
        xdot_m=lambda t: -np.cos(t),
        xdot_e=lambda t: -np.cos(t),
    )


def stationary_motion(layout: BlockLayout) -> MeshMotion:
    """Mesh frozen at the t = 0 layout of the oscillating case; zero velocity."""
    width = layout.layer_width
    zero = lambda t: 0.0
    return MeshMotion(
        layout,
        x_s=lambda t: -np.pi,
        x_m=lambda t: np.pi - width,
        x_e=lambda t: np.pi,
        xdot_s=zero,
        xdot_m=zero,
        xdot_e=zero,
        time_invariant=True,
    )
