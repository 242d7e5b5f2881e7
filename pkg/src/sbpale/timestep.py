"""Explicit Runge-Kutta marching of the coupled (sqrt J, scaled solution) system.

Each step advances two lines with the same tableau: the sqrt-Jacobian by its
geometric conservation law, and the scaled solution uhat = sqrt(J) * u by the
problem right-hand side.  Because an exactly constant state makes the second
line a scalar multiple of the first, stage by stage, the march preserves a
free stream for any step size.  An ``exact`` Jacobian mode replaces the first
line with analytically known sqrt-J values; the solution line is unchanged.

A system object must provide ``div_velocity(t)``, ``rhs(jsqrt, u, t)`` and
``quadrature(t)``; ``exact_jsqrt(t)`` is additionally required in exact mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ale import JACOBIAN_FLOOR, DegenerateMeshError


@dataclass(frozen=True, eq=False)
class ButcherTableau:
    """Coefficients of an explicit Runge-Kutta scheme."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        b = np.asarray(self.b, dtype=float)
        c = np.asarray(self.c, dtype=float)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        s = b.size
        if a.shape != (s, s) or c.size != s:
            raise ValueError("inconsistent tableau dimensions")
        if np.any(np.triu(a) != 0.0):
            raise ValueError("tableau is not explicit (upper triangle must vanish)")
        if abs(math.fsum(b) - 1.0) > 1e-14:
            raise ValueError("stage weights must sum to one")
        if np.abs(c - a.sum(axis=1)).max() > 1e-14:
            raise ValueError("abscissae must equal the stage-weight row sums")

    @property
    def stages(self) -> int:
        return self.b.size


def classic_rk4() -> ButcherTableau:
    """The classical four-stage, fourth-order scheme."""
    a = np.zeros((4, 4))
    a[1, 0] = 0.5
    a[2, 1] = 0.5
    a[3, 2] = 1.0
    return ButcherTableau(a=a, b=np.array([1, 2, 2, 1]) / 6.0, c=np.array([0.0, 0.5, 0.5, 1.0]))


@dataclass(eq=False)
class SolverState:
    """Time, nodal sqrt-Jacobian, scaled solution, and recovered solution."""

    t: float
    jsqrt: np.ndarray
    uhat: np.ndarray
    u: np.ndarray


def initial_state(u0: np.ndarray, jsqrt0: np.ndarray | None = None, t0: float = 0.0) -> SolverState:
    u0 = np.asarray(u0, dtype=float)
    if jsqrt0 is None:
        jsqrt0 = np.ones_like(u0)
    return SolverState(t=float(t0), jsqrt=jsqrt0, uhat=jsqrt0 * u0, u=u0.copy())


def _check_jacobian(jsqrt: np.ndarray, t: float) -> None:
    if np.min(jsqrt) <= 0.0 or np.min(jsqrt * jsqrt) < JACOBIAN_FLOOR:
        raise DegenerateMeshError(f"mesh Jacobian below floor at t = {t}")


def rk_step(state: SolverState, dt: float, tableau: ButcherTableau, system, jacobian_mode: str = "coupled") -> SolverState:
    """One explicit step of the coupled system.

    ``jacobian_mode`` is "coupled" (integrate the Jacobian line) or "exact"
    (take stage sqrt-J values from ``system.exact_jsqrt``).
    """
    if jacobian_mode not in ("coupled", "exact"):
        raise ValueError(f"unknown jacobian mode {jacobian_mode!r}")
    exact = jacobian_mode == "exact"
    a, b, c = tableau.a, tableau.b, tableau.c
    t0 = state.t

    jsq_stage = []
    jdot_stage = []
    rhs_stage = []
    for k in range(tableau.stages):
        tk = t0 + c[k] * dt
        if exact:
            jk = system.exact_jsqrt(tk)
        else:
            jk = state.jsqrt.copy()
            for nu in range(k):
                if a[k, nu] != 0.0:
                    jk += (dt * a[k, nu]) * jdot_stage[nu]
        _check_jacobian(jk, tk)
        uhat_k = state.uhat.copy()
        for nu in range(k):
            if a[k, nu] != 0.0:
                uhat_k += (dt * a[k, nu]) * rhs_stage[nu]
        u_k = uhat_k / jk
        jsq_stage.append(jk)
        jdot_stage.append(0.5 * system.div_velocity(tk) * jk)
        rhs_stage.append(system.rhs(jk, u_k, tk))

    if exact:
        jsq_new = system.exact_jsqrt(t0 + dt)
    else:
        jsq_new = state.jsqrt.copy()
        for k in range(tableau.stages):
            if b[k] != 0.0:
                jsq_new += (dt * b[k]) * jdot_stage[k]
    _check_jacobian(jsq_new, t0 + dt)
    uhat_new = state.uhat.copy()
    for k in range(tableau.stages):
        if b[k] != 0.0:
            uhat_new += (dt * b[k]) * rhs_stage[k]
    return SolverState(t=t0 + dt, jsqrt=jsq_new, uhat=uhat_new, u=uhat_new / jsq_new)


@dataclass(frozen=True, eq=False)
class FilterSpec:
    """Constant-preserving dissipative post-step filter.

    Applies u <- u - sigma * diag(P)^-1 A^T A u with A a block-local
    undivided difference annihilating constants, so the filter matrix F
    satisfies F @ 1 = 1 and diag(P)(F - I) + (F - I)^T diag(P) = -2 sigma
    A^T A <= 0.  The strength sigma = 2 theta min(P) / ||A^T A||_inf keeps
    the filter contractive in the P-norm for theta in [0, 1].

    With ``reference_step`` set, theta is rescaled per application by
    (actual step / reference step), capped at one, so the dissipation rate
    per unit time does not depend on the time step actually taken.
    """

    diff: np.ndarray
    theta: float
    reference_step: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("filter strength theta must lie in [0, 1]")
        if self.reference_step is not None and self.reference_step <= 0.0:
            raise ValueError("reference step must be positive")
        if self.diff.size:
            scale = np.abs(self.diff).max()
            if np.abs(self.diff @ np.ones(self.diff.shape[1])).max() > 1e-13 * scale:
                raise ValueError("difference rows must annihilate constants")

    def sigma(self, p: np.ndarray, step: float | None = None) -> float:
        theta = self.theta
        if step is not None and self.reference_step is not None:
            theta = min(theta * step / self.reference_step, 1.0)
        if self.diff.size == 0 or theta == 0.0:
            return 0.0
        ata_bound = np.abs(self.diff.T @ self.diff).sum(axis=1).max()
        return 2.0 * theta * float(p.min()) / float(ata_bound)


def undivided_difference_filter(
    block_nodes, theta: float, width: int = 4, reference_step: float | None = None
) -> FilterSpec:
    """Filter rows from an order-(width-1) undivided difference per block.

    ``block_nodes`` lists the node count of each block; rows never straddle
    a block boundary.
    """
    order = width - 1
    stencil = np.array([(-1.0) ** k * math.comb(order, k) for k in range(width)])
    n_total = int(sum(block_nodes))
    rows = []
    offset = 0
    for m in block_nodes:
        for i in range(m - width + 1):
            row = np.zeros(n_total)
            row[offset + i : offset + i + width] = stencil
            rows.append(row)
        offset += m
    diff = np.array(rows) if rows else np.zeros((0, n_total))
    return FilterSpec(diff=diff, theta=float(theta), reference_step=reference_step)


def filter_matrix(spec: FilterSpec, p: np.ndarray, step: float | None = None) -> np.ndarray:
    """Dense filter matrix F = I - sigma diag(p)^-1 A^T A (for verification)."""
    n = p.size
    return np.eye(n) - spec.sigma(p, step) * (spec.diff.T @ spec.diff) / p[:, None]


def filter_step(state: SolverState, spec: FilterSpec, p: np.ndarray, step: float | None = None) -> SolverState:
    """Filter the recovered solution and rebuild the scaled variable."""
    sigma = spec.sigma(p, step)
    if sigma == 0.0:
        return state
    u = state.u - sigma * (spec.diff.T @ (spec.diff @ state.u)) / p
    return SolverState(t=state.t, jsqrt=state.jsqrt, uhat=state.jsqrt * u, u=u)


def run(
    system,
    state: SolverState,
    t_end: float,
    dt: float,
    tableau: ButcherTableau | None = None,
    jacobian_mode: str = "coupled",
    filter_spec: FilterSpec | None = None,
    observer=None,
) -> SolverState:
    """March to ``t_end``, shortening the last step to land on it exactly.

    ``observer`` is called with the state after every accepted step.  A
    non-finite solution aborts with the offending time in the message.
    """
    if dt <= 0.0:
        raise ValueError("time step must be positive")
    if tableau is None:
        tableau = classic_rk4()
    tiny = 1e-12 * max(1.0, abs(t_end))
    while state.t < t_end - tiny:
        step = min(dt, t_end - state.t)
        state = rk_step(state, step, tableau, system, jacobian_mode)
        if filter_spec is not None:
            state = filter_step(state, filter_spec, system.quadrature(state.t), step)
        if not np.all(np.isfinite(state.uhat)):
            raise RuntimeError(f"non-finite solution detected at t = {state.t}")
        if observer is not None:
            observer(state)
    return state
