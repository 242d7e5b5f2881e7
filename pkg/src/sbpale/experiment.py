"""Benchmark problem: manufactured solution, data, and the convergence harness.

The benchmark solves u_t = eps u_xx - u_x + F on the oscillating two-block
domain (or its frozen t = 0 counterpart) against the time-periodic
manufactured solution

    u = (1 + A sin(x - t)) (1 - exp((x - x_e) / eps)),

whose boundary-layer factor vanishes on the right boundary.  Forcing and
inflow data are derived analytically from the solution; errors are measured
in the discrete max norm over all nodes of both blocks at the final time.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import audit as audit_mod
from . import timestep
from .motion import BlockLayout, MeshMotion, boundary_layer_layout, oscillating_motion, stationary_motion
from .system import AleSystem, freestream_data

TWO_PI = 2.0 * np.pi

CASES = ("moving", "stationary")
JACOBIAN_MODES = ("exact", "coupled")


@dataclass(frozen=True)
class ExperimentConfig:
    """Benchmark parameters; defaults reproduce the reference setup."""

    epsilon: float = 0.1 * np.pi
    amplitude: float = 0.1
    order: tuple[int, int] = (4, 2)
    t_end: float = TWO_PI
    dt_safety: float = 0.5
    case: str = "moving"
    jacobian_mode: str = "exact"
    divergence: str = "discrete"
    filter_theta: float = 0.7
    filter_width: int = 4
    out: str | None = None

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if not 0.0 < self.dt_safety <= 1.0:
            raise ValueError("dt_safety must lie in (0, 1]")
        if self.case not in CASES:
            raise ValueError(f"case must be one of {CASES}")
        if self.jacobian_mode not in JACOBIAN_MODES:
            raise ValueError(f"jacobian_mode must be one of {JACOBIAN_MODES}")
        object.__setattr__(self, "order", tuple(self.order))


def motion_for(config: ExperimentConfig, n: int) -> MeshMotion:
    """Mesh motion for ``n`` boundary-layer spacings (n >= 8)."""
    if n < 8:
        raise ValueError(f"need at least 8 boundary-layer spacings, got {n}")
    layout = boundary_layer_layout(n)
    if config.case == "moving":
        return oscillating_motion(layout)
    return stationary_motion(layout)


def _edges(config: ExperimentConfig, t):
    """Right-edge trajectory x_e(t), xdot_e(t) for the configured case."""
    if config.case == "moving":
        return np.pi - np.sin(t), -np.cos(t)
    return np.pi + 0.0 * np.asarray(t), 0.0 * np.asarray(t)


def mms_solution(x, t, config: ExperimentConfig):
    """Manufactured solution value(s) at position(s) ``x`` and time ``t``."""
    a = config.amplitude
    x_e, _ = _edges(config, t)
    layer = np.exp((x - x_e) / config.epsilon)
    return (1.0 + a * np.sin(x - t)) * (1.0 - layer)


def mms_data(x, t, config: ExperimentConfig):
    """(F, g_s, u0): forcing at (x, t), inflow data at t, initial state at x."""
    eps, a = config.epsilon, config.amplitude
    x_e, xdot_e = _edges(config, t)
    layer = np.exp((x - x_e) / eps)
    f = a * eps * np.sin(x - t) + (
        (xdot_e / eps) * (1.0 + a * np.sin(x - t))
        + 2.0 * a * np.cos(x - t)
        - a * eps * np.sin(x - t)
    ) * layer

    x_s, xdot_s = _inflow_edge(config, t)
    f_s = 1.0 + a * np.sin(x_s - t)
    layer_s = np.exp((x_s - x_e) / eps)
    g_s = -f_s + (a * eps * np.cos(x_s - t) + xdot_s * f_s) * (1.0 - layer_s)

    x_e0, _ = _edges(config, 0.0)
    u0 = (1.0 + a * np.sin(x)) * (1.0 - np.exp((x - x_e0) / eps))
    return f, g_s, u0


def _inflow_edge(config: ExperimentConfig, t):
    if config.case == "moving":
        return -np.pi + np.sin(t), np.cos(t)
    return -np.pi + 0.0 * np.asarray(t), 0.0 * np.asarray(t)


def build_system(config: ExperimentConfig, n: int) -> AleSystem:
    """Moving-mesh system with manufactured forcing and boundary data."""
    motion = motion_for(config, n)

    def forcing(x, t):
        return mms_data(x, t, config)[0]

    def boundary_data(t):
        return float(mms_data(0.0, t, config)[1]), 0.0

    return AleSystem(
        motion,
        config.epsilon,
        order=config.order,
        forcing=forcing,
        boundary_data=boundary_data,
        divergence=config.divergence,
    )


def min_spacing(config: ExperimentConfig, n: int, samples: int = 257) -> float:
    """Minimum node spacing over one motion period."""
    motion = motion_for(config, n)
    nl = motion.layout.n_left
    h_min = np.inf
    for t in np.linspace(0.0, TWO_PI, samples):
        x = motion.positions(t)
        h_min = min(h_min, np.diff(x[: nl + 1]).min(), np.diff(x[nl + 1 :]).min())
    return float(h_min)


def time_step(config: ExperimentConfig, n: int) -> float:
    """Diffusive step-size rule dt = dt_safety * dx_min^2 / eps."""
    return config.dt_safety * min_spacing(config, n) ** 2 / config.epsilon


def _make_filter(config: ExperimentConfig, n: int) -> timestep.FilterSpec | None:
    if config.filter_theta == 0.0:
        return None
    return timestep.undivided_difference_filter(
        (n + 1, n + 1), config.filter_theta, config.filter_width
    )


def solve(config: ExperimentConfig, n: int, observer=None):
    """March the benchmark to t_end; returns (final state, system)."""
    system = build_system(config, n)
    x0 = system.motion.positions(0.0)
    u0 = mms_data(x0, 0.0, config)[2]
    state = timestep.initial_state(u0)
    state = timestep.run(
        system,
        state,
        config.t_end,
        time_step(config, n),
        jacobian_mode=config.jacobian_mode,
        filter_spec=_make_filter(config, n),
        observer=observer,
    )
    return state, system


def linf_error(config: ExperimentConfig, n: int) -> float:
    """Max-norm error against the manufactured solution at t_end."""
    state, system = solve(config, n)
    exact = mms_solution(system.motion.positions(state.t), state.t, config)
    return float(np.abs(state.u - exact).max())


@dataclass
class ConvergenceRow:
    n: int
    log10_error: float
    rate: float | None = None


def run_convergence(config: ExperimentConfig, n_list) -> list[ConvergenceRow]:
    """Error table over a doubling sequence of boundary-layer resolutions."""
    n_list = list(n_list)
    for prev, cur in zip(n_list, n_list[1:]):
        if cur != 2 * prev:
            raise ValueError("resolutions must increase by factors of two")
    rows: list[ConvergenceRow] = []
    for n in n_list:
        log_err = float(np.log10(linf_error(config, n)))
        rate = None
        if rows:
            rate = (log_err - rows[-1].log10_error) / np.log10(0.5)
        rows.append(ConvergenceRow(n=n, log10_error=log_err, rate=rate))
    return rows


def audit_sweep(
    config: ExperimentConfig,
    n: int = 16,
    samples: int = 32,
    alpha: float = 0.0,
) -> list[audit_mod.AuditReport]:
    """Energy audits at uniform time samples over one motion period."""
    system = build_system(config, n)
    reports = []
    for t in np.linspace(0.0, TWO_PI, samples, endpoint=False):
        matrices, ops = system.matrices_at(t)
        reports.append(audit_mod.audit(matrices, ops, alpha=alpha, t=t))
    return reports


@dataclass
class FreestreamResult:
    case: str
    u_inf: float
    filtered: bool
    max_deviation: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = self.max_deviation <= 1e-12


def freestream_deviation(
    config: ExperimentConfig,
    n: int = 16,
    u_inf: float = 1.0,
    use_filter: bool = False,
    history: list | None = None,
) -> FreestreamResult:
    """Max deviation from a constant state over one period, coupled Jacobian.

    Runs with zero forcing and boundary data consistent with ``u_inf``; the
    returned deviation is the worst over every accepted step.
    """
    motion = motion_for(config, n)
    system = AleSystem(
        motion,
        config.epsilon,
        order=config.order,
        forcing=None,
        boundary_data=freestream_data(motion, u_inf),
        divergence="discrete",
    )
    state = timestep.initial_state(np.full(system.n, u_inf))
    worst = 0.0

    def observer(s):
        nonlocal worst
        dev = float(np.abs(s.u - u_inf).max())
        worst = max(worst, dev)
        if history is not None:
            history.append((s.t, dev))

    timestep.run(
        system,
        state,
        TWO_PI,
        time_step(config, n),
        jacobian_mode="coupled",
        filter_spec=_make_filter(config, n) if use_filter else None,
        observer=observer,
    )
    return FreestreamResult(
        case=config.case, u_inf=u_inf, filtered=use_filter, max_deviation=worst
    )


def with_case(config: ExperimentConfig, case: str) -> ExperimentConfig:
    return replace(config, case=case)
