import numpy as np
import pytest

from sbpale import ale, boundary, timestep
from sbpale.experiment import ExperimentConfig, build_system
from sbpale.motion import boundary_layer_layout, oscillating_motion
from sbpale.system import AleSystem, freestream_data


def test_rhs_matches_dense_matrix_assembly():
    rng = np.random.default_rng(31)
    cfg = ExperimentConfig()
    system = build_system(cfg, 8)
    for t in (0.0, 0.7, 3.1):
        op = system.operator_at(t)
        bc = system.boundary_at(t)
        lift = boundary.lifting_matrix(bc.delta, op.P, bc.surface_weights)
        m = system.system_matrix(t)
        dm = ale.build_dm(op, system.motion.velocities(t))
        jsqrt = system.exact_jsqrt(t)
        g = np.array(system.boundary_data(t))
        f = system.forcing(system.motion.positions(t), t)
        u = rng.standard_normal(system.n)
        dense = jsqrt * ((m + dm) @ u - lift @ g + f)
        fast = system.rhs(jsqrt, u, t)
        assert np.abs(fast - dense).max() <= 1e-11 * max(np.abs(dense).max(), 1.0)


def test_semidiscrete_freestream_consistency():
    u_inf = -3.7
    motion = oscillating_motion(boundary_layer_layout(8))
    system = AleSystem(
        motion, 0.1 * np.pi, boundary_data=freestream_data(motion, u_inf)
    )
    ones = np.full(system.n, u_inf)
    for t in (0.0, 0.9, 4.2):
        jsqrt = system.exact_jsqrt(t)
        residual = system.rhs(jsqrt, ones, t) - 0.5 * system.div_velocity(t) * jsqrt * u_inf
        assert np.abs(residual).max() <= 1e-13


def test_quadrature_factorisation():
    cfg = ExperimentConfig()
    system = build_system(cfg, 8)
    for t in (0.3, 2.0):
        p = system.quadrature(t)
        op = system.operator_at(t)
        assert np.abs(p - op.P).max() <= 1e-13 * np.abs(p).max()
        jac = system.motion.jacobian(t)
        assert np.abs(p - jac * system.p_hat).max() == 0.0


def test_divergence_modes_agree_for_affine_blocks():
    # the block velocities are affine, so the discrete divergence is exact
    motion = oscillating_motion(boundary_layer_layout(8))
    discrete = AleSystem(motion, 0.5, divergence="discrete")
    exact = AleSystem(motion, 0.5, divergence="exact")
    for t in (0.1, 1.8):
        assert np.abs(discrete.div_velocity(t) - exact.div_velocity(t)).max() <= 1e-12


def test_stage_cache_collapses_for_frozen_mesh():
    cfg = ExperimentConfig(case="stationary")
    system = build_system(cfg, 8)
    system.div_velocity(0.1)
    system.div_velocity(0.9)
    system.div_velocity(2.4)
    assert len(system._cache) == 1


def test_invalid_construction():
    motion = oscillating_motion(boundary_layer_layout(8))
    with pytest.raises(ValueError, match="positive"):
        AleSystem(motion, -1.0)
    with pytest.raises(ValueError, match="divergence"):
        AleSystem(motion, 1.0, divergence="sampled")


def test_coupled_march_tracks_exact_jacobian():
    cfg = ExperimentConfig()
    system = build_system(cfg, 8)
    state = timestep.initial_state(np.zeros(system.n))
    dt = 0.01
    for _ in range(100):
        state = timestep.rk_step(state, dt, timestep.classic_rk4(), system)
    exact = system.exact_jsqrt(state.t)
    assert np.abs(state.jsqrt - exact).max() <= 1e-9
