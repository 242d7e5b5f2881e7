import numpy as np
import pytest

from sbpale import motion


@pytest.fixture
def moving():
    return motion.oscillating_motion(motion.boundary_layer_layout(8))


@pytest.fixture
def frozen():
    return motion.stationary_motion(motion.boundary_layer_layout(8))


def test_initial_boundaries(moving):
    assert moving.x_s(0.0) == pytest.approx(-np.pi)
    assert moving.x_e(0.0) == pytest.approx(np.pi)
    assert moving.x_m(0.0) == pytest.approx(np.pi - np.pi / 3)


def test_right_block_moves_rigidly(moving):
    v = moving.velocities(0.0)
    nl = moving.layout.n_left
    assert np.allclose(v[nl + 1 :], -1.0, atol=1e-14)
    # rigid along the whole cycle, not just at t = 0
    for t in (0.7, 2.9, 5.1):
        v = moving.velocities(t)
        assert np.ptp(v[nl + 1 :]) <= 1e-14


def test_positions_return_after_half_and_full_period(moving):
    x0 = moving.positions(0.0)
    assert np.abs(moving.positions(np.pi) - x0).max() <= 1e-12
    for t in (0.3, 1.7):
        assert np.abs(moving.positions(t + 2 * np.pi) - moving.positions(t)).max() <= 1e-12


def test_spacing_ratio_is_one_fifth_at_t0(moving):
    assert moving.spacing_ratio(0.0) == pytest.approx(0.2, abs=1e-13)


def test_velocity_matches_position_derivative(moving):
    step = 1e-5
    for t in (0.0, 0.4, 1.3, 4.4):
        probe = (moving.positions(t + step) - moving.positions(t - step)) / (2 * step)
        assert np.abs(probe - moving.velocities(t)).max() <= 1e-10


def test_velocity_kink_at_interface(moving):
    # left block stretches, right block is rigid: the divergence jumps
    d = moving.div_velocity(0.5)
    nl = moving.layout.n_left
    assert abs(d[0]) > 0.1
    assert np.all(d[nl + 1 :] == 0.0)


def test_nondegenerate_over_period(moving):
    for t in np.linspace(0.0, 2 * np.pi, 40):
        moving.assert_nondegenerate(t)


def test_jacobian_matches_block_widths(moving):
    for t in (0.2, 1.1, 3.0):
        j = moving.jacobian(t)
        nl = moving.layout.n_left
        expected_left = (5 * np.pi / 3 - 2 * np.sin(t)) / (5 * np.pi / 3)
        assert np.allclose(j[: nl + 1], expected_left, atol=1e-13)
        assert np.allclose(j[nl + 1 :], 1.0, atol=1e-14)
        assert j.min() > 0


def test_stationary_is_frozen_moving_initial_layout(moving, frozen):
    for t in (0.0, 0.9, 5.0):
        assert np.array_equal(frozen.velocities(t), np.zeros(frozen.layout.n_nodes))
        assert np.abs(frozen.positions(t) - moving.positions(0.0)).max() <= 1e-12
    frozen.assert_nondegenerate(2.0)
    assert frozen.time_invariant


def test_layout_validation():
    with pytest.raises(ValueError):
        motion.BlockLayout(n_left=0, n_right=4)


def test_degenerate_trajectories_rejected():
    layout = motion.boundary_layer_layout(8)
    with pytest.raises(ValueError, match="degenerate"):
        motion.MeshMotion(
            layout,
            x_s=lambda t: 1.0,
            x_m=lambda t: 0.0,
            x_e=lambda t: 2.0,
            xdot_s=lambda t: 0.0,
            xdot_m=lambda t: 0.0,
            xdot_e=lambda t: 0.0,
        )
