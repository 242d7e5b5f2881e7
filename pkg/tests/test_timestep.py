import numpy as np
import pytest

from _oracles import reference_rk4_step
from sbpale import ale, timestep
from sbpale.experiment import ExperimentConfig, build_system, mms_data, time_step


class ScalarOde:
    """Constant-divergence stub: d(sqrtJ)/dt = c/2 sqrtJ, zero physical terms."""

    def __init__(self, c, n=5):
        self.c = c
        self.n = n

    def div_velocity(self, t):
        return np.full(self.n, self.c)

    def rhs(self, jsqrt, u, t):
        return np.zeros(self.n)

    def quadrature(self, t):
        return np.ones(self.n)


def test_tableau_validation():
    rk4 = timestep.classic_rk4()
    assert rk4.stages == 4
    assert rk4.c[1] == 0.5
    with pytest.raises(ValueError, match="sum"):
        timestep.ButcherTableau(a=np.zeros((2, 2)), b=[0.5, 0.6], c=[0.0, 0.5])
    with pytest.raises(ValueError, match="explicit"):
        timestep.ButcherTableau(a=[[0.5]], b=[1.0], c=[0.5])
    bad_c = np.array([0.0, 0.4])
    a = np.zeros((2, 2))
    a[1, 0] = 0.5
    with pytest.raises(ValueError, match="abscissae"):
        timestep.ButcherTableau(a=a, b=[0.5, 0.5], c=bad_c)
    with pytest.raises(ValueError, match="dimensions"):
        timestep.ButcherTableau(a=np.zeros((3, 3)), b=[1.0], c=[0.0])


def test_constant_divergence_jacobian_is_fourth_order():
    c, t_end = 0.7, 1.0
    exact = np.exp(0.5 * c * t_end)
    errs = []
    for dt in (0.1, 0.05):
        system = ScalarOde(c)
        state = timestep.initial_state(np.ones(system.n))
        state = timestep.run(system, state, t_end, dt)
        errs.append(abs(state.jsqrt[0] - exact))
    ratio = errs[0] / errs[1]
    assert 15.0 <= ratio <= 17.0


def test_zero_divergence_keeps_jacobian_exactly():
    system = ScalarOde(0.0)
    state = timestep.initial_state(np.full(system.n, 2.0))
    out = timestep.rk_step(state, 0.3, timestep.classic_rk4(), system)
    assert np.array_equal(out.jsqrt, state.jsqrt)
    assert np.array_equal(out.u, state.u)


def test_scalar_two_line_lockstep():
    # with u = 1 the solution line is the Jacobian line verbatim, so the
    # stage arithmetic must agree to the last bit
    system = ScalarByValue(c=0.9)
    state = timestep.initial_state(np.ones(1), jsqrt0=np.array([1.3]))
    for _ in range(20):
        state = timestep.rk_step(state, 0.21, timestep.classic_rk4(), system)
    assert np.array_equal(state.uhat, state.jsqrt)
    assert state.u[0] == 1.0


class ScalarByValue:
    def __init__(self, c):
        self.c = c

    def div_velocity(self, t):
        return np.array([self.c])

    def rhs(self, jsqrt, u, t):
        return 0.5 * self.c * jsqrt * u

    def quadrature(self, t):
        return np.ones(1)


def test_stationary_coupled_step_matches_reference_rk4():
    cfg = ExperimentConfig(case="stationary")
    system = build_system(cfg, 8)
    x0 = system.motion.positions(0.0)
    u = mms_data(x0, 0.0, cfg)[2]
    state = timestep.initial_state(u)
    dt = time_step(cfg, 8)
    ones = np.ones_like(u)

    def f(t, v):
        return system.rhs(ones, v, t)

    u_ref = u.copy()
    n_steps = 40
    worst = 0.0
    for _ in range(n_steps):
        state = timestep.rk_step(state, dt, timestep.classic_rk4(), system)
        u_ref = reference_rk4_step(f, state.t - dt, u_ref, dt)
        worst = max(worst, np.abs(state.u - u_ref).max())
        assert np.array_equal(state.jsqrt, ones)
    assert worst <= n_steps * 1e-15


def test_temporal_order_on_fixed_grid():
    cfg = ExperimentConfig()
    system = build_system(cfg, 8)
    x0 = system.motion.positions(0.0)
    u0 = mms_data(x0, 0.0, cfg)[2]
    t_end = 0.5
    dt0 = time_step(cfg, 8)

    def final_u(dt):
        state = timestep.initial_state(u0.copy())
        return timestep.run(system, state, t_end, dt, jacobian_mode="exact").u

    ref = final_u(dt0 / 8.0)
    e1 = np.abs(final_u(dt0) - ref).max()
    e2 = np.abs(final_u(dt0 / 2.0) - ref).max()
    assert 11.0 <= e1 / e2 <= 21.0


def test_degenerate_jacobian_raises():
    system = ScalarOde(-80.0)
    state = timestep.initial_state(np.ones(system.n), jsqrt0=np.full(system.n, 2e-4))
    with pytest.raises(ale.DegenerateMeshError):
        timestep.run(system, state, 1.0, 0.5)


def test_run_to_zero_time_returns_initial_state():
    system = ScalarOde(1.0)
    state = timestep.initial_state(np.ones(system.n))
    out = timestep.run(system, state, 0.0, 0.1)
    assert out is state


def test_run_lands_exactly_on_t_end():
    system = ScalarOde(0.3)
    state = timestep.initial_state(np.ones(system.n))
    out = timestep.run(system, state, 1.0, 0.3)
    assert out.t == pytest.approx(1.0, abs=1e-14)
    assert abs(out.jsqrt[0] - np.exp(0.15)) < 1e-8


def test_nonfinite_solution_aborts_with_time():
    class Exploding(ScalarOde):
        def rhs(self, jsqrt, u, t):
            return np.full(self.n, np.inf if t > 0.5 else 0.0)

    system = Exploding(0.0)
    state = timestep.initial_state(np.ones(system.n))
    with pytest.raises(RuntimeError, match="t ="):
        timestep.run(system, state, 2.0, 0.2)


def test_exact_mode_requires_callable():
    cfg = ExperimentConfig()
    system = build_system(cfg, 8)
    state = timestep.initial_state(np.zeros(system.n))
    with pytest.raises(ValueError, match="jacobian mode"):
        timestep.rk_step(state, 0.1, timestep.classic_rk4(), system, jacobian_mode="approx")


class TestFilter:
    def test_zero_strength_is_identity(self):
        spec = timestep.undivided_difference_filter((9, 9), 0.0)
        state = timestep.SolverState(0.0, np.ones(18), np.ones(18), np.ones(18))
        assert timestep.filter_step(state, spec, np.ones(18)) is state

    def test_rows_annihilate_constants(self):
        spec = timestep.undivided_difference_filter((9, 9), 1.0)
        assert spec.diff.shape == (12, 18)
        assert np.abs(spec.diff @ np.ones(18)).max() == 0.0

    def test_matrix_conditions(self):
        rng = np.random.default_rng(3)
        spec = timestep.undivided_difference_filter((9, 9), 0.8)
        p = np.exp(rng.standard_normal(18))
        f = timestep.filter_matrix(spec, p)
        assert np.abs(f @ np.ones(18) - 1.0).max() <= 1e-13
        sym = p[:, None] * (f - np.eye(18))
        sym = sym + sym.T
        from sbpale.audit import jacobi_eigenvalues

        assert jacobi_eigenvalues(sym).max() <= 1e-12 * np.abs(sym).max()

    def test_contractive_in_weighted_norm(self):
        rng = np.random.default_rng(13)
        spec = timestep.undivided_difference_filter((9, 9), 1.0)
        p = np.exp(rng.standard_normal(18))
        f = timestep.filter_matrix(spec, p)
        for _ in range(10):
            u = rng.standard_normal(18)
            assert (f @ u) @ (p * (f @ u)) <= u @ (p * u) * (1.0 + 1e-13)

    def test_constant_state_invariant(self):
        spec = timestep.undivided_difference_filter((9, 9), 1.0)
        state = timestep.SolverState(
            0.0, np.full(18, 1.2), np.full(18, 1.2 * 3.3), np.full(18, 3.3)
        )
        out = timestep.filter_step(state, spec, np.linspace(1.0, 2.0, 18))
        assert np.abs(out.u - 3.3).max() <= 1e-14
        assert np.allclose(out.uhat, state.uhat, rtol=1e-14)

    def test_rejects_bad_rows_and_strengths(self):
        bad = np.zeros((1, 6))
        bad[0, :3] = [1.0, -2.0, 2.0]  # does not annihilate constants
        with pytest.raises(ValueError, match="constants"):
            timestep.FilterSpec(diff=bad, theta=0.5)
        with pytest.raises(ValueError, match="theta"):
            timestep.undivided_difference_filter((9,), -0.1)
        with pytest.raises(ValueError, match="theta"):
            timestep.undivided_difference_filter((9,), 1.5)

    def test_short_blocks_get_no_rows(self):
        spec = timestep.undivided_difference_filter((3, 9), 1.0, width=4)
        assert spec.diff.shape[0] == 6  # only the long block contributes
