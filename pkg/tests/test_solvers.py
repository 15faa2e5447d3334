import numpy as np
import pytest

from sdlab import Grid1D, build_spectrum, noise_stream
from sdlab.energy import phi
from sdlab.solvers import (
    EquationSpec,
    SolverConfig,
    coupled_sup_error,
    prox_step_direct,
    run_coupled,
    run_trajectory,
    stability_limit,
    step_fd,
    step_regularized,
    tv_prox,
    vi_check,
)
from oracles import coordinate_descent, grid_search_refine


class TestConfigTypes:
    def test_equation_validation(self):
        with pytest.raises(ValueError):
            EquationSpec("PL", 2.5)
        with pytest.raises(ValueError):
            EquationSpec("FD", 0.0)
        with pytest.raises(ValueError):
            EquationSpec("XX", 1.0)
        assert EquationSpec("PL", 1.5).state_norm == "L2"
        assert EquationSpec("FD", 0.5).state_norm == "Hminus1"

    def test_solver_config_validation(self):
        with pytest.raises(ValueError):
            SolverConfig(dt=0.2, T=0.1)
        with pytest.raises(ValueError):
            SolverConfig(dt=0.01, T=1.0, scheme="regularized")
        # stability guard dt <= c_stab * 8 * eps^2
        with pytest.raises(ValueError, match="stability"):
            SolverConfig(dt=0.01, T=1.0, scheme="regularized", eps=0.01)
        SolverConfig(dt=0.001, T=1.0, scheme="regularized", eps=0.05)
        assert stability_limit(0.05) == pytest.approx(0.02)


class TestProxStep:
    def test_zero_dt(self, grid64, rng):
        rhs = rng.standard_normal(64)
        for p in (1.0, 1.5, 2.0):
            assert np.array_equal(prox_step_direct(grid64, p, 0.0, rhs), rhs)

    def test_p2_matches_tridiagonal(self, grid64, rng):
        rhs = rng.standard_normal(64)
        u = prox_step_direct(grid64, 2.0, 0.04, rhs)
        residual = u - 0.04 * grid64.laplacian(u) - rhs
        assert np.max(np.abs(residual)) < 1e-9

    @pytest.mark.parametrize("p", [1.125, 1.5, 1.875])
    def test_optimality_general_p(self, grid64, rng, p):
        rhs = rng.standard_normal(64)
        dt = 0.02
        u = prox_step_direct(grid64, p, dt, rhs)
        base = 0.5 * grid64.norm_l2(u - rhs) ** 2 + dt * phi(grid64, p, u)
        for _ in range(40):
            d = rng.standard_normal(64) * 1e-6
            trial = 0.5 * grid64.norm_l2(u + d - rhs) ** 2 \
                + dt * phi(grid64, p, u + d)
            assert trial >= base - 1e-14

    def test_tv_prox_constant_small_grid(self, rng):
        # 4-dimensional grid-search oracle; for constant data the shrunk
        # field is also hand-computable: m = c - dt/(2h)
        g = Grid1D(4, 1.0)
        c = 0.8
        rhs = c * np.ones(4)
        dt = 0.03
        u = prox_step_direct(g, 1.0, dt, rhs, tv_gap_tol=1e-12)

        def objective(w):
            return 0.5 * g.h * np.sum((w - rhs) ** 2) + dt * g.tv(w)

        x, val = grid_search_refine(objective, rhs, span=0.5,
                                    step_target=1e-5)
        assert np.max(np.abs(u - x)) < 1e-4
        assert objective(u) <= val + 1e-10
        assert np.allclose(u, c - dt / (2 * g.h), atol=1e-10)

    def test_tv_prox_gap_certificate(self, grid64, rng):
        rhs = rng.standard_normal(64)
        u, q = tv_prox(grid64, 0.05, rhs, gap_tol=1e-10)
        g = grid64.gradient(u)
        gap = 0.05 * grid64.h * np.sum(np.abs(g) - q * g)
        assert gap <= 1e-10
        assert np.max(np.abs(q)) <= 1.0

    def test_flux_split_matches_newton_region(self, grid64, rng):
        # smooth data where the damped-Newton phase certifies on its own
        u0 = grid64.mode_matrix(4) @ np.array([0.5, 0.2, 0.1, 0.05])
        a = prox_step_direct(grid64, 1.9, 0.005, u0)
        b, aux = prox_step_direct(grid64, 1.9, 0.005, u0, return_aux=True)
        assert np.allclose(a, b, atol=1e-9)


class TestRegularizedStep:
    def test_equilibrium(self, grid64):
        z = np.zeros(64)
        out = step_regularized(grid64, 1.5, 0.1, 1e-3, z, z)
        assert np.all(out == 0.0)

    def test_p2_closed_form(self, grid64, rng):
        state = rng.standard_normal(64)
        dW = rng.standard_normal(64) * 0.01
        eps, dt = 0.2, 1e-3
        got = step_regularized(grid64, 2.0, eps, dt, state, dW)
        drift = grid64.resolvent(
            eps, -grid64.laplacian(grid64.resolvent(eps, state))) / (1 + eps)
        assert np.max(np.abs(got - (state - dt * drift + dW))) < 1e-10

    def test_vanishing_drift(self, grid64, rng):
        state = rng.standard_normal(64)
        dW = rng.standard_normal(64) * 0.01
        out = step_regularized(grid64, 1.3, 0.3, 1e-12, state, dW)
        assert np.max(np.abs(out - (state + dW))) < 1e-9

    def test_nan_detection(self, grid64):
        bad = np.full(64, 1e308)
        with np.errstate(invalid="ignore", over="ignore"):
            with pytest.raises(Exception):
                step_regularized(grid64, 1.5, 1e-3, 1.0, bad, bad)


class TestFastDiffusionStep:
    def test_r1_heat_reduction(self, grid64, rng):
        b = rng.standard_normal(64)
        got = step_fd(grid64, 1.0, 0.1, b, 0.0)
        assert np.max(np.abs(got - grid64.solve_shifted(0.1, b))) < 1e-9

    def test_zero(self, grid64):
        z = np.zeros(64)
        assert np.all(step_fd(grid64, 0.5, 0.1, z, z) == 0.0)

    def test_small_grid_brute_force(self, rng):
        # implicit step minimizes 1/2 ||y-b||_{H^-1}^2 + dt/(r+1) sum h|y|^{r+1}
        g = Grid1D(4, 1.0)
        r, dt = 0.5, 0.1
        b = rng.standard_normal(4)
        y = step_fd(g, r, dt, b, 0.0, newton_tol=1e-13)

        def objective(w):
            return (0.5 * g.norm_hminus1(w - b) ** 2
                    + dt / (r + 1) * g.h * np.sum(np.abs(w) ** (r + 1)))

        x, val = coordinate_descent(objective, b, span=1.0, sweeps=300)
        assert np.max(np.abs(y - x)) < 1e-4
        assert objective(y) <= val + 1e-10

    def test_residual_certificate(self, grid64, rng):
        b = rng.standard_normal(64)
        y = step_fd(grid64, 0.6, 0.05, b, 0.0, newton_tol=1e-12)
        F = y - 0.05 * grid64.laplacian(np.sign(y) * np.abs(y) ** 0.6) - b
        assert grid64.norm_hminus1(F) <= 1e-12

    def test_exponent_validation(self, grid64):
        with pytest.raises(ValueError):
            step_fd(grid64, 1.5, 0.1, np.zeros(64), 0.0)


class TestTrajectories:
    def test_single_step(self, grid32, spec32):
        cfg = SolverConfig(dt=0.05, T=0.05)
        traj = run_trajectory(grid32, EquationSpec("PL", 2.0), cfg, spec32,
                              grid32.zeros(), noise_stream(1))
        assert len(traj.times) == 2
        assert traj.times[-1] == pytest.approx(0.05)

    def test_zero_noise_heat_decay(self, grid32):
        spec0 = build_spectrum(grid32, 1.0, 0.1, 0)
        m = grid32.spectral_mode(1)
        cfg = SolverConfig(dt=1e-4, T=0.1, snapshot_stride=1000)
        traj = run_trajectory(grid32, EquationSpec("PL", 2.0), cfg, spec0,
                              m.values, noise_stream(1))
        exact = np.exp(-m.mu_h * 0.1)
        assert traj.l2_norms[-1] == pytest.approx(exact, rel=5e-3)

    def test_restart_determinism(self, grid32, spec32):
        cfg = SolverConfig(dt=1e-3, T=0.02, snapshot_stride=5)
        a = run_trajectory(grid32, EquationSpec("PL", 1.5), cfg, spec32,
                           grid32.zeros(), noise_stream(9, 3))
        b = run_trajectory(grid32, EquationSpec("PL", 1.5), cfg, spec32,
                           grid32.zeros(), noise_stream(9, 3))
        assert np.array_equal(a.snapshots, b.snapshots)
        assert np.array_equal(a.noise_cum, b.noise_cum)

    def test_regularized_requires_guard(self, grid32, spec32):
        with pytest.raises(ValueError):
            SolverConfig(dt=1e-2, T=0.1, scheme="regularized", eps=0.01)

    def test_fd_rejects_regularized(self, grid32, spec32):
        cfg = SolverConfig(dt=1e-3, T=0.01, scheme="regularized", eps=0.1)
        with pytest.raises(ValueError):
            run_trajectory(grid32, EquationSpec("FD", 0.8), cfg, spec32,
                           grid32.zeros(), noise_stream(1))

    def test_batched_paths(self, grid32, spec32):
        cfg = SolverConfig(dt=1e-3, T=0.01, snapshot_stride=5)
        traj = run_trajectory(grid32, EquationSpec("PL", 2.0), cfg, spec32,
                              grid32.zeros(), noise_stream(3), paths=6)
        assert traj.snapshots.shape[2] == 6
        assert traj.sup_l2.shape == (6,)


class TestCoupled:
    def test_identical_members(self, grid32, spec32):
        cfg = SolverConfig(dt=1e-3, T=0.02, snapshot_stride=5)
        eqs = [EquationSpec("PL", 1.7), EquationSpec("PL", 1.7)]
        sup = coupled_sup_error(grid32, eqs, cfg, spec32,
                                grid32.spectral_mode(1).values,
                                noise_stream(5))
        assert np.max(np.abs(sup)) < 1e-12

    def test_mixed_families_rejected(self, grid32, spec32):
        cfg = SolverConfig(dt=1e-3, T=0.01)
        with pytest.raises(ValueError):
            run_coupled(grid32, [EquationSpec("PL", 1.5),
                                 EquationSpec("FD", 0.5)],
                        cfg, spec32, grid32.zeros(), noise_stream(1))

    def test_zero_noise_richardson(self, grid32):
        # deterministic p-flow: errors against a dt/10 reference within 2x
        spec0 = build_spectrum(grid32, 1.0, 0.1, 0)
        x0 = grid32.mode_matrix(2) @ np.array([1.0, 0.3])
        eqs = [EquationSpec("PL", 1.6), EquationSpec("PL", 1.4)]
        cfg = SolverConfig(dt=2e-3, T=0.1, snapshot_stride=10)
        sup_coarse = coupled_sup_error(grid32, eqs, cfg, spec0, x0,
                                       noise_stream(1))
        cfg_f = SolverConfig(dt=2e-4, T=0.1, snapshot_stride=100)
        sup_fine = coupled_sup_error(grid32, eqs, cfg_f, spec0, x0,
                                     noise_stream(1))
        assert sup_coarse[0] == pytest.approx(sup_fine[0], rel=1.0)

    def test_schemes_override(self, grid32, spec32):
        cfg = SolverConfig(dt=1e-3, T=0.01, scheme="regularized", eps=0.05)
        eqs = [EquationSpec("PL", 1.5), EquationSpec("PL", 1.5)]
        res = run_coupled(grid32, eqs, cfg, spec32, grid32.zeros(),
                          noise_stream(2), schemes=["prox", "regularized"])
        # different schemes on one path must produce a nonzero gap
        assert res.sup_errors[0] > 0


class TestVICheck:
    def test_structural_case(self, grid32, spec32):
        # G = 0, Y(0) = x: the inequality reduces to an energy comparison
        # of the flow against the driftless shifted path
        cfg = SolverConfig(dt=1e-3, T=0.05, snapshot_stride=2)
        x0 = grid32.mode_matrix(2) @ np.array([0.6, 0.2])
        traj = run_trajectory(grid32, EquationSpec("PL", 1.5), cfg, spec32,
                              x0, noise_stream(11))
        rep = vi_check(grid32, traj, 1.5, [(x0, np.zeros(32))])
        assert rep.worst <= 0.02

    def test_deterministic_gradient_flow(self, grid32):
        spec0 = build_spectrum(grid32, 1.0, 0.1, 0)
        x0 = grid32.mode_matrix(2) @ np.array([0.6, 0.2])
        cfg = SolverConfig(dt=1e-4, T=0.05, snapshot_stride=10)
        traj = run_trajectory(grid32, EquationSpec("PL", 1.5), cfg, spec0,
                              x0, noise_stream(1))
        rep = vi_check(grid32, traj, 1.5,
                       [(np.zeros(32), np.zeros(32)),
                        (x0, np.zeros(32))])
        assert rep.worst <= 1e-6

    def test_p2_fine_dt_quantitative(self, grid32, spec32):
        cfg = SolverConfig(dt=1e-4, T=0.1, snapshot_stride=20)
        x0 = grid32.mode_matrix(2) @ np.array([0.6, 0.2])
        traj = run_trajectory(grid32, EquationSpec("PL", 2.0), cfg, spec32,
                              x0, noise_stream(17))
        pairs = [(x0, np.zeros(32)),
                 (np.zeros(32), -grid32.laplacian(x0)),
                 (0.5 * x0, grid32.spectral_mode(1).values)]
        rep = vi_check(grid32, traj, 2.0, pairs)
        assert rep.worst <= 0.01


class TestNonExpansiveness:
    @pytest.mark.parametrize("p", [1.0, 1.5, 2.0])
    def test_prox_spot(self, grid16, rng, p):
        for _ in range(25):
            a = rng.standard_normal(16)
            b = rng.standard_normal(16)
            w = rng.standard_normal(16)
            ua = prox_step_direct(grid16, p, 0.01, a + w, newton_tol=1e-13,
                                  tv_gap_tol=0.0)
            ub = prox_step_direct(grid16, p, 0.01, b + w, newton_tol=1e-13,
                                  tv_gap_tol=0.0)
            assert grid16.norm_l2(ua - ub) <= grid16.norm_l2(a - b) + 1e-12

    @pytest.mark.parametrize("r", [0.5, 1.0])
    def test_fd_spot(self, grid16, rng, r):
        for _ in range(25):
            a = rng.standard_normal(16)
            b = rng.standard_normal(16)
            w = rng.standard_normal(16)
            ya = step_fd(grid16, r, 0.05, a, w, newton_tol=1e-13)
            yb = step_fd(grid16, r, 0.05, b, w, newton_tol=1e-13)
            assert grid16.norm_hminus1(ya - yb) \
                <= grid16.norm_hminus1(a - b) + 1e-12


class TestEnergyDecay:
    @pytest.mark.parametrize("p", [1.0, 1.5, 2.0])
    def test_zero_noise_proximal_descent(self, grid32, p):
        spec0 = build_spectrum(grid32, 1.0, 0.1, 0)
        x0 = grid32.mode_matrix(3) @ np.array([1.0, -0.4, 0.2])
        cfg = SolverConfig(dt=5e-3, T=0.25, snapshot_stride=1)
        traj = run_trajectory(grid32, EquationSpec("PL", p), cfg, spec0,
                              x0, noise_stream(1))
        assert np.all(np.diff(traj.energies) <= 1e-10)
