"""
Time steppers for the singular diffusion equations
==================================================

Two families are integrated on the discrete interval:

* the power-law diffusion equation in L2 (exponent p in [1, 2]), either
  by the proximal implicit Euler scheme (one step = the proximal map of
  the energy `phi`, including the total-variation case p = 1) or by the
  explicit Euler-Maruyama scheme for the Yosida-regularized drift
  `grad_phi_eps`;
* the fast diffusion equation in H^{-1} (exponent r in (0, 1]), by
  implicit Euler solved with Newton on the monotone system.

The implicit steps are non-expansive exactly (proximal maps of convex
energies), which the tests exploit.  The explicit scheme requires the
stability guard dt <= c_stab * 8 * eps^2, a quarter (by default) of the
explicit-Euler limit 2/L for the drift's Lipschitz bound L = 1/(4 eps^2)
inherited from the resolvent smoothing bound.

All steppers broadcast over a trailing batch axis; a state of shape
(n, m) advances m independent paths (or coupled copies) at once.
"""

from dataclasses import dataclass

import numpy as np

from .convex import ConvergenceError, check_eps, check_p, radial_resolvent
from .energy import phi, regularized_drift_stats
from .grid import tridiag_solve_batch
from .noise import sample_increment

__all__ = [
    "SolverError",
    "EquationSpec",
    "SolverConfig",
    "Trajectory",
    "CoupledResult",
    "VIReport",
    "stability_limit",
    "prox_step_direct",
    "tv_prox",
    "step_regularized",
    "step_fd",
    "run_trajectory",
    "run_trajectory_with_moments",
    "run_coupled",
    "coupled_sup_error",
    "vi_check",
]

JACOBIAN_FLOOR = 1e-12   # magnitude floor inside Jacobians only
SCHEMES = ("prox", "regularized")


class SolverError(RuntimeError):
    """A time step produced invalid state (NaN/overflow) or bad input."""


def stability_limit(eps):
    """Explicit-Euler stability limit 2/L for the regularized drift."""
    return 8.0 * check_eps(eps) ** 2


@dataclass(frozen=True)
class EquationSpec:
    """Equation family and exponent; 'PL' lives in L2, 'FD' in H^{-1}."""

    family: str
    exponent: float

    def __post_init__(self):
        if self.family not in ("PL", "FD"):
            raise ValueError("family must be 'PL' or 'FD', got %r" % self.family)
        e = float(self.exponent)
        if self.family == "PL" and not 1.0 <= e <= 2.0:
            raise ValueError("PL exponent must lie in [1, 2], got %r" % e)
        if self.family == "FD" and not 0.0 < e <= 1.0:
            raise ValueError("FD exponent must lie in (0, 1], got %r" % e)

    @property
    def state_norm(self):
        return "L2" if self.family == "PL" else "Hminus1"


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping parameters shared by all runners."""

    dt: float
    T: float
    scheme: str = "prox"
    eps: float = None
    newton_tol: float = 1e-10
    newton_max: int = 200
    snapshot_stride: int = 100
    c_stab: float = 0.25
    tv_gap_tol: float = 1e-8
    tv_max_iter: int = 10000

    def __post_init__(self):
        if not 0.0 < self.dt <= self.T:
            raise ValueError("need 0 < dt <= T, got dt=%r T=%r"
                             % (self.dt, self.T))
        if self.scheme not in SCHEMES:
            raise ValueError("scheme must be one of %r, got %r"
                             % (SCHEMES, self.scheme))
        if self.scheme == "regularized":
            if self.eps is None:
                raise ValueError("the regularized scheme requires eps")
            limit = self.c_stab * stability_limit(self.eps)
            if self.dt > limit * (1.0 + 1e-12):
                raise ValueError(
                    "stability guard violated: dt=%g exceeds "
                    "c_stab * 8 * eps^2 = %g" % (self.dt, limit)
                )
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be >= 1")

    @property
    def n_steps(self):
        return int(round(self.T / self.dt))


# -- single implicit / explicit steps -----------------------------------------


def _odd_power(y, power):
    """|y|^power * sign(y) with value 0 at 0."""
    a = np.abs(y)
    return np.sign(y) * np.where(a > 0.0, np.maximum(a, 1e-300) ** power, 0.0)


def _prox_newton_phase(grid, p, dt, rhs, tol, maxit):
    """
    Damped Newton on the proximal objective of phi(p, .), 1 < p < 2.

    Fast and quadratically convergent away from gradient kinks; returns
    (u, converged).  Near p = 1 the solution's edge gradients shrink
    below double resolution and the u-space residual cannot reach tight
    tolerances, so callers fall through to the flux-splitting phase.
    """
    h2 = grid.h ** 2
    u = grid.solve_shifted(dt, rhs)
    for _ in range(maxit):
        g = grid.gradient(u)
        mag = np.abs(g)
        a = _odd_power(g, p - 1.0)
        G = u - rhs - dt * grid.divergence(a)
        resid = np.sqrt(grid.h * np.sum(G * G, axis=0))
        if np.all(resid <= tol):
            return u, True
        w = (p - 1.0) * np.maximum(mag, JACOBIAN_FLOOR) ** (p - 2.0)
        diag = 1.0 + dt * (w[:-1] + w[1:]) / h2
        off = -dt * w[1:-1] / h2
        delta = tridiag_solve_batch(off, diag, off, -G)
        # Armijo line search on the proximal objective
        obj0 = (0.5 * grid.h * np.sum((u - rhs) ** 2, axis=0)
                + dt * phi(grid, p, u))
        slope = grid.h * np.sum(G * delta, axis=0)
        alpha = np.where(resid <= tol, 0.0, 1.0)
        for _ in range(40):
            trial = u + alpha * delta
            obj = (0.5 * grid.h * np.sum((trial - rhs) ** 2, axis=0)
                   + dt * phi(grid, p, trial))
            ok = (alpha == 0.0) | (obj <= obj0 + 1e-4 * alpha * slope)
            if np.all(ok):
                break
            alpha = np.where(ok, alpha, 0.5 * alpha)
        u = u + alpha * delta
    return u, False


def _prox_flux_split(grid, p, dt, rhs, tol, maxit, aux=None):
    """
    Alternating flux splitting (ADMM) for the proximal step, 1 < p < 2.

    The edge flux w carries the nonlinearity through the closed-form
    radial resolvent, the node update is one cached tridiagonal solve,
    and the running dual variable y equals dt * a_p(w) exactly after
    every sweep.  The exit certificate is flux-consistent:

        primal = ||grad u - w||_h,
        graddev = ||u - rhs - dt div a_p(w)||_h = rho ||div(w - w_old)||_h,

    both driven below max(tol, round-off floor).  This certificate stays
    meaningful for p near 1, where the minimizer's edge gradients
    underflow and no u-space gradient norm can certify optimality.
    """
    if aux is None:
        rho = dt * 2.0 * np.pi / (grid.length * grid.h)
        u = grid.solve_shifted(dt, rhs)
        w = grid.gradient(u)
        y = dt * _odd_power(w, p - 1.0)
    else:
        w, y, rho = aux
    floor = 4e-15 * (1.0 + rho / grid.h)
    best = np.inf
    stale = 0
    for it in range(1, maxit + 1):
        u = grid.solve_shifted(
            rho, rhs + grid.divergence(y) - rho * grid.divergence(w))
        du = grid.gradient(u)
        v = du + y / rho
        w_new = np.sign(v) * radial_resolvent(p, dt / rho, np.abs(v))
        y = y + rho * (du - w_new)
        primal = float(np.max(np.sqrt(
            grid.h * np.sum((du - w_new) ** 2, axis=0))))
        graddev = float(np.max(rho * np.sqrt(
            grid.h * np.sum(grid.divergence(w_new - w) ** 2, axis=0))))
        w = w_new
        cert = max(primal, graddev)
        if cert <= max(tol, floor):
            return u, (w, y, rho)
        if cert < 0.9 * best:
            best, stale = cert, 0
        else:
            stale += 1
            if stale > 200:
                break
        if it % 10 == 0:
            if primal > 10.0 * graddev and rho < 1e6:
                rho *= 2.0
                floor = 4e-15 * (1.0 + rho / grid.h)
            elif graddev > 10.0 * primal and rho > 1e-9:
                rho /= 2.0
    raise ConvergenceError(
        "proximal flux splitting stalled at certificate %.3e "
        "(tol %.1e, %d sweeps)" % (cert, tol, it)
    )


def tv_prox(grid, weight, rhs, gap_tol=1e-8, max_iter=10000, q0=None):
    """
    Proximal map of weight * TV by projected dual ascent.

    Edge-dual variables are clamped to [-1, 1]; the iteration stops when
    the duality gap drops below ``gap_tol`` or the dual iterate stops
    moving at machine precision (the gap computation itself has a
    round-off floor).  Returns (u, q); pass q back in as ``q0`` to warm
    start consecutive proximal steps along a trajectory.
    """
    rhs = grid.scalar_field(rhs)
    if weight == 0.0:
        return rhs.copy(), np.zeros((grid.n_interior + 1,) + rhs.shape[1:])
    q = (np.zeros((grid.n_interior + 1,) + rhs.shape[1:])
         if q0 is None else np.array(q0, dtype=float, copy=True))
    tau = grid.h ** 2 / (4.0 * weight)
    gap = None
    for _ in range(max_iter):
        u = rhs + weight * grid.divergence(q)
        g = grid.gradient(u)
        gap = weight * grid.h * np.sum(np.abs(g) - q * g, axis=0)
        if np.max(gap) <= gap_tol:
            return u, q
        q_new = np.clip(q + tau * g, -1.0, 1.0)
        if np.max(np.abs(q_new - q)) < 1e-15:
            q = q_new
            return rhs + weight * grid.divergence(q), q
        q = q_new
    raise ConvergenceError(
        "TV dual ascent did not reach gap %.1e in %d iterations "
        "(max gap %.3e)" % (gap_tol, max_iter, float(np.max(gap)))
    )


NEWTON_PHASE_ITERS = 30
FLUX_SPLIT_MAX = 20000


def prox_step_direct(grid, p, dt, rhs, newton_tol=1e-10, newton_max=200,
                     tv_gap_tol=1e-8, tv_max_iter=10000, aux=None,
                     return_aux=False):
    """
    One implicit Euler step u = argmin 0.5*||u - rhs||^2 + dt * phi(p, u).

    p = 2 reduces to a cached tridiagonal solve; p in (1, 2) runs a
    damped-Newton phase and, when the u-space residual cannot certify
    newton_tol (unavoidable for p near 1), finishes with the robust
    flux-splitting solve; p = 1 is the dual-ascent TV proximal map.
    dt = 0 returns rhs unchanged.  ``aux``/``return_aux`` thread
    warm-start state for consecutive steps along a trajectory.
    """
    p = check_p(p)
    rhs = grid.scalar_field(rhs)
    if dt < 0.0:
        raise ValueError("dt must be nonnegative")
    if dt == 0.0:
        u, aux = rhs.copy(), None
    elif p == 2.0:
        u, aux = grid.solve_shifted(dt, rhs), None
    elif p == 1.0:
        u, q = tv_prox(grid, dt, rhs, gap_tol=tv_gap_tol,
                       max_iter=tv_max_iter,
                       q0=None if aux is None else aux)
        aux = q
    elif isinstance(aux, tuple):
        # an earlier step already fell through to flux splitting: stay there
        u, aux = _prox_flux_split(grid, p, dt, rhs, newton_tol,
                                  FLUX_SPLIT_MAX, aux=aux)
    else:
        u, done = _prox_newton_phase(grid, p, dt, rhs, newton_tol,
                                     min(newton_max, NEWTON_PHASE_ITERS))
        if done:
            aux = "newton"
        else:
            u, aux = _prox_flux_split(grid, p, dt, rhs, newton_tol,
                                      FLUX_SPLIT_MAX)
    return (u, aux) if return_aux else u


def step_regularized(grid, p, eps, dt, state, increment_field):
    """
    Explicit Euler-Maruyama step for the Yosida-regularized drift:
    state - dt * grad_phi_eps(p, eps, state) + increment.
    """
    drift = regularized_drift_stats(grid, p, eps, state)[0]
    new = state - dt * drift + increment_field
    if not np.all(np.isfinite(new)):
        raise SolverError(
            "regularized step produced non-finite state "
            "(p=%g, eps=%g, dt=%g); stability guard is dt <= 2*eps^2"
            % (p, eps, dt)
        )
    return new


def step_fd(grid, r, dt, state, increment_field, newton_tol=1e-10,
            newton_max=200):
    """
    Implicit Euler step for fast diffusion in H^{-1}: solve

        Y - dt * Laplacian(|Y|^{r-1} Y) = state + increment

    by Newton in the substituted variable Z = |Y|^{r-1} Y (for which the
    inverse map |Z|^{1/r-1} Z is C^1, so the Jacobian diag + dt*(-Lap)
    stays nonsingular even at zero).  Exit when the residual's H^{-1}
    norm falls below ``newton_tol``; r = 1 is a single tridiagonal solve.
    """
    r = float(r)
    if not 0.0 < r <= 1.0:
        raise ValueError("fast-diffusion exponent must lie in (0, 1]")
    b = grid.scalar_field(state) + increment_field
    if not np.all(np.isfinite(b)):
        raise SolverError("fast-diffusion step received non-finite data")
    if dt == 0.0:
        return b.copy()
    if r == 1.0:
        return grid.solve_shifted(dt, b)
    h2 = grid.h ** 2
    qexp = 1.0 / r
    z = _odd_power(b, r)  # warm start from the target data
    resid = None
    for _ in range(newton_max):
        y = _odd_power(z, qexp)
        F = y - dt * grid.laplacian(z) - b
        resid = grid.norm_hminus1(F)
        if np.all(resid <= newton_tol):
            return y
        w = qexp * np.abs(z) ** (qexp - 1.0)
        diag = w + 2.0 * dt / h2
        off = np.broadcast_to(-dt / h2, diag[:-1].shape).copy()
        delta = tridiag_solve_batch(off, diag, off, -F)
        merit0 = resid ** 2
        alpha = np.where(resid <= newton_tol, 0.0, 1.0)
        for _ in range(40):
            trial = z + alpha * delta
            Ft = _odd_power(trial, qexp) - dt * grid.laplacian(trial) - b
            merit = grid.norm_hminus1(Ft) ** 2
            ok = (alpha == 0.0) | (merit <= (1.0 - 1e-4 * alpha) * merit0)
            if np.all(ok):
                break
            alpha = np.where(ok, alpha, 0.5 * alpha)
        z = z + alpha * delta
    raise ConvergenceError(
        "fast-diffusion Newton did not reach tol=%.1e in %d iterations "
        "(max H^-1 residual %.3e)" % (newton_tol, newton_max,
                                      float(np.max(resid)))
    )


# -- trajectory runners ------------------------------------------------------


@dataclass
class Trajectory:
    """Strided snapshots plus running statistics of one (batched) run."""

    grid: object
    family: str
    exponent: float
    scheme: str
    eps: float
    dt: float
    times: np.ndarray
    snapshots: np.ndarray      # (n_snap, n_interior[, paths])
    noise_cum: np.ndarray      # cumulative noise at snapshot times
    l2_norms: np.ndarray
    hminus1_norms: np.ndarray
    energies: np.ndarray
    sup_l2: np.ndarray         # running sup over every step, per path
    res_pow_integral: object = None   # regularized runs only
    yos_sq_integral: object = None

    @property
    def T(self):
        return float(self.times[-1])

    columns = ("t", "L2_norm", "Hminus1_norm", "energy", "sup_error_vs_limit")

    def rows(self):
        """Per-snapshot statistics (path-averaged when batched)."""
        def avg(x):
            return x if x.ndim == 1 else x.mean(axis=tuple(range(1, x.ndim)))
        l2 = avg(self.l2_norms)
        hm = avg(self.hminus1_norms)
        en = avg(self.energies)
        return [(t, l2[i], hm[i], en[i], "") for i, t in enumerate(self.times)]


def _advance(grid, eq, cfg, state, inc_field, aux):
    """One step of the configured scheme; threads warm-start state."""
    if eq.family == "FD":
        state = step_fd(grid, eq.exponent, cfg.dt, state, inc_field,
                        cfg.newton_tol, cfg.newton_max)
        return state, aux
    if cfg.scheme == "regularized":
        return step_regularized(grid, eq.exponent, cfg.eps, cfg.dt, state,
                                inc_field), aux
    return prox_step_direct(grid, eq.exponent, cfg.dt, state + inc_field,
                            cfg.newton_tol, cfg.newton_max,
                            tv_gap_tol=cfg.tv_gap_tol,
                            tv_max_iter=cfg.tv_max_iter,
                            aux=aux, return_aux=True)


def _energy_of(grid, eq, state):
    if eq.family == "PL":
        return phi(grid, eq.exponent, state)
    r = eq.exponent
    return grid.h * np.sum(np.abs(state) ** (r + 1.0), axis=0) / (r + 1.0)


def _validate_run(grid, eq, cfg, spec, x0):
    if spec.grid is not grid and spec.grid != grid:
        raise ValueError("noise spectrum was built on a different grid")
    if cfg.scheme == "regularized" and eq.family == "FD":
        raise ValueError("the regularized scheme applies to the PL family")
    return grid.scalar_field(x0)


def run_trajectory(grid, eq, cfg, spec, x0, stream, paths=None):
    """
    Integrate one equation from 0 to T.

    ``stream`` is a numpy Generator (see `noise.noise_stream`); output is
    deterministic given (grid, eq, cfg, spec, x0, stream state).  With
    ``paths=m`` an independent m-path ensemble advances in one batch.
    """
    x0 = _validate_run(grid, eq, cfg, spec, x0)
    state = x0.copy() if paths is None else np.tile(x0[:, None], (1, paths))
    cum = np.zeros_like(state)
    aux = None
    n_steps = cfg.n_steps

    snap_times = [0.0]
    snaps = [state.copy()]
    cums = [cum.copy()]
    sup_l2 = grid.norm_l2(state)

    for m in range(1, n_steps + 1):
        inc = sample_increment(spec, cfg.dt, stream, size=paths)
        state, aux = _advance(grid, eq, cfg, state, inc.field, aux)
        cum = cum + inc.field
        sup_l2 = np.maximum(sup_l2, grid.norm_l2(state))
        if m % cfg.snapshot_stride == 0 or m == n_steps:
            snap_times.append(m * cfg.dt)
            snaps.append(state.copy())
            cums.append(cum.copy())

    return Trajectory(
        grid=grid, family=eq.family, exponent=eq.exponent,
        scheme=cfg.scheme if eq.family == "PL" else "prox",
        eps=cfg.eps, dt=cfg.dt,
        times=np.array(snap_times),
        snapshots=np.array(snaps),
        noise_cum=np.array(cums),
        l2_norms=np.array([grid.norm_l2(s) for s in snaps]),
        hminus1_norms=np.array([grid.norm_hminus1(s) for s in snaps]),
        energies=np.array([_energy_of(grid, eq, s) for s in snaps]),
        sup_l2=sup_l2,
    )


def run_trajectory_with_moments(grid, eq, cfg, spec, x0, stream, paths=None):
    """
    Regularized-scheme run that also accumulates the time integrals of
    the resolvent moment sum h|r_eps^p|^p and the squared Yosida moment
    sum h|a_p^eps|^2 along the path (left-endpoint rule).
    """
    if cfg.scheme != "regularized" or eq.family != "PL":
        raise ValueError("moment accumulation applies to regularized PL runs")
    x0 = _validate_run(grid, eq, cfg, spec, x0)
    state = x0.copy() if paths is None else np.tile(x0[:, None], (1, paths))
    cum = np.zeros_like(state)
    n_steps = cfg.n_steps
    snap_times = [0.0]
    snaps = [state.copy()]
    cums = [cum.copy()]
    sup_l2 = grid.norm_l2(state)
    res_int = 0.0
    yos_int = 0.0
    for m in range(1, n_steps + 1):
        drift, res_pow, yos_sq = regularized_drift_stats(
            grid, eq.exponent, cfg.eps, state)
        res_int = res_int + cfg.dt * res_pow
        yos_int = yos_int + cfg.dt * yos_sq
        inc = sample_increment(spec, cfg.dt, stream, size=paths)
        state = state - cfg.dt * drift + inc.field
        if not np.all(np.isfinite(state)):
            raise SolverError("regularized step produced non-finite state "
                              "at step %d" % m)
        cum = cum + inc.field
        sup_l2 = np.maximum(sup_l2, grid.norm_l2(state))
        if m % cfg.snapshot_stride == 0 or m == n_steps:
            snap_times.append(m * cfg.dt)
            snaps.append(state.copy())
            cums.append(cum.copy())
    return Trajectory(
        grid=grid, family=eq.family, exponent=eq.exponent,
        scheme=cfg.scheme, eps=cfg.eps, dt=cfg.dt,
        times=np.array(snap_times),
        snapshots=np.array(snaps),
        noise_cum=np.array(cums),
        l2_norms=np.array([grid.norm_l2(s) for s in snaps]),
        hminus1_norms=np.array([grid.norm_hminus1(s) for s in snaps]),
        energies=np.array([_energy_of(grid, eq, s) for s in snaps]),
        sup_l2=sup_l2,
        res_pow_integral=res_int,
        yos_sq_integral=yos_int,
    )


@dataclass
class CoupledResult:
    """Pathwise comparison of several equations under one noise path."""

    eq_list: list
    limit_index: int
    norm_kind: str
    times: np.ndarray
    errors: np.ndarray      # instantaneous error at snapshot times
    sup_errors: np.ndarray  # running sup over every step, final value
    sup_series: np.ndarray  # running sup recorded at snapshot times

    columns = ("t", "member", "exponent", "error", "running_sup_error")

    def rows(self):
        out = []
        for i, t in enumerate(self.times):
            for j, eq in enumerate(self.eq_list):
                out.append((t, j, eq.exponent,
                            float(np.mean(self.errors[i, j])),
                            float(np.mean(self.sup_series[i, j]))))
        return out


def run_coupled(grid, eq_list, cfg, spec, x0, stream, norm_kind=None,
                limit_index=-1, paths=None, schemes=None):
    """
    Advance several equations of one family on the identical Wiener
    increments and track the distance of each member to the designated
    limit member (default: the last).

    ``schemes`` optionally overrides the configured scheme per member,
    enabling mixed prox/regularized comparisons on a shared path.
    """
    if len(eq_list) == 0:
        raise ValueError("eq_list must be nonempty")
    fam = eq_list[0].family
    if any(eq.family != fam for eq in eq_list):
        raise ValueError("all coupled equations must share one family")
    if norm_kind is None:
        norm_kind = eq_list[0].state_norm
    if schemes is None:
        schemes = [cfg.scheme] * len(eq_list)
    if len(schemes) != len(eq_list):
        raise ValueError("one scheme per equation required")
    cfgs = [cfg if s == cfg.scheme else
            SolverConfig(dt=cfg.dt, T=cfg.T, scheme=s, eps=cfg.eps,
                         newton_tol=cfg.newton_tol, newton_max=cfg.newton_max,
                         snapshot_stride=cfg.snapshot_stride,
                         c_stab=cfg.c_stab, tv_gap_tol=cfg.tv_gap_tol,
                         tv_max_iter=cfg.tv_max_iter)
            for s in schemes]
    x0 = _validate_run(grid, eq_list[0], cfgs[0], spec, x0)
    base = x0.copy() if paths is None else np.tile(x0[:, None], (1, paths))
    states = [base.copy() for _ in eq_list]
    duals = [None] * len(eq_list)
    limit_index = range(len(eq_list))[limit_index]

    def dist(a, b):
        return grid.norm(a - b, norm_kind)

    sup = np.zeros((len(eq_list),) + np.shape(dist(base, base)))
    times = [0.0]
    errors = [np.array([dist(s, states[limit_index]) for s in states])]
    sup_series = [sup.copy()]
    for m in range(1, cfg.n_steps + 1):
        inc = sample_increment(spec, cfg.dt, stream, size=paths)
        for j, eq in enumerate(eq_list):
            states[j], duals[j] = _advance(grid, eq, cfgs[j], states[j],
                                           inc.field, duals[j])
        ref = states[limit_index]
        err = np.array([dist(s, ref) for s in states])
        sup = np.maximum(sup, err)
        if m % cfg.snapshot_stride == 0 or m == cfg.n_steps:
            times.append(m * cfg.dt)
            errors.append(err)
            sup_series.append(sup.copy())
    return CoupledResult(
        eq_list=list(eq_list), limit_index=limit_index, norm_kind=norm_kind,
        times=np.array(times), errors=np.array(errors),
        sup_errors=sup, sup_series=np.array(sup_series),
    )


def coupled_sup_error(grid, eq_list, cfg, spec, x0, stream, norm_kind=None,
                      limit_index=-1, paths=None, schemes=None):
    """Sup-over-time distance of each member to the limit member."""
    res = run_coupled(grid, eq_list, cfg, spec, x0, stream, norm_kind,
                      limit_index, paths, schemes)
    return res.sup_errors


# -- variational-inequality check ---------------------------------------------


def _cumtrapz(y, x):
    """Cumulative trapezoid along axis 0, starting at 0."""
    y = np.asarray(y, dtype=float)
    dx = np.diff(x)
    shape = (1,) + y.shape[1:]
    avg = 0.5 * (y[1:] + y[:-1])
    incs = avg * dx.reshape((-1,) + (1,) * (y.ndim - 1))
    return np.concatenate([np.zeros(shape), np.cumsum(incs, axis=0)], axis=0)


@dataclass
class VIReport:
    """Worst violation margins of the variational solution inequality."""

    p: float
    margins: np.ndarray      # (n_pairs, n_snapshots)
    worst: float

    columns = ("pair", "t_index", "margin")

    def rows(self):
        return [(i, j, self.margins[i, j])
                for i in range(self.margins.shape[0])
                for j in range(self.margins.shape[1])]

    def passed(self, tol):
        return self.worst <= tol


def vi_check(grid, candidate, p, test_pairs):
    """
    Evaluate the variational-inequality formulation along a trajectory.

    Each test pair (y0, G) with G constant in time induces the test
    process Y(t) = y0 - t G + (cumulative noise of the candidate's own
    path); the inequality

        0.5 ||X - Y||^2(t) + int_0^t (phi(X) - phi(Y))
            <= 0.5 ||x0 - y0||^2 + int_0^t <G, X - Y>

    is checked at all snapshot times with trapezoidal quadrature.  The
    report's margin is LHS - RHS (positive = violation); it is evidence
    over finitely many pairs, not a proof of solution-hood.
    """
    p = check_p(p)
    X = candidate.snapshots
    if X.ndim != 2:
        raise ValueError("vi_check expects a single-path trajectory")
    t = candidate.times
    x0 = X[0]
    margins = []
    for y0, G in test_pairs:
        y0 = grid.scalar_field(np.asarray(y0, dtype=float))
        G = grid.scalar_field(np.asarray(G, dtype=float))
        Y = y0[None, :] - t[:, None] * G[None, :] + candidate.noise_cum
        diff = X - Y
        half_sq = 0.5 * grid.h * np.sum(diff * diff, axis=1)
        phi_gap = (phi(grid, p, X.T) - phi(grid, p, Y.T))
        lhs = half_sq + _cumtrapz(phi_gap, t)
        pairing = grid.h * np.sum(G[None, :] * diff, axis=1)
        rhs = 0.5 * grid.h * np.sum((x0 - y0) ** 2) + _cumtrapz(pairing, t)
        margins.append(lhs - rhs)
    margins = np.array(margins)
    return VIReport(p=p, margins=margins, worst=float(np.max(margins)))
