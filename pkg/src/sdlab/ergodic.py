"""
Time averaging and invariant-measure diagnostics
================================================

Long-run statistics of the diffusion semigroups: Krylov-Bogoliubov time
averages of bounded test functionals over one long path (ergodicity
makes one path sufficient), a weak-distance proxy over a fixed
functional panel, and the tightness bound built from the time average of
the W^{1,p} moment.

The panel consists of bounded continuous functionals with |F| <= 1 and
recorded Lipschitz constants: Gaussian bumps in L2 and tanh-compressed
spectral coordinates.  The space of bounded continuous functionals is
not exhaustible; a fixed, config-recorded panel makes the weak distance
reproducible.

For the linear equation (p = 2) the invariant law is exactly Gaussian
with independent modes of variance lambda_k / (2 mu_k^h); it is the
module's primary oracle and `stationary_mode_std` exposes it.
"""

from dataclasses import dataclass

import numpy as np

from .solvers import EquationSpec, run_trajectory
from .noise import noise_stream

__all__ = [
    "GaussianBump",
    "ModeTanh",
    "default_panel",
    "stationary_mode_std",
    "time_average",
    "series_stderr",
    "weak_distance",
    "tightness_report",
    "TightnessReport",
    "invariant_convergence",
    "InvariantReport",
]

_trapz = getattr(np, "trapezoid", None) or np.trapz


class GaussianBump:
    """F(u) = exp(-||u - c||_{L2}^2 / (2 w^2)); bounded by 1."""

    def __init__(self, grid, center, width):
        self.grid = grid
        self.center = grid.scalar_field(np.broadcast_to(
            np.asarray(center, dtype=float), (grid.n_interior,)).copy())
        self.width = float(width)
        if not self.width > 0.0:
            raise ValueError("bump width must be positive")
        self.label = "bump(w=%.3g)" % self.width

    @property
    def lipschitz(self):
        # max of |x| exp(-x^2/2) / w over x
        return np.exp(-0.5) / self.width

    def __call__(self, u):
        d = np.asarray(u, dtype=float) - (
            self.center if np.asarray(u).ndim == 1 else self.center[:, None])
        sq = self.grid.h * np.sum(d * d, axis=0)
        return np.exp(-sq / (2.0 * self.width ** 2))


class ModeTanh:
    """F(u) = tanh(<u, e_k>_h / s); bounded by 1, Lipschitz 1/s."""

    def __init__(self, grid, mode, scale):
        self.grid = grid
        self.mode = int(mode)
        self.scale = float(scale)
        if not self.scale > 0.0:
            raise ValueError("tanh scale must be positive")
        self._ek = grid.spectral_mode(self.mode).values
        self.label = "tanh(k=%d,s=%.3g)" % (self.mode, self.scale)

    @property
    def lipschitz(self):
        return 1.0 / self.scale

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        ek = self._ek if u.ndim == 1 else self._ek[:, None]
        return np.tanh(self.grid.h * np.sum(ek * u, axis=0) / self.scale)


def stationary_mode_std(spec, k):
    """Exact stationary std of <X, e_k>_h for the linear (p = 2) equation."""
    mode = spec.grid.spectral_mode(k)
    lam = spec.lambdas[k - 1] if k <= spec.n_modes else 0.0
    return np.sqrt(lam / (2.0 * mode.mu_h))


def default_panel(grid, spec, seed=0, n_tanh=4, n_bumps=4):
    """
    Reference panel of 8 bounded functionals: tanh of the first spectral
    coordinates scaled to the linear stationary law, plus Gaussian bumps
    at random smooth centers.
    """
    rng = np.random.default_rng(seed)
    panel = []
    for k in range(1, n_tanh + 1):
        s = max(stationary_mode_std(spec, k), 1e-6)
        panel.append(ModeTanh(grid, k, s))
    amp = max(stationary_mode_std(spec, 1), 1e-6)
    for _ in range(n_bumps):
        coeff = rng.standard_normal(3) * amp
        center = sum(c * grid.spectral_mode(k + 1).values
                     for k, c in enumerate(coeff))
        panel.append(GaussianBump(grid, center, width=2.0 * amp))
    return panel


def time_average(traj, functional, burn_in):
    """
    Trapezoidal time average of F(X(t)) over (burn_in, T].

    Raises ValueError when the trajectory does not extend past burn_in.
    """
    t = traj.times
    keep = t >= burn_in
    if np.count_nonzero(keep) < 2 or traj.T <= burn_in:
        raise ValueError(
            "trajectory of duration %g does not extend past burn_in %g"
            % (traj.T, burn_in)
        )
    values = functional(traj.snapshots[keep].T)
    ts = t[keep]
    return float(_trapz(values, ts) / (ts[-1] - ts[0]))


def series_stderr(traj, functional, burn_in, n_batches=20):
    """Batch-means standard error of the time average (autocorrelation-aware)."""
    t = traj.times
    keep = t >= burn_in
    values = functional(traj.snapshots[keep].T)
    n = values.size
    n_batches = min(n_batches, n)
    if n_batches < 2:
        return float("inf")
    usable = n - n % n_batches
    means = values[:usable].reshape(n_batches, -1).mean(axis=1)
    return float(np.std(means, ddof=1) / np.sqrt(n_batches))


def weak_distance(avg_a, avg_b):
    """
    Max over the panel of |avg_a - avg_b|, a bounded-Lipschitz-type proxy
    for the weak distance of the sampled laws.
    """
    avg_a = np.asarray(avg_a, dtype=float)
    avg_b = np.asarray(avg_b, dtype=float)
    if avg_a.shape != avg_b.shape or avg_a.size == 0:
        raise ValueError("panels must be nonempty and of equal length")
    return float(np.max(np.abs(avg_a - avg_b)))


@dataclass
class TightnessReport:
    """Empirical occupation of the compact sublevel set K_theta."""

    p: float
    theta: float
    threshold: float          # 1/theta + |domain|
    time_avg_moment: float    # time average of ||X||_{1,p}^p
    outside_fraction: float
    markov_bound: float       # time_avg / threshold (exact for plain means)
    hs_envelope: float        # 3 * theta * ||B||_HS^2

    columns = ("theta", "threshold", "time_avg_moment", "outside_fraction",
               "markov_bound", "hs_envelope")

    def rows(self):
        return [(self.theta, self.threshold, self.time_avg_moment,
                 self.outside_fraction, self.markov_bound, self.hs_envelope)]

    @property
    def markov_ok(self):
        return self.outside_fraction <= self.markov_bound + 1e-12

    @property
    def envelope_ok(self):
        return self.outside_fraction <= self.hs_envelope + 1e-12


def tightness_report(traj, p, spec, theta, burn_in=0.0):
    """
    Occupation statistics of K_theta = { ||x||_{1,p}^p <= 1/theta + |L| }.

    Uses plain snapshot means (not trapezoids) so the reported Markov
    bound outside_fraction <= time_avg / threshold is an arithmetic
    identity of the sample; the desk-scale envelope compares the
    fraction against 3 * theta * ||B||_HS^2.
    """
    if not theta > 0.0:
        raise ValueError("theta must be positive")
    grid = traj.grid
    keep = traj.times >= burn_in
    snaps = traj.snapshots[keep]
    if p == 1.0:
        moment = np.array([grid.tv(s) for s in snaps])
    else:
        moment = np.array([grid.seminorm_w1p(s, p) ** p for s in snaps])
    threshold = 1.0 / theta + grid.length
    avg = float(np.mean(moment))
    outside = float(np.mean(moment > threshold))
    return TightnessReport(
        p=float(p), theta=float(theta), threshold=threshold,
        time_avg_moment=avg, outside_fraction=outside,
        markov_bound=min(1.0, avg / threshold),
        hs_envelope=3.0 * theta * spec.hs_norm_sq,
    )


@dataclass
class InvariantReport:
    """Panel averages per exponent and weak distances to the limit."""

    p_seq: np.ndarray
    p_limit: float
    labels: list
    averages: np.ndarray        # (len(p_seq)+1, n_panel); last row = limit
    stderrs: np.ndarray
    distances: np.ndarray       # per member of p_seq
    distance_errs: np.ndarray   # combined MC error at the argmax functional
    burn_in: float
    trend_ok: bool

    columns = ("p", "functional_id", "average", "stderr",
               "distance_to_limit", "status")

    def status_of(self, p):
        # at the endpoint p = 1 uniqueness of the long-run law is an open
        # question; its statistics are diagnostics, not estimates of a
        # provably unique measure
        return "conjectural" if p == 1.0 else "ergodic"

    def rows(self):
        ps = list(self.p_seq) + [self.p_limit]
        dists = list(self.distances) + [0.0]
        out = []
        for i, p in enumerate(ps):
            for j, lab in enumerate(self.labels):
                out.append((p, lab, self.averages[i, j], self.stderrs[i, j],
                            dists[i], self.status_of(p)))
        return out


def invariant_convergence(grid, p_seq, p_limit, panel, spec, cfg, burn_in,
                          master_seed, x0=None, keep_trajectories=None):
    """
    Long-run panel averages for each exponent and their weak distances to
    the limit exponent.

    One long trajectory per exponent (independent streams derived from
    ``master_seed``), averages taken after ``burn_in`` (flagged in the
    report).  The trend flag checks that distances ordered by
    |p - p_limit| are nonincreasing within twice the combined Monte
    Carlo error.  Pass a list as ``keep_trajectories`` to receive the
    per-exponent trajectories (limit last) for further diagnostics.
    """
    if len(panel) == 0:
        raise ValueError("functional panel must be nonempty")
    p_all = list(p_seq) + [p_limit]
    if x0 is None:
        x0 = grid.zeros()
    averages = np.empty((len(p_all), len(panel)))
    stderrs = np.empty_like(averages)
    for i, p in enumerate(p_all):
        stream = noise_stream(master_seed, i)
        traj = run_trajectory(grid, EquationSpec("PL", p), cfg, spec, x0,
                              stream)
        if keep_trajectories is not None:
            keep_trajectories.append(traj)
        for j, F in enumerate(panel):
            averages[i, j] = time_average(traj, F, burn_in)
            stderrs[i, j] = series_stderr(traj, F, burn_in)
    ref = averages[-1]
    ref_se = stderrs[-1]
    dists = np.empty(len(p_seq))
    derrs = np.empty(len(p_seq))
    for i in range(len(p_seq)):
        gaps = np.abs(averages[i] - ref)
        jstar = int(np.argmax(gaps))
        dists[i] = gaps[jstar]
        derrs[i] = float(np.hypot(stderrs[i, jstar], ref_se[jstar]))
    order = np.argsort(-np.abs(np.asarray(p_seq, dtype=float) - p_limit))
    trend_ok = True
    for a, b in zip(order[:-1], order[1:]):
        if dists[b] > dists[a] + 2.0 * (derrs[a] + derrs[b]):
            trend_ok = False
    return InvariantReport(
        p_seq=np.asarray(p_seq, dtype=float), p_limit=float(p_limit),
        labels=[F.label for F in panel], averages=averages, stderrs=stderrs,
        distances=dists, distance_errs=derrs, burn_in=float(burn_in),
        trend_ok=trend_ok,
    )
