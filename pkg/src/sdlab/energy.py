"""
Energy functionals on the discrete interval
===========================================

The scalar-field energies

    phi(p, u)        = (1/p) sum_e h |grad u|^p        (p = 1: total
                       variation of the zero extension, boundary edges
                       included),
    phi_eps(p, e, u) = sum_e h j_eps^p(grad R_eps u),

their exact h-weighted L2 gradients (the smoothed diffusion operators
used by the explicit time stepper), and the edge-field energies
psi^p / psi_eps^p.  Also the numerical probes for variational
convergence: pointwise envelope gaps, weak-liminf oscillation probes and
the scalar-level Legendre-transform identity of Moreau envelopes.

The weak topology of the continuum theory has no finite-dimensional
counterpart (weak = strong here); the liminf probes emulate weak-but-not-
strong convergence with oscillatory sequences whose mode index grows, an
emulation documented as such, not a proof.
"""

from dataclasses import dataclass

import numpy as np

from .convex import (
    check_eps,
    check_p,
    legendre_sampled,
    radial_moreau,
    radial_resolvent,
)

__all__ = [
    "phi",
    "phi_eps",
    "grad_phi_eps",
    "regularized_drift_stats",
    "psi",
    "mosco_pointwise_report",
    "mosco_liminf_probe",
    "legendre_identity_check",
    "MoscoPointwiseReport",
    "MoscoLiminfReport",
    "LegendreIdentityReport",
]


def phi(grid, p, u):
    """
    Power-law Dirichlet energy (1/p) sum_e h |grad u|^p.

    Every discrete field has finite energy; for p = 1 this is the
    discrete total variation including the two boundary jumps.
    """
    p = check_p(p)
    g = np.abs(grid.gradient(u))
    return grid.h * np.sum(g ** p, axis=0) / p


def phi_eps(grid, p, eps, u):
    """
    Regularized energy sum_e h j_eps^p(grad R_eps u).

    Continuous in u; smooth with gradient `grad_phi_eps`.
    """
    p = check_p(p)
    eps = check_eps(eps)
    g = np.abs(grid.gradient(grid.resolvent(eps, u)))
    return grid.h * np.sum(radial_moreau(p, eps, g), axis=0)


def regularized_drift_stats(grid, p, eps, u):
    """
    Gradient of `phi_eps` together with the two integrand statistics
    tracked by the a priori bounds.

    Returns
    -------
    grad : ndarray
        -R_eps div[a_p^eps(grad R_eps u)], the exact h-weighted gradient.
    res_pow : ndarray or float
        sum_e h |r_eps^p(grad R_eps u)|^p (resolvent moment).
    yos_sq : ndarray or float
        sum_e h |a_p^eps(grad R_eps u)|^2 (squared Yosida moment).
    """
    p = check_p(p)
    eps = check_eps(eps)
    g = grid.gradient(grid.resolvent(eps, u))
    mag = np.abs(g)
    res = radial_resolvent(p, eps, mag)
    yos = (mag - res) / eps
    a = np.sign(g) * yos
    grad = -grid.resolvent(eps, grid.divergence(a))
    res_pow = grid.h * np.sum(res ** p, axis=0)
    yos_sq = grid.h * np.sum(yos * yos, axis=0)
    return grad, res_pow, yos_sq


def grad_phi_eps(grid, p, eps, u):
    """
    L2(h)-gradient of `phi_eps`: -R_eps div[a_p^eps(grad R_eps u)],
    with the sign-map Yosida approximation taking over at p = 1.
    """
    return regularized_drift_stats(grid, p, eps, u)[0]


def psi(grid, p, v, eps=None):
    """
    Edge-field energy sum_e h j^p(v), or its Moreau envelope
    sum_e h j_eps^p(v) when eps is given.
    """
    p = check_p(p)
    v = np.abs(grid.edge_field(v))
    if eps is None:
        return grid.h * np.sum(v ** p, axis=0) / p
    return grid.h * np.sum(radial_moreau(p, check_eps(eps), v), axis=0)


# -- variational-convergence probes -------------------------------------------


def _eventually_decreasing(gaps):
    """True when the sequence decreases strictly past its maximum."""
    k0 = int(np.argmax(gaps))
    tail = gaps[k0:]
    return bool(np.all(np.diff(tail) < 0.0)) if tail.size > 1 else True


@dataclass
class MoscoPointwiseReport:
    """Envelope gaps |phi_eps(p_n, u) - phi_eps(p_limit, u)| per sample."""

    p_seq: np.ndarray
    p_limit: float
    eps: float
    gaps: np.ndarray          # shape (len(p_seq), n_samples)
    decreasing: np.ndarray    # per-sample eventual-decrease flag
    below_tol: np.ndarray     # per-sample final gap < tol flag
    tol: float

    columns = ("n", "p_n", "gap", "decreasing_flag")

    def rows(self):
        out = []
        for j in range(self.gaps.shape[1]):
            for i, pn in enumerate(self.p_seq):
                out.append((i + 1, pn, self.gaps[i, j], int(self.decreasing[j])))
        return out

    @property
    def passed(self):
        return bool(np.all(self.decreasing) and np.all(self.below_tol))


def mosco_pointwise_report(grid, p_seq, p_limit, eps, u_samples, tol=1e-3):
    """
    Pointwise convergence of Moreau-regularized energies along p_seq.

    For each sample u the gap |phi_eps(p_n, eps, u) - phi_eps(p_limit,
    eps, u)| is tabulated; a sample passes when the gap sequence is
    eventually decreasing and its final value is below ``tol``.
    """
    p_seq = np.asarray([check_p(p) for p in p_seq], dtype=float)
    p_limit = check_p(p_limit)
    eps = check_eps(eps)
    if p_seq.size == 0 or len(u_samples) == 0:
        raise ValueError("p_seq and u_samples must be nonempty")
    gaps = np.empty((p_seq.size, len(u_samples)))
    for j, u in enumerate(u_samples):
        ref = phi_eps(grid, p_limit, eps, u)
        for i, pn in enumerate(p_seq):
            gaps[i, j] = abs(phi_eps(grid, pn, eps, u) - ref)
    decreasing = np.array([_eventually_decreasing(gaps[:, j])
                           for j in range(gaps.shape[1])])
    below = gaps[-1, :] < tol
    return MoscoPointwiseReport(p_seq, p_limit, eps, gaps, decreasing,
                                below, tol)


@dataclass
class MoscoLiminfReport:
    """Weak-liminf probe along an oscillatory edge-field sequence."""

    p_seq: np.ndarray
    p_limit: float
    amplitude: float
    values: np.ndarray        # psi^{p_n}(v_n)
    limit_value: float        # psi^{p_limit}(u)
    margin: float             # min over the tail of values - limit_value

    columns = ("n", "p_n", "value", "limit_value", "margin")

    def rows(self):
        return [(i + 1, pn, self.values[i], self.limit_value, self.margin)
                for i, pn in enumerate(self.p_seq)]

    def passed(self, tol=1e-6):
        return self.margin >= -tol


def mosco_liminf_probe(grid, p_seq, p_limit, u, amplitude, tail_fraction=0.25):
    """
    Probe condition (M1) of Mosco convergence for the edge energies.

    Builds v_n = u + amplitude * sin(n pi x / L) sampled at edge
    midpoints (mode index capped at the grid's Nyquist index), a
    sequence that converges weakly-but-not-strongly in the emulated
    sense, and reports min over the tail (the trailing ``tail_fraction``
    of the sequence) of psi^{p_n}(v_n) minus psi^{p_limit}(u).

    The finite tail stands in for a liminf, so its margin carries an
    O(p_tail - p_limit) systematic part; callers must pass a sequence
    deep enough for the tolerance they intend to claim.
    """
    p_seq = np.asarray([check_p(p) for p in p_seq], dtype=float)
    p_limit = check_p(p_limit)
    u = grid.edge_field(u)
    x = grid.edge_midpoints
    values = np.empty(p_seq.size)
    for i, pn in enumerate(p_seq):
        mode = min(i + 1, grid.n_interior)
        osc = np.sin(mode * np.pi * x / grid.length)
        values[i] = psi(grid, pn, u + amplitude * osc)
    limit_value = float(psi(grid, p_limit, u))
    n_tail = max(1, int(np.ceil(tail_fraction * p_seq.size)))
    margin = float(np.min(values[-n_tail:]) - limit_value)
    return MoscoLiminfReport(p_seq, p_limit, float(amplitude), values,
                             limit_value, margin)


@dataclass
class LegendreIdentityReport:
    """Scalar-level check of (j_eps^p)* = (j^p)* + (eps/2) y^2."""

    p: float
    eps: float
    y: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    max_abs_gap: float
    tol: float

    columns = ("y", "transform_of_envelope", "transform_plus_quadratic")

    def rows(self):
        return list(zip(self.y, self.lhs, self.rhs))

    @property
    def passed(self):
        return self.max_abs_gap < self.tol


def legendre_identity_check(p, eps, tol=1e-3):
    """
    Verify numerically that the Legendre transform of the Moreau envelope
    equals the transform of the original integrand plus (eps/2) y^2.

    Both transforms are sampled-grid suprema, so the check carries a
    documented grid-truncation error; the dual grid is restricted to
    [-1, 1] for p = 1 (outside, both sides are infinite and truncation
    is meaningless) and to [-3, 3] otherwise, with the sampling radius
    chosen to contain the true maximizers.
    """
    p = check_p(p)
    eps = check_eps(eps)
    if p == 1.0:
        y = np.linspace(-1.0, 1.0, 41)
        radius = 2.0 * (1.0 + eps)
    else:
        y = np.linspace(-3.0, 3.0, 61)
        radius = 3.0 ** (1.0 / (p - 1.0)) + 3.0 * eps + 1.0
    step = 2e-3 * min(1.0, np.sqrt(eps))
    half = np.arange(0.0, radius + step, step)
    xs = np.concatenate([-half[:0:-1], half])  # symmetric, contains 0
    mag = np.abs(xs)
    lhs = legendre_sampled(xs, radial_moreau(p, eps, mag), y)
    rhs = legendre_sampled(xs, mag ** p / p, y) + 0.5 * eps * y ** 2
    gap = float(np.max(np.abs(lhs - rhs)))
    return LegendreIdentityReport(p, eps, y, lhs, rhs, gap, tol)
