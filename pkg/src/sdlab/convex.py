"""
Pointwise convex analysis for power-law integrands
==================================================

Everything in this module acts on vectors in R^d, d in {1, 2}, and is
vectorized: an input of shape ``(..., d)`` is a batch of vectors whose
components live on the last axis.  A bare scalar is treated as a single
one-dimensional vector.

The central objects are the convex integrands

    j_p(x) = |x|^p / p,          1 <= p <= 2,

their gradients ``a_p(x) = |x|^{p-2} x`` (with the norm-minimal value 0
at the origin), the resolvents ``(1 + eps*a_p)^{-1}``, the Yosida
approximations ``a_p^eps = (1/eps)(1 - (1+eps*a_p)^{-1})`` and the Moreau
envelopes ``j_eps^p = inf_y [ j_p(y) + |x-y|^2/(2 eps) ]``.  For p = 1
the gradient is the (multivalued) sign map, which is never materialized;
only its Yosida approximation ``beta_eps`` and the Huber envelope are
provided in closed form.

All maps are radial, so the nonlinear solves reduce to scalar equations
in the magnitude m = |x|.  These are handled by a safeguarded Newton
iteration (bisection fallback) with absolute tolerance 1e-12 and an
iteration cap of 100; the scalar equations are strictly monotone, so the
cap only guards floating-point edge cases.
"""

import numpy as np

__all__ = [
    "ConvergenceError",
    "check_p",
    "check_eps",
    "j_p",
    "grad_a_p",
    "beta_eps",
    "resolvent_r_eps",
    "yosida_a_eps",
    "moreau_j_eps",
    "huber",
    "radial_resolvent",
    "radial_yosida",
    "radial_moreau",
    "legendre_sampled",
]

SCALAR_TOL = 1e-12
SCALAR_MAXIT = 100


class ConvergenceError(RuntimeError):
    """An iterative solve failed to reach its tolerance within its cap."""


def check_p(p):
    """Validate a power-law exponent, 1 <= p <= 2."""
    p = float(p)
    if not (1.0 <= p <= 2.0):
        raise ValueError("exponent p must lie in [1, 2], got %r" % p)
    return p


def check_eps(eps):
    """Validate a regularization parameter, eps > 0."""
    eps = float(eps)
    if not eps > 0.0:
        raise ValueError("regularization eps must be positive, got %r" % eps)
    return eps


def _as_vectors(x):
    """Coerce input to an array of d-vectors on the last axis, d in {1, 2}."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    d = x.shape[-1]
    if d not in (1, 2):
        raise ValueError(
            "last axis is the component axis and must have length 1 or 2, "
            "got %d" % d
        )
    if not np.all(np.isfinite(x)):
        raise ValueError("vector components must be finite")
    return x


def _norm(x):
    return np.sqrt(np.sum(x * x, axis=-1))


def j_p(p, x):
    """
    Evaluate j_p(x) = |x|^p / p.

    Parameters
    ----------
    p : float
        Exponent in [1, 2].
    x : array_like, shape (..., d)
        Batch of vectors, components on the last axis.

    Returns
    -------
    ndarray, shape (...)
        Nonnegative values, convex in x.
    """
    p = check_p(p)
    return _norm(_as_vectors(x)) ** p / p


def grad_a_p(p, x):
    """
    Evaluate a_p(x) = |x|^{p-2} x, the gradient of j_p for p > 1.

    The formula is singular at the origin for p < 2; the value 0 is used
    there, the unique choice consistent with |a_p(x)| <= |x|^{p-1}.
    p = 1 is rejected: the sign map is multivalued, use `beta_eps`.
    """
    p = check_p(p)
    if p == 1.0:
        raise ValueError("a_p is multivalued at p = 1; use beta_eps instead")
    x = _as_vectors(x)
    m = _norm(x)
    scale = np.where(m > 0.0, np.maximum(m, 1e-300) ** (p - 2.0), 0.0)
    return scale[..., None] * x


def beta_eps(eps, x):
    """
    Yosida approximation of the sign map:
    beta_eps(x) = x/eps for |x| <= eps, x/|x| otherwise.

    Always bounded by 1 in norm.
    """
    eps = check_eps(eps)
    x = _as_vectors(x)
    m = _norm(x)
    scale = np.where(m <= eps, 1.0 / eps, 1.0 / np.maximum(m, 1e-300))
    return scale[..., None] * x


def _radial_resolvent_newton(p, eps, s):
    """
    Solve m + eps*m^(p-1) = s for m >= 0, elementwise, 1 < p < 2.

    Solved in the substituted variable t = m^(p-1), where the equation
    t^q + eps*t = s (q = 1/(p-1) >= 1) is increasing and convex, so
    Newton started from the right end of the bracket descends
    monotonically onto the root; iterates leaving the bracket fall back
    to bisection.  Unlike the raw m-equation, whose root underflows for
    p close to 1, the t-root stays of order s/eps.  Convergence is
    declared on the residual of the original equation, which coincides
    with the t-residual by construction.
    """
    s = np.asarray(s, dtype=float)
    q = 1.0 / (p - 1.0)
    safe = np.where(s > 0.0, s, 1.0)  # dummy keeps powers finite
    t = np.minimum(safe ** (p - 1.0), safe / eps)
    lo = np.zeros_like(s)
    hi = t.copy()
    active = s > 0.0
    f = None
    for _ in range(SCALAR_MAXIT):
        ts = np.where(active, t, 1.0)
        tq = ts ** q
        f = tq + eps * ts - s
        # one ulp of t moves f by about (q*t^q + eps*t)*eps_mach; the
        # requested tolerance cannot undercut that evaluation floor
        attainable = 4.4e-16 * (q * tq + eps * ts + s)
        active = active & (np.abs(f) > np.maximum(SCALAR_TOL * (1.0 + s),
                                                  attainable))
        if not active.any():
            m = np.where(s > 0.0, t, 0.0) ** q
            return np.where(s > 0.0, m, 0.0)
        above = f > 0.0
        hi = np.where(active & above, ts, hi)
        lo = np.where(active & ~above, ts, lo)
        df = q * ts ** (q - 1.0) + eps
        cand = ts - f / df
        cand = np.where((cand <= lo) | (cand >= hi), 0.5 * (lo + hi), cand)
        t = np.where(active, cand, t)
    raise ConvergenceError(
        "radial resolvent solve did not reach %.1e in %d iterations "
        "(max residual %.3e)" % (SCALAR_TOL, SCALAR_MAXIT,
                                 float(np.max(np.abs(f[active]))))
    )


def radial_resolvent(p, eps, s):
    """
    Magnitude of (1 + eps*a_p)^{-1} applied to a vector of magnitude s >= 0.

    Closed forms for p = 1 (soft shrinkage) and p = 2 (linear scaling);
    safeguarded Newton otherwise.
    """
    p = check_p(p)
    eps = check_eps(eps)
    s = np.asarray(s, dtype=float)
    if p == 1.0:
        return np.maximum(s - eps, 0.0)
    if p == 2.0:
        return s / (1.0 + eps)
    return _radial_resolvent_newton(p, eps, s)


def radial_yosida(p, eps, s):
    """Magnitude of the Yosida approximation a_p^eps at magnitude s >= 0."""
    eps = check_eps(eps)
    return (np.asarray(s, dtype=float) - radial_resolvent(p, eps, s)) / eps


def radial_moreau(p, eps, s):
    """
    Moreau envelope j_eps^p at magnitude s >= 0:
    min over m >= 0 of m^p/p + (s - m)^2/(2 eps).

    The minimizer is the radial resolvent; p = 1 reproduces the Huber
    function exactly and p = 2 the scaled quadratic s^2/(2(1+eps)).
    """
    p = check_p(p)
    eps = check_eps(eps)
    s = np.asarray(s, dtype=float)
    if p == 1.0:
        return huber(eps, s)
    if p == 2.0:
        return s * s / (2.0 * (1.0 + eps))
    m = _radial_resolvent_newton(p, eps, s)
    return m ** p / p + (s - m) ** 2 / (2.0 * eps)


def huber(eps, s):
    """
    Closed-form Moreau envelope of the absolute value at magnitude s:
    s^2/(2 eps) for s <= eps, s - eps/2 otherwise.
    """
    eps = check_eps(eps)
    s = np.asarray(s, dtype=float)
    return np.where(s <= eps, s * s / (2.0 * eps), s - 0.5 * eps)


def resolvent_r_eps(p, eps, x):
    """
    Resolvent (1 + eps*a_p)^{-1}(x), the unique y with y + eps*a_p(y) = x.

    For p = 1 this is the resolvent of the sign map: magnitudes shrink by
    eps and clamp at zero.  The map is a contraction for every p.
    """
    x = _as_vectors(x)
    m = _norm(x)
    r = radial_resolvent(p, eps, m)
    scale = np.where(m > 0.0, r / np.maximum(m, 1e-300), 0.0)
    return scale[..., None] * x


def yosida_a_eps(p, eps, x):
    """
    Yosida approximation a_p^eps(x) = (x - (1 + eps*a_p)^{-1} x) / eps.

    Coincides with a_p((1+eps*a_p)^{-1} x) for p > 1 and with `beta_eps`
    for p = 1; it is the gradient of the Moreau envelope `moreau_j_eps`.
    """
    eps = check_eps(eps)
    x = _as_vectors(x)
    return (x - resolvent_r_eps(p, eps, x)) / eps


def moreau_j_eps(p, eps, x):
    """
    Moreau envelope j_eps^p(x) = inf_y [ j_p(y) + |x - y|^2 / (2 eps) ].

    Parameters
    ----------
    p : float
        Exponent in [1, 2].
    eps : float
        Envelope parameter, > 0.
    x : array_like, shape (..., d)
        Batch of vectors.

    Returns
    -------
    ndarray, shape (...)
        Smooth convex values increasing to j_p(x) as eps decreases to 0.
    """
    return radial_moreau(p, eps, _norm(_as_vectors(x)))


def legendre_sampled(xs, fs, y):
    """
    Legendre transform of a sampled scalar convex function.

    Returns max over the sample grid of x*y - f(x), a lower bound of the
    true transform sup_x [x*y - f(x)].  The bound is grid-limited: it is
    exact only when the true maximizer falls on (or near) the grid, so
    callers must sample widely enough for the slopes y they query.
    Intended as a test utility, not a production transform.

    Parameters
    ----------
    xs, fs : array_like, 1-d
        Sample points and function values, same length, nonempty.
    y : float or array_like
        Slope(s) at which to evaluate the transform.

    Returns
    -------
    float or ndarray
        One value per entry of y.
    """
    xs = np.asarray(xs, dtype=float)
    fs = np.asarray(fs, dtype=float)
    if xs.size == 0 or fs.size == 0:
        raise ValueError("empty sample set")
    if xs.shape != fs.shape or xs.ndim != 1:
        raise ValueError("xs and fs must be 1-d arrays of equal length")
    y = np.asarray(y, dtype=float)
    vals = np.max(np.multiply.outer(y, xs) - fs, axis=-1)
    return vals if vals.ndim else float(vals)
