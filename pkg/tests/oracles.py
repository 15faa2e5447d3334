"""
Independent brute-force oracles shared by the test modules.

These deliberately avoid every solver code path they are used to check:
dense grid scans with refinement for one-dimensional minimization, and
golden-section coordinate descent for small multivariate problems.
"""

import numpy as np

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def refine_minimize_1d(f, lo, hi, coarse=1e-3, target=1e-8):
    """Grid scan with successive 100x refinements around the minimizer."""
    step = coarse
    while True:
        xs = np.arange(lo, hi + step, step)
        vals = f(xs)
        i = int(np.argmin(vals))
        x = xs[i]
        if step <= target:
            return float(x), float(vals[i])
        lo = max(lo, x - 2 * step)
        hi = min(hi, x + 2 * step)
        step /= 100.0


def golden_section(f, lo, hi, tol=1e-10, maxit=200):
    """Golden-section minimum of a unimodal scalar function on [lo, hi]."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxit):
        if b - a < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def grid_search_refine(f, center, span=1.0, step_target=1e-5, n_pts=7):
    """
    True d-dimensional grid search with successive refinement around the
    running minimizer; handles nonseparable nonsmooth objectives (TV)
    where coordinate descent stalls.  Cost (n_pts^d per level) limits it
    to very small d.
    """
    x = np.array(center, dtype=float)
    step = float(span)
    fx = f(x)
    while step > step_target:
        offsets = np.linspace(-step, step, n_pts)
        axes = [x[i] + offsets for i in range(x.size)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        vals = np.array([f(p) for p in pts])
        i = int(np.argmin(vals))
        if vals[i] < fx:
            x, fx = pts[i], vals[i]
        step = 2.0 * step / (n_pts - 1)
    return x, fx


def coordinate_descent(f, x0, span=2.0, sweeps=200, tol=1e-12):
    """
    Brute-force minimization of a smooth convex function of a few
    variables: cyclic golden-section line searches per coordinate with a
    shrinking search span.
    """
    x = np.array(x0, dtype=float)
    fx = f(x)
    for sweep in range(sweeps):
        moved = 0.0
        for i in range(x.size):
            xi = x[i]

            def line(t, i=i):
                trial = x.copy()
                trial[i] = t
                return f(trial)

            t, ft = golden_section(line, xi - span, xi + span, tol=1e-12)
            if ft < fx:
                moved = max(moved, abs(t - xi))
                x[i] = t
                fx = ft
        span = max(span * 0.7, 10.0 * tol)
        if moved < tol and span <= 10.0 * tol:
            break
    return x, fx
