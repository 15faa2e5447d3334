"""
Discretized interval (0, L) with homogeneous Dirichlet conditions
=================================================================

The grid carries ``n_interior`` nodes x_i = i*h, h = L/(n_interior+1);
boundary values are identically zero.  Scalar fields are arrays of node
values (length n), edge fields are arrays of edge values (length n+1,
the two outermost edges touch the boundary).  All operators broadcast
over a trailing batch axis: a field argument of shape ``(n, m)`` is a
batch of m fields.

The gradient pads with the boundary zeros, so the two boundary edges
carry the jumps +-u_1/h and -+u_n/h.  This makes summation by parts
exact, ``<div v, u>_h = -<v, grad u>_h`` to round-off, and the edge sum
behind the total variation automatically contains the boundary (trace)
contribution of the zero extension.

Tridiagonal solves (resolvent, Poisson) use banded Cholesky
factorizations cached on the grid; they are exact to round-off and O(n).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

__all__ = ["Grid1D", "SpectralMode", "tridiag_solve_batch"]

NORM_KINDS = ("L2", "Hminus1", "W1p", "TV")


@dataclass(frozen=True)
class SpectralMode:
    """One Dirichlet eigenmode sampled on the grid.

    ``mu`` is the continuum eigenvalue (k*pi/L)^2 and ``mu_h`` the
    eigenvalue of the discrete Laplacian, (4/h^2) sin^2(k*pi*h/(2L)).
    The sampled eigenfunctions are L2-orthonormal under the weight h.
    """

    index: int
    values: np.ndarray
    mu: float
    mu_h: float


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on (0, L) with n_interior >= 2 interior nodes.

    Immutable after construction and safe for concurrent shared reads;
    banded factorizations are cached lazily, so concurrent first use may
    compute a factor twice but always yields consistent results.
    """

    n_interior: int
    length: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n_interior) != self.n_interior or self.n_interior < 2:
            raise ValueError("n_interior must be an integer >= 2")
        if not self.length > 0.0:
            raise ValueError("length must be positive")

    @property
    def h(self):
        return self.length / (self.n_interior + 1)

    @property
    def nodes(self):
        """Interior node coordinates x_i = i*h."""
        return self.h * np.arange(1, self.n_interior + 1)

    @property
    def edge_midpoints(self):
        """Midpoint coordinates of the n_interior+1 edges."""
        return self.h * (np.arange(self.n_interior + 1) + 0.5)

    # -- field validation ------------------------------------------------

    def _check_field(self, u, length):
        u = np.asarray(u, dtype=float)
        if u.shape[0] != length or u.ndim > 2:
            raise ValueError(
                "expected field of leading length %d, got shape %r"
                % (length, u.shape)
            )
        return u

    def scalar_field(self, u):
        """Validate a node field (length n_interior, optional batch axis)."""
        return self._check_field(u, self.n_interior)

    def edge_field(self, v):
        """Validate an edge field (length n_interior + 1)."""
        return self._check_field(v, self.n_interior + 1)

    def zeros(self):
        return np.zeros(self.n_interior)

    # -- difference operators ---------------------------------------------

    def gradient(self, u):
        """
        Forward differences with zero Dirichlet padding.

        Edge e gets (u_{e+1} - u_e)/h with u_0 = u_{n+1} = 0; the two
        boundary edges carry the jumps of the zero extension.
        """
        u = self.scalar_field(u)
        pad = np.zeros((1,) + u.shape[1:])
        return np.diff(np.concatenate([pad, u, pad], axis=0), axis=0) / self.h

    def divergence(self, v):
        """Negative adjoint of `gradient` under the h-weighted inner product."""
        v = self.edge_field(v)
        return np.diff(v, axis=0) / self.h

    def laplacian(self, u):
        """Three-point Dirichlet Laplacian, divergence(gradient(u))."""
        return self.divergence(self.gradient(u))

    # -- inner products and norms ------------------------------------------

    def inner(self, a, b):
        """h-weighted inner product; works for node and edge fields alike."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return self.h * np.sum(a * b, axis=0)

    def norm_l2(self, u):
        u = np.asarray(u, dtype=float)
        return np.sqrt(self.h * np.sum(u * u, axis=0))

    def norm_hminus1(self, u):
        """Dual Sobolev norm sqrt(<(-Lap)^{-1} u, u>_h)."""
        u = self.scalar_field(u)
        return np.sqrt(np.maximum(self.inner(self.solve_poisson(u), u), 0.0))

    def seminorm_w1p(self, u, p):
        """W^{1,p} seminorm (sum_e h |grad u|^p)^{1/p}, p in (1, 2]."""
        p = float(p)
        if not (1.0 < p <= 2.0):
            raise ValueError("W1p norm requires p in (1, 2], got %r" % p)
        g = np.abs(self.gradient(u))
        return (self.h * np.sum(g ** p, axis=0)) ** (1.0 / p)

    def tv(self, u):
        """Discrete total variation of the zero extension, sum_e h |grad u|."""
        return self.h * np.sum(np.abs(self.gradient(u)), axis=0)

    def norm(self, u, kind, p=None):
        """
        Dispatch on the norm kind: 'L2', 'Hminus1', 'W1p' (needs p) or 'TV'.
        """
        if kind == "L2":
            return self.norm_l2(u)
        if kind == "Hminus1":
            return self.norm_hminus1(u)
        if kind == "W1p":
            return self.seminorm_w1p(u, p)
        if kind == "TV":
            return self.tv(u)
        raise ValueError("unknown norm kind %r, expected one of %r"
                         % (kind, NORM_KINDS))

    # -- tridiagonal solves --------------------------------------------------

    def _shift_factor(self, c):
        """Cached banded Cholesky factor of I + c*(-Laplacian), c > 0."""
        fac = self._cache.get(("shift", c))
        if fac is None:
            n, h2 = self.n_interior, self.h ** 2
            ab = np.zeros((2, n))
            ab[0, 1:] = -c / h2
            ab[1, :] = 1.0 + 2.0 * c / h2
            fac = cholesky_banded(ab, lower=False)
            self._cache[("shift", c)] = fac
        return fac

    def solve_shifted(self, c, rhs):
        """Solve (I + c*(-Laplacian)) w = rhs, c >= 0, by banded Cholesky."""
        rhs = self.scalar_field(rhs)
        if c == 0.0:
            return rhs.copy()
        return cho_solve_banded((self._shift_factor(float(c)), False), rhs)

    def resolvent(self, eps, u):
        """
        Resolvent R_eps = (I - eps*Laplacian)^{-1} of the Dirichlet
        Laplacian; an L2 contraction with smoothing bound
        ||grad R_eps u|| <= ||u|| / (2 sqrt(eps)).
        """
        if not eps > 0.0:
            raise ValueError("eps must be positive")
        return self.solve_shifted(eps, u)

    def solve_poisson(self, rhs):
        """Solve (-Laplacian) w = rhs by banded Cholesky."""
        rhs = self.scalar_field(rhs)
        fac = self._cache.get("poisson")
        if fac is None:
            n, h2 = self.n_interior, self.h ** 2
            ab = np.zeros((2, n))
            ab[0, 1:] = -1.0 / h2
            ab[1, :] = 2.0 / h2
            fac = cholesky_banded(ab, lower=False)
            self._cache["poisson"] = fac
        return cho_solve_banded((fac, False), rhs)

    # -- spectral basis --------------------------------------------------------

    def spectral_mode(self, k):
        """
        Sampled Dirichlet eigenmode sqrt(2/L) sin(k pi x / L), 1 <= k <= n.
        """
        if not 1 <= k <= self.n_interior:
            raise ValueError(
                "mode index must satisfy 1 <= k <= %d, got %d"
                % (self.n_interior, k)
            )
        L = self.length
        values = np.sqrt(2.0 / L) * np.sin(k * np.pi * self.nodes / L)
        mu = (k * np.pi / L) ** 2
        mu_h = (4.0 / self.h ** 2) * np.sin(k * np.pi * self.h / (2.0 * L)) ** 2
        return SpectralMode(index=k, values=values, mu=mu, mu_h=mu_h)

    def mode_matrix(self, n_modes):
        """Columns are the first n_modes sampled eigenfunctions."""
        return np.column_stack(
            [self.spectral_mode(k).values for k in range(1, n_modes + 1)]
        ) if n_modes > 0 else np.zeros((self.n_interior, 0))


def tridiag_solve_batch(lower, diag, upper, rhs):
    """
    Thomas solve of a batch of tridiagonal systems.

    All arguments carry the batch on the trailing axes: ``diag`` and
    ``rhs`` have leading length n, ``lower``/``upper`` length n-1
    (subdiagonal / superdiagonal).  Intended for strictly diagonally
    dominant systems (no pivoting).
    """
    n = diag.shape[0]
    c = np.empty_like(upper)
    d = np.empty_like(rhs)
    beta = diag[0]
    d[0] = rhs[0] / beta
    for i in range(1, n):
        c[i - 1] = upper[i - 1] / beta
        beta = diag[i] - lower[i - 1] * c[i - 1]
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / beta
    x = d
    for i in range(n - 2, -1, -1):
        x[i] -= c[i] * x[i + 1]
    return x
