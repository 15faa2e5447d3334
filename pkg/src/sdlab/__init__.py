"""
sdlab: a numerical laboratory for singular stochastic diffusion equations
on an interval with Dirichlet boundary conditions.

Exposes the pointwise convex kernel, the discrete interval operators,
the regularized energies, the spectrally colored noise model, the
implicit/explicit time steppers and the ergodic-averaging diagnostics.
The `sdlab` command-line tool drives the packaged experiments.
"""

from .convex import (
    ConvergenceError,
    beta_eps,
    grad_a_p,
    huber,
    j_p,
    legendre_sampled,
    moreau_j_eps,
    resolvent_r_eps,
    yosida_a_eps,
)
from .grid import Grid1D, SpectralMode
from .energy import (
    grad_phi_eps,
    legendre_identity_check,
    mosco_liminf_probe,
    mosco_pointwise_report,
    phi,
    phi_eps,
    psi,
)
from .noise import (
    NoiseSpectrum,
    WienerIncrement,
    build_spectrum,
    isometry_selftest,
    noise_stream,
    sample_increment,
)
from .solvers import (
    EquationSpec,
    SolverConfig,
    SolverError,
    Trajectory,
    coupled_sup_error,
    prox_step_direct,
    run_coupled,
    run_trajectory,
    step_fd,
    step_regularized,
    tv_prox,
    vi_check,
)
from .ergodic import (
    GaussianBump,
    ModeTanh,
    default_panel,
    invariant_convergence,
    stationary_mode_std,
    tightness_report,
    time_average,
    weak_distance,
)

__version__ = "0.1.0"
