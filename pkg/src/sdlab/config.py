"""
Experiment configuration: JSON files with strict validation.

Experiments carry ~20 parameters, so a config file (not flags) is the
reproducibility unit; the command line only overrides the output
directory and the master seed.  Unknown keys are rejected and every
constraint violation is reported with the rule it breaks, all at once.
"""

import json
from dataclasses import dataclass, field

EXPERIMENTS = (
    "pl-convergence",
    "fd-convergence",
    "p-to-1",
    "invariant-measures",
    "mosco-report",
    "selfcheck",
)

_GRID_DEFAULTS = {"n": 64, "L": 1.0}
_NOISE_DEFAULTS = {"delta": 1.0, "kappa": 0.1, "modes": None,
                   "master_seed": 12345}
_SOLVER_DEFAULTS = {
    "dt": 1e-3, "T": 0.5, "scheme": "prox", "eps": None,
    "snapshot_stride": 100, "burn_in": None, "paths": 1,
    "newton_tol": 1e-10, "newton_max": 200, "c_stab": 0.25,
}
_EXPONENT_DEFAULTS = {"p_list": None, "r_list": None, "limit": None}
_OUTPUT_DEFAULTS = {"directory": "out", "format": "csv"}


class ConfigError(ValueError):
    """Invalid experiment configuration; ``problems`` lists every rule hit."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" +
                         "\n".join("  - " + p for p in self.problems))


@dataclass
class ExperimentConfig:
    experiment: str
    grid: dict = field(default_factory=dict)
    noise: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    exponents: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    panel: list = None
    theta_list: list = None

    def to_dict(self):
        d = {
            "experiment": self.experiment,
            "grid": dict(self.grid),
            "noise": dict(self.noise),
            "solver": dict(self.solver),
            "exponents": dict(self.exponents),
            "output": dict(self.output),
        }
        if self.panel is not None:
            d["panel"] = self.panel
        if self.theta_list is not None:
            d["theta_list"] = self.theta_list
        return d


def _merge_section(name, given, defaults, problems):
    merged = dict(defaults)
    if given is None:
        return merged
    if not isinstance(given, dict):
        problems.append("%s must be an object" % name)
        return merged
    for key, val in given.items():
        if key not in defaults:
            problems.append("unknown key %s.%s" % (name, key))
        else:
            merged[key] = val
    return merged


def validate_config(raw):
    """Validate a parsed config dict; returns ExperimentConfig or raises."""
    problems = []
    if not isinstance(raw, dict):
        raise ConfigError(["top level must be a JSON object"])
    known = {"experiment", "grid", "noise", "solver", "exponents", "output",
             "panel", "theta_list"}
    for key in raw:
        if key not in known:
            problems.append("unknown key %s" % key)

    experiment = raw.get("experiment")
    if experiment not in EXPERIMENTS:
        problems.append("experiment must be one of %s, got %r"
                        % (", ".join(EXPERIMENTS), experiment))

    grid = _merge_section("grid", raw.get("grid"), _GRID_DEFAULTS, problems)
    noise = _merge_section("noise", raw.get("noise"), _NOISE_DEFAULTS,
                           problems)
    solver = _merge_section("solver", raw.get("solver"), _SOLVER_DEFAULTS,
                            problems)
    exponents = _merge_section("exponents", raw.get("exponents"),
                               _EXPONENT_DEFAULTS, problems)
    output = _merge_section("output", raw.get("output"), _OUTPUT_DEFAULTS,
                            problems)

    # grid rules
    n = grid["n"]
    if not (isinstance(n, int) and n >= 2):
        problems.append("grid.n must be an integer >= 2")
    if not (isinstance(grid["L"], (int, float)) and grid["L"] > 0):
        problems.append("grid.L must be positive")

    # noise rules
    delta, kappa = noise["delta"], noise["kappa"]
    if not (isinstance(kappa, (int, float)) and kappa > 0):
        problems.append("noise.kappa must be positive")
    elif not (isinstance(delta, (int, float)) and delta > 0.5 + kappa):
        problems.append("noise.delta must exceed 0.5 + noise.kappa "
                        "(d = 1 admissibility)")
    if noise["modes"] is None and isinstance(n, int):
        noise["modes"] = max(1, n // 2)
    modes = noise["modes"]
    if isinstance(n, int) and not (isinstance(modes, int)
                                   and 0 <= modes <= n):
        problems.append("noise.modes must be an integer in [0, grid.n]")
    if not isinstance(noise["master_seed"], int):
        problems.append("noise.master_seed must be an integer")

    # solver rules
    dt, T = solver["dt"], solver["T"]
    if not (isinstance(dt, (int, float)) and dt > 0):
        problems.append("solver.dt must be positive")
    if not (isinstance(T, (int, float)) and T >= dt):
        problems.append("solver.T must satisfy T >= dt")
    if solver["scheme"] not in ("prox", "regularized"):
        problems.append("solver.scheme must be 'prox' or 'regularized'")
    if solver["scheme"] == "regularized":
        eps = solver["eps"]
        if not (isinstance(eps, (int, float)) and eps > 0):
            problems.append("solver.eps required (> 0) for the regularized "
                            "scheme")
        elif dt > solver["c_stab"] * 8.0 * eps ** 2 * (1 + 1e-12):
            problems.append("stability guard violated: solver.dt must not "
                            "exceed c_stab * 8 * eps^2 = %g"
                            % (solver["c_stab"] * 8.0 * eps ** 2))
    if not (isinstance(solver["snapshot_stride"], int)
            and solver["snapshot_stride"] >= 1):
        problems.append("solver.snapshot_stride must be an integer >= 1")
    if not (isinstance(solver["paths"], int) and solver["paths"] >= 1):
        problems.append("solver.paths must be an integer >= 1")
    if solver["burn_in"] is not None:
        if not (isinstance(solver["burn_in"], (int, float))
                and 0 <= solver["burn_in"] < T):
            problems.append("solver.burn_in must lie in [0, T)")

    # exponent rules
    for key, lab, lo, hi in (("p_list", "p", 1.0, 2.0),
                             ("r_list", "r", 0.0, 1.0)):
        vals = exponents[key]
        if vals is None:
            continue
        if not isinstance(vals, list) or not vals:
            problems.append("exponents.%s must be a nonempty list" % key)
            continue
        for v in vals:
            ok = isinstance(v, (int, float)) and lo <= v <= hi
            if key == "r_list":
                ok = isinstance(v, (int, float)) and lo < v <= hi
            if not ok:
                problems.append("exponents.%s entry %r outside the "
                                "admissible range %s" % (
                                    key, v,
                                    "[1, 2]" if lab == "p" else "(0, 1]"))
    limit = exponents["limit"]
    if limit is not None and not isinstance(limit, (int, float)):
        problems.append("exponents.limit must be a number")

    # output rules
    if output["format"] not in ("csv", "json"):
        problems.append("output.format must be 'csv' or 'json'")
    if not isinstance(output["directory"], str) or not output["directory"]:
        problems.append("output.directory must be a nonempty string")

    theta_list = raw.get("theta_list")
    if theta_list is not None:
        if (not isinstance(theta_list, list) or not theta_list
                or any(not (isinstance(t, (int, float)) and t > 0)
                       for t in theta_list)):
            problems.append("theta_list must be a nonempty list of positive "
                            "numbers")

    panel = raw.get("panel")
    if panel is not None and not isinstance(panel, list):
        problems.append("panel must be a list of functional descriptors")

    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(
        experiment=experiment, grid=grid, noise=noise, solver=solver,
        exponents=exponents, output=output, panel=panel,
        theta_list=theta_list,
    )


def load_config(path):
    """Load and validate a JSON experiment config file."""
    try:
        with open(path) as f:
            raw = json.load(f)
    except OSError as exc:
        raise ConfigError(["cannot read config file: %s" % exc])
    except json.JSONDecodeError as exc:
        raise ConfigError(["config is not valid JSON: %s" % exc])
    return validate_config(raw)
