"""Two solutions from one initial point: the non-uniqueness exhibit.

On the Heisenberg group the field X_1 + a(t,x) X_2, with a the quartic-gauge
distance from the moving axis point (t,0,0), annihilates the straight line
(t,0,0), so that line is one solution from the origin.  A second solution is
built by rescaling the transverse coordinates: with

    x2 = t^3 u / 18,   x3 = t^4 (2u - v) / 36,

the pair (u, v) satisfies a singular system whose kernel 1/t is regularized
to 1/(t + eps).  Solving a ladder of regularized systems and passing to the
small-eps limit produces the second solution; proof-grade bounds (sign
retention, exponential mix bound, linear envelopes) are monitored along
every rung, since their violation can only mean integrator failure.

The autonomous variant replaces a by the distance to the whole axis; its
scaled form extends continuously to t = 0 via a one-dimensional convex
minimisation with closed form sqrt(v) at zero.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fields import HorizontalField, horizontal_field
from .flow import Trajectory, IntegratorConfig, residual as flow_residual
from .gauges import equivalence_constants, koranyi_norm, koranyi_norm_batch, smooth_gauge
from .groups import GradedAlgebra, heisenberg, is_heisenberg
from .scalarmin import minimize_convex_quartic
from .stepping import cumulative_simpson, solve_to_grid

MIX_WEIGHT_UPPER = 0.5   # weight lambda with u + lambda v below the exponential bound
MIX_WEIGHT_LOWER = 0.75  # weight lambda in the linear lower envelope

MONITOR_TOL = 1e-9


class MonitorViolation(RuntimeError):
    """A proven bound failed along a numerical solution (integrator failure)."""


# --------------------------------------------------------------------------- coefficients


def distance_to_axis_point(t: float, x: Sequence[float]) -> float:
    """Quartic-gauge distance from (t, 0, 0); uniformly 1-Lipschitz in x."""
    x = np.asarray(x, dtype=float)
    h = (x[0] - t) ** 2 + x[1] ** 2
    return float((h * h + (x[2] - t * x[1]) ** 2) ** 0.25)


def distance_to_axis(x: Sequence[float]) -> float:
    """Distance to the whole first axis: inf over s of the distance to (s,0,0).

    Shifting the minimisation variable turns the objective into the convex
    quartic family (sigma^2 + a)^2 + (b sigma + c)^2 with a = x2^2, b = -x2,
    c = x3 - x1 x2, which has a unique bracketable minimiser.
    """
    x = np.asarray(x, dtype=float)
    a = x[1] * x[1]
    b = -x[1]
    c = x[2] - x[0] * x[1]
    _, fmin = minimize_convex_quartic(a, b, c)
    return float(fmin**0.25)


def scaled_axis_distance_with_minimizer(t: float, u: float, v: float) -> tuple:
    """Scaled axis distance of the rescaled curve, with the inner minimiser.

    Value 6 * inf_s ((s^2 + (t u/18)^2)^2 + (v/36 + s t u/18)^2)^(1/4);
    extends continuously to t = 0 with closed form sqrt(|v|).
    """
    if t == 0.0:
        return math.sqrt(abs(v)), 0.0
    b = t * u / 18.0
    a = b * b
    c = v / 36.0
    sbar, fmin = minimize_convex_quartic(a, b, c)
    return 6.0 * fmin**0.25, sbar


def scaled_axis_distance(t: float, u: float, v: float) -> float:
    return scaled_axis_distance_with_minimizer(t, u, v)[0]


def counterexample_field(alg: GradedAlgebra | None = None,
                         variant: str = "time") -> HorizontalField:
    """X_1 + a X_2 with a the (time-dependent or autonomous) axis distance."""
    alg = heisenberg() if alg is None else alg
    if not is_heisenberg(alg):
        raise ValueError("the exhibit lives on the Heisenberg preset")
    one = lambda t, x: 1.0
    if variant == "time":
        coeff = lambda t, x: distance_to_axis_point(t, x)
    elif variant == "autonomous":
        coeff = lambda t, x: distance_to_axis(x)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return horizontal_field(alg, (one, coeff), time_dependent=(variant == "time"),
                            lipschitz_estimate=1.0)


# --------------------------------------------------------------------------- the (u, v) system


@dataclass(frozen=True)
class SingularUVSystem:
    """Rescaled transverse system with kernel 1/(t + epsilon).

    epsilon = 0 denotes the singular limit system itself.
    """

    variant: str = "time"  # "time" or "autonomous"
    epsilon: float = 0.0

    def __post_init__(self):
        if self.variant not in ("time", "autonomous"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")

    @property
    def mix_weight_upper(self) -> float:
        # positive root of 8 w^2 + 2 w - 3 = 0: makes u + w v obey the
        # exponential comparison bound
        return MIX_WEIGHT_UPPER

    @property
    def mix_weight_lower(self) -> float:
        # cancels the linear terms in the lower envelope of u + w v
        return MIX_WEIGHT_LOWER

    def drive(self, t: float, u: float, v: float) -> float:
        if self.variant == "time":
            return ((t / 3.0) ** 4 * u**4 + v * v) ** 0.25
        return scaled_axis_distance(t, u, v)


def uv_rhs(sys: SingularUVSystem, t: float, u: float, v: float) -> tuple:
    """((-3u + 3G)/(t+eps), (-4v + 4u)/(t+eps)) with G the variant drive."""
    den = t + sys.epsilon
    if den <= 0.0:
        raise ZeroDivisionError("right-hand side undefined at t + epsilon = 0")
    g = sys.drive(t, u, v)
    return (-3.0 * u + 3.0 * g) / den, (-4.0 * v + 4.0 * u) / den


# --------------------------------------------------------------------------- comparison bounds


def comparison_monitor(
    times: Sequence[float],
    z: Sequence[float],
    eps: float,
    c1: float,
    c2: float,
    c3: float,
    c4: float,
    sign_variant: str = "general",
    tol: float = 0.0,
) -> tuple:
    """Check a sampled function against the comparison-lemma envelope.

    general: z <= (c1/c2 + c4 (t+eps)) * exp(c3 (t+eps)), constants >= 0.
    c3_zero_c1_nonpositive: z <= c1/c2 + c4 (t+eps) with c1 <= 0.
    Returns (passed, worst_margin) with margin = bound - z.
    """
    if c2 <= 0:
        raise ValueError("c2 must be positive")
    t = np.asarray(times, dtype=float) + eps
    z = np.asarray(z, dtype=float)
    if sign_variant == "general":
        if min(c1, c3, c4) < 0:
            raise ValueError("general variant requires nonnegative constants")
        bound = (c1 / c2 + c4 * t) * np.exp(c3 * t)
    elif sign_variant == "c3_zero_c1_nonpositive":
        if c1 > 0:
            raise ValueError("negative variant requires c1 <= 0")
        if c4 < 0:
            raise ValueError("c4 must be nonnegative")
        bound = c1 / c2 + c4 * t
    else:
        raise ValueError(f"unknown sign_variant {sign_variant!r}")
    margins = bound - z
    worst = float(np.min(margins))
    return worst >= -tol, worst


def exp_linearization_constant(tau: float, eps: float) -> float:
    """Smallest c with (3/2) e^(t+eps) <= 3/2 + c (t+eps) on the window.

    The quotient ((3/2)(e^s - 1))/s is increasing, so the supremum sits at
    the right end s = tau + eps.
    """
    s = tau + eps
    return 1.5 * (math.exp(s) - 1.0) / s


# --------------------------------------------------------------------------- regularized solves


@dataclass(frozen=True)
class UVSolution:
    times: np.ndarray
    u: np.ndarray
    v: np.ndarray
    epsilon: float
    variant: str
    stats: dict


@dataclass(frozen=True)
class RungReport:
    epsilon: float
    variant: str
    min_u: float
    min_v: float
    mix_bound_margin: float
    lower_mix_margin: float
    linear_envelope_margin: float
    exp_linear_constant: float
    stationarity: tuple  # |du|, |dv| of the right-hand side at (0, 1, 1)
    integral_residual: float
    crossing_time: float | None
    crossing_threshold: float | None
    lower_bound_margin: float | None  # autonomous only
    lower_bound_constant: float | None  # autonomous only
    minimizer_sup: float | None  # autonomous only
    failures: tuple
    passed: bool

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "variant": self.variant,
            "min_u": self.min_u,
            "min_v": self.min_v,
            "mix_bound_margin": self.mix_bound_margin,
            "lower_mix_margin": self.lower_mix_margin,
            "linear_envelope_margin": self.linear_envelope_margin,
            "exp_linear_constant": self.exp_linear_constant,
            "stationarity": list(self.stationarity),
            "integral_residual": self.integral_residual,
            "crossing_time": self.crossing_time,
            "crossing_threshold": self.crossing_threshold,
            "lower_bound_margin": self.lower_bound_margin,
            "lower_bound_constant": self.lower_bound_constant,
            "minimizer_sup": self.minimizer_sup,
            "failures": list(self.failures),
            "passed": self.passed,
        }


def solve_regularized(
    sys: SingularUVSystem,
    tau: float,
    cfg: IntegratorConfig = IntegratorConfig(abs_tol=1e-12, rel_tol=1e-12,
                                             dense_output_grid=2048),
) -> tuple:
    """Integrate one regularized rung on [0, tau] and monitor the proof bounds.

    Returns (UVSolution, RungReport).  Bound violations beyond tolerance are
    recorded as failures: they flag the integrator, not the statement.
    """
    if sys.epsilon <= 0:
        raise ValueError("regularized solve needs epsilon > 0")
    if tau > 1.0:
        raise ValueError("rung horizon must not exceed 1")
    grid = np.linspace(0.0, tau, cfg.dense_output_grid)

    def rhs(t, y):
        du, dv = uv_rhs(sys, t, y[0], y[1])
        return np.array([du, dv])

    sol = solve_to_grid(rhs, grid, np.array([1.0, 1.0]), method=cfg.method,
                        abs_tol=cfg.abs_tol, rel_tol=cfg.rel_tol,
                        max_step=cfg.max_step, min_step=cfg.min_step)
    uv = UVSolution(sol.times, sol.states[:, 0], sol.states[:, 1],
                    sys.epsilon, sys.variant, sol.stats.as_dict())
    return uv, rung_monitor_report(uv)


def rung_monitor_report(uv: UVSolution) -> RungReport:
    eps, tau = uv.epsilon, float(uv.times[-1])
    failures = []

    min_u, min_v = float(np.min(uv.u)), float(np.min(uv.v))
    if min_u < -MONITOR_TOL:
        failures.append("sign_u")
    if min_v < -MONITOR_TOL:
        failures.append("sign_v")

    mix = uv.u + MIX_WEIGHT_UPPER * uv.v
    ok, mix_margin = comparison_monitor(uv.times, mix, eps, 1.5, 1.0, 1.0, 0.0,
                                        tol=MONITOR_TOL)
    if not ok:
        failures.append("mix_exponential_bound")

    c_hat = exp_linearization_constant(tau, eps)
    ok, lin_margin = comparison_monitor(uv.times, uv.v, eps, 6.0, 6.0, 0.0, c_hat,
                                        tol=MONITOR_TOL)
    if not ok:
        failures.append("v_linear_envelope")

    sys = SingularUVSystem(uv.variant, eps)
    du0, dv0 = uv_rhs(sys, 0.0, 1.0, 1.0)
    stationarity = (abs(du0), abs(dv0))
    if max(stationarity) > 1e-12:
        failures.append("stationarity_at_zero")

    res = singular_integral_residual(uv)
    # integral-form defect should track the stepper tolerance, not the bounds;
    # flag only wild values
    if res > 1e-6:
        failures.append("integral_residual")

    lower_margin = None
    c5 = None
    sigma_sup = None
    crossing_const = c_hat
    fvals = None
    if uv.variant == "autonomous":
        fvals = np.empty_like(uv.u)
        svals = np.empty_like(uv.u)
        for i, (t, u, v) in enumerate(zip(uv.times, uv.u, uv.v)):
            fvals[i], svals[i] = scaled_axis_distance_with_minimizer(t, u, v)
        sigma_sup = float(np.max(np.abs(svals)))
        c5 = max(c_hat, 2.0 * float(np.max(np.abs(uv.u))) * sigma_sup)
        crossing_const = c5

    # window up to the first crossing of v = const (t+eps): the lower
    # envelopes are only guaranteed there
    window = uv.v - crossing_const * (uv.times + eps) > 0.0
    stop = len(uv.times) if bool(np.all(window)) else int(np.argmin(window))
    sl = slice(0, max(stop, 1))

    if uv.variant == "autonomous":
        lower_margin = float(np.min(
            fvals[sl] - (uv.v[sl] - c5 * (uv.times[sl] + eps))
        ))
        if lower_margin < -MONITOR_TOL:
            failures.append("axis_term_lower_bound")

    lower_mix = uv.u[sl] + MIX_WEIGHT_LOWER * uv.v[sl]
    lower_env = (1.0 + MIX_WEIGHT_LOWER) - 3.0 * crossing_const * (uv.times[sl] + eps)
    lower_mix_margin = float(np.min(lower_mix - lower_env))
    if lower_mix_margin < -MONITOR_TOL:
        failures.append("mix_lower_envelope")

    crossing_time = None
    crossing_threshold = None
    if stop < len(uv.times):
        crossing_time = float(uv.times[stop])
        crossing_threshold = 1.0 / (26.0 * crossing_const)
        if crossing_time < crossing_threshold - MONITOR_TOL:
            failures.append("first_crossing_too_early")

    return RungReport(
        epsilon=eps, variant=uv.variant, min_u=min_u, min_v=min_v,
        mix_bound_margin=mix_margin, lower_mix_margin=lower_mix_margin,
        linear_envelope_margin=lin_margin,
        exp_linear_constant=c_hat, stationarity=stationarity,
        integral_residual=res,
        crossing_time=crossing_time, crossing_threshold=crossing_threshold,
        lower_bound_margin=lower_margin, lower_bound_constant=c5,
        minimizer_sup=sigma_sup,
        failures=tuple(failures), passed=not failures,
    )


def singular_integral_residual(uv: UVSolution, as_limit: bool = False) -> float:
    """Defect of the integral identity with kernel 1/(t + eps).

    With ``as_limit`` the data is checked against the singular system itself
    (eps = 0): the quadrature starts at the first positive grid time, since
    the kernel is only integrable against the actual solution there, and the
    approach to the initial value at 0 is reported separately.
    """
    eps = 0.0 if as_limit else uv.epsilon
    start = 1 if as_limit else 0
    t = uv.times[start:]
    u = uv.u[start:]
    v = uv.v[start:]
    sys = SingularUVSystem(uv.variant, 0.0)
    den = t + eps
    g = np.array([sys.drive(tt, uu, vv) for tt, uu, vv in zip(t, u, v)])
    integrand = np.column_stack([(-3.0 * u + 3.0 * g) / den, (-4.0 * v + 4.0 * u) / den])
    integral = cumulative_simpson(integrand, t)
    defect_u = u - u[0] - integral[:, 0]
    defect_v = v - v[0] - integral[:, 1]
    return float(max(np.max(np.abs(defect_u)), np.max(np.abs(defect_v))))


# --------------------------------------------------------------------------- epsilon ladder


@dataclass(frozen=True)
class LadderSpec:
    eps0: float = 0.1
    ratio: float = 0.5
    count: int = 14
    tau: float = 0.3
    grid_points: int = 2048
    gap_tol: float = 1e-6

    def __post_init__(self):
        if not 0 < self.eps0 <= 0.1:
            raise ValueError("eps0 must lie in (0, 0.1]")
        if not 0.0 < self.ratio < 1.0:
            raise ValueError("ratio must lie in (0, 1)")
        if self.count < 4:
            raise ValueError("need at least 4 rungs")
        if not 0 < self.tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")

    @property
    def epsilons(self) -> tuple:
        return tuple(self.eps0 * self.ratio**k for k in range(self.count))


@dataclass(frozen=True)
class EpsilonLadder:
    spec: LadderSpec
    variant: str
    solutions: tuple  # UVSolution per rung, largest epsilon first
    rung_reports: tuple
    sup_differences: tuple
    converged: bool
    gaps_decreasing_from: int | None
    window_warning: bool
    limit_residual: float
    continuity_at_zero: tuple  # (|u(t1)-1|, |v(t1)-1|, allowed bound)

    @property
    def limit(self) -> UVSolution:
        return self.solutions[-1]

    def summary(self) -> dict:
        return {
            "variant": self.variant,
            "epsilons": [s.epsilon for s in self.solutions],
            "sup_differences": list(self.sup_differences),
            "converged": self.converged,
            "gaps_decreasing_from": self.gaps_decreasing_from,
            "window_warning": self.window_warning,
            "limit_residual": self.limit_residual,
            "continuity_at_zero": list(self.continuity_at_zero),
            "gap_tol": self.spec.gap_tol,
            "tau": self.spec.tau,
            "rungs": [r.as_dict() for r in self.rung_reports],
        }


def run_epsilon_ladder(
    spec: LadderSpec = LadderSpec(),
    variant: str = "time",
    cfg: IntegratorConfig | None = None,
    workers: int = 1,
) -> EpsilonLadder:
    """Solve the rung family on a common grid and measure the Cauchy gaps.

    Rung monitors are hard requirements: a violated proof bound aborts the
    ladder.  Non-decreasing gaps are reported as non-convergence; the last
    rung is still exposed as the limit candidate, never silently replaced.
    """
    if cfg is None:
        cfg = IntegratorConfig(abs_tol=1e-12, rel_tol=1e-12,
                               dense_output_grid=spec.grid_points)
    systems = [SingularUVSystem(variant, e) for e in spec.epsilons]

    def one(sys):
        return solve_regularized(sys, spec.tau, cfg)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, systems))
    else:
        results = [one(s) for s in systems]

    solutions = tuple(r[0] for r in results)
    reports = tuple(r[1] for r in results)
    for rep in reports:
        if not rep.passed:
            raise MonitorViolation(
                f"proof-bound monitor failed on rung eps={rep.epsilon:g}: "
                f"{', '.join(rep.failures)}"
            )

    gaps = []
    for a, b in zip(solutions, solutions[1:]):
        gaps.append(float(max(np.max(np.abs(a.u - b.u)), np.max(np.abs(a.v - b.v)))))

    decreasing_from = None
    for k0 in range(len(gaps)):
        if all(gaps[k + 1] < gaps[k] for k in range(k0, len(gaps) - 1)):
            decreasing_from = k0
            break
    converged = bool(gaps and gaps[-1] <= spec.gap_tol and decreasing_from is not None)

    limit = solutions[-1]
    c_hat = reports[-1].exp_linear_constant
    window_warning = bool(spec.tau > 1.0 / (26.0 * c_hat))
    limit_residual = singular_integral_residual(limit, as_limit=True)
    t1 = float(limit.times[1])
    allowed = 12.0 * c_hat * (t1 + limit.epsilon) + MONITOR_TOL
    continuity = (abs(float(limit.u[1]) - 1.0), abs(float(limit.v[1]) - 1.0), allowed)

    return EpsilonLadder(
        spec=spec, variant=variant, solutions=solutions, rung_reports=reports,
        sup_differences=tuple(gaps), converged=converged,
        gaps_decreasing_from=decreasing_from, window_warning=window_warning,
        limit_residual=limit_residual, continuity_at_zero=continuity,
    )


# --------------------------------------------------------------------------- reconstruction


def reconstruct_trajectory(uv: UVSolution) -> Trajectory:
    """Lift a (u, v) solution back to the group: (t, t^3 u/18, t^4 (2u-v)/36)."""
    t = uv.times
    states = np.column_stack([
        t,
        t**3 * uv.u / 18.0,
        t**4 * (2.0 * uv.u - uv.v) / 36.0,
    ])
    meta = {"variant": uv.variant, "epsilon": uv.epsilon, "source": "uv_reconstruction"}
    return Trajectory(t.copy(), states, meta)


def trivial_trajectory(tau: float, n: int) -> Trajectory:
    t = np.linspace(0.0, tau, n)
    states = np.column_stack([t, np.zeros(n), np.zeros(n)])
    return Trajectory(t, states, {"source": "axis_line"})


def build_nonuniqueness_report(
    ladder: EpsilonLadder, separation_factor: float = 1e4
) -> tuple:
    """Turn a finished ladder into the exhibit report.

    Returns (report dict, reconstructed trajectory).  The verdict asserts
    that two certified near-solutions of one Cauchy problem stay apart by at
    least ``separation_factor`` times the worse residual, i.e. the
    separation cannot be a numerical artifact.
    """
    alg = heisenberg()
    variant = ladder.variant
    field = counterexample_field(alg, variant)

    gamma = reconstruct_trajectory(ladder.limit)
    straight = trivial_trajectory(ladder.spec.tau, len(gamma.times))
    res_trivial = flow_residual(straight, field)
    res_nontrivial = flow_residual(gamma, field)

    rel = alg.multiply_batch(-straight.states, gamma.states)
    separation = koranyi_norm_batch(rel)
    max_sep = float(np.max(separation))

    worst_res = max(res_trivial, res_nontrivial)
    sep_ok = max_sep >= separation_factor * worst_res
    gamma2_at_tau = float(gamma.states[-1, 1])

    sg = smooth_gauge(alg)
    lo, hi = equivalence_constants(alg, sg, koranyi_norm, 4000, seed=0)
    kappa = max(hi, 1.0 / lo)

    verdict = bool(ladder.converged and sep_ok and gamma2_at_tau > 0.0)
    last = ladder.rung_reports[-1]
    report = {
        "variant": variant,
        "ladder": ladder.summary(),
        "residual_trivial": res_trivial,
        "residual_nontrivial": res_nontrivial,
        "max_separation": max_sep,
        "separation_factor_required": separation_factor,
        "separation_margin": max_sep - separation_factor * worst_res,
        "separation": separation.tolist(),
        "gamma2_at_tau": gamma2_at_tau,
        "constants": {
            "exp_linearization": last.exp_linear_constant,
            "lower_bound": last.lower_bound_constant,
            "gauge_equivalence": kappa,
        },
        "nonuniqueness_certified": verdict,
    }
    return report, gamma


def nonuniqueness_report(
    variant: str = "time",
    spec: LadderSpec = LadderSpec(),
    cfg: IntegratorConfig | None = None,
    workers: int = 1,
    separation_factor: float = 1e4,
) -> dict:
    """Run the full exhibit pipeline and return the report."""
    ladder = run_epsilon_ladder(spec, variant, cfg, workers)
    report, _ = build_nonuniqueness_report(ladder, separation_factor)
    return report
