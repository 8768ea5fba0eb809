"""Homogeneous gauges and homogeneous distances.

A homogeneous gauge is a continuous 1-homogeneous symmetric function
vanishing only at the origin.  Two canonical instances are provided: the
smooth even-exponent gauge available on every graded group, and the
quartic norm on the Heisenberg group (which satisfies an exact triangle
inequality with respect to the group product).  A homogeneous distance is
``d(x, y) = gauge(x^{-1} y)``; left invariance and 1-homogeneity then hold
by construction and are monitored empirically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .groups import GradedAlgebra, heisenberg, inverse, is_heisenberg

GaugeFn = Callable[[np.ndarray], float]


def minimal_even_exponent(degrees: Sequence[int]) -> int:
    """Smallest N such that N / d is an even natural number for every degree d."""
    N = 1
    for d in set(degrees):
        N = math.lcm(N, 2 * d)
    return N


@dataclass(frozen=True)
class SmoothGauge:
    """Even-exponent gauge (sum_i x_i^rho_i)^(1/N) with rho_i = N / d_i."""

    algebra: GradedAlgebra
    exponent: int
    rhos: tuple

    def __call__(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.sum(np.abs(x) ** np.array(self.rhos)) ** (1.0 / self.exponent))

    def batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.sum(np.abs(X) ** np.array(self.rhos), axis=1) ** (1.0 / self.exponent)


def smooth_gauge(alg: GradedAlgebra, exponent: int | None = None) -> SmoothGauge:
    """Construct the smooth gauge; default N is the smallest admissible one."""
    N = minimal_even_exponent(alg.degrees) if exponent is None else int(exponent)
    rhos = []
    for d in alg.degrees:
        rho, rem = divmod(N, d)
        if rem or rho % 2 or rho <= 0:
            raise ValueError(f"N={N} does not give an even natural exponent for degree {d}")
        rhos.append(rho)
    return SmoothGauge(alg, N, tuple(rhos))


def smooth_gauge_value(g: SmoothGauge, x: Sequence[float]) -> float:
    return g(x)


def koranyi_norm(x: Sequence[float]) -> float:
    """Quartic gauge ((x1^2 + x2^2)^2 + x3^2)^(1/4) on the Heisenberg group."""
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise ValueError("the quartic Heisenberg gauge is defined on 3-vectors")
    h = x[0] * x[0] + x[1] * x[1]
    return float((h * h + x[2] * x[2]) ** 0.25)


def koranyi_norm_batch(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    h = X[:, 0] ** 2 + X[:, 1] ** 2
    return (h**2 + X[:, 2] ** 2) ** 0.25


@dataclass(frozen=True)
class HomogeneousDistance:
    """Left-invariant distance d(x, y) = gauge(x^{-1} y).

    ``quasi_triangle_constant`` is an empirical estimate of
    sup gauge(xy) / (gauge(x) + gauge(y)); it is 1 when the gauge satisfies
    the exact triangle inequality (as the quartic Heisenberg gauge does) and
    is only an observed value otherwise.
    """

    algebra: GradedAlgebra
    gauge: GaugeFn
    label: str
    quasi_triangle_constant: float | None = None

    def __call__(self, x: Sequence[float], y: Sequence[float]) -> float:
        return self.gauge(self.algebra.multiply(inverse(x), y))

    def batch(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        Z = self.algebra.multiply_batch(-np.asarray(X, dtype=float), Y)
        if self.label == "koranyi":
            return koranyi_norm_batch(Z)
        gauge = self.gauge
        if isinstance(gauge, SmoothGauge):
            return gauge.batch(Z)
        return np.array([gauge(z) for z in Z])

    def to_origin(self, x: Sequence[float]) -> float:
        return self.gauge(np.asarray(x, dtype=float))


def distance(dst: HomogeneousDistance, x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (dst.algebra.dim,) or y.shape != (dst.algebra.dim,):
        raise ValueError("element dimension does not match the distance's algebra")
    return dst(x, y)


def smooth_distance(alg: GradedAlgebra, quasi_samples: int = 0,
                    seed: int = 0) -> HomogeneousDistance:
    """Distance from the smooth gauge; no triangle inequality is assumed.

    With ``quasi_samples`` > 0 the quasi-triangle constant is estimated by
    sampling and recorded on the returned object.
    """
    g = smooth_gauge(alg)
    quasi = None
    if quasi_samples > 0:
        quasi = estimate_quasi_triangle_constant(alg, g, quasi_samples, seed)
    return HomogeneousDistance(alg, g, "smooth", quasi)


def koranyi_distance(alg: GradedAlgebra | None = None) -> HomogeneousDistance:
    alg = heisenberg() if alg is None else alg
    if not is_heisenberg(alg):
        raise ValueError("the quartic gauge distance requires the Heisenberg preset")
    return HomogeneousDistance(alg, koranyi_norm, "koranyi", 1.0)


def default_distance(alg: GradedAlgebra) -> HomogeneousDistance:
    """Quartic norm on the Heisenberg preset, smooth gauge otherwise."""
    if is_heisenberg(alg):
        return koranyi_distance(alg)
    return smooth_distance(alg)


# --------------------------------------------------------------------------- sampling helpers


def _sample_nonzero(alg: GradedAlgebra, rng: np.random.Generator, n: int) -> np.ndarray:
    X = rng.uniform(-1.0, 1.0, size=(n, alg.dim))
    X[np.all(X == 0.0, axis=1)] = 1.0  # vanishing samples are useless here
    return X


def _gauge_batch(gauge: GaugeFn, X: np.ndarray) -> np.ndarray:
    if isinstance(gauge, SmoothGauge):
        return gauge.batch(X)
    if gauge is koranyi_norm:
        return koranyi_norm_batch(X)
    return np.array([gauge(x) for x in X])


def equivalence_constants(
    alg: GradedAlgebra,
    g1: GaugeFn,
    g2: GaugeFn,
    sample_count: int,
    seed: int = 0,
) -> tuple[float, float]:
    """Empirical (lower, upper) bounds for g2 / g1 on the unit sphere of g1.

    The ratio is 0-homogeneous, so sampling the g1-unit sphere (random points
    renormalized by dilation) covers all scales.
    """
    if sample_count < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    X = _sample_nonzero(alg, rng, sample_count)
    v1 = _gauge_batch(g1, X)
    if not np.all(np.isfinite(v1)) or np.any(v1 <= 0):
        raise ValueError("degenerate gauge: vanishing or non-finite on nonzero samples")
    unit = np.vstack([alg.dilate(1.0 / r, x) for r, x in zip(v1, X)])
    ratios = _gauge_batch(g2, unit)
    if not np.all(np.isfinite(ratios)) or np.any(ratios <= 0):
        raise ValueError("degenerate gauge ratio encountered (0 or infinity)")
    return float(ratios.min()), float(ratios.max())


def estimate_quasi_triangle_constant(
    alg: GradedAlgebra, gauge: GaugeFn, samples: int, seed: int = 0
) -> float:
    """Empirical sup of gauge(x y) / (gauge(x) + gauge(y))."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(-2.0, 2.0, size=(samples, alg.dim))
    Y = rng.uniform(-2.0, 2.0, size=(samples, alg.dim))
    num = _gauge_batch(gauge, alg.multiply_batch(X, Y))
    den = _gauge_batch(gauge, X) + _gauge_batch(gauge, Y)
    ok = den > 0
    return float(np.max(num[ok] / den[ok]))


def homogeneous_domination_constant(
    alg: GradedAlgebra,
    f: Callable[[np.ndarray], float],
    degree: float,
    gauge: GaugeFn,
    samples: int,
    seed: int = 0,
) -> float:
    """Estimate C with |f(x)| <= C * gauge(x)^degree via unit-sphere sampling."""
    rng = np.random.default_rng(seed)
    X = _sample_nonzero(alg, rng, samples)
    norms = _gauge_batch(gauge, X)
    unit = np.vstack([alg.dilate(1.0 / r, x) for r, x in zip(norms, X)])
    return float(max(abs(f(u)) for u in unit))


def gauge_report(
    alg: GradedAlgebra,
    gauge: GaugeFn,
    samples: int,
    seed: int = 0,
    enforce_triangle: bool | None = None,
) -> dict:
    """Property-check report for one gauge: homogeneity, symmetry, triangle.

    ``triangle_violations`` counts sampled pairs with
    gauge(xy) > gauge(x) + gauge(y) + 1e-12; it is only a pass/fail criterion
    when ``enforce_triangle`` (defaults to True exactly for the quartic
    Heisenberg gauge, whose triangle inequality is exact).
    """
    rng = np.random.default_rng(seed)
    X = rng.uniform(-3.0, 3.0, size=(samples, alg.dim))
    Y = rng.uniform(-3.0, 3.0, size=(samples, alg.dim))
    scales = rng.uniform(0.25, 4.0, size=samples)

    gX = _gauge_batch(gauge, X)
    hom_errs = []
    for r, x, g in zip(scales, X, gX):
        hom_errs.append(abs(gauge(alg.dilate(r, x)) - r * g))
    homogeneity_max_err = float(max(hom_errs))

    symmetry_max_err = float(np.max(np.abs(_gauge_batch(gauge, -X) - gX)))

    lhs = _gauge_batch(gauge, alg.multiply_batch(X, Y))
    rhs = gX + _gauge_batch(gauge, Y)
    excess = lhs - rhs
    triangle_violations = int(np.sum(excess > 1e-12))
    quasi = float(np.max(lhs / np.where(rhs > 0, rhs, np.inf)))

    sg = smooth_gauge(alg)
    lo, hi = equivalence_constants(alg, sg, gauge, samples, seed)

    if enforce_triangle is None:
        enforce_triangle = gauge is koranyi_norm
    passed = homogeneity_max_err <= 1e-12 and symmetry_max_err <= 1e-12
    if enforce_triangle:
        passed = passed and triangle_violations == 0

    return {
        "samples": int(samples),
        "seed": int(seed),
        "homogeneity_max_err": homogeneity_max_err,
        "symmetry_max_err": symmetry_max_err,
        "triangle_violations": triangle_violations,
        "quasi_triangle_constant": quasi,
        "equivalence_constants": {"lower": lo, "upper": hi, "reference": "smooth"},
        "triangle_enforced": bool(enforce_triangle),
        "passed": bool(passed),
    }
