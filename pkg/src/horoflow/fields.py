"""Left-invariant frames, horizontal vector fields and derivations.

The left-invariant field with value e_i at the origin has polynomial
coefficients in graded coordinates; we obtain them exactly by
differentiating the symbolic group law in the second argument at the
identity.  A horizontal field is a combination of the first-layer frame
fields with scalar coefficient functions; it induces a derivation on test
functions, and conversely the coefficients can be recovered from the
derivation by applying it to left-translated coordinate functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .domain import Box
from .gauges import HomogeneousDistance, default_distance
from .groups import GradedAlgebra, inverse, is_heisenberg
from .poly import Poly

CoefficientFn = Callable[[float, np.ndarray], float]


@dataclass(frozen=True)
class LeftInvariantField:
    """Row of coefficient polynomials of one left-invariant frame field.

    ``rows[j]`` multiplies the j-th coordinate direction; the identity block
    (degree of target <= degree of index) is exactly the Kronecker delta and
    every other entry is a homogeneous polynomial of weighted degree
    d_j - d_i.
    """

    index: int  # 1-based basis index
    rows: tuple  # tuple[Poly, ...]

    def value(self, x: Sequence[float]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([p.evaluate(x) for p in self.rows])


def compute_p(alg: GradedAlgebra, i: int) -> LeftInvariantField:
    """Coefficient polynomials of the left-invariant field with value e_i at 0."""
    q = alg.dim
    if not 1 <= i <= q:
        raise ValueError(f"basis index {i} out of range 1..{q}")
    law = alg.law
    zero_y = {q + k: 0 for k in range(q)}
    rows = []
    for j in range(q):
        row = law[j].diff(q + (i - 1)).substitute(zero_y).project(range(q))
        rows.append(row)
    return LeftInvariantField(index=i, rows=tuple(rows))


def left_invariant_frame(alg: GradedAlgebra) -> tuple:
    """All q frame fields, computed once per algebra."""
    if "frame" not in alg._cache:
        alg._cache["frame"] = tuple(compute_p(alg, i) for i in range(1, alg.dim + 1))
        alg._cache["frame_compiled"] = tuple(
            tuple(p.compiled() for p in f.rows) for f in alg._cache["frame"]
        )
    return alg._cache["frame"]


def _compiled_frame(alg: GradedAlgebra):
    left_invariant_frame(alg)
    return alg._cache["frame_compiled"]


# --------------------------------------------------------------------------- fields


@dataclass(frozen=True)
class HorizontalField:
    """Vector field sum_i a_i(t, x) X_i over a subset of frame indices.

    ``indices`` are 1-based; the default constructor restricts them to the
    first layer, which is what makes the field horizontal.  Coefficients must
    be pure functions (t, x) -> float.
    """

    algebra: GradedAlgebra
    coefficients: tuple
    indices: tuple
    time_dependent: bool = True
    lipschitz_estimate: float | None = None

    def __post_init__(self):
        if len(self.coefficients) != len(self.indices):
            raise ValueError("one coefficient function per frame index")
        q = self.algebra.dim
        for i in self.indices:
            if not 1 <= i <= q:
                raise ValueError(f"frame index {i} out of range 1..{q}")

    @property
    def is_horizontal(self) -> bool:
        return all(i <= self.algebra.horizontal_dim for i in self.indices)

    def coefficient_values(self, t: float, x: np.ndarray) -> np.ndarray:
        return np.array([a(t, x) for a in self.coefficients])


def horizontal_field(
    alg: GradedAlgebra,
    coefficients: Sequence[CoefficientFn],
    time_dependent: bool = True,
    lipschitz_estimate: float | None = None,
) -> HorizontalField:
    """Field over the full first-layer frame (one coefficient per X_1..X_m)."""
    m = alg.horizontal_dim
    if len(coefficients) != m:
        raise ValueError(f"expected {m} coefficients for the first layer")
    return HorizontalField(
        alg, tuple(coefficients), tuple(range(1, m + 1)), time_dependent, lipschitz_estimate
    )


def frame_field(
    alg: GradedAlgebra,
    coefficients: Sequence[CoefficientFn],
    indices: Sequence[int],
    time_dependent: bool = True,
) -> HorizontalField:
    """General frame combination; not necessarily horizontal."""
    return HorizontalField(alg, tuple(coefficients), tuple(int(i) for i in indices), time_dependent)


def evaluate_field(b: HorizontalField, t: float, x: Sequence[float]) -> np.ndarray:
    """Coordinate velocity sum_i a_i(t, x) * (frame row of X_i at x)."""
    x = np.asarray(x, dtype=float)
    rows = _compiled_frame(b.algebra)
    out = np.zeros(b.algebra.dim)
    for a, i in zip(b.coefficients, b.indices):
        ai = a(t, x)
        if ai != 0.0:
            row = rows[i - 1]
            for j in range(b.algebra.dim):
                out[j] += ai * row[j](x)
    return out


# --------------------------------------------------------------------------- derivations


@dataclass(frozen=True)
class TestFunction:
    """Smooth scalar function supplied with its coordinate partial derivatives."""

    __test__ = False  # the mathematical kind, not the pytest kind

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Derivation:
    """Linear action on test functions, bounded by h(x) |horizontal gradient|."""

    algebra: GradedAlgebra
    action: Callable[[TestFunction, np.ndarray], float]
    bound: Callable[[np.ndarray], float]

    def __call__(self, f: TestFunction, x: Sequence[float]) -> float:
        return self.action(f, np.asarray(x, dtype=float))


def apply_derivation(
    b: HorizontalField, f: TestFunction, x: Sequence[float], t: float = 0.0
) -> float:
    """Directional derivative sum_i a_i(x) X_i f (x)."""
    x = np.asarray(x, dtype=float)
    rows = _compiled_frame(b.algebra)
    grad = np.asarray(f.gradient(x), dtype=float)
    total = 0.0
    for a, i in zip(b.coefficients, b.indices):
        ai = a(t, x)
        if ai != 0.0:
            row = rows[i - 1]
            total += ai * sum(grad[j] * row[j](x) for j in range(b.algebra.dim))
    return total


def derivation_of(b: HorizontalField, t: float = 0.0) -> Derivation:
    if not b.is_horizontal:
        raise ValueError("only horizontal fields induce bounded derivations")

    def act(f: TestFunction, x: np.ndarray) -> float:
        return apply_derivation(b, f, x, t)

    def bound(x: np.ndarray) -> float:
        return float(math.sqrt(sum(a(t, x) ** 2 for a in b.coefficients)))

    return Derivation(b.algebra, act, bound)


def horizontal_gradient(alg: GradedAlgebra, f: TestFunction, x: Sequence[float]) -> np.ndarray:
    """(X_1 f, ..., X_m f) at x."""
    x = np.asarray(x, dtype=float)
    rows = _compiled_frame(alg)
    grad = np.asarray(f.gradient(x), dtype=float)
    m = alg.horizontal_dim
    return np.array(
        [sum(grad[j] * rows[i][j](x) for j in range(alg.dim)) for i in range(m)]
    )


def coordinate_function(alg: GradedAlgebra, j: int) -> TestFunction:
    """The j-th coordinate as a test function (1-based)."""
    q = alg.dim
    ej = np.zeros(q)
    ej[j - 1] = 1.0
    return TestFunction(lambda x: float(x[j - 1]), lambda x, _e=ej: _e)


def translated_coordinate_functions(alg: GradedAlgebra, xbar: Sequence[float]) -> list:
    """Coordinate functions composed with left translation by xbar^{-1}.

    These satisfy X_i(f_j)(xbar) = delta_ij, which is what makes coefficient
    recovery at xbar a plain readout.
    """
    q = alg.dim
    xbar = np.asarray(xbar, dtype=float)
    xbar_inv = inverse(xbar)
    law = alg.law
    fns = []
    for j in range(q):
        value_poly = law[j]
        grads = [law[j].diff(q + k) for k in range(q)]

        def make(vp=value_poly, gs=grads):
            def val(x):
                return vp.evaluate(np.concatenate([xbar_inv, x]))

            def grad(x):
                pt = np.concatenate([xbar_inv, x])
                return np.array([g.evaluate(pt) for g in gs])

            return TestFunction(val, grad)

        fns.append(make())
    return fns


class NonHorizontalDerivationError(ValueError):
    """The derivation does not annihilate non-horizontal directions at the point."""


def recover_coefficients(
    D: Derivation, xbar: Sequence[float], tol: float = 1e-8
) -> np.ndarray:
    """First-layer coefficients of the unique horizontal field inducing D.

    Applies D to the left-translated coordinate functions at xbar; the
    entries beyond the first layer must vanish (up to ``tol`` against the
    bound scale) or the derivation is not horizontal.
    """
    alg = D.algebra
    xbar = np.asarray(xbar, dtype=float)
    etas = translated_coordinate_functions(alg, xbar)
    values = np.array([D(eta, xbar) for eta in etas])
    m = alg.horizontal_dim
    scale = max(1.0, float(D.bound(xbar)))
    bad = np.abs(values[m:]) > tol * scale
    if np.any(bad):
        k = int(np.argmax(np.abs(values[m:]))) + m + 1
        raise NonHorizontalDerivationError(
            f"derivation bound violated at the recovery point: component {k} "
            f"reads {values[k - 1]:.3e} where the horizontal gradient vanishes"
        )
    return values[:m]


# --------------------------------------------------------------------------- Lipschitz estimate


def estimate_lipschitz(
    a: Callable[[np.ndarray], float],
    dst: HomogeneousDistance,
    box: Box,
    samples: int,
    seed: int,
) -> float:
    """Sampled lower bound for the Lipschitz constant of ``a`` w.r.t. ``dst``.

    Draws ``samples`` independent pairs in the box; deterministic given the
    seed.  Being a max over finitely many ratios, the result never exceeds
    the true constant.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    if box.dim != dst.algebra.dim:
        raise ValueError("box dimension does not match the algebra")
    rng = np.random.default_rng(seed)
    X = box.sample(rng, samples)
    Y = box.sample(rng, samples)
    best = 0.0
    for x, y in zip(X, Y):
        d = dst(x, y)
        if d > 0:
            best = max(best, abs(a(x) - a(y)) / d)
    return best


# --------------------------------------------------------------------------- JSON field specs


def _axis_point_distance(t: float, x: np.ndarray) -> float:
    # quartic-gauge distance from the moving axis point (t, 0, 0)
    h = (x[0] - t) ** 2 + x[1] ** 2
    return float((h * h + (x[2] - t * x[1]) ** 2) ** 0.25)


def field_from_spec(
    alg: GradedAlgebra,
    spec: Mapping,
    distance: HomogeneousDistance | None = None,
) -> HorizontalField:
    """Build a field from the JSON coefficient forms.

    Supported forms: ``constant``, ``monomial``, ``distance_to_point``,
    ``axis_distance`` (time-dependent distance to (t,0,0)),
    ``axis_distance_inf`` (distance to the whole first axis) and
    ``sin_coordinate``.  Anything richer requires the library API.
    """
    from .counterexample import distance_to_axis  # local import to avoid a cycle

    dst = distance or default_distance(alg)
    coeffs = []
    for c in spec["coefficients"]:
        form = c.get("form")
        if form == "constant":
            v = float(c["value"])
            coeffs.append(lambda t, x, _v=v: _v)
        elif form == "monomial":
            expo = tuple(int(e) for e in c["exponents"])
            if len(expo) != alg.dim:
                raise ValueError("monomial exponents must have one entry per coordinate")
            scale = float(c.get("scale", 1.0))
            p = Poly(alg.dim, {expo: 1}) * scale
            fn = p.compiled()
            coeffs.append(lambda t, x, _f=fn: _f(x))
        elif form == "distance_to_point":
            point = np.asarray(c.get("point", np.zeros(alg.dim)), dtype=float)
            coeffs.append(lambda t, x, _p=point, _d=dst: _d(_p, x))
        elif form == "axis_distance":
            if not is_heisenberg(alg):
                raise ValueError("axis_distance form requires the Heisenberg preset")
            coeffs.append(_axis_point_distance)
        elif form == "axis_distance_inf":
            if not is_heisenberg(alg):
                raise ValueError("axis_distance_inf form requires the Heisenberg preset")
            coeffs.append(lambda t, x: distance_to_axis(x))
        elif form == "sin_coordinate":
            idx = int(c.get("index", 1)) - 1
            if not 0 <= idx < alg.dim:
                raise ValueError(f"sin_coordinate index {idx + 1} out of range")
            scale = float(c.get("scale", 1.0))
            coeffs.append(lambda t, x, _i=idx, _s=scale: _s * math.sin(x[_i]))
        else:
            raise ValueError(f"unknown coefficient form {form!r}")
    indices = spec.get("indices")
    if indices is None:
        return horizontal_field(alg, coeffs, time_dependent=True)
    return frame_field(alg, coeffs, indices)
