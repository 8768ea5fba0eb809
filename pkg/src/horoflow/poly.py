"""Exact sparse multivariate polynomials over the rationals.

Deliberately small: only what symbolic group-law manipulation needs
(ring arithmetic, partial derivatives, restriction, evaluation, weighted
degrees).  Coefficients are `fractions.Fraction`, so every identity that is
rational in the structure constants stays exact; binary floats convert to
fractions without loss.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Mapping, Sequence, Union

import numpy as np

Scalar = Union[int, float, Fraction]


def _frac(c: Scalar) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


class Poly:
    """Polynomial in ``nvars`` variables stored as {exponent tuple: Fraction}."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple, Scalar] | None = None):
        self.nvars = int(nvars)
        clean: dict[tuple, Fraction] = {}
        if terms:
            for expo, coeff in terms.items():
                c = _frac(coeff)
                if c == 0:
                    continue
                expo = tuple(int(e) for e in expo)
                if len(expo) != self.nvars:
                    raise ValueError(f"exponent tuple {expo} does not match nvars={self.nvars}")
                if any(e < 0 for e in expo):
                    raise ValueError(f"negative exponent in {expo}")
                clean[expo] = clean.get(expo, Fraction(0)) + c
        self.terms = {e: c for e, c in clean.items() if c != 0}

    # ------------------------------------------------------------------ constructors

    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, c: Scalar) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "Poly":
        if not 0 <= i < nvars:
            raise ValueError(f"variable index {i} out of range for nvars={nvars}")
        expo = [0] * nvars
        expo[i] = 1
        return cls(nvars, {tuple(expo): 1})

    # ------------------------------------------------------------------ predicates

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, float, Fraction)):
            c = _frac(other)
            if c == 0:
                return self.is_zero
            return self.terms == {(0,) * self.nvars: c}
        return NotImplemented

    __hash__ = None  # mutable-ish dict payload; never used as a key

    # ------------------------------------------------------------------ ring ops

    def _check(self, other: "Poly") -> None:
        if self.nvars != other.nvars:
            raise ValueError("polynomials over different variable counts")

    def __add__(self, other) -> "Poly":
        if isinstance(other, (int, float, Fraction)):
            other = Poly.constant(self.nvars, other)
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-other if isinstance(other, Poly) else -_frac(other))

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, float, Fraction)):
            c = _frac(other)
            return Poly(self.nvars, {e: c * v for e, v in self.terms.items()})
        self._check(other)
        out: dict[tuple, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers")
        result = Poly.constant(self.nvars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # ------------------------------------------------------------------ calculus

    def diff(self, i: int) -> "Poly":
        """Partial derivative with respect to variable ``i``."""
        out: dict[tuple, Fraction] = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            de = list(e)
            de[i] -= 1
            out[tuple(de)] = out.get(tuple(de), Fraction(0)) + c * e[i]
        return Poly(self.nvars, out)

    def substitute(self, values: Mapping[int, Scalar]) -> "Poly":
        """Substitute exact values for a subset of variables."""
        vals = {int(i): _frac(v) for i, v in values.items()}
        out: dict[tuple, Fraction] = {}
        for e, c in self.terms.items():
            coeff = c
            ne = list(e)
            for i, v in vals.items():
                if e[i]:
                    coeff *= v ** e[i]
                ne[i] = 0
            if coeff != 0:
                key = tuple(ne)
                out[key] = out.get(key, Fraction(0)) + coeff
        return Poly(self.nvars, out)

    def project(self, keep: Sequence[int]) -> "Poly":
        """Re-express over the subset ``keep`` of variables (order given).

        Raises if any term involves a variable outside ``keep``.
        """
        keep = [int(k) for k in keep]
        pos = {k: j for j, k in enumerate(keep)}
        out: dict[tuple, Fraction] = {}
        for e, c in self.terms.items():
            ne = [0] * len(keep)
            for i, p in enumerate(e):
                if p == 0:
                    continue
                if i not in pos:
                    raise ValueError(f"term involves variable {i} outside projection")
                ne[pos[i]] = p
            out[tuple(ne)] = c
        return Poly(len(keep), out)

    # ------------------------------------------------------------------ evaluation

    def evaluate(self, xs: Sequence[float]) -> float:
        total = 0.0
        for e, c in self.terms.items():
            v = float(c)
            for i, p in enumerate(e):
                if p:
                    v *= xs[i] ** p if p > 1 else xs[i]
            total += v
        return total

    def evaluate_exact(self, xs: Sequence[Scalar]) -> Fraction:
        total = Fraction(0)
        vals = [_frac(x) for x in xs]
        for e, c in self.terms.items():
            v = c
            for i, p in enumerate(e):
                if p:
                    v *= vals[i] ** p
            total += v
        return total

    def compiled(self) -> Callable[[Sequence[float]], float]:
        """Return a fast float evaluator (terms flattened once)."""
        items = sorted(self.terms.items())
        flat = [([i for i, p in enumerate(e) for _ in range(p)], float(c)) for e, c in items]

        def _eval(xs, _flat=flat):
            total = 0.0
            for idxs, c in _flat:
                v = c
                for i in idxs:
                    v *= xs[i]
                total += v
            return total

        return _eval

    def batch(self, X: np.ndarray) -> np.ndarray:
        """Evaluate on an (n, nvars) array of points."""
        X = np.asarray(X, dtype=float)
        out = np.zeros(X.shape[0])
        for e, c in self.terms.items():
            v = np.full(X.shape[0], float(c))
            for i, p in enumerate(e):
                if p:
                    v = v * X[:, i] ** p
            out += v
        return out

    # ------------------------------------------------------------------ structure

    def weighted_degrees(self, weights: Sequence[int]) -> frozenset:
        """Set of weighted monomial degrees sum_i w_i * e_i over the support."""
        return frozenset(sum(w * p for w, p in zip(weights, e)) for e in self.terms)

    def degree(self) -> int:
        if self.is_zero:
            return -1
        return max(sum(e) for e in self.terms)

    def __repr__(self) -> str:
        if self.is_zero:
            return "Poly(0)"
        parts = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(
                f"x{i}" if p == 1 else f"x{i}^{p}" for i, p in enumerate(e) if p
            )
            parts.append(f"{c}" if not mono else f"{c}*{mono}")
        return "Poly(" + " + ".join(parts) + ")"
