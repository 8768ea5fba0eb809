"""Axis boxes and group-translated regions used as ODE domains and sample sets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .groups import GradedAlgebra, inverse


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi):
            raise ValueError("box bounds have mismatched lengths")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("degenerate box: every side must have positive length")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, x: Sequence[float]) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo) and np.all(x <= self.hi))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))


@dataclass(frozen=True)
class TranslatedBox:
    """Left-translate of a box: membership of x means base contains offset^{-1} x."""

    algebra: GradedAlgebra
    offset: tuple
    base: Box

    def contains(self, x: Sequence[float]) -> bool:
        off_inv = inverse(np.asarray(self.offset, dtype=float))
        return self.base.contains(self.algebra.multiply(off_inv, np.asarray(x, dtype=float)))
