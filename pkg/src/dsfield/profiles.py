"""Separable profile families and scalar-in-time coefficient functions.

A profile is a real function of one spatial variable (its own rotated
coordinate) and time.  Each family evaluates to an order-3 jet so that
downstream derivations, which differentiate profile derivatives once more,
remain exact.  The exponential-sum family covers localized and line-type
data; the remaining families are the fixed forms behind the breather,
periodic and instanton catalog cases.  ``CustomProfile`` accepts any
jet-valued callable for exploration beyond the built-in forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import calculus as jc
from .calculus import Jet3


__all__ = [
    "ProfileFunction",
    "ExpSumProfile",
    "BreatherPProfile",
    "BreatherQProfile",
    "TanCosProfile",
    "InstantonPProfile",
    "InstantonQProfile",
    "CustomProfile",
    "TimeFunction",
    "const_fn",
    "poly_fn",
]


class ProfileFunction:
    """Common interface: ``jet3(x, t)`` returns an order-3 jet in (x, t)."""

    family = "abstract"

    def jet3(self, x, t) -> Jet3:
        raise NotImplementedError

    def jet(self, x, t):
        return jc.truncate(self.jet3(x, t))


@dataclass(frozen=True)
class ExpSumProfile(ProfileFunction):
    """Sum of exponentials sum_i A_i exp(K_i x + L_i t + theta_i)."""

    A: tuple
    K: tuple
    L: tuple
    theta: tuple
    family = "expsum"

    def __post_init__(self):
        n = len(self.A)
        if n < 1:
            raise ValueError("exponential sum needs at least one term")
        if not (len(self.K) == len(self.L) == len(self.theta) == n):
            raise ValueError("A, K, L, theta must have equal lengths")
        for seq in (self.A, self.K, self.L, self.theta):
            if not all(np.isfinite(v) for v in seq):
                raise ValueError("profile parameters must be finite")
        for name, seq in (("A", self.A), ("K", self.K), ("L", self.L), ("theta", self.theta)):
            object.__setattr__(self, name, tuple(float(v) for v in seq))

    def jet3(self, x, t) -> Jet3:
        x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
        total = None
        for a, k, l, th in zip(self.A, self.K, self.L, self.theta):
            e = a * np.exp(k * x + l * t + th)
            term = Jet3(e, k * e, l * e, k * k * e, k * l * e, l * l * e,
                        k ** 3 * e, k * k * l * e, k * l * l * e, l ** 3 * e)
            total = term if total is None else total + term
        return total


@dataclass(frozen=True)
class BreatherPProfile(ProfileFunction):
    """1 + exp(x * cos^2 t): spatial decay rate oscillates in time."""

    family = "breather_p"

    def jet3(self, x, t) -> Jet3:
        xj = jc.spatial3(x)
        tj = jc.temporal3(_t_like(t, x))
        c = jc.cos(tj)
        return 1.0 + jc.exp(xj * c * c)


@dataclass(frozen=True)
class BreatherQProfile(ProfileFunction):
    """exp(x + cos^2 t)."""

    family = "breather_q"

    def jet3(self, x, t) -> Jet3:
        xj = jc.spatial3(x)
        tj = jc.temporal3(_t_like(t, x))
        c = jc.cos(tj)
        return jc.exp(xj + c * c)


@dataclass(frozen=True)
class TanCosProfile(ProfileFunction):
    """1 + exp(tan(x) * cos(t) + 1), periodic in both arguments."""

    family = "tancos"

    def jet3(self, x, t) -> Jet3:
        xj = jc.spatial3(x)
        tj = jc.temporal3(_t_like(t, x))
        return 1.0 + jc.exp(jc.tan(xj) * jc.cos(tj) + 1.0)


@dataclass(frozen=True)
class InstantonPProfile(ProfileFunction):
    """exp(x+2t+1) + exp(x+t+1) + exp(-(x^3+1)^-1 + 2t + 1).

    The third term has a pole at x = -1; evaluation there goes non-finite
    and callers mask a small neighbourhood of the pole.
    """

    family = "instanton_p"

    def jet3(self, x, t) -> Jet3:
        base = ExpSumProfile(A=(1.0, 1.0), K=(1.0, 1.0), L=(2.0, 1.0), theta=(1.0, 1.0))
        xj = jc.spatial3(x)
        tj = jc.temporal3(_t_like(t, x))
        w = jc.powi(xj * xj * xj + 1.0, -1)
        bump = jc.exp(-w + 2.0 * tj + 1.0)
        return base.jet3(x, t) + bump


@dataclass(frozen=True)
class InstantonQProfile(ProfileFunction):
    """exp(x+2t+1) + exp(x+t+1)."""

    family = "instanton_q"

    def jet3(self, x, t) -> Jet3:
        base = ExpSumProfile(A=(1.0, 1.0), K=(1.0, 1.0), L=(2.0, 1.0), theta=(1.0, 1.0))
        return base.jet3(x, t)


@dataclass(frozen=True)
class CustomProfile(ProfileFunction):
    """Caller-supplied evaluator mapping seed jets (x, t) to a Jet3."""

    fn: Callable[[Jet3, Jet3], Jet3]
    label: str = "custom"
    family = "custom"

    def jet3(self, x, t) -> Jet3:
        xj = jc.spatial3(np.asarray(x, dtype=float) if np.ndim(x) else float(x))
        tj = jc.temporal3(_t_like(t, x))
        out = self.fn(xj, tj)
        if not isinstance(out, Jet3):
            raise TypeError("custom profile evaluator must return a Jet3")
        return out


def _t_like(t, x):
    """Broadcast scalar time against an array spatial argument."""
    if np.ndim(x) and not np.ndim(t):
        return np.full(np.shape(x), float(t))
    return np.asarray(t, dtype=float) if np.ndim(t) else float(t)


# ---------------------------------------------------------------------------
# coefficient functions of time


@dataclass(frozen=True)
class TimeFunction:
    """Polynomial function of t exposed as jets (constants are degree 0)."""

    coeffs: tuple

    def __post_init__(self):
        cs = tuple(float(c) for c in self.coeffs)
        if not cs:
            cs = (0.0,)
        if not all(np.isfinite(c) for c in cs):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", cs)

    def __call__(self, t):
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def _derivs(self, t):
        d = [0.0, 0.0, 0.0, 0.0]
        for power, c in enumerate(self.coeffs):
            for k in range(4):
                if power >= k:
                    fall = 1.0
                    for i in range(k):
                        fall *= power - i
                    d[k] += c * fall * t ** (power - k)
        return d

    def jet(self, t) -> jc.Jet:
        v, d1, d2, _ = self._derivs(float(t) if not np.ndim(t) else np.asarray(t))
        return jc.Jet(v, 0.0, d1, 0.0, 0.0, d2)

    def jet3(self, t) -> Jet3:
        v, d1, d2, d3 = self._derivs(float(t) if not np.ndim(t) else np.asarray(t))
        return Jet3(v, dt=d1, dtt=d2, dttt=d3)

    @property
    def is_constant(self) -> bool:
        return all(c == 0.0 for c in self.coeffs[1:])


def const_fn(v: float) -> TimeFunction:
    return TimeFunction((float(v),))


def poly_fn(coeffs: Sequence[float]) -> TimeFunction:
    return TimeFunction(tuple(coeffs))
