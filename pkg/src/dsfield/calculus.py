"""Exact Taylor-jet arithmetic plus finite-difference stencils and quadrature.

Two jet orders are provided.  :class:`Jet` is the working currency of the
package: a function value together with its partial derivatives through
second order in one spatial variable and time, composed exactly by Leibniz
and chain rules (no truncation error).  :class:`Jet3` carries the same data
through third order; profile evaluation uses it so that derived quantities
built from profile derivatives (amplitude factors, phase gradients) still
come out with complete second-order jets.

Entries may be Python floats or numpy arrays of a common shape.  Domain
violations and guarded divisions mark affected entries NaN; non-finite data
propagates through every operation and is never silently repaired.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

# Relative threshold below which a divisor is treated as a genuine zero of
# the denominator field rather than roundoff.
DIV_GUARD = 1e-12


def _quiet(fn):
    """Silence numpy warnings for operations where NaN/inf is the contract."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
            return fn(*args, **kwargs)

    return wrapper

__all__ = [
    "DIV_GUARD",
    "Jet",
    "Jet3",
    "Stencil",
    "constant",
    "spatial",
    "temporal",
    "constant3",
    "spatial3",
    "temporal3",
    "exp",
    "log",
    "sqrt",
    "sin",
    "cos",
    "tan",
    "powi",
    "truncate",
    "spatial_shift",
    "time_shift",
    "fd_derivative",
    "quadrature",
    "observed_order",
]


def _mask_bad(bad, x):
    """NaN out entries of x flagged by the boolean mask ``bad``."""
    return np.where(bad, np.nan, x)


# ---------------------------------------------------------------------------
# order-2 jets


@dataclass(frozen=True)
class Jet:
    """Order-2 jet in (own spatial variable, t).

    Entry names follow derivative multi-indices: ``d1`` is the first spatial
    derivative, ``dt`` the time derivative, ``d11``/``d1t``/``dtt`` the three
    second derivatives.
    """

    value: object
    d1: object = 0.0
    dt: object = 0.0
    d11: object = 0.0
    d1t: object = 0.0
    dtt: object = 0.0

    def entries(self):
        return (self.value, self.d1, self.dt, self.d11, self.d1t, self.dtt)

    def is_finite(self):
        """Elementwise finiteness across all entries."""
        ok = np.isfinite(self.value)
        for e in self.entries()[1:]:
            ok = ok & np.isfinite(e)
        return ok

    def partial(self, i: int, j: int):
        """Return the (d/dx)^i (d/dt)^j entry; i + j <= 2."""
        table = {
            (0, 0): self.value,
            (1, 0): self.d1,
            (0, 1): self.dt,
            (2, 0): self.d11,
            (1, 1): self.d1t,
            (0, 2): self.dtt,
        }
        try:
            return table[(i, j)]
        except KeyError:
            raise ValueError(f"derivative order ({i},{j}) exceeds jet order 2") from None

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        o = _lift(other)
        return Jet(*(a + b for a, b in zip(self.entries(), o.entries())))

    __radd__ = __add__

    def __neg__(self):
        return Jet(*(-e for e in self.entries()))

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) + (-self)

    @_quiet
    def __mul__(self, other):
        a, b = self, _lift(other)
        return Jet(
            a.value * b.value,
            a.d1 * b.value + a.value * b.d1,
            a.dt * b.value + a.value * b.dt,
            a.d11 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d11,
            a.d1t * b.value + a.d1 * b.dt + a.dt * b.d1 + a.value * b.d1t,
            a.dtt * b.value + 2.0 * a.dt * b.dt + a.value * b.dtt,
        )

    __rmul__ = __mul__

    @_quiet
    def __truediv__(self, other):
        return _div(self, _lift(other))

    @_quiet
    def __rtruediv__(self, other):
        return _div(_lift(other), self)


def _lift(x) -> Jet:
    if isinstance(x, Jet):
        return x
    if isinstance(x, Jet3):
        raise TypeError("cannot mix Jet3 with Jet; truncate() first")
    return Jet(x, 0.0, 0.0, 0.0, 0.0, 0.0)


def constant(v) -> Jet:
    return Jet(v)


def spatial(v) -> Jet:
    """Seed jet of the spatial coordinate itself."""
    one = np.ones_like(v) if np.ndim(v) else 1.0
    return Jet(v, one, 0.0, 0.0, 0.0, 0.0)


def temporal(v) -> Jet:
    one = np.ones_like(v) if np.ndim(v) else 1.0
    return Jet(v, 0.0, one, 0.0, 0.0, 0.0)


@_quiet
def _div(a: Jet, b: Jet) -> Jet:
    bad = np.abs(b.value) < DIV_GUARD * (1.0 + np.abs(a.value))
    bv = _mask_bad(bad, b.value)
    inv = _compose2(Jet(bv, b.d1, b.dt, b.d11, b.d1t, b.dtt),
                    1.0 / bv, -1.0 / bv**2, 2.0 / bv**3)
    return a * inv


def _compose2(a: Jet, f0, f1, f2) -> Jet:
    """Chain rule through order 2 for a scalar map with derivatives f0..f2."""
    return Jet(
        f0,
        f1 * a.d1,
        f1 * a.dt,
        f1 * a.d11 + f2 * a.d1 * a.d1,
        f1 * a.d1t + f2 * a.d1 * a.dt,
        f1 * a.dtt + f2 * a.dt * a.dt,
    )


# ---------------------------------------------------------------------------
# order-3 jets


@dataclass(frozen=True)
class Jet3:
    """Order-3 jet in (own spatial variable, t)."""

    value: object
    d1: object = 0.0
    dt: object = 0.0
    d11: object = 0.0
    d1t: object = 0.0
    dtt: object = 0.0
    d111: object = 0.0
    d11t: object = 0.0
    d1tt: object = 0.0
    dttt: object = 0.0

    def entries(self):
        return (self.value, self.d1, self.dt, self.d11, self.d1t, self.dtt,
                self.d111, self.d11t, self.d1tt, self.dttt)

    def is_finite(self):
        ok = np.isfinite(self.value)
        for e in self.entries()[1:]:
            ok = ok & np.isfinite(e)
        return ok

    def __add__(self, other):
        o = _lift3(other)
        return Jet3(*(a + b for a, b in zip(self.entries(), o.entries())))

    __radd__ = __add__

    def __neg__(self):
        return Jet3(*(-e for e in self.entries()))

    def __sub__(self, other):
        return self + (-_lift3(other))

    def __rsub__(self, other):
        return _lift3(other) + (-self)

    @_quiet
    def __mul__(self, other):
        a, b = self, _lift3(other)
        return Jet3(
            a.value * b.value,
            a.d1 * b.value + a.value * b.d1,
            a.dt * b.value + a.value * b.dt,
            a.d11 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d11,
            a.d1t * b.value + a.d1 * b.dt + a.dt * b.d1 + a.value * b.d1t,
            a.dtt * b.value + 2.0 * a.dt * b.dt + a.value * b.dtt,
            a.d111 * b.value + 3.0 * a.d11 * b.d1 + 3.0 * a.d1 * b.d11 + a.value * b.d111,
            (a.d11t * b.value + a.d11 * b.dt + 2.0 * a.d1t * b.d1
             + 2.0 * a.d1 * b.d1t + a.dt * b.d11 + a.value * b.d11t),
            (a.d1tt * b.value + 2.0 * a.d1t * b.dt + a.d1 * b.dtt
             + a.dtt * b.d1 + 2.0 * a.dt * b.d1t + a.value * b.d1tt),
            a.dttt * b.value + 3.0 * a.dtt * b.dt + 3.0 * a.dt * b.dtt + a.value * b.dttt,
        )

    __rmul__ = __mul__

    @_quiet
    def __truediv__(self, other):
        return _div3(self, _lift3(other))

    @_quiet
    def __rtruediv__(self, other):
        return _div3(_lift3(other), self)


def _lift3(x) -> Jet3:
    if isinstance(x, Jet3):
        return x
    if isinstance(x, Jet):
        raise TypeError("cannot mix Jet with Jet3; lift explicitly")
    return Jet3(x)


def constant3(v) -> Jet3:
    return Jet3(v)


def spatial3(v) -> Jet3:
    one = np.ones_like(v) if np.ndim(v) else 1.0
    return Jet3(v, d1=one)


def temporal3(v) -> Jet3:
    one = np.ones_like(v) if np.ndim(v) else 1.0
    return Jet3(v, dt=one)


def _compose3(a: Jet3, f0, f1, f2, f3) -> Jet3:
    """Faa di Bruno through order 3 in two variables."""
    a1, at = a.d1, a.dt
    return Jet3(
        f0,
        f1 * a1,
        f1 * at,
        f1 * a.d11 + f2 * a1 * a1,
        f1 * a.d1t + f2 * a1 * at,
        f1 * a.dtt + f2 * at * at,
        f1 * a.d111 + 3.0 * f2 * a1 * a.d11 + f3 * a1 * a1 * a1,
        f1 * a.d11t + f2 * (a.d11 * at + 2.0 * a1 * a.d1t) + f3 * a1 * a1 * at,
        f1 * a.d1tt + f2 * (a.dtt * a1 + 2.0 * at * a.d1t) + f3 * a1 * at * at,
        f1 * a.dttt + 3.0 * f2 * at * a.dtt + f3 * at * at * at,
    )


@_quiet
def _div3(a: Jet3, b: Jet3) -> Jet3:
    bad = np.abs(b.value) < DIV_GUARD * (1.0 + np.abs(a.value))
    bv = _mask_bad(bad, b.value)
    guarded = Jet3(bv, b.d1, b.dt, b.d11, b.d1t, b.dtt, b.d111, b.d11t, b.d1tt, b.dttt)
    inv = _compose3(guarded, 1.0 / bv, -1.0 / bv**2, 2.0 / bv**3, -6.0 / bv**4)
    return a * inv


def truncate(j: Jet3) -> Jet:
    """Forget third-order information."""
    return Jet(j.value, j.d1, j.dt, j.d11, j.d1t, j.dtt)


def spatial_shift(j: Jet3) -> Jet:
    """Order-2 jet of the spatial derivative of a Jet3-valued function."""
    return Jet(j.d1, j.d11, j.d1t, j.d111, j.d11t, j.d1tt)


def time_shift(j: Jet3) -> Jet:
    """Order-2 jet of the time derivative of a Jet3-valued function."""
    return Jet(j.dt, j.d1t, j.dtt, j.d11t, j.d1tt, j.dttt)


# ---------------------------------------------------------------------------
# elementary functions (both jet orders)


def _tables(name: str, v):
    """Value and derivative tables for the supported elementary maps.

    Returns (bad, f0, f1, f2, f3); ``bad`` flags domain violations.
    """
    if name == "exp":
        e = np.exp(v)
        return None, e, e, e, e
    if name == "log":
        bad = ~(v > 0)
        s = _mask_bad(bad, v)
        return bad, np.log(s), 1.0 / s, -1.0 / s**2, 2.0 / s**3
    if name == "sqrt":
        bad = v < 0
        s = _mask_bad(bad, v)
        r = np.sqrt(s)
        return bad, r, 0.5 / r, -0.25 / (r * s), 0.375 / (r * s * s)
    if name == "sin":
        sv, cv = np.sin(v), np.cos(v)
        return None, sv, cv, -sv, -cv
    if name == "cos":
        sv, cv = np.sin(v), np.cos(v)
        return None, cv, -sv, -cv, sv
    if name == "tan":
        sv, cv = np.sin(v), np.cos(v)
        bad = np.abs(cv) < DIV_GUARD * (1.0 + np.abs(sv))
        cs = _mask_bad(bad, cv)
        T = sv / cs
        f1 = 1.0 + T * T
        return bad, T, f1, 2.0 * T * f1, 2.0 * f1 * (1.0 + 3.0 * T * T)
    raise ValueError(f"unknown elementary function {name!r}")


@_quiet
def _elementary(j, name: str):
    bad, f0, f1, f2, f3 = _tables(name, j.value)
    if bad is not None:
        f0 = _mask_bad(bad, f0)
    if isinstance(j, Jet3):
        return _compose3(j, f0, f1, f2, f3)
    return _compose2(j, f0, f1, f2)


def exp(j):
    return _elementary(j, "exp")


def log(j):
    return _elementary(j, "log")


def sqrt(j):
    return _elementary(j, "sqrt")


def sin(j):
    return _elementary(j, "sin")


def cos(j):
    return _elementary(j, "cos")


def tan(j):
    return _elementary(j, "tan")


@_quiet
def powi(j, k: int):
    """Integer power; negative exponents use the division guard."""
    if k == 0:
        keep = np.isfinite(j.value)
        one = np.where(keep, 1.0, np.nan)
        return Jet3(one) if isinstance(j, Jet3) else Jet(one)
    v = j.value
    if k < 0:
        bad = np.abs(v) < DIV_GUARD
        v = _mask_bad(bad, v)
    f0 = v ** k
    f1 = k * v ** (k - 1)
    f2 = k * (k - 1) * v ** (k - 2)
    f3 = k * (k - 1) * (k - 2) * v ** (k - 3)
    src = type(j)(*((v,) + j.entries()[1:]))
    if isinstance(j, Jet3):
        return _compose3(src, f0, f1, f2, f3)
    return _compose2(src, f0, f1, f2)


# ---------------------------------------------------------------------------
# finite differences


_STENCIL_WEIGHTS = {
    (1, 2): (-0.5, 0.0, 0.5),
    (1, 4): (1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12),
    (2, 2): (1.0, -2.0, 1.0),
    (2, 4): (-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12),
    (4, 2): (1.0, -4.0, 6.0, -4.0, 1.0),
    (4, 4): (-1 / 6, 2.0, -13 / 2, 28 / 3, -13 / 2, 2.0, -1 / 6),
}


@dataclass(frozen=True)
class Stencil:
    """Central finite-difference stencil of given derivative order and accuracy."""

    order: int
    accuracy: int
    h: float

    def __post_init__(self):
        if (self.order, self.accuracy) not in _STENCIL_WEIGHTS:
            raise ValueError(f"no stencil for order={self.order}, accuracy={self.accuracy}")
        if not self.h > 0:
            raise ValueError("step size must be positive")

    @property
    def weights(self) -> np.ndarray:
        return np.asarray(_STENCIL_WEIGHTS[(self.order, self.accuracy)])

    @property
    def offsets(self) -> np.ndarray:
        half = (len(self.weights) - 1) // 2
        return np.arange(-half, half + 1)

    @property
    def width(self) -> int:
        return len(self.weights)


@_quiet
def fd_derivative(samples: Sequence[float], stencil: Stencil):
    """Apply a central stencil to uniformly spaced samples.

    Non-finite samples yield a non-finite result (the flag is the NaN itself).
    """
    s = np.asarray(samples, dtype=float)
    if s.shape[-1] != stencil.width:
        raise ValueError(f"expected {stencil.width} samples, got {s.shape[-1]}")
    return s @ stencil.weights / stencil.h ** stencil.order


def observed_order(err_coarse: float, err_fine: float) -> float:
    """Convergence order implied by errors at h and h/2."""
    if not (err_coarse > 0 and err_fine > 0):
        return float("nan")
    return math.log2(err_coarse / err_fine)


# ---------------------------------------------------------------------------
# quadrature


def quadrature(f: Callable, a: float, b: float, n: int) -> float:
    """Composite Simpson integral of ``f`` over [a, b] with n subintervals.

    ``f`` must accept a numpy array of abscissae.  Raises on a non-finite
    integrand, naming the first offending abscissa.
    """
    if n < 2:
        raise ValueError("need at least 2 subintervals")
    n += n % 2
    x = np.linspace(a, b, n + 1)
    y = np.asarray(f(x), dtype=float)
    finite = np.isfinite(y)
    if not finite.all():
        where = x[~finite][0]
        raise ValueError(f"non-finite integrand at x={where!r}")
    return float(simpson_weights(n) @ y * (b - a) / n)


def simpson_weights(n: int) -> np.ndarray:
    """Unscaled Simpson weights for n (even) subintervals; multiply by h."""
    if n % 2:
        raise ValueError("Simpson rule needs an even subinterval count")
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / 3.0
