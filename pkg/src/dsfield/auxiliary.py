"""Derived quantities completing a separable solution.

Given the profile pair the construction determines, in order:

* amplitude factors  p1 = delta1 * sqrt(c0 * p_z)  and
  q1 = 2 * delta2 * sqrt(det * q_e / c0)  (their squared product is
  4 * det * p_z * q_e, independent of c0);
* phase gradients, solved pointwise from the profile evolution relations
  with caller-chosen scalar policies c1(t), c2(t) (default zero):

      r_z = (-p_t + c1*B^2 + c2*B - det*c3) / (beta * p_z),   B = a2 + a3*p,
      s_e = (-q_t - c3*A^2 - c2*A + det*c4) / (beta * q_e),   A = a1 + a3*q;

* phases r, s by composite Simpson integration of the gradients from an
  anchor (r(anchor, t) = 0, absorbing the free additive time function into
  the background);
* background levels

      p0 = (c3 + r_t - (beta/2)*(p1_zz/p1 - r_z^2)) / beta,
      q0 = (-c4 + s_t - (beta/2)*(q1_ee/q1 - s_e^2)) / beta.

The consistency report evaluates the two bracket ratios whose
time-independence certifies that the chosen c1, c2 make the separation
exact; spatial variation in them flags an inconsistent configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import calculus as jc
from .calculus import Jet, simpson_weights, spatial_shift, time_shift, truncate
from .ansatz import SolutionSpec
from .profiles import TimeFunction, const_fn

__all__ = [
    "Auxiliaries",
    "derive",
    "derive_amplitudes",
    "derive_phase_gradients",
    "derive_background",
    "integrate_phases",
    "SampledPhase",
    "ConsistencyReport",
    "consistency_c1_c2",
]


def _as_timefn(v) -> TimeFunction:
    if isinstance(v, TimeFunction):
        return v
    return const_fn(float(v))


class Auxiliaries:
    """Immutable bundle of derived evaluators for one solution spec.

    All evaluators are vectorized over their spatial argument at fixed t.
    The ``p0_offset`` / ``rz_offset`` / ``amplitude_scale`` hooks exist so
    the verification suite can prove it detects corrupted ingredients; they
    default to the identity.
    """

    def __init__(self, spec: SolutionSpec, c1=0.0, c2=0.0,
                 quad_n: int = 128, anchor_zeta: float = 0.0,
                 anchor_eta: float = 0.0, *,
                 p0_offset: float = 0.0, rz_offset: float = 0.0,
                 amplitude_scale: float = 1.0):
        self.spec = spec
        self.c1 = _as_timefn(c1)
        self.c2 = _as_timefn(c2)
        self.quad_n = int(quad_n) + int(quad_n) % 2
        self.anchor_zeta = float(anchor_zeta)
        self.anchor_eta = float(anchor_eta)
        self.p0_offset = float(p0_offset)
        self.rz_offset = float(rz_offset)
        self.amplitude_scale = float(amplitude_scale)

    def perturbed(self, **kwargs) -> "Auxiliaries":
        """Copy with corruption hooks set (negative-control support)."""
        base = dict(p0_offset=self.p0_offset, rz_offset=self.rz_offset,
                    amplitude_scale=self.amplitude_scale)
        base.update(kwargs)
        return Auxiliaries(self.spec, self.c1, self.c2, self.quad_n,
                           self.anchor_zeta, self.anchor_eta, **base)

    # -- amplitude factors ---------------------------------------------------

    def p1_jet(self, zeta, t) -> Jet:
        pj = self.spec.p.jet3(zeta, t)
        c0 = self.spec.funcs.c0.jet(t)
        rad = c0 * spatial_shift(pj)
        out = float(self.spec.delta1) * jc.sqrt(rad)
        if self.amplitude_scale != 1.0:
            out = self.amplitude_scale * out
        return out

    def q1_jet(self, eta, t) -> Jet:
        qj = self.spec.q.jet3(eta, t)
        c0 = self.spec.funcs.c0.jet(t)
        det = self.spec.coeffs.det
        rad = (det * spatial_shift(qj)) / c0
        return float(2 * self.spec.delta2) * jc.sqrt(rad)

    # -- phase gradients -----------------------------------------------------

    def r_zeta_jet(self, zeta, t) -> Jet:
        spec = self.spec
        pj = spec.p.jet3(zeta, t)
        B = spec.coeffs.a2 + spec.coeffs.a3 * truncate(pj)
        num = (-time_shift(pj)
               + self.c1.jet(t) * B * B
               + self.c2.jet(t) * B
               - spec.coeffs.det * spec.funcs.c3.jet(t))
        out = num / (spec.funcs.beta.jet(t) * spatial_shift(pj))
        if self.rz_offset:
            out = out + self.rz_offset
        return out

    def s_eta_jet(self, eta, t) -> Jet:
        spec = self.spec
        qj = spec.q.jet3(eta, t)
        A = spec.coeffs.a1 + spec.coeffs.a3 * truncate(qj)
        num = (-time_shift(qj)
               - spec.funcs.c3.jet(t) * A * A
               - self.c2.jet(t) * A
               + spec.coeffs.det * spec.funcs.c4.jet(t))
        return num / (spec.funcs.beta.jet(t) * spatial_shift(qj))

    # -- phases ---------------------------------------------------------------

    def phase_r(self, zeta, t):
        """(r, r_t) at the requested points, integrated from the anchor."""
        return _integrate_from_anchor(self.r_zeta_jet, self.anchor_zeta,
                                      zeta, t, self.quad_n)

    def phase_s(self, eta, t):
        return _integrate_from_anchor(self.s_eta_jet, self.anchor_eta,
                                      eta, t, self.quad_n)

    # -- backgrounds -----------------------------------------------------------

    def p0(self, zeta, t, r_t=None):
        spec = self.spec
        if r_t is None:
            _, r_t = self.phase_r(zeta, t)
        p1 = self.p1_jet(zeta, t)
        rz = self.r_zeta_jet(zeta, t)
        beta = spec.funcs.beta(t)
        c3 = spec.funcs.c3(t)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
            curvature = p1.d11 / p1.value
            val = (c3 + r_t - 0.5 * beta * (curvature - rz.value ** 2)) / beta
        if self.p0_offset:
            val = val + self.p0_offset
        return val

    def q0(self, eta, t, s_t=None):
        spec = self.spec
        if s_t is None:
            _, s_t = self.phase_s(eta, t)
        q1 = self.q1_jet(eta, t)
        se = self.s_eta_jet(eta, t)
        beta = spec.funcs.beta(t)
        c4 = spec.funcs.c4(t)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
            curvature = q1.d11 / q1.value
            return (-c4 + s_t - 0.5 * beta * (curvature - se.value ** 2)) / beta


def derive(spec: SolutionSpec, c1=0.0, c2=0.0, quad_n: int = 128,
           anchor_zeta: float = 0.0, anchor_eta: float = 0.0) -> Auxiliaries:
    """Build the derived-quantity bundle for a solution spec."""
    return Auxiliaries(spec, c1, c2, quad_n, anchor_zeta, anchor_eta)


# module-level forms of the individual derivations (thin wrappers)


def derive_amplitudes(spec: SolutionSpec, zeta, eta, t,
                      aux: Optional[Auxiliaries] = None) -> tuple[Jet, Jet]:
    aux = aux or derive(spec)
    return aux.p1_jet(zeta, t), aux.q1_jet(eta, t)


def derive_phase_gradients(spec: SolutionSpec, zeta, eta, t,
                           aux: Optional[Auxiliaries] = None) -> tuple[Jet, Jet]:
    aux = aux or derive(spec)
    return aux.r_zeta_jet(zeta, t), aux.s_eta_jet(eta, t)


def derive_background(spec: SolutionSpec, aux: Auxiliaries, zeta, eta, t):
    return aux.p0(zeta, t), aux.q0(eta, t)


# ---------------------------------------------------------------------------
# phase integration


def _integrate_from_anchor(grad_jet, anchor: float, targets, t, n: int):
    """Composite Simpson from the anchor to each target.

    Integrates the gradient value and its time derivative in one pass
    (the jet carries both), returning (phase, phase_t) shaped like targets.
    """
    tg = np.asarray(targets, dtype=float)
    scalar = tg.ndim == 0
    tg = np.atleast_1d(tg)
    span = tg - anchor
    frac = np.linspace(0.0, 1.0, n + 1)
    nodes = anchor + span[..., None] * frac          # (..., n+1)
    jets = grad_jet(nodes, t)
    w = simpson_weights(n)
    h = span / n
    vals = np.asarray(jets.value, dtype=float)
    dts = np.asarray(jets.dt, dtype=float)
    r = (vals @ w) * h
    r_t = (dts @ w) * h
    if scalar:
        return float(r[0]), float(r_t[0])
    return r, r_t


@dataclass(frozen=True)
class SampledPhase:
    positions: np.ndarray
    values: np.ndarray
    t_derivatives: np.ndarray
    anchor: float


def integrate_phases(spec: SolutionSpec, aux: Auxiliaries,
                     zeta_range: tuple[float, float],
                     eta_range: tuple[float, float],
                     t: float, n: int = 257) -> tuple[SampledPhase, SampledPhase]:
    """Sample the integrated phases on uniform grids over the given ranges.

    Raises if a gradient is non-finite anywhere inside a range, naming the
    offending location.
    """
    out = []
    for (lo, hi), grad, anchor in (
        (zeta_range, aux.r_zeta_jet, aux.anchor_zeta),
        (eta_range, aux.s_eta_jet, aux.anchor_eta),
    ):
        pos = np.linspace(lo, hi, n)
        probe = grad(pos, t)
        finite = np.isfinite(np.asarray(probe.value, dtype=float))
        if not finite.all():
            bad = pos[~finite][0]
            raise ValueError(f"non-finite phase gradient at coordinate {bad!r}")
        vals, dts = _integrate_from_anchor(grad, anchor, pos, t, aux.quad_n)
        out.append(SampledPhase(pos, vals, dts, anchor))
    return out[0], out[1]


# ---------------------------------------------------------------------------
# consistency diagnostics


@dataclass(frozen=True)
class ConsistencyReport:
    """Spatial variation of the two t-only candidate ratios.

    ``applicable`` is False when a3 = 0 (the ratios divide by a3).  The
    separation is certified when both variations are at the rounding level.
    """

    applicable: bool
    c1_variation: float
    c2_variation: float
    c1_mean: float
    c2_mean: float
    t: float
    probes: int
    note: str = ""

    @property
    def max_variation(self) -> float:
        return max(self.c1_variation, self.c2_variation)


def consistency_c1_c2(spec: SolutionSpec, aux: Auxiliaries,
                      zeta_probes, eta_probes, t: float) -> ConsistencyReport:
    a3 = spec.coeffs.a3
    if a3 == 0.0:
        return ConsistencyReport(False, math.nan, math.nan, math.nan, math.nan,
                                 t, 0, note="not applicable: a3 = 0")
    zeta_probes = np.asarray(zeta_probes, dtype=float)
    eta_probes = np.asarray(eta_probes, dtype=float)
    beta = spec.funcs.beta(t)
    gamma = spec.funcs.gamma(t)
    c4 = spec.funcs.c4(t)

    pj = spec.p.jet3(zeta_probes, t)
    p1 = aux.p1_jet(zeta_probes, t)
    rz = aux.r_zeta_jet(zeta_probes, t)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        bracket_p = (p1.dt / p1.value
                     + beta * (p1.d1 * rz.value / p1.value + 0.5 * rz.d1)
                     - gamma - c4)
        denom_p = a3 * (spec.coeffs.a2 + a3 * pj.value)
        c1_vals = bracket_p / denom_p

    qj = spec.q.jet3(eta_probes, t)
    q1 = aux.q1_jet(eta_probes, t)
    se = aux.s_eta_jet(eta_probes, t)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        bracket_q = (q1.dt / q1.value
                     + beta * (q1.d1 * se.value / q1.value + 0.5 * se.d1)
                     + c4)
        denom_q = a3 * (spec.coeffs.a1 + a3 * qj.value)
        c2_vals = -bracket_q / denom_q

    def spread(v):
        v = v[np.isfinite(v)]
        if v.size == 0:
            return math.nan, math.nan
        return float(np.max(v) - np.min(v)), float(np.mean(v))

    var1, mean1 = spread(np.atleast_1d(c1_vals))
    var2, mean2 = spread(np.atleast_1d(c2_vals))
    return ConsistencyReport(True, var1, var2, mean1, mean2, t,
                             int(zeta_probes.size + eta_probes.size))
