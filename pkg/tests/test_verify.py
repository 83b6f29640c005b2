import math

import numpy as np
import pytest

from dsfield.ansatz import CoefficientFunctions, SolutionSpec
from dsfield.auxiliary import derive
from dsfield.calculus import Jet, Stencil
from dsfield.catalog import build_case, case_names
from dsfield.profiles import const_fn
from dsfield.verify import (
    bilinear_residuals,
    hirota_cross,
    hirota_d,
    pde_phi_convergence,
    pde_residuals,
    residual_field,
    singularity_scan,
)

from conftest import random_spec


def exp_jet(k, omega=0.0):
    def f(pt):
        x, t = pt
        v = math.exp(k * x + omega * t)
        return Jet(v, k * v, omega * v, k * k * v, k * omega * v,
                   omega * omega * v)
    return f


def random_jet_fn(rng):
    vals = rng.uniform(-3, 3, 6)
    return lambda pt: Jet(*vals)


# -- operator engine -----------------------------------------------------------


def test_odd_order_antisymmetry_on_random_jets(rng):
    for _ in range(1000):
        a = random_jet_fn(rng)
        assert hirota_d(a, a, 1, 0, (0.0, 0.0)) == 0.0
        assert hirota_d(a, a, 0, 1, (0.0, 0.0)) == 0.0


def test_exponential_eigenvalue_identity(rng):
    for _ in range(200):
        k1 = rng.uniform(-2, 2)
        k2 = k1 - rng.choice([-1, 1]) * rng.uniform(0.5, 2.0)
        x = rng.uniform(-1, 1)
        for m in (1, 2):
            got = hirota_d(exp_jet(k1), exp_jet(k2), m, 0, (x, 0.0))
            want = (k1 - k2) ** m * math.exp((k1 + k2) * x)
            assert got == pytest.approx(want, rel=1e-13)


def test_mixed_operator_on_plane_wave():
    a = exp_jet(0.8, -0.55)
    got = hirota_d(a, a, 1, 1, (0.2, 0.4))
    assert got == pytest.approx(0.0, abs=1e-12)


def test_cross_operator_equals_product_gap(rng):
    # D_z D_e f.f equals twice the closure product det * p_z * q_e
    from dsfield.ansatz import eval_f, profile_jets3
    for _ in range(10):
        spec = random_spec(rng)
        z, e, t = rng.uniform(-2, 2, 3)
        pj, qj = profile_jets3(spec, z, e, t)
        tau = eval_f(spec, z, e, t, pj, qj)
        want = 2.0 * spec.coeffs.det * pj.d1 * qj.d1
        scale = abs(tau.f * tau.f_ze) + abs(want) + 1.0
        assert abs(hirota_cross(tau) - want) / scale < 1e-13


def test_order_overflow_raises():
    a = exp_jet(1.0)
    with pytest.raises(ValueError, match="exceeds jet order"):
        hirota_d(a, a, 2, 1, (0.0, 0.0))


def test_first_order_values():
    # D_x on distinct exponentials at one point, against the closed form
    got = hirota_d(exp_jet(1.0), exp_jet(-0.5), 1, 0, (0.3, 0.0))
    want = 1.5 * math.exp(0.5 * 0.3)
    assert got == pytest.approx(want, rel=1e-14)


# -- bilinear residuals ----------------------------------------------------------


@pytest.mark.parametrize("name", case_names())
def test_bilinear_constraint_on_catalog(name):
    e = build_case(name)
    t = e.reference_times[0]
    aux = derive(e.spec)
    line2, _ = bilinear_residuals(e.spec, aux, e.window, t, 64,
                                  valid_mask=e.valid_mask, check_line1=False)
    assert line2.max_abs < 1e-12
    assert line2.mean_abs <= line2.max_abs


def test_bilinear_constraint_on_random_specs(rng):
    for _ in range(30):
        spec = random_spec(rng)
        line2, _ = bilinear_residuals(spec, None, ((-8, 8), (-8, 8)),
                                      float(rng.uniform(-1, 1)), 32,
                                      check_line1=False)
        assert line2.max_abs < 1e-12


def test_bilinear_line1_closed_case():
    e = build_case("dromion")
    aux = derive(e.spec)
    _, line1 = bilinear_residuals(e.spec, aux, ((-4, 4), (-4, 4)), 0.0, 48)
    assert line1.applicable
    assert line1.max_abs < 1e-8


def test_bilinear_line1_gated_for_inconsistent_spec():
    d = build_case("dromion").spec
    spec = SolutionSpec(d.coeffs, d.p, d.q,
                        CoefficientFunctions(gamma=const_fn(0.5)))
    _, line1 = bilinear_residuals(spec, derive(spec), ((-4, 4), (-4, 4)), 0.0, 24)
    assert not line1.applicable
    assert "inconsistent" in line1.notes


def test_bilinear_line1_not_applicable_for_resonant():
    e = build_case("resonant")
    _, line1 = bilinear_residuals(e.spec, derive(e.spec), e.window, 0.0, 24)
    assert not line1.applicable


def test_negative_control_corrupted_background():
    e = build_case("dromion")
    aux = derive(e.spec).perturbed(p0_offset=0.5 - 0.375)
    _, line1 = bilinear_residuals(e.spec, aux, ((-4, 4), (-4, 4)), 0.0, 48)
    assert line1.max_abs > 1e-2


def test_negative_control_corrupted_gradient():
    e = build_case("dromion")
    aux = derive(e.spec).perturbed(rz_offset=0.1)
    # the corrupted gradient shows up in the consistency gate...
    _, gated = bilinear_residuals(e.spec, aux, ((-4, 4), (-4, 4)), 0.0, 24)
    assert not gated.applicable
    # ...and in the ungated residual itself
    _, line1 = bilinear_residuals(e.spec, aux, ((-4, 4), (-4, 4)), 0.0, 24,
                                  gate=math.inf)
    assert line1.max_abs > 1e-3


def test_negative_control_corrupted_amplitude():
    e = build_case("dromion")
    aux = derive(e.spec).perturbed(amplitude_scale=1.1)
    line2, _ = bilinear_residuals(e.spec, aux, e.window, 0.0, 32,
                                  check_line1=False)
    assert line2.max_abs > 0.15       # (1.1^2 - 1)/1.1^2 relative mismatch


def test_periodic_amplitude_branch_fallback():
    # cos t < 0 flips the profile slopes; the real amplitude factors do not
    # exist for c0 > 0 and the check falls back to the exact product form
    e = build_case("periodic")
    aux = derive(e.spec)
    line2, _ = bilinear_residuals(e.spec, aux, e.window, 2 * math.pi / 3, 32,
                                  valid_mask=e.valid_mask, check_line1=False)
    assert line2.flags["amplitude_branch"] > 0
    assert line2.max_abs < 1e-12


def test_report_invariants():
    e = build_case("solitoff")
    line2, line1 = bilinear_residuals(e.spec, derive(e.spec), e.window, 0.0, 32)
    for rep in (line2, line1):
        assert rep.max_abs >= rep.mean_abs >= 0.0
        (x0, x1), (y0, y1) = e.window
        assert x0 <= rep.worst_point.x <= x1
        assert y0 <= rep.worst_point.y <= y1
        assert rep.worst_point.t == 0.0


# -- governing-equation residuals -------------------------------------------------


def test_pde_line1_closed_case():
    e = build_case("dromion")
    l1, _ = pde_residuals(e.spec, derive(e.spec), ((-4, 4), (-4, 4)), 0.0, 48,
                          Stencil(2, 2, 1e-3), checks=("line1",))
    assert l1.applicable
    assert l1.max_abs < 1e-6


def test_pde_line1_negative_control():
    e = build_case("dromion")
    aux = derive(e.spec).perturbed(p0_offset=0.125)
    l1, _ = pde_residuals(e.spec, aux, ((-4, 4), (-4, 4)), 0.0, 48,
                          checks=("line1",))
    assert l1.max_abs > 1e-2


@pytest.mark.parametrize("name", ["dromion", "solitoff"])
def test_pde_line2_convergence_order(name):
    e = build_case(name)
    coarse, fine, order = pde_phi_convergence(e.spec, ((-3, 3), (-3, 3)), 0.0,
                                              20, Stencil(2, 2, 2e-2))
    assert abs(order - 2.0) <= 0.3
    assert fine.max_abs < coarse.max_abs


def test_pde_line2_fourth_order_stencil():
    e = build_case("dromion")
    _, _, order = pde_phi_convergence(e.spec, ((-3, 3), (-3, 3)), 0.0,
                                      16, Stencil(2, 4, 5e-2))
    assert abs(order - 4.0) <= 0.3


def test_pde_line2_breather_degenerate_time():
    e = build_case("breather")
    _, l2 = pde_residuals(e.spec, None, e.window, math.pi / 2, 20,
                          checks=("line2",))
    assert l2.max_abs < 1e-20


def test_pde_line2_drops_stencil_hits_near_pole():
    e = build_case("double_instanton")
    _, l2 = pde_residuals(e.spec, None, ((-3, 1), (-3, 1)), 0.0, 24,
                          Stencil(2, 2, 1e-2), valid_mask=e.valid_mask,
                          checks=("line2",))
    # truncation is honest but large right at the mask edge where the pole
    # term's high derivatives blow up; the bulk of the window stays clean
    assert l2.flags["dropped"] > 0
    assert l2.mean_abs < 0.1


def test_residual_field_values_match_report():
    e = build_case("dromion")
    vals = residual_field(e.spec, None, "bilinear2", e.window, 0.0, 32, 32)
    assert np.nanmax(vals) < 1e-12
    with pytest.raises(ValueError):
        residual_field(e.spec, None, "nope", e.window, 0.0, 8, 8)


# -- scans -------------------------------------------------------------------------


def test_scan_dromion_positive():
    rep = singularity_scan(build_case("dromion").spec, ((-8, 8), (-8, 8)), 0.0, 64)
    assert rep.min_abs_f > 1.0
    assert rep.sign_change_cells == 0
    assert rep.pole_intervals_zeta == ()


def test_scan_resonant_reports_sign_changes():
    e = build_case("resonant")
    rep = singularity_scan(e.spec, e.window, 0.0, 96)
    assert rep.sign_change_cells > 0
    assert len(rep.sign_change_examples) > 0


def test_scan_detects_tan_poles():
    e = build_case("periodic")
    rep = singularity_scan(e.spec, ((-4, 4), (-4, 4)), 0.0, 32)
    assert len(rep.pole_intervals_zeta) >= 2     # poles at +-pi/2 in range
    lo, hi = rep.pole_intervals_zeta[0]
    assert any(abs(abs(0.5 * (a + b)) - math.pi / 2) < 0.05
               for a, b in rep.pole_intervals_zeta)


def test_scan_detects_instanton_pole():
    e = build_case("double_instanton")
    rep = singularity_scan(e.spec, ((-4, 4), (-4, 4)), 0.0, 32)
    assert len(rep.pole_intervals_zeta) == 1
    lo, hi = rep.pole_intervals_zeta[0]
    assert lo <= -1.0 <= hi + 0.01
