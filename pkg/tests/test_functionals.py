import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import dblquad

from axiblow.errors import CaseMismatchError, DomainError, ZeroDenominatorError
from axiblow.field import sample_field
from axiblow.functionals import (CSV_COLUMNS, QuadratureSpec, area_nodes, arc_nodes, ball_integrals, boundary_J,
                                 curves_csv, direct_density, energy_I, extrapolate_zero, frequency,
                                 identity_ttr_residual, monotonicity_M, radii_grid, sweep, thread_count)
from axiblow.profiles import (BlowupCase, degenerate_positive_part, garabedian_profile, stokes_corner,
                              zero_field)
from axiblow.specfun import find_z0

from helpers import gamma_x1sq, linear_x1, x1sq_x2

ORIGIN = (0.0, 0.0)
Z0 = find_z0(1e-14).z0
CONE_DENSITY = -(1 - Z0 ** 2) / 8  # int over {u > 0} of x1 x2 on the unit half-ball


# -- node sets --------------------------------------------------------------------------------

@given(r=st.floats(0.05, 2.0), c1=st.floats(0.0, 3.0), c2=st.floats(-2.0, 2.0))
def test_area_nodes_measure(r, c1, c2):
    # sum of weights = area of B_r(x0) cap {x1 > 0}
    nodes = area_nodes((c1, c2), r)
    if c1 >= r:
        want = math.pi * r * r
    else:
        want = r * r * math.acos(-c1 / r) + c1 * math.sqrt(r * r - c1 * c1)
    assert nodes.w.sum() == pytest.approx(want, rel=1e-10)
    assert np.all(nodes.x1 > 0)


def test_arc_nodes_length():
    nodes = arc_nodes(ORIGIN, 0.7)
    assert nodes.w.sum() == pytest.approx(math.pi * 0.7, rel=1e-13)
    with pytest.raises(DomainError):
        arc_nodes(ORIGIN, 0.0)
    with pytest.raises(DomainError):
        area_nodes(ORIGIN, 0.5, r_inner=0.6)


@pytest.mark.parametrize("kw", [dict(n_rho=8), dict(n_theta=4), dict(rule="simpson"), dict(axis_offset=0.0)])
def test_quadrature_spec_validation(kw):
    with pytest.raises(DomainError):
        QuadratureSpec(**kw)


# -- closed-form oracles --------------------------------------------------------------------

def test_I_and_J_positive_part_oracle():
    f = degenerate_positive_part()
    assert energy_I(f, ORIGIN, 0.5) == pytest.approx(2 * 0.5 ** 5 / 5 + 0.5 ** 4 / 8, abs=1e-12)
    assert boundary_J(f, ORIGIN, 0.5) == pytest.approx(2 * 0.5 ** 6 / 15, abs=1e-13)


def test_I_axis_center_oracle():
    # gamma x1^2 about (0, 1/2), r = 1/4: 4 gamma^2 (2/3) r^3 + (1/2)(2/3) r^3
    f = gamma_x1sq(1.0)
    got = energy_I(f, (0.0, 0.5), 0.25)
    assert got == pytest.approx(3 / 64, abs=1e-13)
    cross, _ = dblquad(lambda x2, x1: 4 * x1 + x1 * x2, 0, 0.25,
                       lambda x1: 0.5 - math.sqrt(0.0625 - x1 * x1),
                       lambda x1: 0.5 + math.sqrt(0.0625 - x1 * x1), epsabs=1e-13)
    assert got == pytest.approx(cross, abs=1e-11)
    assert energy_I(gamma_x1sq(2.0), (0.0, 0.5), 0.25) == pytest.approx(16 * (2 / 3) / 64 + 1 / 192, abs=1e-13)


@given(c=st.floats(-5.0, 5.0))
def test_J_linear(c):
    assert boundary_J(linear_x1(c), ORIGIN, 1.0) == pytest.approx(2 * c * c, rel=1e-12, abs=1e-14)


def test_zero_field_integrals():
    z = zero_field()
    bi = ball_integrals(z, ORIGIN, 0.5)
    assert bi.I == 0.0 and bi.J == 0.0
    assert monotonicity_M(z, ORIGIN, 0.5) == 0.0
    with pytest.raises(ZeroDenominatorError):
        frequency(z, 0.5)


@given(r=st.floats(0.05, 1.0))
def test_M_positive_part_closed_form(r):
    assert monotonicity_M(degenerate_positive_part(), ORIGIN, r) == pytest.approx(1 / 8 + r / 15, abs=1e-12)


def test_frequency_positive_part():
    fr = frequency(degenerate_positive_part(), 0.5)
    assert fr.D == pytest.approx(3.0, abs=1e-10)
    assert fr.V == pytest.approx(-1.875, abs=1e-10)
    assert fr.H == pytest.approx(4.875, abs=1e-10)
    assert abs(fr.H - (fr.D - fr.V)) < 1e-14


@given(r=st.floats(0.05, 1.0))
def test_homogeneous_solutions_have_constant_frequency(r):
    f, _ = garabedian_profile()
    assert frequency(f, r).D == pytest.approx(2.5, abs=1e-8)
    s = stokes_corner(1.0)
    assert frequency(s, 0.5 * r, x0=s.vertex).D == pytest.approx(1.5, abs=1e-8)


@pytest.mark.parametrize("r", [0.1, 0.5, 0.9])
def test_garabedian_M_is_cone_density(r):
    f, _ = garabedian_profile()
    assert monotonicity_M(f, ORIGIN, r) == pytest.approx(CONE_DENSITY, abs=1e-10)
    assert direct_density(f, ORIGIN, r) == pytest.approx(CONE_DENSITY, abs=1e-10)


def test_ttr_identity():
    assert identity_ttr_residual(degenerate_positive_part(), 0.5) < 1e-8
    assert identity_ttr_residual(garabedian_profile()[0], 0.5) < 1e-8


def test_case_mismatch():
    with pytest.raises(CaseMismatchError):
        monotonicity_M(x1sq_x2(), (1.0, 1.0), 0.1, case=BlowupCase.ORIGIN)
    assert monotonicity_M(x1sq_x2(), (1.0, 1.0), 0.1, case="interior") == pytest.approx(
        monotonicity_M(x1sq_x2(), (1.0, 1.0), 0.1))


# -- convergence and grids --------------------------------------------------------------------

def test_midpoint_convergence():
    # ball inside {x2 > 0}: smooth integrand
    f = x1sq_x2()
    exact = energy_I(f, (0.6, 0.5), 0.4)
    errs = [abs(energy_I(f, (0.6, 0.5), 0.4, QuadratureSpec(n, n, "midpoint")) - exact) for n in (16, 32, 64)]
    assert errs[0] / errs[1] >= 3.0 and errs[1] / errs[2] >= 3.0


def test_gauss_exact_on_polynomials():
    f = x1sq_x2()
    a = energy_I(f, (0.6, 0.5), 0.4, QuadratureSpec(16, 16))
    b = energy_I(f, (0.6, 0.5), 0.4, QuadratureSpec(64, 64))
    assert a == pytest.approx(b, rel=1e-13)


def test_grid_density_matches_analytic():
    f, _ = garabedian_profile()
    g = sample_field(f, 513, 513, (0.0, 1.0, -1.0, 1.0))
    for r in (0.2, 0.4):
        assert direct_density(g, ORIGIN, r) == pytest.approx(CONE_DENSITY, abs=1e-3)
        assert monotonicity_M(g, ORIGIN, r) == pytest.approx(CONE_DENSITY, abs=2e-3)


def test_half_ball_must_fit_grid():
    g = sample_field(degenerate_positive_part(), 33, 33, (0.0, 1.0, -1.0, 1.0))
    with pytest.raises(DomainError):
        ball_integrals(g, ORIGIN, 1.5)


# -- sweep ---------------------------------------------------------------------------------------

def test_sweep_garabedian_flags_and_extrapolation():
    f, _ = garabedian_profile()
    radii = np.linspace(0.1, 0.9, 9)
    t = sweep(f, ORIGIN, radii, threads=1)
    assert t.case is BlowupCase.ORIGIN and t.m_column == "M_x1x2"
    assert t.flags["M_constant"] is True
    assert t.errors == []
    m0 = extrapolate_zero(t.radii, t.column("M_x1x2"))
    assert m0 == pytest.approx(direct_density(f, ORIGIN, 0.1), abs=1e-4)


def test_sweep_positive_part_H_decreases():
    t = sweep(degenerate_positive_part(), ORIGIN, [0.1, 0.2, 0.4, 0.8], threads=1)
    assert t.flags["H_nondecreasing"] is False
    assert any("hypotheses" in n for n in t.notes)
    assert np.allclose(t.column("H"), 3 + 15 / (16 * t.radii), atol=1e-3)


def test_sweep_zero_field_completes():
    t = sweep(zero_field(), ORIGIN, [0.1, 0.2, 0.3], threads=1)
    assert np.all(t.column("I") == 0) and np.all(t.column("J") == 0) and np.all(t.column("M_x1x2") == 0)
    assert np.all(np.isnan(t.column("D")))
    assert len(t.errors) == 3


def test_sweep_threads_bit_identical():
    f, _ = garabedian_profile()
    radii = [0.1, 0.3, 0.5, 0.7]
    a = curves_csv(sweep(f, ORIGIN, radii, threads=1))
    b = curves_csv(sweep(f, ORIGIN, radii, threads=3))
    assert a == b


def test_sweep_validates_radii():
    with pytest.raises(DomainError):
        sweep(x1sq_x2(), ORIGIN, [0.2, 0.1])
    with pytest.raises(DomainError):
        sweep(x1sq_x2(), ORIGIN, [])


def test_curves_csv_layout():
    t = sweep(stokes_corner(1.0), (1.0, 0.0), [0.1, 0.2], threads=1)
    lines = curves_csv(t).splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS)
    row = lines[1].split(",")
    assert row[CSV_COLUMNS.index("M_x2")] != ""
    assert row[CSV_COLUMNS.index("M_x1x2")] == "" and row[CSV_COLUMNS.index("D")] == ""
    assert float(row[CSV_COLUMNS.index("M_x2")]) == pytest.approx(1 / math.sqrt(3), abs=1e-9)


def test_thread_count(monkeypatch):
    monkeypatch.setenv("AXIBLOW_THREADS", "3")
    assert thread_count() == 3
    assert thread_count(2) == 2
    monkeypatch.setenv("AXIBLOW_THREADS", "x")
    with pytest.raises(DomainError):
        thread_count()
    with pytest.raises(DomainError):
        thread_count(-1)


def test_radii_grid():
    assert np.allclose(radii_grid(0.1, 0.4, 3), [0.1, 0.2, 0.4])
    assert np.allclose(radii_grid(0.1, 0.3, 3, log=False), [0.1, 0.2, 0.3])
    with pytest.raises(DomainError):
        radii_grid(0.5, 0.1, 3)
