import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from pme_focus import exact
from pme_focus.errors import PreconditionError


def riemann_cos_power(m, panels=10**6):
    """Midpoint rule for int_0^{pi/2} cos^k, chunked to bound memory."""
    k = (m + 1.0) / (m - 1.0)
    h = 0.5 * math.pi / panels
    total = 0.0
    for start in range(0, panels, 250_000):
        idx = np.arange(start, min(start + 250_000, panels))
        total += np.sum(np.cos((idx + 0.5) * h) ** k)
    return total * h


# {{{ constants

@pytest.mark.parametrize("m, beta, B", [
    (2.0, 1.0, 1.0 / 12.0),
    (3.0, 0.5, 1.0 / 12.0),
])
def test_derived_constants(m, beta, B):
    got_beta, got_B = exact.derived_constants(m)
    assert got_beta == pytest.approx(beta, abs=1e-15)
    assert got_B == pytest.approx(B, abs=1e-15)


def test_derived_constants_pde_consistent_exponent():
    beta, B = exact.derived_constants(2.0, pde_consistent=True)
    assert beta == pytest.approx(1.0 / 3.0)
    assert B == pytest.approx(1.0 / 12.0)


@pytest.mark.parametrize("m", [1.0, 0.5, -2.0])
def test_derived_constants_rejects_fast_diffusion(m):
    with pytest.raises(PreconditionError, match="m > 1"):
        exact.derived_constants(m)


def test_gas_params_rejects_bad_dimension():
    with pytest.raises(PreconditionError):
        exact.GasParams(2.0, d=0)
    with pytest.raises(PreconditionError):
        exact.GasParams(2.0, d=1.5)


@pytest.mark.parametrize("U, m, V", [(0.0, 2.0, 0.0), (0.0, 4.5, 0.0), (3.0, 2.0, 6.0), (2.0, 3.0, 6.0)])
def test_pressure_from_density(U, m, V):
    assert exact.pressure_from_density(U, m) == pytest.approx(V, abs=1e-14)


def test_pressure_from_density_rejects_negative():
    with pytest.raises(PreconditionError):
        exact.pressure_from_density(-1e-3, 2.0)


@given(st.floats(1.05, 6.0), st.floats(0.0, 10.0), st.floats(0.0, 10.0))
def test_pressure_monotone_and_invertible(m, u1, u2):
    lo, hi = sorted((u1, u2))
    assert exact.pressure_from_density(lo, m) <= exact.pressure_from_density(hi, m)
    if hi > 1e-12:  # below this U^(m-1) can underflow
        v = exact.pressure_from_density(hi, m)
        assert exact.density_from_pressure(v, m) == pytest.approx(hi, rel=1e-12)

# }}}


# {{{ Barenblatt

@pytest.fixture
def unit_field():
    # m=2, A=B, xi=1, tau=-1 gives R(s) = s
    return exact.BarenblattField(exact.GasParams(2.0), 1.0, -1.0, 1.0 / 12.0)


def test_barenblatt_pressure_examples(unit_field):
    assert exact.barenblatt_pressure(1.0, 0.0, unit_field) == pytest.approx(0.5, abs=1e-15)
    assert exact.barenblatt_pressure(2.5, 0.0, unit_field) == 0.0
    lo, hi = exact.support_interval(-0.3, unit_field)
    assert exact.barenblatt_pressure(lo, -0.3, unit_field) == 0.0
    assert exact.barenblatt_pressure(hi, -0.3, unit_field) == 0.0


def test_barenblatt_pressure_rejects_times_before_release(unit_field):
    with pytest.raises(PreconditionError):
        exact.barenblatt_pressure(1.0, -1.0, unit_field)
    with pytest.raises(PreconditionError):
        exact.support_interval(-2.0, unit_field)


def test_support_interval_examples(unit_field):
    assert exact.support_interval(0.0, unit_field) == pytest.approx((0.0, 2.0), abs=1e-15)
    assert exact.support_interval(-0.5, unit_field) == pytest.approx((0.5, 1.5), abs=1e-15)
    lo, hi = exact.support_interval(-1.0 + 1e-14, unit_field)
    assert hi - lo < 1e-13


@given(st.floats(1.1, 5.0), st.floats(0.1, 3.0), st.floats(-3.0, -0.1), st.booleans())
def test_support_width_increases(m, xi, tau, pde):
    field = exact.BarenblattField.focusing(xi, tau, m, pde)
    ts = np.linspace(tau + 1e-3 * -tau, 0.0, 7)
    widths = [np.subtract(*exact.support_interval(t, field)[::-1]) for t in ts]
    assert np.all(np.diff(widths) > 0)


def test_barenblatt_mass_closed_forms():
    assert exact.barenblatt_mass(1.0, 3.0) == pytest.approx(math.pi * math.sqrt(3) / 2, abs=1e-10)
    assert exact.barenblatt_mass(1.0, 2.0) == pytest.approx(4 * math.sqrt(3) / 3, abs=1e-10)


def test_barenblatt_mass_small_amplitude_limit():
    assert exact.barenblatt_mass(1e-12, 2.0) < 1e-17


@pytest.mark.parametrize("m", [1.5, 2.0, 3.0, 5.0])
def test_mass_quadrature_matches_riemann_oracle(m):
    _, B = exact.derived_constants(m)
    oracle = riemann_cos_power(m) / math.sqrt(B)
    assert exact.barenblatt_mass(1.0, m) == pytest.approx(oracle, rel=1e-8)
    assert exact.cos_power_integral(m) == pytest.approx(riemann_cos_power(m), rel=1e-8)


def test_barenblatt_mass_is_half_blob_integral():
    # pde-consistent profile conserves mass; quadrature counts one side of the blob
    field = exact.BarenblattField.focusing(1.0, -1.0, 2.0, pde_consistent=True)
    x = np.linspace(0.0, 2.0, 400_001)
    for t in (-0.9, -0.5, 0.0):
        u = field.density(x, t)
        total = integrate.trapezoid(u, x)
        assert total == pytest.approx(2.0 * field.M, rel=1e-6)


def test_barenblatt_derivatives_match_finite_differences():
    field = exact.BarenblattField.focusing(1.0, -1.0, 2.5)
    x, t, h = 1.1, -0.4, 1e-5
    V, Vt, Vx, Vxx = exact.barenblatt_derivatives(x, t, field)
    f = lambda xx, tt: exact.barenblatt_pressure(xx, tt, field)
    assert V == pytest.approx(f(x, t), rel=1e-12)
    assert Vt == pytest.approx((f(x, t + h) - f(x, t - h)) / (2 * h), rel=1e-6)
    assert Vx == pytest.approx((f(x + h, t) - f(x - h, t)) / (2 * h), rel=1e-6)
    assert Vxx == pytest.approx((f(x + h, t) - 2 * f(x, t) + f(x - h, t)) / h ** 2, rel=1e-4)


def _interior_points(field, rng, count):
    t = rng.uniform(field.tau + 0.05 * -field.tau, 0.0, count)
    lo, hi = exact.support_interval(t, field)
    x = lo + (hi - lo) * rng.uniform(0.02, 0.98, count)
    return x, t


@pytest.mark.parametrize("m", [1.5, 2.0, 3.0])
def test_barenblatt_residual_vanishes_with_pde_consistent_exponent(m):
    rng = np.random.default_rng(1)
    field = exact.BarenblattField.focusing(1.0, -1.0, m, pde_consistent=True)
    x, t = _interior_points(field, rng, 10_000)
    res = exact.pressure_residual(*exact.barenblatt_derivatives(x, t, field), m)
    assert np.max(np.abs(res)) <= 1e-10


def test_literal_exponent_formula_is_not_a_solution():
    # beta = 1/(m-1): the residual equals beta^2 (k s^(2 beta - 2) - y^2/s^2)
    m = 2.0
    field = exact.BarenblattField.focusing(1.0, -1.0, m)
    beta, k = field.params.beta, field.A / field.params.bigB
    x, t = 1.2, -0.5
    s, y = t - field.tau, x - field.xi
    res = exact.pressure_residual(*exact.barenblatt_derivatives(x, t, field), m)
    predicted = beta ** 2 * (k * s ** (2 * beta - 2) - y ** 2 / s ** 2)
    assert res == pytest.approx(predicted, rel=1e-12)
    assert abs(res) > 0.1

# }}}


# {{{ focusing pair

@pytest.mark.parametrize("m, xi, tau, A", [(2.0, 1.0, -1.0, 1.0 / 12.0), (2.0, 2.0, -1.0, 1.0 / 3.0)])
def test_focusing_amplitude_examples(m, xi, tau, A):
    assert exact.focusing_amplitude(xi, tau, m) == pytest.approx(A, abs=1e-15)


@given(st.floats(1.1, 6.0), st.floats(0.05, 5.0), st.floats(-5.0, -0.05), st.booleans())
def test_focusing_amplitude_puts_left_edge_at_origin(m, xi, tau, pde):
    field = exact.BarenblattField.focusing(xi, tau, m, pde)
    lo, _ = exact.support_interval(0.0, field)
    assert abs(lo) <= 1e-12 * max(1.0, xi)


def test_focusing_amplitude_rejects_nonnegative_tau():
    with pytest.raises(PreconditionError):
        exact.focusing_amplitude(1.0, 0.0, 2.0)
    with pytest.raises(PreconditionError):
        exact.focusing_amplitude(-1.0, -1.0, 2.0)


def test_focusing_pair_examples():
    assert exact.focusing_pair_pressure(0.75, -0.5, 1.0, -1.0, 2.0) == pytest.approx(0.1875, abs=1e-15)
    field = exact.BarenblattField.focusing(1.0, -1.0, 2.0)
    assert exact.barenblatt_pressure(0.75, -0.5, field) == pytest.approx(0.1875, abs=1e-15)
    for t in (-0.9, -0.5, -0.1, 0.0):
        assert exact.focusing_pair_pressure(0.0, t, 1.0, -1.0, 2.0) == 0.0
    assert exact.focusing_pair_pressure(1.0, -1.0 + 1e-12, 1.0, -1.0, 2.0) < 1e-11


def test_focusing_pair_bracket_nonpositive_at_origin():
    for m in (1.5, 2.0, 3.0):
        beta, _ = exact.derived_constants(m)
        for t in np.linspace(-0.999, 0.0, 11):
            q = 1.0 - t / -1.0
            assert 1.0 - 1.0 / q ** (2 * beta) <= 0.0


def test_focusing_pair_rejects_out_of_range_time():
    with pytest.raises(PreconditionError):
        exact.focusing_pair_pressure(0.5, 0.1, 1.0, -1.0, 2.0)
    with pytest.raises(PreconditionError):
        exact.focusing_pair_pressure(0.5, -1.0, 1.0, -1.0, 2.0)


@pytest.mark.parametrize("pde", [False, True])
@pytest.mark.parametrize("m", [1.5, 2.0, 3.0])
def test_focusing_pair_equals_barenblatt(m, pde):
    rng = np.random.default_rng(7)
    xi, tau = 1.3, -0.8
    field = exact.BarenblattField.focusing(xi, tau, m, pde)
    t = rng.uniform(tau, 0.0, 1000)
    t = np.where(t <= tau, 0.5 * tau, t)
    x = rng.uniform(0.0, 2.0 * xi, 1000)
    diff = exact.focusing_pair_pressure(x, t, xi, tau, m, pde) - exact.barenblatt_pressure(x, t, field)
    assert np.max(np.abs(diff)) <= 1e-12


@pytest.mark.parametrize("xi, tau, m, c", [(1.0, -1.0, 2.0, 1.0), (2.0, -1.0, 2.0, 2.0), (1.0, -2.0, 3.0, 0.25)])
def test_c_star_symmetric_examples(xi, tau, m, c):
    c_star, p = exact.c_star_symmetric(xi, tau, m)
    assert c_star == pytest.approx(c, abs=1e-15)
    assert p == pytest.approx(xi / -tau)


def test_c_star_pde_consistent():
    assert exact.c_star_symmetric(1.0, -1.0, 2.0, True)[0] == pytest.approx(1.0 / 3.0)

# }}}


# {{{ Graveleau

@pytest.mark.parametrize("c, x, t, g", [(1.0, 0.5, -0.2, 0.3), (1.0, 0.1, -0.2, 0.0), (2.0, 1.0, 0.0, 2.0)])
def test_graveleau_pressure_examples(c, x, t, g):
    assert exact.graveleau_pressure(x, t, c) == pytest.approx(g, abs=1e-15)
    assert exact.graveleau_pressure(-x, t, c) == exact.graveleau_pressure(x, t, c)


@pytest.mark.parametrize("zeta, phi", [(-0.5, 0.25), (-1.0, 0.0), (-2.0, 0.0), (0.0, 0.0)])
def test_graveleau_profile_examples(zeta, phi):
    assert exact.graveleau_profile(zeta) == pytest.approx(phi, abs=1e-15)


def test_graveleau_profile_positive_inside():
    z = np.linspace(-0.999, -0.001, 101)
    assert np.all(exact.graveleau_profile(z) > 0)


@pytest.mark.parametrize("c, t, rho", [(2.0, -0.5, 1.0), (3.7, 0.0, 0.0), (1.0, -1.0, 1.0)])
def test_graveleau_interface_examples(c, t, rho):
    assert exact.graveleau_interface(t, c) == pytest.approx(rho, abs=1e-15)


def test_graveleau_interface_rejects_positive_time():
    with pytest.raises(PreconditionError):
        exact.graveleau_interface(0.1, 1.0)


def test_graveleau_constants():
    wave = exact.GraveleauWave(1.5)
    assert wave.alpha_star == 1.0 and wave.gamma == -1.0
    with pytest.raises(PreconditionError):
        exact.GraveleauWave(1.0, exact.GasParams(2.0, d=2))


@settings(max_examples=200)
@given(st.floats(0.1, 5.0), st.floats(1e-3, 3.0), st.floats(0.01, 0.99))
def test_graveleau_similarity_identity(c, x, frac):
    # pick t with c t / x in (-1, 0)
    t = -frac * x / c
    wave = exact.GraveleauWave(c)
    assert wave.similarity_form(x, t) == pytest.approx(wave.pressure(x, t), abs=1e-12 * max(1, c * x))


def test_graveleau_residual_is_zero():
    rng = np.random.default_rng(3)
    c = 0.7
    t = rng.uniform(-2.0, -1e-3, 10_000)
    x = -c * t + rng.uniform(1e-3, 2.0, 10_000)
    for m in (1.5, 2.0, 3.0):
        res = exact.pressure_residual(*exact.graveleau_derivatives(x, t, c), m)
        assert np.max(np.abs(res)) <= 1e-10

# }}}


# {{{ dimensionless reduction

def test_dimensionless_phi_examples():
    for m in (1.5, 2.0, 4.0):
        assert exact.dimensionless_phi(0.0, 1.0, m) == pytest.approx(0.5, abs=1e-15)
    phi = exact.dimensionless_phi(0.005, 0.01, 2.0)
    # 0.5 * 0.995 * (1 - 0.99^2/0.995^2)
    assert phi == pytest.approx(0.5 * 0.995 * (1 - 0.99 ** 2 / 0.995 ** 2), rel=1e-12)
    # the quoted value 0.0049860 is a rounded hand figure; the formula gives 0.0049874
    assert phi == pytest.approx(0.0049860, rel=1e-3)
    assert phi / 0.01 == pytest.approx(exact.phi_asymptote(0.5, 2.0), abs=2e-3)
    assert exact.dimensionless_phi(0.5, 1e-6, 2.0) == 0.0


def test_dimensionless_phi_rejects_out_of_range():
    with pytest.raises(PreconditionError):
        exact.dimensionless_phi(1.0, 0.5, 2.0)
    with pytest.raises(PreconditionError):
        exact.dimensionless_phi(0.5, 0.0, 2.0)
    with pytest.raises(PreconditionError):
        exact.dimensionless_phi(0.5, 1.5, 2.0)


@pytest.mark.parametrize("ps, m, value", [(0.0, 2.0, 1.0), (0.0, 3.0, 1.0), (0.5, 2.0, 0.5), (1.0, 3.0, 0.5)])
def test_phi_asymptote_examples(ps, m, value):
    assert exact.phi_asymptote(ps, m) == pytest.approx(value, abs=1e-15)


def test_phi_asymptote_clamps_beyond_interface():
    # beta PiStar >= 1: the ray lies inside the hole, Phi vanishes identically
    assert exact.phi_asymptote(0.8, 1.5) == 0.0
    assert exact.dimensionless_phi(0.8 * 1e-3, 1e-3, 1.5) == 0.0


@pytest.mark.parametrize("pde", [False, True])
@pytest.mark.parametrize("m", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("ps", [0.2, 0.5, 0.8])
def test_taylor_remainder_first_order(m, ps, pde):
    p2 = np.array([1e-1, 5e-2, 2.5e-2, 1.25e-2, 1e-3, 5e-4, 2.5e-4, 1e-4, 5e-5])
    rem = np.abs(exact.dimensionless_phi(ps * p2, p2, m, pde) / p2 - exact.phi_asymptote(ps, m, pde))
    beta, _ = exact.derived_constants(m, pde)
    if beta * ps > 1.0:
        assert np.all(rem == 0.0)
        return
    pairs = [(0, 1), (1, 2), (2, 3), (4, 5), (5, 6), (7, 8)]
    for i, j in pairs:
        assert 0.4 <= rem[j] / rem[i] <= 0.6


def test_dimensionless_frame_consistency():
    rng = np.random.default_rng(11)
    frame = exact.DimensionlessFrame(1.4, -0.7, 2.5)
    x = rng.uniform(1e-3, frame.xi, 1000)
    t = rng.uniform(frame.tau * 0.999, -1e-6, 1000)
    a = np.asarray(frame.PiStar(x, t))
    b = np.asarray(frame.PiStar_from_eta(t / x))
    assert np.max(np.abs(a - b) / np.abs(a)) <= 1e-14
    assert np.all((frame.Pi1(t) > 0) & (frame.Pi1(t) < 1))
    assert np.all((frame.Pi2(x) > 0) & (frame.Pi2(x) <= 1))
    assert frame.c_star == pytest.approx(frame.p * frame.beta)


def test_dimensionless_frame_recovers_pressure():
    frame = exact.DimensionlessFrame(1.0, -1.0, 2.0)
    assert frame.pressure(0.75, -0.5) == pytest.approx(0.1875, abs=1e-15)
    V = exact.focusing_pair_pressure(0.3, -0.2, 1.0, -1.0, 2.0)
    assert frame.Pi(V) == pytest.approx(exact.dimensionless_phi(0.2, 0.3, 2.0), rel=1e-14)

# }}}


# {{{ profile convergence towards the Graveleau wave

@pytest.mark.parametrize("pde", [False, True])
@pytest.mark.parametrize("eta_c", [-0.1, -0.3, -0.6])
def test_pair_profile_converges_to_graveleau(eta_c, pde):
    m, xi, tau = 2.0, 1.0, -1.0
    c_star, _ = exact.c_star_symmetric(xi, tau, m, pde)
    eta = eta_c / c_star
    xs = 0.05 * 0.5 ** np.arange(6)
    V = exact.focusing_pair_pressure(xs, eta * xs, xi, tau, m, pde)
    g = exact.graveleau_pressure(xs, eta * xs, c_star)
    err = np.abs(V / g - 1)
    assert np.all(np.diff(err) < 0)
    assert np.all((err[1:] / err[:-1] >= 0.4) & (err[1:] / err[:-1] <= 0.6))

# }}}
