import math

import numpy as np
import pytest

from yeastmc import channel as ch
from yeastmc.core import DataError

P = ch.ChannelParams(D_alpha=1e-10, k_alpha=1e-3)


@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_mass_accounting(t):
    assert ch.mass_integral(t, P, 2.5) == pytest.approx(2.5 * math.exp(-P.k_alpha * t), rel=1e-9)


def test_literal_exponent_breaks_mass_conservation():
    lit = ch.ChannelParams(D_alpha=1e-10, literal_exponent=True)
    assert ch.mass_integral(1.0, lit) == pytest.approx(math.pi ** 1.5, rel=1e-9)


def test_kernel_solves_diffusion_equation():
    r, t, hr, ht = 1.3e-5, 0.7, 1e-8, 1e-6
    c = lambda rr, tt: ch.impulse_response(rr, tt, P)
    dt = (c(r, t + ht) - c(r, t - ht)) / (2 * ht)
    lap = (c(r + hr, t) - 2 * c(r, t) + c(r - hr, t)) / hr ** 2 + (c(r + hr, t) - c(r - hr, t)) / (hr * r)
    assert dt == pytest.approx(P.D_alpha * lap - P.k_alpha * c(r, t), rel=1e-5)


def test_kernel_vectorized_and_domain():
    out = ch.impulse_response(np.array([0.0, 1e-5]), np.array([[1.0], [2.0]]), P)
    assert out.shape == (2, 2)
    with pytest.raises(ch.ChannelDomainError):
        ch.impulse_response(1e-5, 0.0, P)
    with pytest.raises(ch.ChannelDomainError):
        ch.impulse_response(-1.0, 1.0, P)


def test_impulse_response_object_uses_source_offset():
    ir = ch.ImpulseResponse(1.0, P, source=(1e-5, 0.0, 0.0))
    assert ir((1e-5, 2e-5, 0.0), 1.0) == pytest.approx(ir.at_distance(2e-5, 1.0))


def test_peak_time_free_diffusion():
    p = ch.ChannelParams(D_alpha=1.0)
    assert ch.peak_time(1.0, p) == pytest.approx(1 / 6, rel=1e-8)


@pytest.mark.parametrize("k", [0.0, 1e-3, 0.5])
def test_peak_time_matches_stationary_point(k):
    p = ch.ChannelParams(D_alpha=1e-10, k_alpha=k)
    assert ch.peak_time(2e-5, p) == pytest.approx(ch.peak_time_closed_form(2e-5, p), rel=1e-6)


def test_peak_time_at_origin_has_no_interior_maximum():
    with pytest.raises(ch.NoInteriorMaximum):
        ch.peak_time(0.0, P)


def test_constant_emission_convolution_matches_closed_form():
    q, r = 1e-20, 2e-5
    t = np.array([1.0, 5.0, 30.0, 300.0])
    e = ch.EmissionSchedule(np.array([0.0, 1e4]), np.array([q, q]))
    num = ch.response_from_emission(e, r, t, P)
    np.testing.assert_allclose(num, ch.constant_emission_response(q, r, t, P), rtol=2e-3)


def test_impulses_in_schedule_are_exact():
    e = ch.EmissionSchedule(np.array([]), np.array([]), impulses=((2.0, 3.0),))
    assert ch.response_from_emission(e, 1e-5, 5.0, P) == pytest.approx(3.0 * ch.impulse_response(1e-5, 3.0, P))
    assert ch.response_from_emission(e, 1e-5, 1.0, P) == 0.0


def test_emission_is_linear():
    t = np.linspace(0, 60, 31)
    e = ch.EmissionSchedule(t, 1e-20 * (1 + np.sin(t / 7)))
    a = ch.response_from_emission(e, 2e-5, [20.0, 50.0], P)
    b = ch.response_from_emission(e.scaled(3.0), 2e-5, [20.0, 50.0], P)
    np.testing.assert_allclose(b, 3 * a, rtol=1e-12)


def test_initial_point_field_equals_kernel():
    v = np.zeros((3, 3, 3))
    v[1, 1, 1] = 2.0
    phi = ch.SampledField(v, (-1e-6, -1e-6, -1e-6), 1e-6)
    got = ch.response_from_initial_distribution(phi, (1e-5, 0.0, 0.0), 0.5, P)
    assert got == pytest.approx(phi.total_mass() * ch.impulse_response(1e-5, 0.5, P))


def test_sampled_field_rejects_negative():
    with pytest.raises(DataError):
        ch.SampledField(-np.ones((2, 2, 2)), (0, 0, 0), 1.0)


def test_units():
    assert float(ch.mol_to_Mm3(1.0)) == 1e-3
    assert float(ch.molecules_to_Mm3(6.02214076e23)) == pytest.approx(1e-3)
