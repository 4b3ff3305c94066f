import numpy as np
import pytest

from yeastmc import receiver as rx
from yeastmc.core import Concentration, StimulusProfile
from yeastmc.protocols import single_pulse_protocol

GA = [rx.INDEX[s] for s in ("Gabg", "GaGTP", "GaGDP")]


def _random_state(rng, p):
    y = rx.initial_guess(p) * rng.uniform(0.2, 1.0, rx.N_SPECIES) + rng.uniform(0, 5, rx.N_SPECIES)
    # keep the Dig pools feasible
    for s in ("SD1", "SD2", "SD1D2", "TSD1"):
        y[rx.INDEX[s]] = rng.uniform(0, 0.2)
    return y


def test_galpha_derivative_sums_to_zero(rx_plus, rng):
    p, _ = rx_plus
    for _ in range(50):
        y = _random_state(rng, p)
        dy = rx.rx_derivatives(y, 0.0, p, u=lambda t: 10.0)
        assert abs(dy[GA].sum()) <= 1e-12 * np.abs(dy[GA]).max()


def test_bar1_pool_conserved_without_loss(rx_plus, rng):
    p, _ = rx_plus
    p = p.with_overrides(k38=0.0)
    y = _random_state(rng, p)
    dy = rx.rx_derivatives(y, 0.0, p, rx.RxInputMode.FORCED, u=lambda t: 1.0)
    assert dy[rx.INDEX["Bar1"]] + dy[rx.INDEX["Bar1active"]] == pytest.approx(0.0, abs=1e-12)


def test_sst2_hill_half_activation(rx_plus):
    p, y = rx_plus
    y = y.copy()
    y[rx.INDEX["Fus3PP"]] = p.sst2_hill_k
    r = rx.rx_rates(y, p, alpha=0.0)
    assert r["v37"] == pytest.approx(0.5 * p.k46, rel=1e-12)


def test_promoter_occupancy_saturates(rx_plus):
    p, y = rx_plus
    y = y.copy()
    y[rx.INDEX["S2"]] = 1e12
    r = rx.rx_rates(y, p, alpha=0.0)
    assert r["P1"] == pytest.approx(1.0, abs=1e-9) and r["P3"] == pytest.approx(1.0, abs=1e-9)


def test_basal_state_is_fixed_point(rx_delta):
    p, y0 = rx_delta
    assert rx.relative_residual(y0, p) < 1e-8
    assert np.all(y0 >= 0)


def test_basal_state_reproducible(rx_delta):
    p, y0 = rx_delta
    assert np.array_equal(rx.basal_state(p), y0)


def test_prescribed_mode_holds_alpha(rx_delta):
    p, y0 = rx_delta
    dy = rx.rx_derivatives(y0, 0.0, p, u=lambda t: 1e4)
    assert dy[0] == 0.0


def test_forced_mode_bar1_degrades_alpha(rx_plus):
    p, y0 = rx_plus
    y = y0.copy()
    y[0] = 100.0
    y[rx.INDEX["Bar1active"]] = 5.0
    dy = rx.rx_derivatives(y, 0.0, p, rx.RxInputMode.FORCED, u=lambda t: 0.0)
    assert dy[0] == pytest.approx(-100.0 * 5.0 * p.k1)


def test_desensitization_scales_only_internalization(rx_plus):
    p, y0 = rx_plus
    y = y0.copy()
    y[rx.INDEX["Ste2active"]] = 3.0
    a = rx.rx_rates(y, p, alpha=0.0)
    b = rx.rx_rates(y, p.with_overrides(desensitization_scale=4.0 * p.desensitization_scale), alpha=0.0)
    assert b["v4"] == pytest.approx(4 * a["v4"])
    assert all(a[k] == b[k] for k in a if k != "v4")


def test_negative_parameter_rejected(rx_plus):
    p, _ = rx_plus
    with pytest.raises(ValueError):
        p.with_overrides(k1=-1.0)


def test_dig_overflow_detected(rx_plus):
    p, y0 = rx_plus
    y = y0.copy()
    y[rx.INDEX["SD1"]] = 10 * p.TDig1 + 1
    with pytest.raises(rx.StateConsistencyError):
        rx.rx_rates(y, p)


def test_fold_change_needs_positive_baseline(rx_delta):
    p, y0 = rx_delta
    tr = rx.simulate(p, StimulusProfile(), 5.0, y0=y0)
    with pytest.raises(rx.NormalizationError):
        rx.fold_change(tr, "Fus1", 0.0)


def test_unstimulated_run_stays_at_basal(rx_delta):
    p, y0 = rx_delta
    tr = rx.simulate(p, StimulusProfile(), 363.0, y0=y0)
    for s in ("Fus1_mRNA", "Fus1"):
        fc = rx.fold_change(tr, s, y0[rx.INDEX[s]])
        assert np.max(np.abs(fc - 1)) < 1e-6


@pytest.fixture(scope="module")
def pulse_runs(rx_delta):
    p, y0 = rx_delta
    out = {}
    for a in (10.0, 100.0):
        out[a] = rx.simulate(p, single_pulse_protocol(Concentration(a, "µM")), 363.0, y0=y0,
                             t_eval=np.arange(0.0, 363.01, 0.1))
    return out


def test_single_pulse_timing(pulse_runs, rx_delta):
    _, y0 = rx_delta
    tr = pulse_runs[10.0]
    t_rna = tr.times[np.argmax(tr.column("Fus1_mRNA"))]
    t_prot = tr.times[np.argmax(tr.column("Fus1"))]
    assert 1.0 <= t_rna <= 5.0
    assert 45.0 <= t_prot <= 75.0
    assert tr.column("Fus1_mRNA").max() / y0[rx.INDEX["Fus1_mRNA"]] >= 10


def test_saturation(pulse_runs):
    lo, hi = (pulse_runs[a].column("Fus1").max() for a in (10.0, 100.0))
    assert 1.0 <= hi / lo < 1.10


def test_galpha_conserved_over_run(pulse_runs):
    g = rx.galpha_total(pulse_runs[100.0].values)
    assert np.max(np.abs(g - g[0])) / g[0] <= 1e-8
