import numpy as np
import pytest

from carsroa.coherence import (LocalOscillator, PerturbativeRegimeWarning, PulseSpec,
                               coherence_dynamics_freq, coherence_dynamics_time, lineshape_F,
                               prepare_coherence, pulse_field, pulse_spectrum)
from carsroa.model import ExcitedState, MolecularModel

from conftest import GAUSS_HWHM, coherence_cases, lineshape_half_width


def test_pulse_validation():
    with pytest.raises(ValueError):
        PulseSpec(1.0, 0.0)
    with pytest.raises(ValueError):
        PulseSpec(1.0, 0.1, polarization=(1, 1, 0))
    with pytest.raises(ValueError):
        PulseSpec(1.0, 0.1, polarization=(0, 0, 1))
    with pytest.raises(ValueError):
        LocalOscillator(-1.0)


def test_k_vector_along_z():
    np.testing.assert_array_equal(PulseSpec(3.0, 0.1).k_vector(c=2.0), [0, 0, 1.5])


def test_pulse_spectrum_values():
    p = PulseSpec(5.0, 0.4, amplitude=2.0 - 1j, tau=1.3)
    assert pulse_spectrum(p.with_(tau=0.0), 5.0) == 2.0 - 1j
    expected = (2.0 - 1j) * np.exp(-0.5) * np.exp(1j * 0.4 * 1.3)
    assert pulse_spectrum(p, 5.4) == pytest.approx(expected, rel=1e-15)


def test_inverse_transform_reproduces_time_envelope():
    p = PulseSpec(5.0, 0.7, amplitude=1.5, tau=2.0)
    w = np.linspace(p.omega_0 - 12 * p.sigma, p.omega_0 + 12 * p.sigma, 4097)
    t = np.linspace(-2.0, 6.0, 41)
    dw = w[1] - w[0]
    # symmetric convention: f(t) = (2 pi)^-1/2 sum_w E(w) exp(-i w t) dw
    numeric = (pulse_spectrum(p, w)[None, :] * np.exp(-1j * np.outer(t, w))).sum(axis=1)
    numeric *= dw / np.sqrt(2 * np.pi)
    np.testing.assert_allclose(numeric, pulse_field(p, t), atol=1e-12)
    assert t[np.argmax(np.abs(numeric))] == pytest.approx(2.0)


def test_zero_stokes_gives_no_coherence():
    model, pump, stokes = coherence_cases()[0]
    assert prepare_coherence(pump, stokes.with_(amplitude=0.0), model) == 0


def test_far_detuned_preparation_matches_gaussian_convolution():
    w31, sp, ss, gam = 250.0, 0.1, 0.15, 0.01
    model = MolecularModel(1.0, gam, [ExcitedState(w31, 0.1, [1.0, 0, 0], [0.7, 0, 0])])
    pump = PulseSpec(50.0, sp, amplitude=0.3)
    stokes = PulseSpec(49.0, ss, amplitude=0.2 + 0.1j)
    rho = prepare_coherence(pump, stokes, model)
    s2 = sp ** 2 + ss ** 2
    x = model.omega_v - 1j * gam + stokes.omega_0 - pump.omega_0
    overlap = np.sqrt(2 * np.pi * sp ** 2 * ss ** 2 / s2) * np.exp(-x * x / (2 * s2))
    c3 = 0.7 * 1.0
    expected = 1j * c3 * np.conj(stokes.amplitude) * pump.amplitude * overlap / (w31 - pump.omega_0)
    assert abs(rho - expected) / abs(expected) < 1e-3


def test_preparation_matches_rephased_long_time_limit():
    model, pump, stokes = coherence_cases()[1]
    T = 40.0
    late = coherence_dynamics_time(pump, stokes, model, T)
    limit = late * np.exp((1j * model.omega_v + model.gamma) * T)
    rho = prepare_coherence(pump, stokes, model)
    assert abs(rho - limit) / abs(limit) < 1e-6


def test_delta_reduction_is_half_of_pole_form_for_slow_dephasing():
    model, pump, stokes = coherence_cases()[0]
    model = MolecularModel(model.omega_v, 1e-6, model.excited_states)
    ratio = (prepare_coherence(pump, stokes, model, reduction="delta")
             / prepare_coherence(pump, stokes, model))
    assert ratio == pytest.approx(0.5, rel=1e-4)


def test_strong_drive_warns():
    model, pump, stokes = coherence_cases()[0]
    with pytest.warns(PerturbativeRegimeWarning):
        prepare_coherence(pump.with_(amplitude=50.0), stokes.with_(amplitude=50.0), model)


def test_causality_before_pulses():
    model, pump, stokes = coherence_cases()[2]
    early = min(pump.tau - 14 / pump.sigma, stokes.tau - 14 / stokes.sigma)
    assert abs(coherence_dynamics_time(pump, stokes, model, early)) < 1e-14


def test_free_evolution_after_impulsive_drive():
    model, pump, stokes = coherence_cases()[3]
    pump, stokes = pump.with_(sigma=3.0), stokes.with_(sigma=3.0, tau=0.0)
    t1, t2 = 6.0, 9.0
    r1 = coherence_dynamics_time(pump, stokes, model, t1)
    r2 = coherence_dynamics_time(pump, stokes, model, t2)
    expected = np.exp(-(1j * model.omega_v + model.gamma) * (t2 - t1))
    assert r2 / r1 == pytest.approx(expected, rel=1e-8)


def test_time_and_frequency_routes_agree():
    model, pump, stokes = coherence_cases()[4]
    for t in (0.5, 3.0):
        a = coherence_dynamics_time(pump, stokes, model, t)
        b = coherence_dynamics_freq(pump, stokes, model, t)
        assert abs(a - b) / abs(b) < 1e-6


def test_fast_dephasing_suppresses_coherence():
    model, pump, stokes = coherence_cases()[0]
    t = max(pump.tau, stokes.tau)
    mags = []
    for g in (20.0, 40.0):
        m = MolecularModel(model.omega_v, g, model.excited_states)
        mags.append(abs(coherence_dynamics_freq(pump, stokes, m, t)))
    assert mags[0] / mags[1] == pytest.approx(2.0, rel=0.02)


def test_lineshape_zero_coherence():
    assert lineshape_F(3.0, 0.0, PulseSpec(2.0, 0.3), 0.05, 0.0, 1.0) == 0


def test_lineshape_linearity_and_phase():
    probe = PulseSpec(2.0, 0.3)
    grid = np.linspace(2.5, 3.5, 7)
    f1 = lineshape_F(grid, 0.4, probe, 0.05, 0.01, 1.0)
    f2 = lineshape_F(grid, 0.4, probe, 0.05, 0.03j, 1.0)
    np.testing.assert_allclose(f2, 3j * f1, rtol=1e-14)
    f3 = lineshape_F(grid, 0.4, probe.with_(amplitude=2.5), 0.05, 0.01, 1.0)
    np.testing.assert_allclose(f3, 2.5 * f1, rtol=1e-7)
    np.testing.assert_allclose(np.abs(f2), 3 * np.abs(f1), rtol=1e-14)


def test_delay_never_increases_magnitude():
    probe = PulseSpec(2.0, 0.3)
    grid = np.linspace(2.4, 3.6, 9)
    f0 = np.abs(lineshape_F(grid, 0.0, probe, 0.05, 0.01, 1.0))
    for tau in (0.5, 2.0, 10.0):
        ft = np.abs(lineshape_F(grid, tau, probe, 0.05, 0.01, 1.0))
        assert np.all(ft <= f0 * (1 + 1e-9))


def test_lineshape_peak_position():
    probe = PulseSpec(2.0, 0.3)
    grid = np.linspace(2.9, 3.1, 21)
    f = np.abs(lineshape_F(grid, 0.0, probe, 0.05, 0.01, 1.0))
    assert grid[np.argmax(f)] == pytest.approx(3.0)


def test_broadband_probe_gives_gaussian_profile():
    # sigma >> Gamma: the Lorentzian acts as a delta, leaving the probe envelope
    gamma = 0.01
    hw = lineshape_half_width(PulseSpec(2.0, 300 * gamma), gamma)
    assert hw / GAUSS_HWHM == pytest.approx(300 * gamma, rel=1e-2)


def test_narrowband_probe_gives_lorentzian_profile():
    # sigma << Gamma: the envelope acts as a delta, leaving the Lorentzian
    gamma = 0.3
    hw = lineshape_half_width(PulseSpec(2.0, gamma / 300), gamma)
    assert hw == pytest.approx(gamma, rel=1e-2)
