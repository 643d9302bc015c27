import numpy as np
import pytest
from scipy.integrate import quad

from cavity_array import LatticeSpec, ModelParams, multimode_drive, sideband_positions, solve
from cavity_array.spectrum import (DriveField, detector_population, detector_spectrum,
                                   spectral_peaks)


def test_drive_assembly_from_bloch_populations():
    p = ModelParams(J=1.0)
    s = solve(p, LatticeSpec(6))
    d = multimode_drive(s)
    np.testing.assert_allclose(np.abs(d.amplitudes) ** 2, s.n_k / 6)
    np.testing.assert_allclose(d.frequencies, s.spectrum.omega_k)
    assert d(0.0) == pytest.approx(np.sum(d.amplitudes))


def test_degenerate_modes_merge_coherently():
    d = DriveField(np.array([1.0, 2.0, 0.5], complex), np.array([1.0, 3.0, 1.0]))
    f, a = d.merged()
    np.testing.assert_allclose(f, [1.0, 3.0])
    np.testing.assert_allclose(a, [1.5, 2.0])
    assert d.mean_power() == pytest.approx(1.5**2 + 2.0**2)
    assert d.slowest_beat() == pytest.approx(2.0)
    assert DriveField(np.array([1.0 + 0j]), np.array([0.0])).slowest_beat() == np.inf


def test_mean_power_is_the_time_average():
    d = DriveField(np.array([0.7, 0.2 - 0.4j, 1.1], complex), np.array([-2.0, 0.5, 0.5]))
    T = 2 * np.pi / 0.5 * 40
    avg = quad(lambda t: abs(d(t)) ** 2, 0, T, limit=4000)[0] / T
    assert avg == pytest.approx(d.mean_power(), rel=1e-3)


def test_undriven_emitter_gives_lorentzian_of_total_width():
    p = ModelParams(omega_sigma=1.0, P_sigma=0.5, gamma_sigma=0.1, gamma_phi=0.2)
    zero = DriveField(np.zeros(1, complex), np.array([0.0]))
    w = np.linspace(-2, 4, 3001)
    res = detector_spectrum(p, zero, w, Gamma_d=0.3)
    above = w[res.S >= 0.5]
    assert above[-1] - above[0] == pytest.approx(0.5 + 0.1 + 0.2 + 0.3, abs=4e-3)
    assert w[np.argmax(res.S)] == pytest.approx(1.0)
    assert res.S.max() == 1.0 and res.method == "steady"


def test_coherent_drive_shows_sidebands_at_twice_the_amplitude():
    p = ModelParams(omega_sigma=1.0, P_sigma=0.2)
    d = DriveField(np.array([3.0 + 0j]), np.array([1.0]))
    w = np.linspace(-9, 11, 2001)
    res = detector_spectrum(p, d, w)
    peaks, heights = spectral_peaks(w, res.S)
    np.testing.assert_allclose(peaks, [-5.0, 1.0, 7.0], atol=0.02)
    assert heights[0] == pytest.approx(heights[2], rel=1e-6)


def test_weak_probe_scales_quadratically():
    p = ModelParams(P_sigma=1.0)
    d = DriveField(np.array([2.0 + 0j]), np.array([0.0]))
    a = detector_population(p, d, 3.5, epsilon=1e-3)[0]
    b = detector_population(p, d, 3.5, epsilon=2e-3)[0]
    assert b / a == pytest.approx(4.0, rel=1e-4)


def test_time_integration_reproduces_exact_steady_state():
    p = ModelParams(omega_sigma=0.5, P_sigma=1.0)
    d = DriveField(np.array([1.5 + 0j]), np.array([0.5]))
    exact = detector_population(p, d, 2.0)
    integ = detector_population(p, d, 2.0, method="integrate", T=40.0)
    assert exact[3] == "steady" and integ[3] == "integrate" and integ[2]
    assert integ[0] == pytest.approx(exact[0], rel=1e-3)


def test_weak_second_tone_barely_perturbs_spectrum():
    p = ModelParams(P_sigma=1.0)
    one = DriveField(np.array([1.5 + 0j]), np.array([0.0]))
    two = DriveField(np.array([1.5, 1e-3], complex), np.array([0.0, 1.0]))
    a = detector_population(p, one, 3.0)[0]
    b, _, settled, method = detector_population(p, two, 3.0)
    assert method == "integrate" and settled
    assert b == pytest.approx(a, rel=5e-3)


def test_single_site_spectrum_is_symmetric_at_resonance():
    p = ModelParams(gamma_a=0.1, P_sigma=5.0)
    s = solve(p)
    w = np.linspace(-15, 15, 121)
    res = detector_spectrum(p, multimode_drive(s), w)
    np.testing.assert_allclose(res.S, res.S[::-1], rtol=1e-6, atol=1e-12)


def test_parallel_grid_matches_serial():
    p = ModelParams(P_sigma=1.0)
    d = DriveField(np.array([2.0 + 0j]), np.array([0.0]))
    w = np.linspace(-6, 6, 9)
    a = detector_spectrum(p, d, w)
    b = detector_spectrum(p, d, w, workers=2)
    np.testing.assert_array_equal(a.S_raw, b.S_raw)


def test_sideband_rules():
    s1 = solve(ModelParams(gamma_a=0.1, P_sigma=5.0))
    np.testing.assert_allclose(sideband_positions(s1), [-10.0, 10.0])
    np.testing.assert_allclose(sideband_positions(s1, use_computed=True),
                               [-2 * np.sqrt(s1.n_a), 2 * np.sqrt(s1.n_a)])
    # a degenerate +-k pair at resonance: N=4, J=1, omega_sigma = omega_{pi/2} = 0
    s4 = solve(ModelParams(J=1.0, gamma_a=0.1, P_sigma=5.0), LatticeSpec(4))
    assert sideband_positions(s4)[1] == pytest.approx(2 * np.sqrt(2) * 5.0)


def test_bad_method():
    d = DriveField(np.array([1.0, 1.0], complex), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        detector_population(ModelParams(), d, 0.0, method="steady")
    with pytest.raises(ValueError):
        detector_population(ModelParams(), d, 0.0, method="magic")
