import numpy as np
import pytest

from plasmonwire import WireSystem
from plasmonwire.dispersion import (
    is_single_mode, mode_equation_residual, mode_roots, plasmon_pole_estimate,
    resonance_hwhm, resonance_profile,
)
from plasmonwire.errors import PreconditionError, ResolutionError

EPS = -75.0
PLANAR = np.sqrt(EPS / (1 + EPS))


def test_residual_is_real():
    sys = WireSystem(0.05, EPS)
    kz = sys.k0 * np.array([1.0001, 1.1, 3.0, 40.0])
    assert np.all(np.isfinite(mode_equation_residual(sys, 0, kz)))
    assert np.all(np.isfinite(mode_equation_residual(sys, 2, kz)))


def test_roots_vanish_and_are_unique():
    sys = WireSystem(0.2, EPS)
    for n in (0, 1):
        roots = mode_roots(sys, n)
        assert len(roots) == 1
        r = roots[0]
        dk = 1e-6 * r.kz
        assert np.sign(mode_equation_residual(sys, n, r.kz - dk)) != np.sign(
            mode_equation_residual(sys, n, r.kz + dk))


def test_thin_wire_root_grows_and_stays_single_mode():
    prev = np.inf
    for radius in (0.003, 0.01, 0.05, 0.1, 0.5):
        kz = mode_roots(WireSystem(radius, EPS), 0)[0].kz_k0
        assert 1 < kz < prev
        prev = kz
    assert is_single_mode(WireSystem(0.01))
    assert not is_single_mode(WireSystem(0.2))
    assert not mode_roots(WireSystem(0.01, EPS), 1)


def test_thick_wire_tends_to_planar_surface_plasmon():
    ks = [mode_roots(WireSystem(r, EPS), 0)[0].kz_k0 for r in (0.25, 0.5, 1.0, 2.0)]
    assert all(k > PLANAR for k in ks)
    gaps = np.diff(np.array(ks) - PLANAR)
    assert np.all(gaps < 0)
    # mpmath reference at R = 0.25 (independent high-precision root)
    assert ks[0] == pytest.approx(1.02885, abs=2e-5)


def test_root_wavelength_property():
    r = mode_roots(WireSystem(0.01, EPS), 0)[0]
    assert r.wavelength == pytest.approx(1 / r.kz_k0)


def test_lossy_system_rejected():
    with pytest.raises(PreconditionError):
        mode_roots(WireSystem(0.01), 0)
    with pytest.raises(PreconditionError):
        mode_equation_residual(WireSystem(0.01, EPS), 0, 0.5)


def test_resonance_width_follows_pole_estimate(thin_wire):
    kz, vals = resonance_profile(thin_wire, 0.015)
    fit = resonance_hwhm(kz, vals)
    k_pl, width = plasmon_pole_estimate(thin_wire)
    assert fit.k_peak == pytest.approx(k_pl, rel=1e-3)
    assert fit.hwhm == pytest.approx(width, rel=0.02)
    assert fit.lorentzian_rms < 0.01


def test_width_is_linear_in_loss():
    widths = []
    for eps_i in (0.15, 0.3):
        sys = WireSystem(0.01, complex(EPS, eps_i))
        widths.append(resonance_hwhm(*resonance_profile(sys, 0.015)).hwhm / eps_i)
    assert widths[0] == pytest.approx(widths[1], rel=0.02)


def test_width_independent_of_amplitude(thin_wire):
    kz, vals = resonance_profile(thin_wire, 0.015)
    a = resonance_hwhm(kz, vals)
    b = resonance_hwhm(kz, 7.5 * vals)
    assert a.hwhm == pytest.approx(b.hwhm, rel=1e-12)


def test_undersampled_peak_is_refused(thin_wire):
    kz, vals = resonance_profile(thin_wire, 0.015, points=41, span=200)
    with pytest.raises(ResolutionError):
        resonance_hwhm(kz, vals)
