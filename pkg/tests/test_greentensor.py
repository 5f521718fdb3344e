import numpy as np
import pytest

from plasmonwire import CylPoint, QuadratureSpec, WireSystem
from plasmonwire.errors import ConvergenceError, DomainError, PreconditionError
from plasmonwire.greentensor import (
    default_cutoff, green_direct_im, green_integrand, green_reflected, green_transmitted,
    kz_integral, order_kernel,
)

TIGHT = QuadratureSpec(rtol=1e-9)


def test_direct_expansion_matches_closed_form(thin_wire):
    a, b = CylPoint(0.3, 0.2, 0.1), CylPoint(0.5, 1.1, -0.05)
    v, _, _ = kz_integral(thin_wire, a, b, TIGHT, parts=("direct",), imag_only=True)
    assert np.max(np.abs(v - green_direct_im(a, b, thin_wire.k0))) < 1e-12


def test_direct_coincident_limit():
    p = CylPoint(0.4, 0.3, 0.0)
    k0 = 2 * np.pi
    assert np.allclose(green_direct_im(p, p, k0), k0 / (6 * np.pi) * np.eye(3), atol=1e-15)
    near = CylPoint(0.4, 0.3, 1e-7)
    assert np.allclose(green_direct_im(near, p, k0), green_direct_im(p, p, k0), atol=1e-10)


def test_vacuum_wire_transmits_direct_field():
    sys = WireSystem(0.05, 1.0)
    a, b = CylPoint(0.03, 0.4, 0.2), CylPoint(0.2, 1.0, 0.0)
    exact = green_direct_im(a, b, sys.k0)
    g = green_transmitted(sys, a, b, QuadratureSpec(rtol=1e-8, branch_window=0.0))
    assert np.max(np.abs(g.matrix.imag - exact)) < 1e-12
    # the default branch-point window costs ~ delta log(1/delta) of the kernel
    g = green_transmitted(sys, a, b, QuadratureSpec(rtol=1e-8))
    assert np.max(np.abs(g.matrix.imag - exact)) < 1e-6 * np.max(np.abs(exact))
    refl = green_reflected(sys, b, b)
    assert np.max(np.abs(refl.matrix)) < 1e-10


def test_reciprocity(thin_wire, rng):
    for _ in range(3):
        a = CylPoint(rng.uniform(0.013, 0.05), rng.uniform(0, 2 * np.pi), rng.uniform(-0.2, 0.2))
        b = CylPoint(rng.uniform(0.013, 0.05), rng.uniform(0, 2 * np.pi), rng.uniform(-0.2, 0.2))
        g1 = green_reflected(thin_wire, a, b, TIGHT).matrix
        g2 = green_reflected(thin_wire, b, a, TIGHT).matrix
        assert np.max(np.abs(g1 - g2.T)) < 1e-7 * np.max(np.abs(g1))


def test_passivity(thin_wire):
    p = CylPoint(0.02, 0.9, 0.0)
    g = green_reflected(thin_wire, p, p).matrix.imag + green_direct_im(p, p, thin_wire.k0)
    ev = np.linalg.eigvalsh((g + g.T) / 2)
    assert ev.min() > 0


def test_invariance_under_rotation_and_translation(thin_wire):
    a, b = CylPoint(0.02, 0.0, 0.0), CylPoint(0.03, 0.5, 0.1)
    shift, turn = 0.37, 1.3
    g = green_reflected(thin_wire, a, b, TIGHT).matrix
    a2, b2 = CylPoint(0.02, turn, shift), CylPoint(0.03, 0.5 + turn, 0.1 + shift)
    g2 = green_reflected(thin_wire, a2, b2, TIGHT).matrix
    c, s = np.cos(turn), np.sin(turn)
    rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    assert np.max(np.abs(rot @ g @ rot.T - g2)) < 1e-7 * np.max(np.abs(g))


def test_kz_parity_for_radial_dipoles(thin_wire):
    # +kz and -kz are both evaluated; for a radial pair at one azimuth the two agree
    p, q = CylPoint(0.015, 0.4, 0.0), CylPoint(0.02, 0.4, 0.0)
    kz = np.array([3.0, 9.0, 20.0, 80.0])
    pos = order_kernel(thin_wire, kz, 4, p, q, axial_phase=False)[..., 0, 0]
    neg = order_kernel(thin_wire, -kz, 4, p, q, axial_phase=False)[..., 0, 0]
    assert np.max(np.abs(pos - neg)) < 1e-12 * np.max(np.abs(pos))


def test_only_order_zero_is_resonant(thin_wire):
    p = CylPoint(0.015)
    k_pl = 12.4538
    on = [abs(green_integrand(thin_wire, n, k_pl, p, p)[0, 0]) for n in (0, 1, 2)]
    off = [abs(green_integrand(thin_wire, n, 1.2 * k_pl, p, p)[0, 0]) for n in (0, 1, 2)]
    assert on[0] / off[0] > 10
    assert on[1] / off[1] < 1.1 and on[2] / off[2] < 1.1


def test_evanescent_tail_is_negligible_at_cutoff(thin_wire):
    p = CylPoint(0.015)
    cut = default_cutoff(thin_wire, p, p, ("reflected",))
    tail = abs(order_kernel(thin_wire, np.array([cut]), 8, p, p).sum(axis=1)[0, 0, 0])
    peak = abs(green_integrand(thin_wire, 0, 12.4538, p, p)[0, 0])
    assert tail < 1e-9 * peak


def test_stable_under_tolerance_halving(thin_wire):
    p = CylPoint(0.015)
    q = QuadratureSpec(rtol=1e-6)
    a, _, _ = kz_integral(thin_wire, p, p, q, dipoles=([1, 0, 0], [1, 0, 0]), imag_only=True)
    b, _, _ = kz_integral(thin_wire, p, p, q.halved(), dipoles=([1, 0, 0], [1, 0, 0]), imag_only=True)
    assert abs(a - b) < 2e-6 * abs(a)


def test_far_from_wire_scattering_is_weak(thin_wire):
    p = CylPoint(1.0)
    g = green_reflected(thin_wire, p, p).matrix.imag
    assert np.max(np.abs(g)) < 0.05 * thin_wire.k0 / (6 * np.pi)


def test_refusals(thin_wire, lossless_thin_wire):
    p = CylPoint(0.015)
    with pytest.raises(PreconditionError):
        kz_integral(lossless_thin_wire, p, p)
    kz_integral(lossless_thin_wire, p, p, region="traveling")
    with pytest.raises(DomainError):
        kz_integral(thin_wire, CylPoint(0.0105), p)
    with pytest.raises(PreconditionError):
        green_reflected(thin_wire, CylPoint(0.005), p)
    with pytest.raises(ConvergenceError) as info:
        kz_integral(thin_wire, p, p, QuadratureSpec(n_max=1), dipoles=([1, 0, 0], [1, 0, 0]),
                    imag_only=True)
    assert info.value.diagnostics["n_max"] == 1
    with pytest.raises(DomainError):
        QuadratureSpec(rtol=0)


def test_tight_tolerance_next_to_surface(thin_wire):
    # many orders plus the kz = k0 branch point: must still converge
    p = CylPoint(0.012)
    v, err, _ = kz_integral(thin_wire, p, p, QuadratureSpec(rtol=5e-7), dipoles=([1, 0, 0], [1, 0, 0]),
                            imag_only=True)
    assert err <= 5e-7 * abs(v)
