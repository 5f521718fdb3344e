import numpy as np
import pytest

from plasmonwire import WireSystem
from plasmonwire.cylwave import Parity, WaveType
from plasmonwire.dispersion import mode_roots
from plasmonwire.errors import DomainError, SingularSystemError
from plasmonwire.scatter import boundary_matrix, mode_determinant, solve_coeffs, solve_scaled


@pytest.mark.parametrize("n", [0, 1, 4])
@pytest.mark.parametrize("kz_k0", [0.2, 0.97, 1.5, 6.0])
def test_boundary_conditions_hold(n, kz_k0):
    sys = WireSystem(0.05)
    kz = kz_k0 * sys.k0
    m, src = boundary_matrix(sys, n, kz)
    x = solve_coeffs(sys, n, kz).boundary_vector()
    scale = np.abs(m) @ np.abs(x) + np.abs(src)
    scale = np.where(scale > 0, scale, 1.0)  # n = 0 leaves some rows empty
    assert np.max(np.abs(m @ x - src) / scale) < 1e-12


def test_vacuum_wire_is_transparent():
    sys = WireSystem(0.05, 1.0)
    for n in (0, 2):
        c = solve_coeffs(sys, n, 3.0)
        assert abs(c.a_t - 1) < 1e-12 and abs(c.c_t - 1) < 1e-12
        for amp in (c.a_r, c.b_r, c.c_r, c.d_r, c.b_t, c.d_t):
            assert abs(amp) < 1e-12


def test_order_zero_decouples_polarizations():
    c = solve_coeffs(WireSystem(0.05), 0, 3.0)
    assert c.b_r == 0 and c.d_r == 0 and c.b_t == 0 and c.d_t == 0
    assert abs(c.c_r) > 0.1


def test_order_zero_matrix_is_block_diagonal():
    m, _ = boundary_matrix(WireSystem(0.05), 0, 3.0)
    # unknowns (A_R, B_R, A_T, B_T, ...): B couples only through n kz terms
    te, tm = [0, 2, 4, 6], [1, 3, 5, 7]
    rows_te = [r for r in range(8) if np.any(m[r, te])]
    assert np.max(np.abs(m[np.ix_(rows_te, tm)])) < 1e-12


def test_determinant_has_no_spurious_roots_at_large_kz():
    sys = WireSystem(0.05, -75.0)
    kz = sys.k0 * np.geomspace(5, 60, 200)
    assert np.min(np.abs(mode_determinant(sys, 0, kz))) > 1e-3


def test_odd_parity_flips_cross_terms():
    sys = WireSystem(0.05)
    even = solve_coeffs(sys, 2, 3.0, Parity.EVEN)
    odd = solve_coeffs(sys, 2, 3.0, Parity.ODD)
    for name in ("a_r", "c_r", "a_t", "c_t"):
        assert getattr(odd, name) == pytest.approx(getattr(even, name), rel=1e-12)
    for name in ("b_r", "d_r", "b_t", "d_t"):
        assert getattr(odd, name) == pytest.approx(-getattr(even, name), rel=1e-12)


def test_scaled_solver_matches_single_solve():
    sys = WireSystem(0.02)
    kz = np.array([0.4, 1.3, 9.0]) * sys.k0
    sol = solve_scaled(sys, 3, kz)
    for i, k in enumerate(kz):
        for n in range(4):
            c = solve_coeffs(sys, n, k)
            ref = c.a_r
            got = sol[(WaveType.M, Parity.EVEN)][i, n, 0] * np.exp(sol["log_refl"][i])
            assert got == pytest.approx(ref, rel=1e-9, abs=1e-300)


def test_scaled_solver_survives_extreme_orders():
    sys = WireSystem(0.01)
    sol = solve_scaled(sys, 55, np.array([1e-6, 0.5]))
    for key in ((WaveType.M, Parity.EVEN), (WaveType.N, Parity.ODD)):
        assert np.all(np.isfinite(sol[key]))


def test_determinant_vanishes_at_guided_root():
    sys = WireSystem(0.05, -75.0)
    root = mode_roots(sys, 0)[0].kz
    assert abs(mode_determinant(sys, 0, root)) < 1e-8
    assert abs(mode_determinant(sys, 0, 1.05 * root)) > 1e-3
    with pytest.raises(SingularSystemError) as info:
        solve_coeffs(sys, 0, root)
    assert info.value.condition > 1e12


def test_invalid_systems():
    with pytest.raises(DomainError):
        WireSystem(0.0)
    with pytest.raises(DomainError):
        WireSystem(0.01, -75 - 1j)
    with pytest.raises(DomainError):
        WireSystem(0.01, wavelength=-1)
