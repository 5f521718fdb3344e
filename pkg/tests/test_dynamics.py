import numpy as np
import pytest
from scipy.integrate import solve_ivp

from plasmonwire import dynamics as dyn
from plasmonwire.errors import DomainError, PreconditionError


def projector(v):
    return np.outer(v, v.conj())


SYM = np.array([0, 1, 1, 0]) / np.sqrt(2)
ANTI = np.array([0, 1, -1, 0]) / np.sqrt(2)


@pytest.mark.parametrize("g11,g12", [(1.0, 0.3), (1.0, -0.95), (2.0, 2.0), (0.7, 0.0)])
def test_closed_form_populations_match_ode(g11, g12):
    rm = dyn.RateMatrix2(g11, g12)
    init = [0.6, 0.1, 0.2, 0.1]
    t = np.linspace(0, 4, 9)
    sol = solve_ivp(dyn.pair_population_rhs(rm), (0, 4), init, t_eval=t, rtol=1e-12, atol=1e-14)
    got = np.array([dyn.pair_populations(rm, init, x) for x in t]).T
    assert np.max(np.abs(got - sol.y)) < 1e-8


def test_single_atom_decay():
    lower = np.array([[0, 1], [0, 0]])
    rho0 = np.diag([0.0, 1.0]).astype(complex)
    rho = dyn.lindblad_evolve(np.zeros((2, 2)), [(lower, 0.8)], rho0, 1.5)
    assert rho[1, 1].real == pytest.approx(np.exp(-1.2), abs=1e-10)


def test_collective_channels_equal_cross_decay_form():
    rm = dyn.RateMatrix2(1.0, -0.7)
    s1, s2 = dyn.pair_lowering(2)
    h = 0.4 * (s1 + s1.T) + 0.9 * (s2 + s2.T)
    rho0 = projector(np.array([0.5, 0.5j, -0.5, 0.5]))
    gamma = np.array([[rm.gamma11, rm.gamma12], [rm.gamma12, rm.gamma11]])
    a = dyn.lindblad_evolve(h, dyn.collective_jumps(rm, s1, s2), rho0, 2.0)
    b = dyn.evolve(dyn.lindblad_kl_rhs(h, [s1, s2], gamma), rho0, 2.0)
    assert np.max(np.abs(a - b)) < 1e-8


def test_master_equation_matches_population_formula():
    rm = dyn.RateMatrix2(1.0, 0.6)
    s1, s2 = dyn.pair_lowering(2)
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[3, 3] = 1
    rho = dyn.lindblad_evolve(np.zeros((4, 4)), dyn.collective_jumps(rm, s1, s2), rho0, 0.9)
    got = np.real([rho[3, 3], SYM @ rho @ SYM, ANTI @ rho @ ANTI, rho[0, 0]])
    assert np.max(np.abs(got - dyn.pair_populations(rm, [1, 0, 0, 0], 0.9))) < 1e-8


def test_state_stays_physical():
    gp = dyn.GateParams(1.3, 0.8, dyn.RateMatrix2(0.5, 0.2))
    rho = dyn.gate_simulate(gp, duration=3.0)["rho"]
    assert abs(np.trace(rho) - 1) < 1e-9
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-10
    assert np.linalg.eigvalsh(rho).min() > -1e-9


def test_two_pi_pulse_flips_sign_of_driven_atom():
    quiet = dyn.RateMatrix2(1e-14, 0.0)
    gs, ss = dyn._ket(dyn.G, dyn.S), dyn._ket(dyn.S, dyn.S)
    rho0 = projector((gs + ss) / np.sqrt(2))
    rho = dyn.gate_simulate(dyn.GateParams(1.3, 0.0, quiet), rho0, duration=2 * np.pi / 1.3)["rho"]
    assert (gs.conj() @ rho @ ss) == pytest.approx(-0.5, abs=1e-8)


def test_fidelity_is_scale_free():
    a = dyn.gate_simulate(dyn.GateParams(2.0, 2.0, dyn.RateMatrix2(1.0, 0.9)))["fidelity"]
    b = dyn.gate_simulate(dyn.GateParams(6.0, 6.0, dyn.RateMatrix2(3.0, 2.7)))["fidelity"]
    assert a == pytest.approx(b, abs=1e-9)


def test_infidelity_grows_with_symmetric_rate():
    infid = dyn.scaling_study([1e-3, 1e-2, 1e-1, 0.5])
    assert np.all(np.diff(infid) > 0)
    assert infid[0] < 0.1


def test_optimizer_stays_in_window():
    res = dyn.gate_optimize(0.05, 1.95)
    assert 0.05 <= res["omega_opt"] <= 1.95
    scan = [dyn._fidelity_at(w, dyn.RateMatrix2.from_collective(0.05, 1.95))
            for w in np.geomspace(0.05, 1.95, 15)]
    assert res["f_opt"] >= max(scan) - 1e-6


def test_invalid_inputs():
    with pytest.raises(PreconditionError):
        dyn.RateMatrix2(1.0, 1.5)
    with pytest.raises(DomainError):
        dyn.RateMatrix2(0.0, 0.0)
    with pytest.raises(PreconditionError):
        dyn.lindblad_rhs(np.zeros((2, 2)), [(np.eye(2), -0.1)])
    with pytest.raises(DomainError):
        dyn.evolve(dyn.lindblad_rhs(np.zeros((2, 2)), []), np.array([[1, 1], [0, 0]]), 1.0)
    with pytest.raises(DomainError):
        dyn.GateParams(-1.0, 1.0, dyn.RateMatrix2(1.0, 0.0))


def test_optimum_strictly_inside_for_strong_contrast():
    res = dyn.gate_optimize(0.01, 1.99)
    assert 0.01 * 1.01 < res["omega_opt"] < 1.99 / 1.01


def test_superradiant_pair_is_worse():
    sub = dyn.gate_optimize(0.05, 1.95)["f_opt"]
    sup = dyn.gate_optimize(1.95, 0.05)["f_opt"]
    assert sup < sub
