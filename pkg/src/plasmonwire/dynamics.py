"""Open-system dynamics of two emitters with collective decay.

Two-level pairs use the product basis ``|gg>, |ge>, |eg>, |ee>``; lambda
pairs use single-atom levels ``g, s, e`` (indices 0, 1, 2) and the product
basis ``|ab> -> 3 a + b``.  Rates and Rabi frequencies share one unit
(``Gamma_0`` when they come from :mod:`plasmonwire.emitters`).

The cross-decay dissipator
``sum_kl Gamma_kl (s_k rho s_l^+ - {s_l^+ s_k, rho}/2)`` is diagonal in the
collective channels ``s_S = (s_1 + s_2)/sqrt 2`` (rate ``Gamma_11 + Gamma_12``)
and ``s_AS = (s_1 - s_2)/sqrt 2`` (rate ``Gamma_11 - Gamma_12``).
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConvergenceError, DomainError, PreconditionError
from .numerics import golden_max


@dataclass(frozen=True)
class RateMatrix2:
    gamma11: float
    gamma12: float

    def __post_init__(self):
        if not self.gamma11 > 0:
            raise DomainError("gamma11 must be positive")
        if abs(self.gamma12) > self.gamma11 * (1 + 1e-12):
            raise PreconditionError("|gamma12| > gamma11: rate matrix not positive")

    @property
    def gamma_s(self):
        return self.gamma11 + self.gamma12

    @property
    def gamma_as(self):
        return self.gamma11 - self.gamma12

    @classmethod
    def from_collective(cls, gamma_s, gamma_as):
        return cls((gamma_s + gamma_as) / 2, (gamma_s - gamma_as) / 2)


def _decay_gap(a, b, t):
    """``(exp(-a t) - exp(-b t)) / (b - a)``, stable as ``b -> a``."""
    diff = b - a
    if abs(diff * t) < 1e-8:
        return t * np.exp(-a * t) * (1 - diff * t / 2)
    return np.exp(-a * t) * (-np.expm1(-diff * t)) / diff


def pair_populations(rm, initial, t):
    """Populations ``(ee, S, AS, gg)`` of a two-level pair at time ``t``.

    ``initial`` holds the starting populations in the same order.  The
    doubly excited state feeds ``|S>`` and ``|AS>`` at their own rates, which
    in turn decay to ``|gg>``.
    """
    p_ee, p_s, p_as, p_gg = (float(x) for x in initial)
    gs, gas = rm.gamma_s, rm.gamma_as
    g2 = 2 * rm.gamma11
    ee = p_ee * np.exp(-g2 * t)
    s = p_s * np.exp(-gs * t) + gs * p_ee * _decay_gap(gs, g2, t)
    as_ = p_as * np.exp(-gas * t) + gas * p_ee * _decay_gap(gas, g2, t)
    gg = p_ee + p_s + p_as + p_gg - ee - s - as_
    return np.array([ee, s, as_, gg])


def pair_population_rhs(rm):
    """Right-hand side of the population equations (for cross-checks)."""
    gs, gas = rm.gamma_s, rm.gamma_as

    def rhs(_t, p):
        ee, s, as_, _ = p
        return [-(gs + gas) * ee, gs * ee - gs * s, gas * ee - gas * as_, gs * s + gas * as_]

    return rhs


def _check_state(rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DomainError("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
        raise DomainError("density matrix must be Hermitian")
    if abs(np.trace(rho) - 1) > 1e-9:
        raise DomainError("density matrix must have unit trace")
    return rho


def lindblad_rhs(hamiltonian, jumps):
    """Vectorized ``d rho/dt`` for ``H`` and jump channels ``[(L, rate), ...]``."""
    h = np.asarray(hamiltonian, dtype=complex)
    dim = h.shape[0]
    ops = []
    for op, rate in jumps:
        if rate < 0:
            raise PreconditionError("negative jump rate: unphysical rate matrix")
        if rate > 0:
            op = np.asarray(op, dtype=complex)
            ops.append((op, op.conj().T @ op, rate))
    # effective non-Hermitian generator: -i H - sum rate L^+L / 2
    gen = -1j * h - 0.5 * sum((rate * ld for _, ld, rate in ops), np.zeros_like(h))

    def rhs(_t, y):
        rho = y.reshape(dim, dim)
        out = gen @ rho
        out = out + out.conj().T
        for op, _, rate in ops:
            out += rate * (op @ rho @ op.conj().T)
        return out.ravel()

    return rhs


def lindblad_kl_rhs(hamiltonian, lowering, gamma):
    """``d rho/dt`` with the full cross-decay matrix ``gamma[k, l]``."""
    h = np.asarray(hamiltonian, dtype=complex)
    dim = h.shape[0]
    gamma = np.asarray(gamma, dtype=float)
    lowering = [np.asarray(s, dtype=complex) for s in lowering]

    def rhs(_t, y):
        rho = y.reshape(dim, dim)
        out = -1j * (h @ rho - rho @ h)
        for k, sk in enumerate(lowering):
            for l, sl in enumerate(lowering):
                if gamma[k, l] == 0:
                    continue
                sld = sl.conj().T
                out += gamma[k, l] * (sk @ rho @ sld - 0.5 * (sld @ sk @ rho + rho @ sld @ sk))
        return out.ravel()

    return rhs


def evolve(rhs, rho0, t, *, rtol=1e-10, atol=1e-12, t_eval=None):
    """Integrate a vectorized master equation from 0 to ``t`` (DOP853)."""
    rho0 = _check_state(rho0)
    dim = rho0.shape[0]
    sol = solve_ivp(rhs, (0.0, float(t)), rho0.ravel(), method="DOP853",
                    rtol=rtol, atol=atol, t_eval=t_eval)
    if not sol.success:
        raise ConvergenceError(f"master equation integration failed: {sol.message}",
                               {"nfev": sol.nfev})
    states = sol.y.T.reshape(-1, dim, dim)
    return states if t_eval is not None else states[-1]


def lindblad_evolve(hamiltonian, jumps, rho0, t, *, rtol=1e-10, atol=1e-12, t_eval=None):
    """Evolve ``rho0`` for time ``t`` under ``H`` and independent jump channels."""
    return evolve(lindblad_rhs(hamiltonian, jumps), rho0, t, rtol=rtol, atol=atol, t_eval=t_eval)


def _embed(op, atom, levels):
    eye = np.eye(levels)
    return np.kron(op, eye) if atom == 0 else np.kron(eye, op)


def pair_lowering(levels=2, ground=0, excited=None):
    """Lowering operators ``|g><e|`` of atoms 1 and 2 on the pair space."""
    excited = levels - 1 if excited is None else excited
    single = np.zeros((levels, levels))
    single[ground, excited] = 1.0
    return _embed(single, 0, levels), _embed(single, 1, levels)


def collective_jumps(rm, sigma1, sigma2):
    return [((sigma1 + sigma2) / np.sqrt(2), rm.gamma_s),
            ((sigma1 - sigma2) / np.sqrt(2), rm.gamma_as)]


# --- lambda-atom phase gate -------------------------------------------------

G, S, E = 0, 1, 2


def _ket(a, b):
    v = np.zeros(9, dtype=complex)
    v[3 * a + b] = 1.0
    return v


PLUS = (np.eye(3)[S] + np.eye(3)[G]) / np.sqrt(2)
RHO_PLUS = np.outer(np.kron(PLUS, PLUS), np.kron(PLUS, PLUS).conj())
PSI_IDEAL = (_ket(S, S) + _ket(S, G) + _ket(G, S) - _ket(G, G)) / 2


@dataclass(frozen=True)
class GateParams:
    omega1: float
    omega2: float
    rates: RateMatrix2

    def __post_init__(self):
        if self.omega1 < 0 or self.omega2 < 0:
            raise DomainError("Rabi frequencies must be non-negative")

    @property
    def omega_s(self):
        return (self.omega1 + self.omega2) / np.sqrt(2)

    @property
    def omega_as(self):
        return (self.omega1 - self.omega2) / np.sqrt(2)


def gate_hamiltonian(omega1, omega2):
    drive = np.zeros((3, 3))
    drive[E, G] = drive[G, E] = 0.5
    return omega1 * _embed(drive, 0, 3) + omega2 * _embed(drive, 1, 3)


def gate_simulate(gp, rho0=None, duration=None, rtol=1e-10, atol=1e-12):
    """Drive both lambda atoms on ``g-e`` for one ``2 pi`` pulse of ``|gg>-|S>``.

    Returns ``{"rho": final state, "fidelity": <psi_ideal|rho|psi_ideal>}``.
    """
    rho0 = RHO_PLUS if rho0 is None else rho0
    if gp.omega_s <= 0:
        raise DomainError("symmetric drive must be nonzero")
    t = 2 * np.pi / gp.omega_s if duration is None else duration
    s1, s2 = pair_lowering(3, G, E)
    jumps = collective_jumps(gp.rates, s1, s2)
    rho = lindblad_evolve(gate_hamiltonian(gp.omega1, gp.omega2), jumps, rho0, t,
                          rtol=rtol, atol=atol)
    fid = float(np.real(PSI_IDEAL.conj() @ rho @ PSI_IDEAL))
    return {"rho": rho, "fidelity": fid, "duration": t}


def _fidelity_at(omega1, rates):
    return gate_simulate(GateParams(omega1, omega1, rates))["fidelity"]


def gate_optimize(gamma_s, gamma_as, rtol=1e-3):
    """Best gate fidelity over ``Omega_1 = Omega_2`` in ``[Gamma_S, Gamma_AS]``.

    Golden section in ``log Omega_1``; when a coarse 7-point scan shows the
    objective is not unimodal, a 30-point log scan picks the bracket instead.
    """
    lo, hi = sorted((gamma_s, gamma_as))
    if not lo > 0:
        raise PreconditionError("collective rates must be positive")
    rates = RateMatrix2.from_collective(gamma_s, gamma_as)

    def f(u):
        return _fidelity_at(np.exp(u), rates)

    u_lo, u_hi = np.log(lo), np.log(hi)
    scan_u = np.linspace(u_lo, u_hi, 7)
    scan = np.array([f(u) for u in scan_u])
    rises = np.diff(scan) > 0
    unimodal = not np.any(np.diff(rises.astype(int)) > 0)
    if not unimodal:
        scan_u = np.linspace(u_lo, u_hi, 30)
        scan = np.array([f(u) for u in scan_u])
    best = int(np.argmax(scan))
    a = scan_u[max(best - 1, 0)]
    b = scan_u[min(best + 1, len(scan_u) - 1)]
    # golden section in log space; rtol on Omega is an absolute log tolerance
    width = max(abs(a), abs(b), 1.0)
    u_opt, f_opt = golden_max(f, a, b, rtol=rtol / width)
    if scan[best] > f_opt:
        u_opt, f_opt = scan_u[best], scan[best]
    return {"omega_opt": float(np.exp(u_opt)), "f_opt": float(f_opt), "unimodal": unimodal}


def scaling_study(ratios, gamma_eg=1.0):
    """Optimized infidelity for ``Gamma_S / Gamma_eg`` in ``ratios``.

    ``Gamma_AS = 2 Gamma_eg - Gamma_S`` keeps ``Gamma_S + Gamma_AS = 2 Gamma_eg``.
    """
    out = []
    for r in ratios:
        gs = r * gamma_eg
        res = gate_optimize(gs, 2 * gamma_eg - gs)
        out.append(1 - res["f_opt"])
    return np.array(out)


def nanowire_gate_fidelity(sys, r_a, d, q=None):
    """Optimized gate fidelity for two radial emitters at ``r_a``, separated by ``d``."""
    from .dispersion import is_single_mode
    from .emitters import cross_sweep, radial_emitter

    if not is_single_mode(sys):
        raise PreconditionError("wire must be single-mode")
    g = cross_sweep(sys, radial_emitter(r_a), [0.0, d], q)
    rates = RateMatrix2(float(g[0]), float(g[1]))
    res = gate_optimize(rates.gamma_s, rates.gamma_as)
    res.update(gamma11=rates.gamma11, gamma12=rates.gamma12,
               gamma_s=rates.gamma_s, gamma_as=rates.gamma_as)
    return res
