"""Quick invariant checks across all layers, runnable without pytest."""

import numpy as np

from . import dynamics, specfun
from .cylwave import CylPoint
from .dispersion import mode_equation_residual, mode_roots
from .emitters import gamma_total, radial_emitter
from .greentensor import green_direct_im, green_reflected, kz_integral
from .scatter import WireSystem, boundary_matrix, mode_determinant, solve_coeffs


def _wronskian():
    z = np.array([0.3 + 0.1j, 2.0 - 1.5j, 7.5 + 20j])
    n = np.arange(0, 20)[:, None]
    lhs = (specfun.bessel_j(n + 1, z) * specfun.hankel1(n, z)
           - specfun.bessel_j(n, z) * specfun.hankel1(n + 1, z)) / 1j
    err = np.max(np.abs(lhs / (2 / (np.pi * z)) - 1))
    return err < 1e-10, f"max rel err {err:.2e}"


def _boundary_residual():
    sys = WireSystem(0.05)
    worst = 0.0
    for n in (0, 1, 3):
        for kz in (0.3 * sys.k0, 2.5 * sys.k0):
            c = solve_coeffs(sys, n, kz)
            m, src = boundary_matrix(sys, n, kz)
            x = c.boundary_vector()
            # backward error: residual relative to the size of the terms
            scale = np.abs(m) @ np.abs(x) + np.abs(src)
            res = np.max(np.abs(m @ x - src) / np.where(scale > 0, scale, 1.0))
            worst = max(worst, res)
    return worst < 1e-10, f"max residual {worst:.2e}"


def _determinant_root():
    sys = WireSystem(0.05, -75)
    root = mode_roots(sys, 0)[0].kz
    det = abs(mode_determinant(sys, 0, root))
    res = abs(mode_equation_residual(sys, 0, root))
    return det < 1e-8, f"|det| at root {det:.2e}, residual {res:.2e}"


def _reciprocity():
    sys = WireSystem(0.01)
    a, b = CylPoint(0.02, 0.3, 0.1), CylPoint(0.03, 1.2, 0.25)
    g1 = green_reflected(sys, a, b).matrix
    g2 = green_reflected(sys, b, a).matrix
    err = np.max(np.abs(g1 - g2.T)) / np.max(np.abs(g1))
    return err < 1e-8, f"rel asymmetry {err:.2e}"


def _passivity():
    sys = WireSystem(0.01)
    p = CylPoint(0.015, 0.7, 0.0)
    g = green_reflected(sys, p, p).matrix.imag + green_direct_im(p, p, sys.k0)
    ev = np.linalg.eigvalsh((g + g.T) / 2)
    return ev.min() >= -1e-10 * np.trace(g), f"min eigenvalue {ev.min():.3e}"


def _vacuum_limit():
    sys = WireSystem(0.01, 1.0)
    p = CylPoint(0.02)
    v, _, _ = kz_integral(sys, p, p, dipoles=([1, 0, 0], [1, 0, 0]), imag_only=True)
    rate = 1 + v / (sys.k0 / (6 * np.pi))
    return abs(rate - 1) < 1e-6, f"vacuum rate {rate:.10f}"


def _far_emitter():
    rate = gamma_total(WireSystem(0.01), radial_emitter(1.0))
    return abs(rate - 1) < 0.1, f"rate at 1 wavelength {rate:.6f}"


def _pair_dynamics():
    rm = dynamics.RateMatrix2(1.0, -0.6)
    s1, s2 = dynamics.pair_lowering(2)
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[3, 3] = 1.0
    rho = dynamics.lindblad_evolve(np.zeros((4, 4)), dynamics.collective_jumps(rm, s1, s2), rho0, 0.8)
    sym = np.array([0, 1, 1, 0]) / np.sqrt(2)
    anti = np.array([0, 1, -1, 0]) / np.sqrt(2)
    got = np.real([rho[3, 3], sym @ rho @ sym, anti @ rho @ anti, rho[0, 0]])
    want = dynamics.pair_populations(rm, [1, 0, 0, 0], 0.8)
    err = np.max(np.abs(got - want))
    trace = abs(np.trace(rho) - 1)
    return err < 1e-7 and trace < 1e-9, f"max deviation {err:.2e}, trace drift {trace:.1e}"


CHECKS = {
    "wronskian": _wronskian,
    "boundary-residual": _boundary_residual,
    "determinant-root": _determinant_root,
    "reciprocity": _reciprocity,
    "passivity": _passivity,
    "vacuum-limit": _vacuum_limit,
    "far-emitter": _far_emitter,
    "pair-dynamics": _pair_dynamics,
}


def run_all():
    """List of ``(name, passed, detail)``; exceptions count as failures."""
    out = []
    for name, check in CHECKS.items():
        try:
            ok, detail = check()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out

