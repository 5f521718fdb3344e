"""Decay rates of dipole emitters next to the wire, in units of the vacuum rate.

Every rate is ``Im[d1 . G(r1, r2) . d2] / (k0 / 6 pi)``.  The vacuum part uses
the closed-form ``Im G0`` (whose spectral weight sits entirely in the
traveling region ``|kz| <= k0``); the scattered part is a ``kz`` integral.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .cylwave import CylPoint
from .dispersion import is_single_mode
from .errors import DomainError, PreconditionError
from .dispersion import plasmon_pole_estimate
from .greentensor import (
    MIN_GAP,
    QuadratureSpec,
    green_direct_im,
    kz_integral,
    order_kernel,
    plasmon_residue,
)
from .numerics import adaptive_quad, golden_max


@dataclass(frozen=True)
class Emitter:
    """Point dipole at ``position``; ``dipole=None`` means radial."""

    position: CylPoint
    dipole: tuple | None = None

    def __post_init__(self):
        if self.dipole is None:
            d = self.position.frame()[:, 0]
        else:
            d = np.asarray(self.dipole, dtype=float)
            if d.shape != (3,) or not np.all(np.isfinite(d)):
                raise DomainError("dipole must be a finite real 3-vector")
            norm = np.linalg.norm(d)
            if norm == 0:
                raise DomainError("dipole must be nonzero")
            d = d / norm
        object.__setattr__(self, "dipole", tuple(float(x) for x in d))

    @property
    def vector(self):
        return np.array(self.dipole)

    def moved(self, r=None, z=None, phi=None):
        p = self.position
        pos = CylPoint(p.r if r is None else r, p.phi if phi is None else phi, p.z if z is None else z)
        return Emitter(pos, None if self._radial() else self.dipole)

    def _radial(self):
        return np.allclose(self.vector, self.position.frame()[:, 0])


def radial_emitter(r, z=0.0, phi=0.0):
    return Emitter(CylPoint(r, phi, z))


@dataclass(frozen=True)
class RateReport:
    gamma_total: float
    gamma_plasmon: float
    gamma_traveling: float
    gamma_evanescent: float
    errors: dict = field(default_factory=dict)


def _gamma0(sys):
    return sys.k0 / (6 * np.pi)


def _check_emitter(sys, e):
    if e.position.r <= sys.radius:
        raise PreconditionError("emitter must lie outside the wire")
    if e.position.r - sys.radius < MIN_GAP:
        raise DomainError(f"emitter closer than {MIN_GAP} wavelengths to the surface")


def _scattered(sys, e1, e2, q, region, dz=None):
    """Reflected contribution to the normalized rate and its error."""
    value, err, _ = kz_integral(
        sys, e1.position, e2.position, q, parts=("reflected",), region=region,
        dipoles=(e1.vector, e2.vector), dz=dz, imag_only=True,
    )
    g0 = _gamma0(sys)
    return value / g0, err / g0


def _direct(sys, e1, e2):
    return float(e1.vector @ green_direct_im(e1.position, e2.position, sys.k0) @ e2.vector) / _gamma0(sys)


def gamma_total(sys, e, q=None):
    """Total decay rate ``Gamma_tot / Gamma_0`` (lossy wire)."""
    _check_emitter(sys, e)
    refl, _ = _scattered(sys, e, e, q, "all")
    return 1.0 + refl


def decay_spectrum(sys, e, omega, q=None):
    """``Gamma_tot(omega) / Gamma_0(omega)`` with ``omega`` in units of ``omega_A``.

    The permittivity is held fixed across the grid.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("frequencies must be positive")
    return np.array([
        gamma_total(replace(sys, wavelength=sys.wavelength / w), e, q) for w in omega
    ])


def markov_width(omega, spectrum, omega_a=1.0):
    """Width of the connected band around ``omega_a`` where the enhancement
    stays above half its value at ``omega_a``.

    Returns ``(width, lo, hi)``; an edge of the grid is returned when the
    band extends past it, so the width is then a lower bound.
    """
    omega = np.asarray(omega, dtype=float)
    spectrum = np.asarray(spectrum, dtype=float)
    ref = np.interp(omega_a, omega, spectrum)
    i = int(np.argmin(np.abs(omega - omega_a)))
    above = spectrum >= ref / 2
    lo = i
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = i
    while hi < len(omega) - 1 and above[hi + 1]:
        hi += 1

    def edge(j, k):
        return np.interp(ref / 2, sorted([spectrum[j], spectrum[k]]),
                         [omega[j], omega[k]] if spectrum[j] <= spectrum[k] else [omega[k], omega[j]])

    w_lo = omega[lo] if lo == 0 else edge(lo - 1, lo)
    w_hi = omega[hi] if hi == len(omega) - 1 else edge(hi, hi + 1)
    return w_hi - w_lo, w_lo, w_hi


def gamma_plasmon(sys, e, q=None, check_modes=True):
    """Decay rate into the n = 0 plasmon.

    Lossy wire: the n = 0 evanescent-region integral.  Lossless wire: the
    pole contribution ``pi Re(Res)`` at the guided root.
    """
    _check_emitter(sys, e)
    if check_modes and not is_single_mode(sys):
        raise PreconditionError("wire supports guided n >= 1 modes; single-mode formula invalid")
    if sys.lossless:
        return float(plasmon_residue(sys, e.position, e.position, (e.vector, e.vector))) / _gamma0(sys)
    q = replace(q or QuadratureSpec(), n_max=0)
    value, _ = _scattered(sys, e, e, q, "evanescent")
    return value


def plasmon_window_rate(sys, e, half_widths=10.0, q=None):
    """n = 0 rate integrated only over ``k_pl +- half_widths * hwhm`` (lossy wire).

    Compared with :func:`gamma_plasmon` this measures how much of the
    plasmon rate sits outside the Lorentzian core.
    """
    _check_emitter(sys, e)
    est = plasmon_pole_estimate(sys)
    if est is None or sys.lossless:
        raise PreconditionError("window rate needs a lossy wire with an n = 0 mode")
    k_pl, width = est
    lo = max(k_pl - half_widths * width, sys.k0 * (1 + 1e-9))
    pts = [lo, k_pl - width, k_pl, k_pl + width, k_pl + half_widths * width]
    d = e.vector
    p = e.position

    def f(kz):
        both = np.concatenate([kz, -kz])
        kern = order_kernel(sys, both, 0, p, p, axial_phase=False)[:, 0]
        vals = np.einsum("i,kij,j->k", d, kern, d).imag
        return vals[: len(kz)] + vals[len(kz):]

    rtol = (q or QuadratureSpec()).rtol
    value, _, _ = adaptive_quad(f, sorted(pts), rtol=rtol)
    return float(value) / _gamma0(sys)


def traveling_evanescent_split(sys, e, q=None):
    """Rates from ``|kz| <= k0`` and ``|kz| > k0`` plus the plasmon rate."""
    _check_emitter(sys, e)
    trav, err_t = _scattered(sys, e, e, q, "traveling")
    trav += 1.0
    if sys.lossless:
        evan, err_e = gamma_plasmon(sys, e, q), 0.0
        plasmon = evan
    else:
        evan, err_e = _scattered(sys, e, e, q, "evanescent")
        plasmon = gamma_plasmon(sys, e, q, check_modes=False)
    errors = {"traveling": err_t, "evanescent": err_e, "total": err_t + err_e}
    if not sys.lossless:
        # relative change of the plasmon rate if only the +-10 hwhm core counted
        errors["plasmon_window"] = 1 - plasmon_window_rate(sys, e, 10.0, q) / plasmon
    return RateReport(
        gamma_total=trav + evan, gamma_plasmon=plasmon,
        gamma_traveling=trav, gamma_evanescent=evan, errors=errors,
    )


def gamma_cross(sys, e1, e2, q=None):
    """Cross rate ``Gamma_12 / Gamma_0`` between two emitters (lossy wire)."""
    _check_emitter(sys, e1)
    _check_emitter(sys, e2)
    refl, _ = _scattered(sys, e1, e2, q, "all")
    return _direct(sys, e1, e2) + refl


def cross_sweep(sys, e1, d, q=None, region="all"):
    """``Gamma_12 / Gamma_0`` for a copy of ``e1`` shifted by each ``d`` along the axis.

    One quadrature pass serves the whole sweep.  On a lossless wire the
    evanescent part is the plasmon pole contribution.
    """
    _check_emitter(sys, e1)
    d = np.atleast_1d(np.asarray(d, dtype=float))
    e_far = [e1.moved(z=e1.position.z + x) for x in d]
    direct = np.array([_direct(sys, e1, e2) for e2 in e_far])
    if region == "evanescent":
        direct = np.zeros_like(direct)
    if sys.lossless:
        out = direct.copy()
        if region in ("all", "traveling"):
            out += _scattered(sys, e1, e1, q, "traveling", dz=-d)[0]
        if region in ("all", "evanescent"):
            out += plasmon_residue(sys, e1.position, e1.position, (e1.vector, e1.vector), dz=-d) / _gamma0(sys)
        return out
    refl, _ = _scattered(sys, e1, e1, q, region, dz=-d)
    if region == "evanescent":
        return refl
    return direct + refl


def gamma_self_lossless(sys, e, q=None):
    """``Gamma_11 / Gamma_0`` on a lossless wire: traveling part plus plasmon pole."""
    return float(cross_sweep(sys, e, [0.0], q)[0])


def gamma_sym_decomposition(sys, e1, e2, q=None):
    """Split ``Gamma_S = Gamma_11 + Gamma_12`` into free-space and wire parts.

    The free part is the traveling-region (``|kz| <= k0``) contribution and
    the wire part the evanescent-region one.  At a subradiant separation the
    ideal lossless plasmon contributions of the two terms cancel, so the
    wire part there measures plasmon loss.
    """
    for e in (e1, e2):
        _check_emitter(sys, e)
    if sys.lossless:
        raise PreconditionError("decomposition needs a lossy wire")
    free = wire = err = 0.0
    for partner in (e1, e2):
        t, et = _scattered(sys, e1, partner, q, "traveling")
        v, ev = _scattered(sys, e1, partner, q, "evanescent")
        free += _direct(sys, e1, partner) + t
        wire += v
        err += et + ev
    return {"gamma_s": free + wire, "gamma_s_free": free, "gamma_s_wire": wire, "error": err}


def plasmon_fraction(sys, r, q=None):
    e = radial_emitter(r)
    report = traveling_evanescent_split(sys, e, q)
    return report.gamma_plasmon / report.gamma_total


def optimize_emitter_distance(sys, objective="plasmon_fraction", bounds=None, d=None,
                              q=None, rtol=1e-3):
    """Maximize an objective over the emitter-axis distance ``r_A``.

    ``plasmon_fraction`` maximizes ``Gamma_pl / Gamma_tot``;
    ``cross_contrast`` maximizes ``|Gamma_12 / Gamma_11|`` at axial separation
    ``d``.  A 5-point scan checks that the bracket holds an interior maximum;
    otherwise the best scanned point is reported with ``interior=False``.
    """
    lo, hi = bounds if bounds is not None else (sys.radius + 0.002, sys.radius + 0.1)
    if lo <= sys.radius + MIN_GAP or hi <= lo:
        raise DomainError("bounds must be exterior to the wire and ordered")
    if objective == "plasmon_fraction":
        def f(r):
            return plasmon_fraction(sys, r, q)
    elif objective == "cross_contrast":
        if d is None:
            raise DomainError("cross_contrast needs the separation d")

        def f(r):
            e = radial_emitter(r)
            g = cross_sweep(sys, e, [0.0, d], q)
            return abs(g[1] / g[0])
    else:
        raise DomainError(f"unknown objective {objective!r}")

    # work in log(r - R): the interesting structure sits close to the surface
    def g(u):
        return f(sys.radius + np.exp(u))

    u_lo, u_hi = np.log(lo - sys.radius), np.log(hi - sys.radius)
    scan_u = np.linspace(u_lo, u_hi, 5)
    scan = np.array([g(u) for u in scan_u])
    best = int(np.argmax(scan))
    if best in (0, len(scan) - 1):
        return {"r_opt": sys.radius + np.exp(scan_u[best]), "value": float(scan[best]),
                "interior": False, "scan": scan}
    u_opt, value = golden_max(g, scan_u[best - 1], scan_u[best + 1],
                              rtol=rtol * 0.1)
    return {"r_opt": sys.radius + float(np.exp(u_opt)), "value": float(value),
            "interior": True, "scan": scan}
