"""Guided plasmon modes of the wire and their lossy resonance lineshape."""

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import specfun
from .cylwave import radial_wavenumber
from .errors import PreconditionError, ResolutionError

SEARCH_LIMIT = 100.0  # roots are searched for kz in (k0, SEARCH_LIMIT * k0)


@dataclass(frozen=True)
class ModeRoot:
    n: int
    kz: float
    radius: float
    k0: float

    @property
    def kz_k0(self):
        return self.kz / self.k0

    @property
    def wavelength(self):
        """Plasmon wavelength ``2 pi / kz``."""
        return 2 * np.pi / self.kz


@dataclass(frozen=True)
class ResonanceFit:
    k_peak: float
    hwhm: float
    lorentzian_rms: float
    amplitude: float


def _log_derivatives(sys, n, kz):
    kz = np.asarray(kz, dtype=complex)
    kr0 = radial_wavenumber(sys.k0, kz)
    kr1 = radial_wavenumber(sys.k1, kz)
    j, dj, _ = specfun.scaled_orders("J", n, kr1 * sys.radius)
    h, dh, _ = specfun.scaled_orders("H", n, kr0 * sys.radius)
    return kr0, kr1, dj[..., n] / j[..., n], dh[..., n] / h[..., n]


def mode_equation(sys, n, kz, with_scale=False):
    """Left minus right side of the guided-mode condition (complex).

    With ``with_scale`` also returns the magnitude of the cancelling terms,
    the natural reference for rounding in the residual.
    """
    kz = np.asarray(kz, dtype=complex)
    kr0, kr1, jr, hr = _log_derivatives(sys, n, kz)
    r = sys.radius
    lhs = n**2 * kz**2 / r**2 * (1 / kr1**2 - 1 / kr0**2) ** 2
    rhs = (jr / kr1 - hr / kr0) * (sys.k1**2 / kr1 * jr - sys.k0**2 / kr0 * hr)
    if with_scale:
        a, b = np.abs(jr / kr1), np.abs(hr / kr0)
        scale = np.abs(lhs) + (a + b) * (abs(sys.k1) ** 2 * a + sys.k0**2 * b)
        return lhs - rhs, scale
    return lhs - rhs


def _require_lossless(sys):
    if not sys.lossless or sys.eps.real >= 0:
        raise PreconditionError("mode equation roots need a real, negative permittivity")


def mode_equation_residual(sys, n, kz):
    """Real-valued mode-equation residual on the evanescent branch ``kz > k0``."""
    _require_lossless(sys)
    kz = np.asarray(kz, dtype=float)
    if np.any(kz <= sys.k0):
        raise PreconditionError("residual is real only for kz > k0")
    res, scale = mode_equation(sys, n, kz, with_scale=True)
    assert np.all(np.abs(res.imag) <= 1e-12 * scale + 1e-300), "residual not real"
    return res.real[()] if res.ndim == 0 else res.real


def mode_roots(sys, n, kz_max=None, samples=3000):
    """All guided roots of order ``n`` with ``k0 < kz < kz_max``.

    Sign changes on a grid dense near ``k0`` are refined with Brent's method.
    An empty list means the order is cut off at this radius.
    """
    _require_lossless(sys)
    k0 = sys.k0
    kz_max = SEARCH_LIMIT * k0 if kz_max is None else kz_max
    u = np.geomspace(1e-10, kz_max / k0 - 1, samples)
    grid = k0 * (1 + u)
    res = mode_equation_residual(sys, n, grid)
    sign = np.sign(res)
    roots = []
    for i in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        kz = optimize.brentq(
            lambda k: mode_equation_residual(sys, n, k), grid[i], grid[i + 1],
            xtol=1e-14 * grid[i], rtol=1e-14, maxiter=200,
        )
        if not roots or kz - roots[-1].kz > 1e-9 * k0:
            roots.append(ModeRoot(n, kz, sys.radius, k0))
    return roots


def is_single_mode(sys, orders=(1, 2)):
    """True when every ``n >= 1`` order is cut off (checked for ``orders``)."""
    lossless = sys.with_eps(complex(sys.eps.real, 0))
    return all(not mode_roots(lossless, n) for n in orders)


def plasmon_pole_estimate(sys, n=0):
    """(k_pl, hwhm) of the order-``n`` plasmon, or None if no guided root.

    ``k_pl`` is the lossless root at ``Re eps``; the width is the first-order
    shift ``Im eps * |d k_pl / d Re eps|``.
    """
    eps_r = sys.eps.real
    roots = mode_roots(sys.with_eps(eps_r), n)
    if not roots:
        return None
    k_pl = roots[0].kz
    if sys.eps.imag == 0:
        return k_pl, 0.0
    step = 1e-3 * abs(eps_r)
    hi = mode_roots(sys.with_eps(eps_r + step), n)
    lo = mode_roots(sys.with_eps(eps_r - step), n)
    if not hi or not lo:
        return k_pl, 0.0
    slope = (hi[0].kz - lo[0].kz) / (2 * step)
    return k_pl, abs(slope) * sys.eps.imag


def resonance_profile(sys, r_a, kz=None, points=801, span=25.0):
    """Sampled ``Im[r_hat . G^(n=0)(r_A, r_A; kz) . r_hat]`` (direct + reflected).

    With ``kz=None`` the grid is centred on the lossless root with half-width
    ``span`` estimated widths.  Returns ``(kz, values)``.
    """
    from .greentensor import order_kernel
    from .cylwave import CylPoint

    if kz is None:
        est = plasmon_pole_estimate(sys)
        if est is None:
            raise PreconditionError("no n = 0 guided mode")
        k_pl, width = est
        width = max(width, 1e-6 * k_pl)
        lo = max(k_pl - span * width, sys.k0 * (1 + 1e-9))
        kz = np.linspace(lo, k_pl + span * width, points)
    kz = np.asarray(kz, dtype=float)
    p = CylPoint(r_a)
    kern = order_kernel(sys, kz, 0, p, p, parts=("direct", "reflected"))
    return kz, kern[:, 0, 0, 0].imag


def _lorentzian(k, amp, k0, gamma):
    return amp * gamma**2 / ((k - k0) ** 2 + gamma**2)


def resonance_hwhm(kz, values, min_samples=20):
    """Peak position and half width at half maximum of a sampled resonance.

    The width comes from linearly interpolated half-maximum crossings; a
    least-squares Lorentzian over +-3 widths is reported as a diagnostic.
    """
    kz = np.asarray(kz, dtype=float)
    values = np.asarray(values, dtype=float)
    i = int(np.argmax(values))
    peak = values[i]
    half = peak / 2
    if np.count_nonzero(values > half) < min_samples:
        raise ResolutionError("peak not resolved: too few samples above half maximum")
    # parabolic refinement of the maximum
    if 0 < i < len(kz) - 1:
        y0, y1, y2 = values[i - 1 : i + 2]
        denom = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        k_peak = kz[i] + shift * (kz[i + 1] - kz[i - 1]) / 2
        peak = y1 - 0.25 * (y0 - y2) * shift
        half = peak / 2
    else:
        raise ResolutionError("peak sits on the edge of the sampled range")

    left = np.nonzero(values[:i] < half)[0]
    right = np.nonzero(values[i:] < half)[0]
    if not len(left) or not len(right):
        raise ResolutionError("half-maximum crossing outside the sampled range")
    a = left[-1]
    k_left = np.interp(half, values[a : a + 2], kz[a : a + 2])
    b = i + right[0]
    k_right = np.interp(half, values[b - 1 : b + 1][::-1], kz[b - 1 : b + 1][::-1])
    hwhm = (k_right - k_left) / 2

    window = np.abs(kz - k_peak) <= 3 * hwhm
    try:
        popt, _ = optimize.curve_fit(
            _lorentzian, kz[window], values[window], p0=(peak, k_peak, hwhm)
        )
        model = _lorentzian(kz[window], *popt)
        rms = np.sqrt(np.mean((values[window] - model) ** 2)) / peak
    except RuntimeError:
        rms = np.inf
    return ResonanceFit(k_peak=k_peak, hwhm=hwhm, lorentzian_rms=float(rms), amplitude=peak)
