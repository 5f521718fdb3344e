"""Dyadic Green tensor of the wire: direct, reflected and transmitted parts.

The scattered parts are one-dimensional ``kz`` integrals of harmonic sums::

    G_R(r, r') = (i/8pi) int dkz sum_n (2 - delta_n0)/kr0^2
                 sum_p [ (a_R M_p^H + b_R N_pbar^H)(kz, r) (x) M_p^H(-kz, r')
                       + (c_R N_p^H + d_R M_pbar^H)(kz, r) (x) N_p^H(-kz, r') ]

(transmitted: the same with ``a_T..d_T`` and ``J_n(kr1 r)`` inside the wire).
:func:`order_kernel` evaluates the per-(kz, n) summand on whole arrays,
:func:`kz_integral` integrates it with the adaptive rule in
:mod:`plasmonwire.numerics`.  Both signs of ``kz`` are evaluated explicitly,
so the integral runs over ``[0, cutoff]`` without relying on parity of the
integrand.
"""

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy import special

from . import specfun
from .cylwave import CylPoint, Parity, WaveType, components, radial_wavenumber, rotation
from .dispersion import plasmon_pole_estimate
from .errors import ConvergenceError, DomainError, PreconditionError
from .numerics import adaptive_quad
from .scatter import solve_scaled

PARTS = ("direct", "reflected", "transmitted")
REGIONS = ("all", "traveling", "evanescent")
MIN_GAP = 1e-3  # closest approach to the surface, in reference wavelengths


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls for the ``kz`` quadrature and harmonic sum.

    ``cutoff=None`` integrates up to the largest of ``40 k0``,
    ``k_pl + 200 hwhm`` and ``30 / gap`` (``gap = r + r' - 2R``, the decay
    length of the evanescent reflected kernel).  ``n_max=None`` picks the
    order from ``(R/r)^(2n)`` convergence, capped at ``specfun.MAX_ORDER``.
    ``atol`` is in units of ``k0/6pi`` (the coincident ``Im G0``); the
    default ``1e-3 * rtol`` only matters when the integral itself vanishes.
    Scattered kernels are dropped for ``|kz/k0 - 1| < branch_window``: the
    n >= 1 boundary solve loses all digits as ``kr0 -> 0``, while the kernel
    there is at most log-singular, so the skipped piece is of order
    ``branch_window * log(1/branch_window)`` times the local kernel.
    """

    rtol: float = 1e-6
    atol: float | None = None
    cutoff: float | None = None
    n_max: int | None = None
    refine_peak: bool = True
    max_intervals: int = 20000
    branch_window: float = 1e-7

    def __post_init__(self):
        if not self.rtol > 0:
            raise DomainError("tolerance must be positive")
        if not 0 <= self.branch_window < 1e-3:
            raise DomainError("branch_window must lie in [0, 1e-3)")
        if self.n_max is not None and not 0 <= self.n_max <= specfun.MAX_ORDER:
            raise DomainError(f"n_max must lie in [0, {specfun.MAX_ORDER}]")

    def halved(self):
        atol = None if self.atol is None else self.atol / 2
        return replace(self, rtol=self.rtol / 2, atol=atol)


@dataclass(frozen=True)
class GreenSample:
    """Green tensor in the global Cartesian frame.

    At coincident points only ``Im`` of the direct part is finite, so
    ``matrix`` then holds ``1j * Im G`` for that part.
    """

    matrix: np.ndarray
    obs: CylPoint
    src: CylPoint
    wavelength: float
    error: float = 0.0
    info: dict = field(default_factory=dict, compare=False)


def _check_parts(parts):
    for p in parts:
        if p not in PARTS:
            raise ValueError(f"unknown Green tensor part {p!r}")


def _check_points(sys, obs, src, parts):
    if src.r <= sys.radius and ("reflected" in parts or "transmitted" in parts):
        raise PreconditionError("source must lie outside the wire")
    if "reflected" in parts and obs.r <= sys.radius:
        raise PreconditionError("reflected kernel needs an exterior observation point")
    if "transmitted" in parts and obs.r >= sys.radius:
        raise PreconditionError("transmitted kernel needs an interior observation point")
    if "direct" in parts and (obs.r < sys.radius) != (src.r < sys.radius) and sys.eps != 1:
        raise PreconditionError("direct term connects points in the same medium only")


def _wave(parity, wave, n, kz, k, kr, tab, phi, coeff=None):
    vec = components(wave, parity, n, kz, k, kr, *tab, phi)
    return vec if coeff is None else coeff[..., None] * vec


def _pair_sum(left, right):
    """sum over waves and parities of left[key] (x) right[key]."""
    acc = 0
    for key in left:
        acc = acc + left[key][..., :, None] * right[key][..., None, :]
    return acc


def order_kernel(sys, kz, n_max, obs, src, parts=("reflected",), axial_phase=True):
    """Per-order ``kz`` integrand, shape ``kz.shape + (n_max+1, 3, 3)``.

    Includes the ``(i/8pi)(2 - delta_n0)/kr0^2`` prefactor and, unless
    ``axial_phase`` is False, ``exp(i kz (z - z'))``.  Cartesian frame.
    Terms lost to Hankel overflow (high order at ``kz ~ k0``) are zero.
    Complex ``kz`` is accepted (the branch of ``kr0`` is analytic off the
    real interval ``[-k0, k0]``), which the residue evaluation relies on.
    """
    _check_parts(parts)
    _check_points(sys, obs, src, parts)
    kz = np.atleast_1d(np.asarray(kz))
    if not np.iscomplexobj(kz):
        kz = kz.astype(float)
    k0 = sys.k0
    n = np.arange(n_max + 1)
    kzc = kz.astype(complex)[:, None]
    kr0 = radial_wavenumber(k0, kz)
    krc = kr0[:, None]
    pre = (1j / (8 * np.pi)) * np.where(n == 0, 1.0, 2.0) / kr0[:, None] ** 2
    total = np.zeros(kz.shape + (n_max + 1, 3, 3), dtype=complex)
    keys = [(w, p) for p in Parity for w in WaveType]

    if "reflected" in parts or "transmitted" in parts:
        sol = solve_scaled(sys, n_max, kz)
        hs = specfun.scaled_orders("H", n_max, kr0 * src.r, overflow="mask")
        src_vec = {(w, p): _wave(p, w, n, -kzc, k0, krc, hs[:3], src.phi) for w, p in keys}

    if "reflected" in parts:
        ho = specfun.scaled_orders("H", n_max, kr0 * obs.r, overflow="mask")
        obs_vec = {}
        for w, p in keys:
            c = sol[(w, p)]
            obs_vec[(w, p)] = (
                _wave(p, w, n, kzc, k0, krc, ho[:3], obs.phi, c[..., 0])
                + _wave(p.other, w.other, n, kzc, k0, krc, ho[:3], obs.phi, c[..., 1])
            )
        expo = sol["log_refl"] + 1j * kr0 * (obs.r + src.r)
        bad = sol["bad"] | ho[3] | hs[3]
        total += _finish(_pair_sum(obs_vec, src_vec), pre, expo, bad, obs, src)

    if "transmitted" in parts:
        k1 = sys.k1
        kr1 = radial_wavenumber(k1, kz)
        jo = specfun.scaled_orders("J", n_max, kr1 * obs.r)
        kr1c = kr1[:, None]
        obs_vec = {}
        for w, p in keys:
            c = sol[(w, p)]
            obs_vec[(w, p)] = (
                _wave(p, w, n, kzc, k1, kr1c, jo, obs.phi, c[..., 2])
                + _wave(p.other, w.other, n, kzc, k1, kr1c, jo, obs.phi, c[..., 3])
            )
        expo = sol["log_trans"] + np.abs((kr1 * obs.r).imag) + 1j * kr0 * src.r
        bad = sol["bad"] | hs[3]
        total += _finish(_pair_sum(obs_vec, src_vec), pre, expo, bad, obs, src)

    if "direct" in parts:
        outer_obs = obs.r >= src.r
        r_out, r_in = (obs.r, src.r) if outer_obs else (src.r, obs.r)
        if r_out == 0:
            raise DomainError("direct expansion undefined with both points on the axis")
        h = specfun.scaled_orders("H", n_max, kr0 * r_out, overflow="mask")
        j = specfun.scaled_orders("J", n_max, kr0 * r_in)
        o_tab, s_tab = (h[:3], j) if outer_obs else (j, h[:3])
        obs_vec = {(w, p): _wave(p, w, n, kzc, k0, krc, o_tab, obs.phi) for w, p in keys}
        src_vec = {(w, p): _wave(p, w, n, -kzc, k0, krc, s_tab, src.phi) for w, p in keys}
        expo = 1j * kr0 * r_out + np.abs((kr0 * r_in).imag)
        total += _finish(_pair_sum(obs_vec, src_vec), pre, expo, h[3], obs, src)

    if axial_phase:
        total *= np.exp(1j * kz * (obs.z - src.z))[:, None, None, None]
    return total


def _finish(cyl, pre, expo, bad, obs, src):
    rot_o, rot_s = rotation(obs.phi), rotation(src.phi)
    cart = rot_o @ cyl @ rot_s.T
    scale = pre * np.exp(expo)[:, None]
    scale = np.where(bad, 0.0, scale)
    return cart * scale[..., None, None]


def green_integrand(sys, n, kz, obs, src, part="reflected"):
    """The order-``n`` summand at a single ``kz`` as a 3x3 Cartesian matrix."""
    return order_kernel(sys, np.array([kz]), n, obs, src, parts=(part,))[0, n]


def green_direct_im(obs, src, k0):
    """``Im G0(r, r')`` from the closed-form free-space dyadic.

    ``Im G0 = (k/4pi) [ (2 j0(x) - j2(x))/3 I + j2(x) u u ]`` with ``x = k|r - r'|``
    and ``u`` the unit separation; it reduces to ``(k/6pi) I`` at coincidence.
    """
    sep = obs.cartesian() - src.cartesian()
    dist = float(np.linalg.norm(sep))
    x = k0 * dist
    j0, j2 = special.spherical_jn(0, x), special.spherical_jn(2, x)
    u = sep / dist if dist > 0 else np.zeros(3)
    return k0 / (4 * np.pi) * ((2 * j0 - j2) / 3 * np.eye(3) + j2 * np.outer(u, u))


def auto_order(sys, obs, src, parts, rtol):
    """Harmonic cutoff from the geometric decay ``rho^(2n)`` of the scattered sum."""
    r_wire = sys.radius
    rhos = []
    if "reflected" in parts:
        rhos += [r_wire / obs.r, r_wire / src.r]
    if "transmitted" in parts:
        rhos += [obs.r / r_wire, r_wire / src.r]
    if "direct" in parts:
        lo, hi = sorted((obs.r, src.r))
        rhos.append(lo / hi if lo < hi else 0.0)
    rho = max(rhos)
    base = 8
    if rho <= 0:
        return base
    if rho >= 1:
        return specfun.MAX_ORDER
    need = np.log(1e-2 * rtol) / np.log(rho) if rho < 1 else np.inf
    # product of two geometric factors per order
    n = int(np.ceil(need / 2)) + 4 if "direct" not in parts or len(parts) > 1 else int(np.ceil(need)) + 4
    return int(min(max(n, base), specfun.MAX_ORDER))


@lru_cache(maxsize=256)
def _guided_peaks(sys, orders=3):
    peaks = []
    for n in range(orders):
        est = plasmon_pole_estimate(sys, n)
        if est is not None:
            peaks.append(est)
    return tuple(peaks)


def breakpoints(sys, region, cutoff, refine_peak=True):
    """Subdivision points: branch point ``k0``, guided peaks, a geometric tail."""
    k0 = sys.k0
    pts = []
    if region in ("all", "traveling"):
        pts += list(k0 * np.array([0.0, 0.5, 0.9, 0.99, 0.999, 1.0]))
    if region in ("all", "evanescent"):
        tail = k0 * np.geomspace(1.0, cutoff / k0, max(int(np.log(cutoff / k0) / np.log(1.5)), 2))
        pts += [k0, k0 * 1.001, k0 * 1.01, k0 * 1.1, cutoff] + list(tail)
        if refine_peak and sys.eps.real < 0:
            for k_pl, width in _guided_peaks(sys):
                width = max(width, 1e-9 * k_pl)
                for m in (0.0, 1, 3, 10, 30):
                    for s in (-1, 1):
                        kp = k_pl + s * m * width
                        if k0 < kp < cutoff:
                            pts.append(kp)
    return np.unique(np.array(pts))


def default_cutoff(sys, obs, src, parts):
    k0 = sys.k0
    cut = 40 * k0
    peaks = _guided_peaks(sys) if sys.eps.real < 0 else ()
    for k_pl, width in peaks:
        cut = max(cut, k_pl + 200 * width)
    if "reflected" in parts:
        cut = max(cut, 30 / (obs.r + src.r - 2 * sys.radius))
    if "transmitted" in parts:
        cut = max(cut, 30 / (src.r - obs.r))
    # keep all Bessel arguments in the supported range
    r_big = max(obs.r, src.r)
    return min(cut, 0.5 * specfun.MAX_ABS_ARG / max(r_big, 1e-12))


def kz_integral(sys, obs, src, q=None, *, parts=("reflected",), region="all",
                dipoles=None, dz=None, imag_only=False):
    """Integrate the harmonic summand over ``kz`` in a region.

    Parameters
    ----------
    dipoles : (d_obs, d_src) or None
        Contract the tensor to ``d_obs . G . d_src`` before integrating.
    dz : array or None
        Axial offsets ``z - z'`` to evaluate in one pass (replaces the points'
        own z separation); adds a leading result axis.
    imag_only : bool
        Integrate only the imaginary part (rates); error control then ignores
        the real part entirely.

    Returns ``(value, error, info)`` with ``value`` summed over orders.
    """
    q = q or QuadratureSpec()
    if region not in REGIONS:
        raise ValueError(f"unknown region {region!r}")
    _check_parts(parts)
    _check_points(sys, obs, src, parts)
    scattered = "reflected" in parts or "transmitted" in parts
    if scattered and sys.lossless and region != "traveling" and sys.eps != 1:
        raise PreconditionError(
            "lossless wire: the evanescent integral crosses a real pole; "
            "use the traveling region plus the plasmon residue"
        )
    for p in (obs, src):
        if scattered and p.r > sys.radius and p.r - sys.radius < MIN_GAP:
            raise DomainError(f"distance to the surface below {MIN_GAP} wavelengths")
    n_max = q.n_max if q.n_max is not None else auto_order(sys, obs, src, parts, q.rtol)
    cutoff = q.cutoff if q.cutoff is not None else default_cutoff(sys, obs, src, parts)
    if not cutoff > sys.k0:
        raise DomainError("cutoff must exceed k0")
    pts = breakpoints(sys, region, cutoff, q.refine_peak)
    k0 = sys.k0
    lo_w, hi_w = k0 * (1 - q.branch_window), k0 * (1 + q.branch_window)
    if q.branch_window > 0:
        pts = np.unique(np.concatenate([pts, [p for p in (lo_w, hi_w) if pts[0] < p < pts[-1]]]))

    d_obs = d_src = None
    if dipoles is not None:
        d_obs, d_src = (np.asarray(d, dtype=float) for d in dipoles)
    dz_arr = None if dz is None else np.asarray(dz, dtype=float)

    def reduce(kern, kz):
        if d_obs is not None:
            kern = np.einsum("i,knij,j->kn", d_obs, kern, d_src)
        if dz_arr is not None:
            # orders only matter through their sum; keep the last one apart
            # for the convergence check
            if kern.shape[1] > 1:
                kern = np.stack([kern[:, :-1].sum(axis=1), kern[:, -1]], axis=1)
            phase = np.exp(1j * np.multiply.outer(kz, dz_arr))
            phase = phase.reshape(phase.shape[:1] + (1,) + phase.shape[1:] + (1,) * (kern.ndim - 2))
            kern = kern[:, :, None] * phase
        return kern.imag if imag_only else kern

    windowed = tuple(p for p in parts if p != "direct")
    free = ("direct",) if "direct" in parts else ()

    def f(kz):
        both = np.concatenate([kz, -kz])
        vals = 0
        for group in (windowed, free):
            if not group:
                continue
            kern = order_kernel(sys, both, n_max, obs, src, group, axial_phase=dz_arr is None)
            part = reduce(kern, both)
            part = part[: len(kz)] + part[len(kz):]
            if group is windowed:
                part[(kz > lo_w) & (kz < hi_w)] = 0
            vals = vals + part
        return vals

    def norm(v):
        return float(np.max(np.abs(np.sum(v, axis=0)))) if v.size else 0.0

    atol = (1e-3 * q.rtol if q.atol is None else q.atol) * sys.k0 / (6 * np.pi)
    per_order, err, info = adaptive_quad(f, pts, rtol=q.rtol, atol=atol, norm=norm,
                                         max_intervals=q.max_intervals)
    value = np.sum(per_order, axis=0)
    last = float(np.max(np.abs(per_order[-1])))
    info.update(n_max=n_max, cutoff=cutoff, last_order=last)
    scale = norm(per_order)
    if n_max > 0 and last > max(q.rtol * scale, atol):
        raise ConvergenceError(
            f"harmonic sum not converged at n_max={n_max}",
            {"n_max": n_max, "last_order": last, "total": scale, **info},
        )
    return value, err, info


def green_reflected(sys, obs, src, q=None, region="all"):
    """Reflected Green tensor ``G_R(obs, src)`` by ``kz`` quadrature."""
    value, err, info = kz_integral(sys, obs, src, q, parts=("reflected",), region=region)
    return GreenSample(value, obs, src, sys.wavelength, err, info)


def green_transmitted(sys, obs, src, q=None, region="all"):
    """Transmitted Green tensor (observation point inside the wire)."""
    value, err, info = kz_integral(sys, obs, src, q, parts=("transmitted",), region=region)
    return GreenSample(value, obs, src, sys.wavelength, err, info)


def plasmon_residue(sys, obs, src, dipoles, dz=None, points=64):
    """Pole contribution of the lossless n = 0 plasmon to ``Im[d . G . d']``.

    Off the pole the lossless evanescent integrand is real, so an
    infinitesimal loss leaves only ``pi Re(Res)`` of the folded integrand at
    ``k_pl``.  The residue is the trapezoid rule on a circle around the pole.
    Returns an array over ``dz`` (or a scalar).
    """
    from .dispersion import mode_roots

    if not sys.lossless or sys.eps.real >= 0:
        raise PreconditionError("residue evaluation needs a lossless plasmonic wire")
    roots = mode_roots(sys, 0)
    if not roots:
        raise PreconditionError("no n = 0 guided mode")
    k_pl = roots[0].kz
    rad = 0.2 * (k_pl - sys.k0)
    theta = 2 * np.pi * np.arange(points) / points
    step = rad * np.exp(1j * theta)
    kz = k_pl + step
    d_obs, d_src = (np.asarray(d, dtype=float) for d in dipoles)
    shift = obs.z - src.z if dz is None else np.asarray(dz, dtype=float)
    total = 0
    for sign in (1, -1):
        kern = order_kernel(sys, sign * kz, 0, obs, src, axial_phase=False)[:, 0]
        f = np.einsum("i,kij,j->k", d_obs, kern, d_src)
        total = total + np.exp(1j * sign * np.multiply.outer(kz, shift)).T @ (f * step)
    res = total / points
    return np.pi * res.real
