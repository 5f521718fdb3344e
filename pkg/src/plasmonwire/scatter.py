"""Boundary-value problem at the wire surface.

Each term ``W_p(kz, r) = {M,N}_{e,o}`` of the regular expansion of the
direct field scatters independently.  For an incident regular wave of type
``W`` and parity ``p`` the fields are::

    outside:  W_p^J(k0) + a_R W_p^H(k0) + b_R Wbar_pbar^H(k0)
    inside:              a_T W_p^J(k1) + b_T Wbar_pbar^J(k1)

(``Wbar``/``pbar`` the other type/parity).  Continuity of the phi and z
components of the field and of its curl at ``r = R`` gives four equations
per incident term; every term in a given equation shares one angular
factor, so the angular dependence is divided out.  The even-parity solutions
are the eight amplitudes ``A..D`` of the Green tensor expansion::

    M_e incident -> (A_R, B_R, A_T, B_T),   N_e incident -> (C_R, D_R, C_T, D_T)

The odd-parity systems are solved the same way; they differ from the even
ones only by the sign of the cross-type (``B``, ``D``) amplitudes.

Internally the radial functions are exponentially scaled (see
:mod:`plasmonwire.specfun`) and the unknowns carry the compensating factor
``exp(e_inc - e_col)``; :func:`solve_scaled` returns both pieces.
"""

from dataclasses import dataclass, fields

import numpy as np

from . import specfun
from .cylwave import Parity, WaveType, radial_wavenumber
from .errors import DomainError, SingularSystemError

COND_LIMIT = 1e12


@dataclass(frozen=True)
class WireSystem:
    """Infinite cylinder of radius ``radius`` and permittivity ``eps`` in vacuum.

    Lengths are in units of the reference wavelength; ``wavelength`` sets the
    working vacuum wavelength in those units, so ``k0 = 2 pi / wavelength``.
    """

    radius: float
    eps: complex = complex(-75, 0.6)
    wavelength: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("wire radius must be positive")
        if complex(self.eps).imag < 0:
            raise DomainError("Im eps must be >= 0 (passive medium)")
        if not self.wavelength > 0:
            raise DomainError("wavelength must be positive")
        object.__setattr__(self, "eps", complex(self.eps))

    @property
    def k0(self):
        return 2 * np.pi / self.wavelength

    @property
    def k1(self):
        return np.sqrt(self.eps) * self.k0

    @property
    def lossless(self):
        return self.eps.imag == 0

    def with_eps(self, eps):
        return WireSystem(self.radius, eps, self.wavelength)


@dataclass(frozen=True)
class ScatterCoeffs:
    a_r: complex
    b_r: complex
    c_r: complex
    d_r: complex
    a_t: complex
    b_t: complex
    c_t: complex
    d_t: complex

    def as_array(self):
        return np.array([getattr(self, f.name) for f in fields(self)])

    def boundary_vector(self):
        """Amplitudes in the unknown order of :func:`boundary_matrix`."""
        return np.array([self.a_r, self.b_r, self.a_t, self.b_t,
                         self.c_r, self.d_r, self.c_t, self.d_t])


def tangential(wave, parity, kz, k, kr, z_val, z_der, n_over_x):
    """(E_phi, E_z, C_phi, C_z) of a wave function with its angular factor removed.

    ``C`` is the curl, ``curl M = k N`` and ``curl N = k M``.
    """
    sgn = -1.0 if parity is Parity.EVEN else 1.0
    zero = np.zeros(np.broadcast(kz, z_val).shape, dtype=complex)
    if wave is WaveType.M:
        cols = (-kr * z_der, zero, sgn * 1j * kz * kr * n_over_x, kr**2 * z_val)
    else:
        cols = (sgn * 1j * kz * kr / k * n_over_x, kr**2 / k * z_val, -k * kr * z_der, zero)
    return np.stack(np.broadcast_arrays(*cols), axis=-1)


def _radial_tables(sys, n_max, kz):
    kz = np.asarray(kz, dtype=complex)
    kr0 = radial_wavenumber(sys.k0, kz)
    kr1 = radial_wavenumber(sys.k1, kz)
    x0, x1 = kr0 * sys.radius, kr1 * sys.radius
    j0 = specfun.scaled_orders("J", n_max, x0)
    h0 = specfun.scaled_orders("H", n_max, x0, overflow="mask")
    j1 = specfun.scaled_orders("J", n_max, x1)
    return kr0, kr1, x0, x1, j0, h0[:3], j1, h0[3]


def _system(sys, n, kz, kr0, kr1, j0, h0, j1, wave, parity):
    """Scaled 4x4 matrix and right-hand side, shape (..., 4, 4) and (..., 4)."""
    k0, k1 = sys.k0, sys.k1
    kz, kr0, kr1 = kz[..., None], kr0[..., None], kr1[..., None]
    partner = (wave.other, parity.other)
    cols = [
        tangential(wave, parity, kz, k0, kr0, *h0),
        tangential(*partner, kz, k0, kr0, *h0),
        -tangential(wave, parity, kz, k1, kr1, *j1),
        -tangential(*partner, kz, k1, kr1, *j1),
    ]
    matrix = np.stack(cols, axis=-1)
    rhs = -tangential(wave, parity, kz, k0, kr0, *j0)
    return matrix, rhs


def _row_normalize(matrix, rhs=None):
    scale = np.max(np.abs(matrix), axis=-1, keepdims=True)
    scale = np.where(scale == 0, 1.0, scale)
    if rhs is None:
        return matrix / scale
    return matrix / scale, rhs / scale[..., 0]


def solve_scaled(sys, n_max, kz):
    """Solve all four incident systems for orders ``0..n_max`` on a ``kz`` array.

    Returns
    -------
    dict
        ``sol[(wave, parity)]`` has shape ``kz.shape + (n_max+1, 4)`` holding
        scaled amplitudes (refl-self, refl-partner, trans-self, trans-partner).
        ``sol["log_refl"]`` and ``sol["log_trans"]`` (shape ``kz.shape``) are
        the exponents restoring the reflected and transmitted amplitudes,
        ``sol["bad"]`` flags (kz, n) pairs lost to Hankel overflow, and
        the radial tables are passed through for reuse.
    """
    kz = np.asarray(kz, dtype=complex)
    kr0, kr1, x0, x1, j0, h0, j1, bad = _radial_tables(sys, n_max, kz)
    n = np.arange(n_max + 1)
    out = {}
    for wave in WaveType:
        for parity in Parity:
            matrix, rhs = _system(sys, n, kz, kr0, kr1, j0, h0, j1, wave, parity)
            # equilibrate columns, then rows: interior and exterior radial
            # functions can differ by hundreds of decades at high order
            col = np.max(np.abs(matrix), axis=-2, keepdims=True)
            dead = np.any(col[..., 0, :] == 0, axis=-1)
            matrix = matrix / np.where(col == 0, 1.0, col)
            matrix, rhs = _row_normalize(matrix, rhs)
            # masked entries: replace by identity so the solve stays finite
            skip = bad | dead
            eye = np.broadcast_to(np.eye(4), matrix.shape)
            matrix = np.where(skip[..., None, None], eye, matrix)
            rhs = np.where(skip[..., None], 0.0, rhs)
            x = np.linalg.solve(matrix, rhs[..., None])[..., 0]
            out[(wave, parity)] = np.where(skip[..., None], 0.0, x / np.where(col[..., 0, :] == 0, 1.0, col[..., 0, :]))
            bad_all = skip if wave is WaveType.M and parity is Parity.EVEN else bad_all | skip
    e_inc = specfun.scale_exponent("J", x0)
    out["log_refl"] = e_inc - specfun.scale_exponent("H", x0)
    out["log_trans"] = e_inc - specfun.scale_exponent("J", x1)
    out["bad"] = bad_all
    out["kr0"], out["kr1"] = kr0, kr1
    return out


def boundary_matrix(sys, n, kz):
    """Unscaled 8x8 boundary system and source vector for the even parity.

    Unknowns are ordered ``(A_R, B_R, A_T, B_T, C_R, D_R, C_T, D_T)``; rows are
    (E_phi, E_z, curlE_phi, curlE_z) continuity for the M_e-incident term
    followed by the same four for the N_e-incident term.  The two source
    columns are independent, so the matrix is block diagonal in this order;
    for ``n = 0`` each block further splits into TE and TM parts.
    """
    kz = complex(kz)
    kr0, kr1 = complex(radial_wavenumber(sys.k0, kz)), complex(radial_wavenumber(sys.k1, kz))
    x0, x1 = kr0 * sys.radius, kr1 * sys.radius

    def unscaled(kind, x):
        if kind == "J":
            z = specfun.bessel_j(n, x)
            dz = specfun.bessel_j_prime(n, x)
            nz = 0.0 if n == 0 else (specfun.bessel_j(n - 1, x) + specfun.bessel_j(n + 1, x)) / 2
        else:
            z = specfun.hankel1(n, x)
            dz = specfun.hankel1_prime(n, x)
            nz = 0.0 if n == 0 else (specfun.hankel1(n - 1, x) + specfun.hankel1(n + 1, x)) / 2
        return z, dz, nz

    j0, h0, j1 = unscaled("J", x0), unscaled("H", x0), unscaled("J", x1)
    matrix = np.zeros((8, 8), dtype=complex)
    source = np.zeros(8, dtype=complex)
    for block, wave in enumerate((WaveType.M, WaveType.N)):
        m, rhs = _system(
            sys, n, np.array(kz), np.array(kr0), np.array(kr1),
            [np.asarray(v) for v in j0], [np.asarray(v) for v in h0], [np.asarray(v) for v in j1],
            wave, Parity.EVEN,
        )
        sl = slice(4 * block, 4 * block + 4)
        matrix[sl, sl] = m
        source[sl] = rhs
    return matrix, source


def solve_coeffs(sys, n, kz, parity=Parity.EVEN):
    """Reflection/transmission amplitudes for one ``(n, kz)``.

    Raises
    ------
    SingularSystemError
        If the row-normalized boundary system has condition number above
        ``COND_LIMIT`` (a lossless plasmon pole on or next to ``kz``).
    """
    kz_arr = np.array([complex(kz)])
    kr0, kr1, x0, x1, j0, h0, j1, _ = _radial_tables(sys, n, kz_arr)
    amps = {}
    for wave in WaveType:
        matrix, rhs = _system(sys, np.arange(n + 1), kz_arr, kr0, kr1, j0, h0, j1, wave, parity)
        matrix, rhs = _row_normalize(matrix[0, n], rhs[0, n])
        cond = np.linalg.cond(matrix)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise SingularSystemError(
                f"boundary system singular at n={n}, kz={kz} (cond={cond:.3g})", condition=cond
            )
        amps[wave] = np.linalg.solve(matrix, rhs)
    e_inc = specfun.scale_exponent("J", x0[0])
    refl = np.exp(e_inc - specfun.scale_exponent("H", x0[0]))
    trans = np.exp(e_inc - specfun.scale_exponent("J", x1[0]))
    m, nn = amps[WaveType.M], amps[WaveType.N]
    return ScatterCoeffs(
        a_r=m[0] * refl, b_r=m[1] * refl, c_r=nn[0] * refl, d_r=nn[1] * refl,
        a_t=m[2] * trans, b_t=m[3] * trans, c_t=nn[2] * trans, d_t=nn[3] * trans,
    )


def mode_determinant(sys, n, kz):
    """Determinant of the source-free boundary system (M_e block).

    Radial functions are exponentially scaled and each row is divided by
    the modulus of its largest entry, so values are O(1) away from roots and
    the phase structure (hence sign changes of a fixed projection along real
    ``kz``) is preserved.  The full 8x8 determinant is the square of this one.
    """
    kz_arr = np.atleast_1d(np.asarray(kz, dtype=complex))
    kr0, kr1, x0, x1, j0, h0, j1, _ = _radial_tables(sys, n, kz_arr)
    matrix, _ = _system(sys, np.arange(n + 1), kz_arr, kr0, kr1, j0, h0, j1, WaveType.M, Parity.EVEN)
    det = np.linalg.det(_row_normalize(matrix[:, n]))
    return det[0] if np.ndim(kz) == 0 else det
