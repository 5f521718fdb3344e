"""Even/odd cylindrical vector wave functions M and N.

With the scalar generator ``psi = Z_n(k_r r) {cos, sin}(n phi) exp(i k_z z)``::

    M = curl(psi z_hat),    N = curl(M) / k,    k_r**2 + k_z**2 = k**2

Expanding the curls gives the component table used throughout the package
(``Z = Z_n(k_r r)``, ``Z' = dZ_n/dx`` at ``x = k_r r``, ``nZ/x = n Z_n(x)/x``,
common factor ``exp(i k_z z)`` omitted)::

            r                          phi                          z
    M_e   -k_r nZ/x  sin(n phi)      -k_r Z'  cos(n phi)            0
    M_o   +k_r nZ/x  cos(n phi)      -k_r Z'  sin(n phi)            0
    N_e   i k_z k_r/k Z'  cos        -i k_z k_r/k nZ/x  sin         k_r^2/k Z  cos
    N_o   i k_z k_r/k Z'  sin        +i k_z k_r/k nZ/x  cos         k_r^2/k Z  sin

``n Z_n/x`` is evaluated as ``(Z_{n-1} + Z_{n+1})/2`` so the regular kind is
finite on the axis.  Components are returned in the local cylindrical frame
(r_hat, phi_hat, z_hat) at the evaluation point.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import specfun
from .errors import DomainError


class RadialKind(Enum):
    REGULAR = "J"
    OUTGOING = "H"


class Parity(Enum):
    EVEN = "e"
    ODD = "o"

    @property
    def other(self):
        return Parity.ODD if self is Parity.EVEN else Parity.EVEN


class WaveType(Enum):
    M = "M"
    N = "N"

    @property
    def other(self):
        return WaveType.N if self is WaveType.M else WaveType.M


@dataclass(frozen=True)
class WaveKind:
    radial_kind: RadialKind
    parity: Parity


def radial_wavenumber(k, kz):
    """``sqrt(k**2 - kz**2)`` on the branch with ``Im >= 0`` (``Re >= 0`` if real).

    Outgoing waves then decay radially in the evanescent region ``|kz| > k``.
    """
    kr = np.sqrt(np.asarray(k, dtype=complex) ** 2 - np.asarray(kz, dtype=complex) ** 2)
    flip = (kr.imag < 0) | ((kr.imag == 0) & (kr.real < 0))
    return np.where(flip, -kr, kr)


@dataclass(frozen=True)
class ModeParams:
    """One term of the cylindrical expansion."""

    n: int
    kz: complex
    k: complex
    kr: complex

    @classmethod
    def from_wavenumbers(cls, n, kz, k):
        return cls(int(n), complex(kz), complex(k), complex(radial_wavenumber(k, kz)))


@dataclass(frozen=True)
class CylPoint:
    r: float
    phi: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        if self.r < 0:
            raise DomainError("radial coordinate must be non-negative")

    def cartesian(self):
        return np.array([self.r * np.cos(self.phi), self.r * np.sin(self.phi), self.z])

    def frame(self):
        """Columns are r_hat, phi_hat, z_hat in Cartesian coordinates."""
        return rotation(self.phi)


def rotation(phi):
    """Cylindrical-to-Cartesian rotation; broadcasts over ``phi``."""
    c, s = np.cos(phi), np.sin(phi)
    zero, one = np.zeros_like(c), np.ones_like(c)
    return np.stack(
        [np.stack([c, -s, zero], -1), np.stack([s, c, zero], -1), np.stack([zero, zero, one], -1)],
        -2,
    )


def components(wave, parity, n, kz, k, kr, z_val, z_der, n_over_x, phi):
    """Cylindrical components of M or N from precomputed radial values.

    All array arguments broadcast; the result has a trailing axis of length 3
    (r, phi, z).  The axial phase ``exp(i kz z)`` is not included.
    """
    cos_n, sin_n = np.cos(n * phi), np.sin(n * phi)
    even = parity is Parity.EVEN
    if wave is WaveType.M:
        v_r = kr * n_over_x * (-sin_n if even else cos_n)
        v_phi = -kr * z_der * (cos_n if even else sin_n)
        v_z = np.zeros_like(v_r)
    else:
        t = 1j * kz * kr / k
        v_r = t * z_der * (cos_n if even else sin_n)
        v_phi = t * n_over_x * (-sin_n if even else cos_n)
        v_z = kr**2 / k * z_val * (cos_n if even else sin_n)
    return np.stack(np.broadcast_arrays(v_r, v_phi, v_z), axis=-1)


def _radial_values(kind, n, x):
    if kind is RadialKind.OUTGOING:
        if x == 0:
            raise DomainError("outgoing wave functions are singular on the axis")
        fn = specfun.hankel1
        z_der = specfun.hankel1_prime(n, x)
    else:
        fn = specfun.bessel_j
        z_der = specfun.bessel_j_prime(n, x)
    z_val = fn(n, x)
    n_over_x = 0.0 if n == 0 else (fn(n - 1, x) + fn(n + 1, x)) / 2
    return z_val, z_der, n_over_x


def _evaluate(wave, kind, mp, p):
    z_val, z_der, n_over_x = _radial_values(kind.radial_kind, mp.n, mp.kr * p.r)
    vec = components(wave, kind.parity, mp.n, mp.kz, mp.k, mp.kr, z_val, z_der, n_over_x, p.phi)
    return vec * np.exp(1j * mp.kz * p.z)


def eval_m(kind, mp, p):
    """``M_{e/o,n}(k_z, r)`` in the local cylindrical frame."""
    return _evaluate(WaveType.M, kind, mp, p)


def eval_n(kind, mp, p):
    """``N_{e/o,n}(k_z, r) = curl(M)/k`` in the local cylindrical frame."""
    return _evaluate(WaveType.N, kind, mp, p)
