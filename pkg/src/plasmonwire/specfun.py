"""Integer-order cylinder functions of complex argument.

Thin, validated layer over the AMOS routines in :mod:`scipy.special`.
All functions broadcast over ``n`` and ``z``.

Besides the plain functions, exponentially scaled variants are exposed for
the field kernels, where evanescent arguments (``k_r`` nearly imaginary)
make the unscaled values overflow long before the physical products do:

* ``bessel_j_scaled(n, z) = J_n(z) * exp(-|Im z|)``
* ``hankel1_scaled(n, z) = H_n^(1)(z) * exp(-i z)``
"""

import numpy as np
from scipy import special

from .errors import DomainError, RangeError

MAX_ORDER = 64
MAX_ABS_ARG = 1.0e4


def _check(n, z, *, origin_ok):
    n = np.asarray(n)
    z = np.asarray(z, dtype=complex)
    if not np.issubdtype(n.dtype, np.integer):
        if not np.all(np.equal(np.mod(n, 1), 0)):
            raise DomainError("order must be an integer")
        n = n.astype(int)
    if np.any(n < 0):
        raise DomainError("negative order; apply J_{-n} = (-1)^n J_n at the call site")
    if np.any(n > MAX_ORDER):
        raise RangeError(f"order exceeds supported maximum {MAX_ORDER}")
    if np.any(~np.isfinite(z)):
        raise DomainError("non-finite argument")
    if np.any(np.abs(z) > MAX_ABS_ARG):
        raise RangeError(f"|z| exceeds supported maximum {MAX_ABS_ARG:g}")
    if not origin_ok and np.any(z == 0):
        raise DomainError("Hankel function is singular at z = 0")
    return n, z


def _finite(value, name):
    if not np.all(np.isfinite(value)):
        raise RangeError(f"{name} overflowed")
    return value[()] if isinstance(value, np.ndarray) and value.ndim == 0 else value


def bessel_j(n, z):
    """Bessel function of the first kind ``J_n(z)``."""
    n, z = _check(n, z, origin_ok=True)
    return _finite(special.jv(n, z), "J_n")


def hankel1(n, z):
    """Hankel function of the first kind ``H_n^(1)(z) = J_n(z) + i Y_n(z)``."""
    n, z = _check(n, z, origin_ok=False)
    return _finite(special.hankel1(n, z), "H_n^(1)")


def _prime(fn, n, z):
    # Z_n' = (Z_{n-1} - Z_{n+1}) / 2, Z_0' = -Z_1
    n = np.asarray(n)
    lower = fn(np.abs(n - 1), z)
    lower = np.where(n == 0, -fn(1, z), lower)
    return (lower - fn(n + 1, z)) / 2


def bessel_j_prime(n, z):
    """Derivative ``J_n'(z)``."""
    _check(n, z, origin_ok=True)
    return _finite(_prime(special.jv, n, np.asarray(z, dtype=complex)), "J_n'")


def hankel1_prime(n, z):
    """Derivative ``H_n^(1)'(z)``."""
    _check(n, z, origin_ok=False)
    return _finite(_prime(special.hankel1, n, np.asarray(z, dtype=complex)), "H_n'")


def bessel_j_scaled(n, z):
    """``J_n(z) exp(-|Im z|)``."""
    n, z = _check(n, z, origin_ok=True)
    return _finite(special.jve(n, z), "scaled J_n")


def hankel1_scaled(n, z):
    """``H_n^(1)(z) exp(-i z)``."""
    n, z = _check(n, z, origin_ok=False)
    return _finite(special.hankel1e(n, z), "scaled H_n^(1)")


def scaled_orders(kind, n_max, z, *, overflow="raise"):
    """Scaled radial function and derivative for orders ``0..n_max``.

    Parameters
    ----------
    kind : {"J", "H"}
        Regular (``J_n``) or outgoing (``H_n^(1)``) radial function.
    n_max : int
        Highest order returned.
    z : array_like
        Arguments, any shape ``S``.

    Returns
    -------
    value, derivative, n_over_z : ndarray, shape ``S + (n_max + 1,)``
        ``Z_n``, ``Z_n'`` and ``n Z_n / z`` (the latter from the three-term
        recurrence, so it stays finite at ``z = 0`` for ``J``). All three
        carry the same scale factor (``exp(-|Im z|)`` for ``J`` and
        ``exp(-i z)`` for ``H``), so ratios between them are exact.

    With ``overflow="mask"`` non-finite entries (high-order Hankel values
    at tiny arguments) are zeroed instead of raising, and a boolean array
    marking the affected (argument, order) pairs is returned as a fourth
    value.
    """
    z = np.asarray(z, dtype=complex)
    orders = np.arange(n_max + 2)
    if kind == "J":
        _check(orders[:-1], z, origin_ok=True)
        table = special.jve(orders, z[..., None])
    elif kind == "H":
        _check(orders[:-1], z, origin_ok=False)
        table = special.hankel1e(orders, z[..., None])
    else:
        raise ValueError(f"unknown radial kind {kind!r}")
    bad = ~np.isfinite(table)
    if overflow == "raise" and np.any(bad):
        raise RangeError(f"scaled {kind}_n table overflowed")
    if np.any(bad):
        table = np.where(bad, 0.0, table)
    # an entry is unusable if it or a neighbouring order overflowed
    bad_n = bad[..., :-1] | bad[..., 1:]
    bad_n[..., 1:] |= bad[..., :-2]
    value = table[..., :-1]
    deriv = np.empty_like(value)
    deriv[..., 0] = -table[..., 1]
    deriv[..., 1:] = (table[..., :-2] - table[..., 2:]) / 2
    n_over_z = np.zeros_like(value)
    n_over_z[..., 1:] = (table[..., :-2] + table[..., 2:]) / 2
    if overflow == "mask":
        return value, deriv, n_over_z, bad_n
    return value, deriv, n_over_z


def scale_exponent(kind, z):
    """Log of the factor removed by the scaled variants: ``Z = Z_scaled * exp(e)``."""
    z = np.asarray(z, dtype=complex)
    if kind == "J":
        return np.abs(z.imag).astype(complex)
    if kind == "H":
        return 1j * z
    raise ValueError(f"unknown radial kind {kind!r}")
