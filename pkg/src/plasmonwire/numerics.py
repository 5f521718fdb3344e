"""Small numerical kernels: batched adaptive Gauss-Kronrod and golden section."""

import math

import numpy as np

from .errors import ConvergenceError

# 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1]
_XK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
W_KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
W_GAUSS = np.zeros(15)
W_GAUSS[1:14:2] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(f, a, b):
    """Kronrod estimates and |K - G| on each interval ``[a_i, b_i]``."""
    c, h = (a + b) / 2, (b - a) / 2
    x = c[:, None] + h[:, None] * NODES
    fx = f(x.ravel())
    fx = fx.reshape(x.shape + fx.shape[1:])
    extra = (slice(None), slice(None)) + (None,) * (fx.ndim - 2)
    hw = h[:, None]
    kron = np.sum(fx * (hw * W_KRONROD)[extra], axis=1)
    gauss = np.sum(fx * (hw * W_GAUSS)[extra], axis=1)
    return kron, np.abs(kron - gauss)


def default_norm(v):
    return float(np.max(np.abs(v))) if np.size(v) else 0.0


def adaptive_quad(f, points, *, rtol=1e-6, atol=0.0, norm=default_norm,
                  max_intervals=20000, batch=256):
    """Integrate a vectorized ``f`` over ``[points[0], points[-1]]``.

    ``f`` maps a 1-D array of abscissae to an array of shape ``(M, ...)``.
    Every interval carries a G7/K15 pair; the intervals holding the bulk of
    the estimated error are bisected in batches until
    ``sum(err_i) <= max(atol, rtol * norm(integral))``. ``norm`` reduces a
    value array (shape ``...``) to a scalar and is applied both to the
    integral and to the per-interval error estimates.

    Returns ``(integral, error, info)``.
    """
    pts = np.unique(np.asarray(points, dtype=float))
    if len(pts) < 2:
        raise ValueError("need at least two distinct points")
    a, b = pts[:-1], pts[1:]
    vals, errs = _gk15(f, a, b)
    evals = 15 * len(a)
    rounds = 0
    while True:
        e = np.array([norm(err) for err in errs])
        total = np.sum(vals, axis=0)
        err_total = float(np.sum(e))
        tol = max(atol, rtol * norm(total))
        if err_total <= tol:
            break
        if len(a) >= max_intervals:
            raise ConvergenceError(
                "adaptive quadrature hit the interval limit",
                {"intervals": len(a), "error": err_total, "tolerance": tol, "evaluations": evals},
            )
        # bisect the largest contributors until half the excess error is covered
        order = np.argsort(-e)
        cover = np.cumsum(e[order])
        take = int(np.searchsorted(cover, 0.5 * (err_total - tol))) + 1
        pick = order[: min(take, batch, max_intervals - len(a))]
        width_ok = (b[pick] - a[pick]) > 1e-13 * np.maximum(np.abs(a[pick]), np.abs(b[pick]))
        pick = pick[width_ok]
        if not len(pick):
            raise ConvergenceError(
                "adaptive quadrature cannot subdivide further",
                {"intervals": len(a), "error": err_total, "tolerance": tol},
            )
        mid = (a[pick] + b[pick]) / 2
        na = np.concatenate([a[pick], mid])
        nb = np.concatenate([mid, b[pick]])
        nv, ne = _gk15(f, na, nb)
        evals += 15 * len(na)
        keep = np.ones(len(a), dtype=bool)
        keep[pick] = False
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
        # restore ordering so the final reduction is deterministic
        idx = np.argsort(a, kind="stable")
        a, b, vals, errs = a[idx], b[idx], vals[idx], errs[idx]
        rounds += 1
    info = {"intervals": len(a), "evaluations": evals, "rounds": rounds, "tolerance": tol}
    return total, err_total, info


INV_PHI = (math.sqrt(5) - 1) / 2


def golden_max(f, lo, hi, *, rtol=1e-3, max_iter=200):
    """Maximize a unimodal scalar function on ``[lo, hi]`` by golden section.

    Returns ``(x, f(x))``; stops once the bracket is below ``rtol * |x|``.
    """
    a, b = float(lo), float(hi)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= rtol * max(abs(a), abs(b)) / 2:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)
