"""Command-line front end: every subcommand writes one CSV table.

Lengths are in reference wavelengths, rates in units of the vacuum rate.
The CSV starts with ``# key=value`` lines recording the effective
configuration, then a header row; numbers carry 12 significant digits.
Exit codes: 0 success, 1 selftest failure, 2 configuration error,
3 convergence failure.
"""

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import dynamics, emitters
from .dispersion import mode_roots, resonance_hwhm, resonance_profile
from .errors import ConvergenceError, PlasmonWireError, SingularSystemError
from .greentensor import QuadratureSpec
from .scatter import WireSystem

WORKERS_ENV = "PLASMONWIRE_WORKERS"


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _fmt(v):
    if v is None or (isinstance(v, float) and np.isnan(v)):
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def write_csv(stream, config, header, rows):
    for key in sorted(config):
        stream.write(f"# {key}={_fmt(config[key]) if not isinstance(config[key], list) else ','.join(_fmt(x) for x in config[key])}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def _workers():
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be >= 1")
    return n


def _map(fn, items):
    """Ordered map, fanned out to worker processes when requested."""
    items = list(items)
    n = _workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _grid(lo, hi, points, log=False):
    if points < 1:
        raise ConfigError("points must be >= 1")
    if points == 1:
        return np.array([lo])
    if log:
        if lo <= 0:
            raise ConfigError("log grid needs positive bounds")
        return np.geomspace(lo, hi, points)
    return np.linspace(lo, hi, points)


def _wire_args(p, radius=0.01):
    p.add_argument("--R", type=float, default=radius, help="wire radius")
    p.add_argument("--eps-re", type=float, default=-75.0)
    p.add_argument("--eps-im", type=float, default=0.6)


def _quad_args(p):
    p.add_argument("--rtol", type=float, default=1e-6, help="quadrature tolerance")
    p.add_argument("--n-max", type=int, default=None, help="harmonic cutoff (default: automatic)")


def _wire(a):
    return WireSystem(a.R, complex(a.eps_re, a.eps_im))


def _quad(a):
    return QuadratureSpec(rtol=a.rtol, n_max=a.n_max)


# --- subcommands -----------------------------------------------------------

def _modes_row(args):
    radius, eps, orders = args
    sys = WireSystem(radius, eps)
    row = [radius]
    for n in orders:
        roots = mode_roots(sys, n)
        row.append(roots[0].kz_k0 if roots else None)
    return row


def cmd_modes(a):
    orders = [int(x) for x in _floats(a.orders)]
    radii = _grid(a.r_min, a.r_max, a.points, log=True)
    rows = _map(_modes_row, [(r, complex(a.eps_re, 0), orders) for r in radii])
    return ["R"] + [f"kz_k0_n{n}" for n in orders], rows


def _hwhm_row(args):
    radius, eps, gap = args
    sys = WireSystem(radius, eps)
    fit = resonance_hwhm(*resonance_profile(sys, radius + gap))
    return [radius, fit.k_peak / sys.k0, fit.hwhm / sys.k0, fit.lorentzian_rms]


def cmd_resonance(a):
    sys = _wire(a)
    if a.sweep:
        radii = _grid(a.r_min, a.r_max, a.points, log=True)
        rows = _map(_hwhm_row, [(r, sys.eps, a.gap) for r in radii])
        return ["R", "k_peak_k0", "hwhm_k0", "lorentzian_rms"], rows
    kz, vals = resonance_profile(sys, a.R + a.gap, points=a.points)
    return ["kz_k0", "im_rGr"], [[k / sys.k0, v] for k, v in zip(kz, vals)]


def _decay_row(args):
    sys, r, q = args
    return [r, emitters.gamma_total(sys, emitters.radial_emitter(r), q)]


def _spectrum_row(args):
    sys, r, w, q = args
    return [w, float(emitters.decay_spectrum(sys, emitters.radial_emitter(r), [w], q)[0])]


def cmd_decay(a):
    sys, q = _wire(a), _quad(a)
    if a.spectrum:
        omegas = _grid(a.w_min, a.w_max, a.points)
        rows = _map(_spectrum_row, [(sys, a.rA, w, q) for w in omegas])
        return ["omega_over_omegaA", "gamma_total"], rows
    gaps = _grid(a.gap_min, a.gap_max, a.points, log=True)
    return ["rA", "gamma_total"], _map(_decay_row, [(sys, a.R + g, q) for g in gaps])


def _fraction_row(args):
    sys, r, q = args
    rep = emitters.traveling_evanescent_split(sys, emitters.radial_emitter(r), q)
    return [r, rep.gamma_total, rep.gamma_plasmon, rep.gamma_plasmon / rep.gamma_total,
            rep.gamma_traveling, rep.gamma_evanescent]


def cmd_plasmon_fraction(a):
    sys, q = _wire(a), _quad(a)
    gaps = _grid(a.gap_min, a.gap_max, a.points, log=True)
    rows = _map(_fraction_row, [(sys, a.R + g, q) for g in gaps])
    return ["rA", "gamma_total", "gamma_plasmon", "fraction", "gamma_traveling",
            "gamma_evanescent"], rows


def cmd_cross(a):
    sys, q = _wire(a), _quad(a)
    e = emitters.radial_emitter(a.rA)
    d = _grid(a.d_min, a.d_max, a.points)
    g = emitters.cross_sweep(sys, e, np.concatenate([[0.0], d]), q)
    return ["d", "gamma12", "gamma12_over_gamma11"], [[x, y, y / g[0]] for x, y in zip(d, g[1:])]


def cmd_optimum(a):
    sys, q = _wire(a), _quad(a)
    res = emitters.optimize_emitter_distance(
        sys, a.objective, (a.R + a.gap_min, a.R + a.gap_max), d=a.d, q=q)
    return ["objective", "r_opt", "value", "interior"], [[a.objective, res["r_opt"], res["value"], res["interior"]]]


def _gate_row(args):
    sys, r, d, q = args
    res = dynamics.nanowire_gate_fidelity(sys, r, d, q)
    return [r, res["gamma11"], res["gamma12"], res["omega_opt"], res["f_opt"]]


def _ratio_row(args):
    eps_im, a = args
    sys = WireSystem(a.R, complex(a.eps_re, eps_im))
    e = emitters.radial_emitter(a.rA)
    half = 0.3
    d = np.linspace(max(a.d - half, 0.05), a.d + half, 241)
    g = emitters.cross_sweep(sys, e, np.concatenate([[0.0], d]))
    d_min = float(d[np.argmin(g[0] + g[1:])])
    dec = emitters.gamma_sym_decomposition(sys, e, e.moved(z=d_min))
    return [eps_im, d_min, eps_im * d_min, dec["gamma_s_wire"], dec["gamma_s_free"],
            dec["gamma_s_wire"] / dec["gamma_s_free"]]


def cmd_gate(a):
    if a.mode == "scaling":
        ratios = _grid(a.ratio_min, a.ratio_max, a.points, log=True)
        rows = []
        for r in ratios:
            res = dynamics.gate_optimize(r, 2 - r)
            rows.append([r, 1 - res["f_opt"], res["omega_opt"]])
        return ["gamma_s_over_gamma_eg", "infidelity", "omega_opt"], rows
    if a.mode == "nanowire":
        sys, q = _wire(a), _quad(a)
        gaps = _grid(a.gap_min, a.gap_max, a.points, log=True)
        rows = _map(_gate_row, [(sys, a.R + g, a.d, q) for g in gaps])
        return ["rA", "gamma11", "gamma12", "omega_opt", "f_opt"], rows
    rows = _map(_ratio_row, [(e, a) for e in _floats(a.eps_im_list)])
    return ["eps_im", "d_subradiant", "eps_im_times_d", "gamma_s_wire", "gamma_s_free", "ratio"], rows


def cmd_selftest(a):
    from .selftest import run_all

    results = run_all()
    return ["check", "passed", "detail"], [list(r) for r in results]


def build_parser():
    p = _Parser(prog="plasmonwire", description=__doc__.splitlines()[0])
    p.add_argument("--out", help="write CSV here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("modes", help="guided-mode roots versus radius")
    s.add_argument("--eps-re", type=float, default=-75.0)
    s.add_argument("--r-min", type=float, default=0.005)
    s.add_argument("--r-max", type=float, default=0.5)
    s.add_argument("--points", type=int, default=40)
    s.add_argument("--orders", default="0,1,2")
    s.set_defaults(func=cmd_modes)

    s = sub.add_parser("resonance", help="n = 0 resonance profile or HWHM sweep")
    _wire_args(s, 0.02)
    s.add_argument("--gap", type=float, default=0.005, help="probe distance from the surface")
    s.add_argument("--points", type=int, default=801)
    s.add_argument("--sweep", action="store_true", help="tabulate HWHM versus radius")
    s.add_argument("--r-min", type=float, default=0.005)
    s.add_argument("--r-max", type=float, default=0.3)
    s.set_defaults(func=cmd_resonance)

    s = sub.add_parser("decay", help="total decay rate versus distance or frequency")
    _wire_args(s)
    _quad_args(s)
    s.add_argument("--gap-min", type=float, default=0.002)
    s.add_argument("--gap-max", type=float, default=1.0)
    s.add_argument("--points", type=int, default=20)
    s.add_argument("--spectrum", action="store_true")
    s.add_argument("--rA", type=float, default=0.015)
    s.add_argument("--w-min", type=float, default=0.3)
    s.add_argument("--w-max", type=float, default=2.5)
    s.set_defaults(func=cmd_decay)

    s = sub.add_parser("plasmon-fraction", help="plasmon share of the decay rate")
    _wire_args(s)
    _quad_args(s)
    s.add_argument("--gap-min", type=float, default=0.002)
    s.add_argument("--gap-max", type=float, default=0.1)
    s.add_argument("--points", type=int, default=20)
    s.set_defaults(func=cmd_plasmon_fraction)

    s = sub.add_parser("cross", help="cross rate versus axial separation")
    _wire_args(s)
    _quad_args(s)
    s.add_argument("--rA", type=float, default=0.015)
    s.add_argument("--d-min", type=float, default=0.5)
    s.add_argument("--d-max", type=float, default=5.0)
    s.add_argument("--points", type=int, default=451)
    s.set_defaults(func=cmd_cross)

    s = sub.add_parser("optimum", help="optimal emitter distance")
    _wire_args(s)
    _quad_args(s)
    s.add_argument("--objective", choices=["plasmon_fraction", "cross_contrast"], default="plasmon_fraction")
    s.add_argument("--d", type=float, default=None, help="separation for cross_contrast")
    s.add_argument("--gap-min", type=float, default=0.002)
    s.add_argument("--gap-max", type=float, default=0.1)
    s.set_defaults(func=cmd_optimum)

    s = sub.add_parser("gate", help="phase-gate fidelity studies")
    _wire_args(s, 0.003)
    _quad_args(s)
    s.add_argument("--mode", choices=["scaling", "nanowire", "ratio"], default="scaling")
    s.add_argument("--ratio-min", type=float, default=1e-4)
    s.add_argument("--ratio-max", type=float, default=1e-1)
    s.add_argument("--points", type=int, default=7)
    s.add_argument("--d", type=float, default=0.08)
    s.add_argument("--rA", type=float, default=0.015)
    s.add_argument("--gap-min", type=float, default=0.002)
    s.add_argument("--gap-max", type=float, default=0.04)
    s.add_argument("--eps-im-list", default="0.025,0.05,0.1,0.2,0.4")
    s.set_defaults(func=cmd_gate)

    s = sub.add_parser("selftest", help="run the invariant checks")
    s.set_defaults(func=cmd_selftest)
    return p


def _config(a):
    return {k: v for k, v in vars(a).items() if k not in ("func", "out")}


def run(argv=None, stdout=None, stderr=None):
    """Entry point; returns the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        a = build_parser().parse_args(argv)
        _workers()
        header, rows = a.func(a)
    except (ConfigError, ValueError, PlasmonWireError) as exc:
        if isinstance(exc, (ConvergenceError, SingularSystemError)):
            diag = getattr(exc, "diagnostics", {}) or {"condition": getattr(exc, "condition", None)}
            stderr.write(f"error: convergence: {exc} {json.dumps(diag, default=str, sort_keys=True)}\n")
            return 3
        stderr.write(f"error: config: {exc}\n")
        return 2
    buf = io.StringIO()
    write_csv(buf, _config(a), header, rows)
    if a.out:
        with open(a.out, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    else:
        stdout.write(buf.getvalue())
    if a.command == "selftest" and not all(r[1] for r in rows):
        return 1
    return 0


def main():
    sys.exit(run())
