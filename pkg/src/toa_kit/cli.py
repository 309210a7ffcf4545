"""Command-line front end: sweeps, CSV/JSON/SVG emission, verification suite.

Subcommands: density, whm, spread, delta, uncertainty, verify (plus the
hidden specfun-probe used for debugging single evaluations).  Flag values
take precedence over an optional key=value config file, which takes
precedence over built-in defaults.  Identical configuration yields
byte-identical CSV/JSON: floats are written with 17 significant digits and
assembly order is fixed regardless of the worker pool size.

Exit codes: 0 success, 1 check failure, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import _svg, analysis, eigenstates, quadrature, specfun
from .analysis import CONCAVITY_NOTE, DeltaVerdict
from .eigenstates import Eigenvalue, PhysicalParams
from .errors import ConfigError, ToaKitError
from .quadrature import IntervalSpec, Tolerance

SCHEMA_VERSION = "1"
_PUBLIC_COMMANDS = ("density", "whm", "spread", "delta", "uncertainty", "verify")


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError(f"grid needs at least one point, got {self.count}")
        if self.count > 1 and not self.stop > self.start:
            raise ConfigError(f"grid must be monotone: [{self.start}, {self.stop}]")

    def values(self):
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class RunConfig:
    params: PhysicalParams
    tau: Eigenvalue
    n: int
    q_grid: GridSpec | None = None
    t_grid: GridSpec | None = None
    gamma_values: tuple = ()
    tau_i_values: tuple = ()
    interval: IntervalSpec | None = None
    tolerance: Tolerance = Tolerance()
    output: str | None = None
    fmt: str = "csv"
    jobs: int = 1

    def __post_init__(self):
        if self.fmt not in ("csv", "json", "svg", "dat"):
            raise ConfigError(f"unsupported output format {self.fmt!r}")


@dataclass
class CheckReport:
    check_name: str
    inputs: dict
    expected: float
    observed: float
    tolerance: float
    passed: bool
    runtime_ms: float

    @classmethod
    def make(cls, name, inputs, expected, observed, tolerance, t0):
        expected = float(expected)
        observed = float(observed)
        tolerance = float(tolerance)
        return cls(
            check_name=name,
            inputs=inputs,
            expected=expected,
            observed=observed,
            tolerance=tolerance,
            passed=abs(expected - observed) <= tolerance,
            runtime_ms=(time.perf_counter() - t0) * 1e3,
        )

    def to_dict(self):
        return {
            "check_name": self.check_name,
            "inputs": self.inputs,
            "expected": self.expected,
            "observed": self.observed,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "runtime_ms": round(self.runtime_ms, 3),
        }


def _f17(v) -> str:
    return format(float(v), ".17g")


def _write_table(path: str | None, fmt: str, command: str, columns, rows, meta=None):
    """Rows of floats/strings to CSV, JSON or gnuplot-style .dat."""
    if fmt == "csv":
        text = _render_csv(columns, rows)
    elif fmt == "json":
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "columns": list(columns),
            "rows": [[_cell_json(c) for c in row] for row in rows],
        }
        if meta:
            payload["meta"] = meta
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    elif fmt == "dat":
        lines = ["# " + " ".join(columns)]
        prev = None
        for row in rows:
            if prev is not None and row[0] != prev:
                lines.append("")  # block break per leading-column group
            prev = row[0]
            lines.append(" ".join(_cell_text(c) for c in row))
        text = "\n".join(lines) + "\n"
    else:
        raise ConfigError(f"format {fmt!r} is not a table format")
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(text)


def _cell_text(c):
    return _f17(c) if isinstance(c, float) else str(c)


def _cell_json(c):
    return c if not isinstance(c, float) else float(_f17(c))


def _render_csv(columns, rows) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell_text(c) for c in row])
    return buf.getvalue()


def _pool_map(fn, items, jobs: int):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_density(cfg: RunConfig) -> int:
    qs = cfg.q_grid.values()
    ts = cfg.t_grid.values()

    def row_block(t):
        dens = np.abs(eigenstates.varphi_evolved(qs, float(t), cfg.tau, cfg.n, cfg.params)) ** 2
        return dens

    blocks = _pool_map(row_block, ts, cfg.jobs)
    if cfg.fmt == "svg":
        if cfg.output is None:
            raise ConfigError("svg output needs --output")
        _svg.heatmap(
            cfg.output, qs, ts, blocks,
            title=f"density, tau={cfg.tau.value}, parity={cfg.n}",
            xlabel="q", ylabel="t",
        )
        return 0
    rows = []
    for t, dens in zip(ts, blocks):
        for q, d in zip(qs, dens):
            rows.append([float(t), float(q), float(d)])
    _write_table(cfg.output, cfg.fmt, "density", ["t", "q", "density"], rows)
    return 0


def cmd_whm(cfg: RunConfig) -> int:
    ts = cfg.t_grid.values()
    tau_is = cfg.tau_i_values or (cfg.tau.tau_i,)
    curves = []
    for tau_i in tau_is:
        tau = Eigenvalue(cfg.tau.tau_r, tau_i)

        def one(t, tau=tau):
            return analysis.whm(tau, cfg.n, float(t), cfg.params)

        curves.append((tau_i, _pool_map(one, ts, cfg.jobs)))

    failures = 0
    step = (ts[-1] - ts[0]) / max(len(ts) - 1, 1) if len(ts) > 1 else 0.0
    rows = []
    for tau_i, results in curves:
        widths = [r.whm for r in results]
        t_min = float(ts[int(np.argmin(widths))])
        if abs(t_min - cfg.tau.tau_r) > step + 1e-12:
            failures += 1
        for t, r in zip(ts, results):
            rows.append([
                float(tau_i), float(t), r.whm, r.peak_value,
                ";".join(_f17(p) for p in r.peak_positions),
            ])
    if cfg.fmt == "svg":
        if cfg.output is None:
            raise ConfigError("svg output needs --output")
        series = [
            (f"tau_i={tau_i:g}", ts, [r.whm for r in results])
            for tau_i, results in curves
        ]
        _svg.line_plot(cfg.output, series, title=f"WHM, parity={cfg.n}", xlabel="t", ylabel="whm")
    else:
        _write_table(
            cfg.output, cfg.fmt, "whm",
            ["tau_i", "t", "whm", "peak_value", "peak_positions"], rows,
            meta={"definition": analysis.WHM_DEFINITION},
        )
    return 1 if failures else 0


def cmd_spread(cfg: RunConfig) -> int:
    gammas = cfg.gamma_values or tuple(np.arange(0.25, 2.0, 0.25))
    t = cfg.tau.tau_r

    def one(g):
        return analysis.spread(cfg.tau, cfg.n, t, float(g), cfg.params)

    results = _pool_map(one, gammas, cfg.jobs)
    failures = sum(1 for r in results if not (abs(r.d1) <= 1e-5 and r.d2 > 0.0))
    rows = [[r.gamma, r.t, r.sigma, r.d1, r.d2] for r in results]
    if cfg.fmt == "svg":
        if cfg.output is None:
            raise ConfigError("svg output needs --output")
        _svg.line_plot(
            cfg.output,
            [("d2 sigma/dt2 at collapse", [r.gamma for r in results], [r.d2 for r in results])],
            title=f"spread concavity, tau_i={cfg.tau.tau_i:g}, parity={cfg.n}",
            xlabel="gamma", ylabel="d2",
        )
    else:
        _write_table(
            cfg.output, cfg.fmt, "spread",
            ["gamma", "t", "sigma", "d1", "d2"], rows,
            meta={"note": CONCAVITY_NOTE},
        )
    return 1 if failures else 0


def cmd_delta(cfg: RunConfig) -> int:
    interval = cfg.interval or IntervalSpec(0.5, 1.0)
    tau_is = cfg.tau_i_values or (1e-1, 1e-2, 1e-3, 1e-4)
    report = analysis.delta_sequence_test(interval, cfg.n, cfg.tau.tau_r, tau_is, cfg.params)
    bounded_ok = all(m <= 1.0 + 1e-10 for m in report.masses)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "delta",
        "interval": [interval.lower, interval.upper],
        "parity": cfg.n,
        "tau_i_sequence": list(report.tau_i_sequence),
        "masses": [float(_f17(m)) for m in report.masses],
        "verdict": report.verdict.value,
        "fitted_rate": float(_f17(report.fitted_rate)),
        "bounded": bounded_ok,
    }
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if cfg.fmt == "csv":
        rows = [[float(ti), float(m)] for ti, m in zip(report.tau_i_sequence, report.masses)]
        _write_table(cfg.output, "csv", "delta", ["tau_i", "mass"], rows)
    elif cfg.output is None:
        sys.stdout.write(text)
    else:
        with open(cfg.output, "w", encoding="ascii") as fh:
            fh.write(text)
    return 0 if bounded_ok else 1


def cmd_uncertainty(cfg: RunConfig) -> int:
    tau_is = cfg.tau_i_values or (cfg.tau.tau_i,)

    def one(tau_i):
        tau = Eigenvalue(cfg.tau.tau_r, float(tau_i))
        de = analysis.energy_uncertainty(tau, cfg.n, cfg.params)
        return [float(tau_i), de, de * float(tau_i)]

    rows = _pool_map(one, tau_is, cfg.jobs)
    expected = cfg.params.hbar / 2.0
    failures = sum(1 for r in rows if abs(r[2] - expected) > 1e-6 * expected)
    if cfg.fmt == "svg":
        if cfg.output is None:
            raise ConfigError("svg output needs --output")
        _svg.line_plot(
            cfg.output,
            [("delta_e", [r[0] for r in rows], [r[1] for r in rows])],
            title="energy uncertainty vs tau_i", xlabel="tau_i", ylabel="delta_e",
        )
    else:
        _write_table(
            cfg.output, cfg.fmt, "uncertainty",
            ["tau_i", "delta_e", "tau_i_times_delta_e"], rows,
        )
    return 1 if failures else 0


def cmd_specfun_probe(args) -> int:
    a = complex(args.a)
    b = complex(args.b)
    z = complex(args.z)
    if args.asymptotic:
        report = specfun.hyp1f1_asymptotic(a, b, z)
    else:
        report = specfun.hyp1f1(a, b, z)
    payload = {
        "a": [a.real, a.imag],
        "b": [b.real, b.imag],
        "z": [z.real, z.imag],
        "value": [report.value.real, report.value.imag],
        "regime": report.regime.value,
        "est_rel_err": report.est_rel_err,
        "terms_used": report.terms_used,
        "near_stokes": report.near_stokes,
    }
    sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return 0


# --------------------------------------------------------------------------
# verification suite
# --------------------------------------------------------------------------


def _verify_checks(level: str, params: PhysicalParams):
    checks = []

    def run(name, inputs, expected, tolerance, fn):
        t0 = time.perf_counter()
        observed = fn()
        checks.append(CheckReport.make(name, inputs, expected, observed, tolerance, t0))

    tau = Eigenvalue(0.5, 0.01)

    run("norm-momentum", {"tau": "0.5+0.01j", "n": 0}, 1.0, 1e-10,
        lambda: float(analysis.norm_check(tau, 0, 0.0, "momentum", params).value))
    run("norm-position-t0", {"tau": "0.5+0.01j", "n": 0}, 1.0, 1e-8,
        lambda: float(analysis.norm_check(tau, 0, 0.0, "position", params).value))
    run("norm-position-collapse", {"tau": "0.5+0.01j", "n": 1, "t": 0.5}, 1.0, 1e-8,
        lambda: float(analysis.norm_check(tau, 1, 0.5, "position", params).value))

    def kummer_residual():
        worst = 0.0
        for a, b, z in ((0.75, 0.5, -40 - 17j), (1.25, 1.5, 12 + 9j), (0.75, 0.5, -150.0 + 0j)):
            f1 = specfun.hyp1f1(a, b, z).value
            f2 = np.exp(z) * specfun.hyp1f1(b - a, b, -z).value
            worst = max(worst, abs(f1 - f2) / abs(f1))
        return worst

    run("kummer-transform", {"points": 3}, 0.0, 1e-9, kummer_residual)

    def collapse_identity():
        qs = np.linspace(-0.6, 0.6, 41)
        lhs = np.abs(eigenstates.varphi_evolved(qs, tau.tau_r, tau, 0, params)) ** 2
        rhs = eigenstates.collapse_density(qs, tau, 0, params)
        return float(np.max(np.abs(lhs - rhs)) / rhs.max())

    run("collapse-identity", {"tau": "0.5+0.01j", "n": 0}, 0.0, 1e-12, collapse_identity)

    run("energy-uncertainty", {"tau_i": 0.5}, params.hbar / (2.0 * 0.5), 1e-8,
        lambda: analysis.energy_uncertainty(Eigenvalue(0.5, 0.5), 0, params))
    run("half-mass-even", {"n": 0}, 0.5, 1e-8, lambda: analysis.half_mass_limit(0, params))
    run("half-mass-odd", {"n": 1}, 0.5, 1e-8, lambda: analysis.half_mass_limit(1, params))
    run("integral-formula-real", {"c": "1", "n": 0}, 0.0, 1e-8,
        lambda: analysis.integral_formula_check(1.0, 0).rel_dev)
    run("schrodinger-residual", {"tau": "0.5+0.05j", "n": 0}, 0.0, 1e-4,
        lambda: analysis.schrodinger_residual(Eigenvalue(0.5, 0.05), 0, params, nq=25, nt=25))
    run("operator-residual", {"tau": "0.5+0.01j", "n": 1}, 0.0, 1e-6,
        lambda: analysis.eigenvalue_residual(tau, 1, params))

    def spread_min_certificate():
        r = analysis.spread(Eigenvalue(0.5, 1.0), 0, 0.5, 1.0, params)
        # encodes |d1| <= 1e-5 and d2 > 0 as a single violation magnitude
        return max(abs(r.d1) - 1e-5, 0.0) + max(-r.d2, 0.0)

    run("spread-minimum", {"tau_i": 1.0, "gamma": 1.0}, 0.0, 0.0, spread_min_certificate)

    def delta_quick():
        rep = analysis.delta_sequence_test(
            IntervalSpec(0.5, 1.0), 0, 0.5, (1e-1, 1e-2), params
        )
        drop_ok = rep.masses[1] < rep.masses[0]
        bounded = all(m <= 1.0 + 1e-10 for m in rep.masses)
        return 0.0 if (drop_ok and bounded) else 1.0

    run("delta-quick", {"interval": "(0.5,1)"}, 0.0, 0.0, delta_quick)

    def whm_argmin():
        ts = np.linspace(0.0, 1.0, 21)
        widths = [analysis.whm(tau, 0, float(t), params).whm for t in ts]
        return abs(float(ts[int(np.argmin(widths))]) - tau.tau_r)

    run("whm-argmin", {"tau": "0.5+0.01j", "n": 0}, 0.0, 0.051, whm_argmin)

    def peaks():
        even = analysis.peak_census(tau, 0, tau.tau_r, params)
        odd = analysis.peak_census(tau, 1, tau.tau_r, params)
        bad = (even.n_peaks != 1) + (odd.n_peaks != 2)
        return float(bad)

    run("peak-structure", {"tau": "0.5+0.01j"}, 0.0, 0.0, peaks)

    if level == "full":
        for parity in (0, 1):
            for kk, beta in ((1.0, 1 - 0.5j), (2.0, 1 - 1j), (0.5, 2 - 0.25j)):
                def ft_dev(parity=parity, kk=kk, beta=beta):
                    lhs = quadrature.integrate_oscillatory_ft(parity, kk, beta)
                    rhs = ft_identity_rhs(parity, kk, beta)
                    return abs(complex(lhs.value) - rhs) / abs(rhs)

                run(
                    f"fourier-identity-p{parity}", {"k": kk, "beta": str(beta)},
                    0.0, 1e-4, ft_dev,
                )
        for c in (2.0, 1 + 1j, 0.5 - 0.3j):
            for n in (0, 1, 2):
                run(
                    f"integral-formula-{n}", {"c": str(c), "n": n}, 0.0, 1e-8,
                    lambda c=c, n=n: analysis.integral_formula_check(c, n).rel_dev,
                )
        def delta_full():
            bad = 0.0
            for iv in (IntervalSpec(0.5, 1.0), IntervalSpec(-1.0, 1.0)):
                rep = analysis.delta_sequence_test(iv, 0, 0.5, (1e-1, 1e-2, 1e-3, 1e-4), params)
                if rep.verdict is DeltaVerdict.TENDS_TO_ZERO and rep.masses[-1] >= 1e-3:
                    bad += 1.0
                if rep.verdict is DeltaVerdict.TENDS_TO_ONE and 1.0 - rep.masses[-1] >= 1e-3:
                    bad += 1.0
            return bad

        run("delta-full", {"intervals": 2}, 0.0, 0.0, delta_full)

    return checks


def ft_identity_rhs(parity: int, k: float, beta: complex) -> complex:
    """Closed form of the eigenfunction-kernel Fourier transform, Im(beta) < 0."""
    beta = complex(beta)
    if parity == 0:
        phase = complex(math.cos(5 * math.pi / 8), math.sin(5 * math.pi / 8))
        return (
            2.0 ** 1.5 * phase * math.pi * math.sqrt(abs(k)) * beta ** -0.75
            * specfun.recip_gamma(-0.25) * np.exp(1j * k * k / (4.0 * beta))
        )
    phase = complex(math.cos(7 * math.pi / 8), math.sin(7 * math.pi / 8))
    return (
        phase * math.pi * math.sqrt(2.0 * abs(k)) * beta ** -1.25
        * specfun.recip_gamma(0.25) * np.exp(1j * k * k / (4.0 * beta))
        * float(np.sign(k))
    )


def cmd_verify(cfg: RunConfig, level: str) -> int:
    checks = _verify_checks(level, cfg.params)
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        sys.stdout.write(
            f"[{status}] {c.check_name}: observed={c.observed:.12g} "
            f"expected={c.expected:.12g} tol={c.tolerance:g} ({c.runtime_ms:.0f} ms)\n"
        )
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "level": level,
        "reports": [c.to_dict() for c in checks],
        "all_pass": all(c.passed for c in checks),
    }
    if cfg.output is not None:
        with open(cfg.output, "w", encoding="ascii") as fh:
            fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return 0 if all(c.passed for c in checks) else 1


# --------------------------------------------------------------------------
# argument plumbing
# --------------------------------------------------------------------------


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
                key, value = line.split("=", 1)
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


def _float_list(text: str):
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"bad float list {text!r}") from exc


_DEFAULTS = {
    "mu": 1.0,
    "hbar": 1.0,
    "tau_r": 0.5,
    "tau_i": 0.01,
    "parity": 0,
    "tol_abs": 1e-10,
    "tol_rel": 1e-8,
    "jobs": None,
    "format": "csv",
    "output": None,
    "q_max": 1.5,
    "q_points": 121,
    "t_min": 0.0,
    "t_max": 1.0,
    "t_points": 101,
    "gamma_list": "0.25,0.5,0.75,1.0,1.25,1.5,1.75",
    "tau_i_list": "",
    "interval": "0.5,1",
    "gamma": 1.0,
}


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value config file (flags win over it)")
    p.add_argument("--mu", type=float)
    p.add_argument("--hbar", type=float)
    p.add_argument("--tau-r", type=float, dest="tau_r")
    p.add_argument("--tau-i", type=float, dest="tau_i")
    p.add_argument("--parity", type=int, choices=(0, 1))
    p.add_argument("--tol-abs", type=float, dest="tol_abs")
    p.add_argument("--tol-rel", type=float, dest="tol_rel")
    p.add_argument("--jobs", type=int)
    p.add_argument("--output")
    p.add_argument("--format", choices=("csv", "json", "svg", "dat"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toa-kit",
        description="Arrival-time eigenfunction toolkit: sweeps, figures, verification.",
    )
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(_PUBLIC_COMMANDS) + "}")
    sub.required = True

    p = sub.add_parser("density", help="density over a (q, t) grid")
    _add_common(p)
    p.add_argument("--q-max", type=float, dest="q_max")
    p.add_argument("--q-points", type=int, dest="q_points")
    p.add_argument("--t-min", type=float, dest="t_min")
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--t-points", type=int, dest="t_points")

    p = sub.add_parser("whm", help="width-at-half-maximum sweep over t")
    _add_common(p)
    p.add_argument("--tau-i-list", dest="tau_i_list")
    p.add_argument("--t-min", type=float, dest="t_min")
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--t-points", type=int, dest="t_points")

    p = sub.add_parser("spread", help="modified spread and its concavity at collapse")
    _add_common(p)
    p.add_argument("--gamma-list", dest="gamma_list")

    p = sub.add_parser("delta", help="delta-sequence interval masses")
    _add_common(p)
    p.add_argument("--interval", help="a,b")
    p.add_argument("--tau-i-list", dest="tau_i_list")

    p = sub.add_parser("uncertainty", help="energy uncertainty vs tau_i")
    _add_common(p)
    p.add_argument("--tau-i-list", dest="tau_i_list")

    p = sub.add_parser("verify", help="run the verification suite")
    _add_common(p)
    p.add_argument("--level", choices=("quick", "full"), default="quick")

    p = sub.add_parser("specfun-probe")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--z", required=True)
    p.add_argument("--asymptotic", action="store_true")

    return parser


def _resolve(args, key, cast=None):
    val = getattr(args, key, None)
    if val is None:
        cfg = getattr(args, "_file_config", {})
        if key in cfg:
            val = cfg[key]
            if cast is not None:
                val = cast(val)
        else:
            val = _DEFAULTS.get(key)
    return val


def _build_runconfig(args) -> RunConfig:
    params = PhysicalParams(
        mu=float(_resolve(args, "mu", float)), hbar=float(_resolve(args, "hbar", float))
    )
    try:
        tau = Eigenvalue(float(_resolve(args, "tau_r", float)), float(_resolve(args, "tau_i", float)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    n = int(_resolve(args, "parity", int))
    if n not in (0, 1):
        raise ConfigError(f"parity must be 0 or 1, got {n}")
    tol = Tolerance(
        abs_tol=float(_resolve(args, "tol_abs", float)),
        rel_tol=float(_resolve(args, "tol_rel", float)),
    )
    jobs = _resolve(args, "jobs", int)
    if jobs is None:
        jobs = int(os.environ.get("TOA_KIT_JOBS", 0) or 0) or (os.cpu_count() or 1)
    jobs = max(int(jobs), 1)

    q_grid = t_grid = None
    if hasattr(args, "q_points") or args.command == "density":
        q_max = float(_resolve(args, "q_max", float))
        q_grid = GridSpec(-q_max, q_max, int(_resolve(args, "q_points", int)))
    if args.command in ("density", "whm"):
        t_grid = GridSpec(
            float(_resolve(args, "t_min", float)),
            float(_resolve(args, "t_max", float)),
            int(_resolve(args, "t_points", int)),
        )

    gamma_values = ()
    if args.command == "spread":
        gamma_values = _float_list(str(_resolve(args, "gamma_list", str)))
    tau_i_values = ()
    if args.command in ("whm", "delta", "uncertainty"):
        raw = _resolve(args, "tau_i_list", str) or ""
        tau_i_values = _float_list(str(raw)) if str(raw) else ()
    interval = None
    if args.command == "delta":
        pair = _float_list(str(_resolve(args, "interval", str)))
        if len(pair) != 2:
            raise ConfigError(f"--interval needs two numbers, got {pair}")
        interval = IntervalSpec(pair[0], pair[1])

    return RunConfig(
        params=params, tau=tau, n=n,
        q_grid=q_grid, t_grid=t_grid,
        gamma_values=gamma_values, tau_i_values=tau_i_values,
        interval=interval, tolerance=tol,
        output=_resolve(args, "output"), fmt=str(_resolve(args, "format")),
        jobs=jobs,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "specfun-probe":
            return cmd_specfun_probe(args)
        config_path = getattr(args, "config", None)
        args._file_config = _read_config_file(config_path) if config_path else {}
        cfg = _build_runconfig(args)
        if args.command == "density":
            return cmd_density(cfg)
        if args.command == "whm":
            return cmd_whm(cfg)
        if args.command == "spread":
            return cmd_spread(cfg)
        if args.command == "delta":
            return cmd_delta(cfg)
        if args.command == "uncertainty":
            return cmd_uncertainty(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args.level)
        parser.error(f"unknown command {args.command!r}")
    except ConfigError as exc:
        sys.stderr.write(f"toa-kit: config error: {exc}\n")
        return 2
    except ToaKitError as exc:
        sys.stderr.write(f"toa-kit: numerical failure: {exc}\n")
        return 3
    except OSError as exc:
        sys.stderr.write(f"toa-kit: i/o error: {exc}\n")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
