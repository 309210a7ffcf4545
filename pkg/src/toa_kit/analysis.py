"""Executable quantitative checks on the arrival-time eigenstates.

Normalization in both representations, width-at-half-maximum dynamics, the
modified spread and its concavity at the collapse time, the energy
uncertainty, the delta-sequence interval tests, the half-line mass limit,
the closed-form integral identity, and peak structure.  Everything is pure;
sweep loops live in the CLI.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import eigenstates as eig
from . import specfun
from .errors import DomainError, NonMonotoneError, PeakNotFound
from .eigenstates import Eigenvalue, PhysicalParams
from .quadrature import (
    AlgebraicTail,
    GaussianPowerTail,
    IntervalSpec,
    QuadratureResult,
    Tolerance,
    finite_difference,
    integrate_finite,
    integrate_semi_infinite,
)

# Half-max crossings and twin peaks are refined to this absolute resolution.
_BISECT_XTOL = 1e-10

# The even collapse envelope touches zero (the hypergeometric factor has a
# real root near u = 1.1623) and rebounds to about 2.7 percent of the
# central peak, so peak counting uses a relative height floor to separate
# the principal collapse structure from that algebraic ripple.
DEFAULT_PEAK_FLOOR = 0.05

WHM_DEFINITION = "distance between the outermost half-of-global-max crossings"

# A positive second time-derivative of the spread at t = tau_r certifies a
# local minimum there; this string is embedded in emitted reports.
CONCAVITY_NOTE = (
    "positive concavity of the spread at the collapse time certifies a local minimum"
)


@dataclass(frozen=True)
class WhmResult:
    t: float
    whm: float
    peak_value: float
    peak_positions: tuple
    definition: str = WHM_DEFINITION


@dataclass(frozen=True)
class SpreadResult:
    gamma: float
    t: float
    sigma: float
    d1: float
    d2: float


class DeltaVerdict(enum.Enum):
    TENDS_TO_ZERO = "tends-to-zero"
    TENDS_TO_ONE = "tends-to-one"
    BOUNDED = "bounded"


@dataclass(frozen=True)
class DeltaTestReport:
    interval: IntervalSpec
    tau_i_sequence: tuple
    masses: tuple
    verdict: DeltaVerdict
    fitted_rate: float


@dataclass(frozen=True)
class PeakCensus:
    n_peaks: int
    positions: tuple
    minor_maxima: tuple = field(default_factory=tuple)


@dataclass(frozen=True)
class IntegralFormulaResult:
    lhs: QuadratureResult
    rhs: float
    rel_dev: float


def _density_fn(tau: Eigenvalue, n: int, t: float, params: PhysicalParams):
    def dens(q):
        vals = eig.varphi_evolved(np.asarray(q, dtype=float), t, tau, n, params)
        return np.abs(vals) ** 2

    return dens


def _density_cutoff_hint(tau: Eigenvalue, n: int, t: float, params: PhysicalParams) -> float:
    # the 1F1 exponential branch dies like exp(-mu tau_i q^2 / hbar |tau-t|^2);
    # beyond ~sqrt(30/rate) only the algebraic q^-3 tail survives
    shift = abs(complex(tau.tau_r - t, tau.tau_i))
    rate = params.mu * tau.tau_i / (params.hbar * shift * shift)
    return max(20.0, 1.5 * math.sqrt(30.0 / rate))


def norm_check(tau: Eigenvalue, n: int, t: float = 0.0, rep: str = "position",
               params: PhysicalParams = PhysicalParams(),
               tol: Tolerance | None = None) -> QuadratureResult:
    """Quadrature of the full-line norm, expected 1.

    Densities are exactly even, so the integral is computed as twice the
    half-line one.  The momentum-space density is time-independent (free
    evolution is a pure phase there) and gets the exact Gaussian-moment
    tail; the position-space density gets the fitted/analytic q^-3 tail.
    """
    eig._check_parity(n)
    eig._require_normalizable(tau)
    if tol is None:
        tol = Tolerance(abs_tol=1e-11, rel_tol=1e-10)
    if rep == "momentum":
        c = eig.momentum_decay_rate(tau, params)
        amp = 2.0 * c

        def f(p):
            p = np.asarray(p, dtype=float)
            return amp * p * np.exp(-c * p * p)

        tail = GaussianPowerTail(c, 1, coefficient=amp)
        return integrate_semi_infinite(f, IntervalSpec(0.0, math.inf), tail, tol)
    if rep == "position":
        dens = _density_fn(tau, n, t, params)

        def f(q):
            return 2.0 * dens(q)

        tail = AlgebraicTail(3.0, coefficient=2.0 * eig.density_tail_coefficient(tau, n, t, params))
        hint = _density_cutoff_hint(tau, n, t, params)
        return integrate_semi_infinite(f, IntervalSpec(0.0, math.inf), tail, tol, cutoff_hint=hint)
    raise DomainError(f"rep must be 'momentum' or 'position', got {rep!r}")


def _refine_maximum(dens, lo: float, hi: float, iters: int = 60):
    """Golden-section maximization of a scalar density on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc = float(dens(c))
    fd = float(dens(d))
    for _ in range(iters):
        if b - a < _BISECT_XTOL:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = float(dens(c))
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = float(dens(d))
    q = 0.5 * (a + b)
    return q, float(dens(q))


def whm(tau: Eigenvalue, n: int, t: float = 0.0,
        params: PhysicalParams = PhysicalParams()) -> WhmResult:
    """Width at half maximum of the evolved position density.

    The global maximum is located on a grid and refined; the две outermost
    crossings of half that value are bracketed on the grid and bisected to
    1e-10.  The width covers both the single-peak (n=0) and twin-peak (n=1)
    shapes by construction.
    """
    dens = _density_fn(tau, n, t, params)
    shift = abs(complex(tau.tau_r - t, tau.tau_i))
    q_w = shift * math.sqrt(2.0 * params.hbar / (params.mu * tau.tau_i))
    q_s = math.sqrt(2.0 * params.hbar * shift / params.mu)
    qmax = 4.0 * max(q_w, q_s)

    for _ in range(8):
        grid = np.linspace(0.0, qmax, 1401)
        d = dens(grid)
        peak = float(d.max())
        if peak <= 0.0 or (peak - float(d.min())) <= 1e-12 * peak:
            raise PeakNotFound("density is flat within tolerance")
        if d[-1] < 0.5 * peak:
            break
        qmax *= 2.0
    else:
        raise PeakNotFound("half-maximum crossing not bracketed")

    im = int(np.argmax(d))
    if im == 0:
        q_pk, peak = 0.0, float(d[0])
    else:
        lo = grid[max(im - 1, 0)]
        hi = grid[min(im + 1, grid.size - 1)]
        q_pk, peak = _refine_maximum(dens, lo, hi)

    half = 0.5 * peak
    above = np.nonzero(d >= half)[0]
    i_hi = int(above[-1])
    lo_q, hi_q = float(grid[i_hi]), float(grid[i_hi + 1])
    while hi_q - lo_q > _BISECT_XTOL:
        mid = 0.5 * (lo_q + hi_q)
        if float(dens(mid)) >= half:
            lo_q = mid
        else:
            hi_q = mid
    crossing = 0.5 * (lo_q + hi_q)

    positions = (0.0,) if n == 0 else (-q_pk, q_pk)
    return WhmResult(t=t, whm=2.0 * crossing, peak_value=peak, peak_positions=positions)


def spread(tau: Eigenvalue, n: int, t: float, gamma: float,
           params: PhysicalParams = PhysicalParams(),
           tol: Tolerance | None = None) -> SpreadResult:
    """Modified spread sigma_q^gamma(t) = int |q|^gamma |phi|^2 dq, gamma in [0, 2).

    gamma >= 2 diverges (the density tail is q^-3) and raises DomainError.
    First/second time derivatives use central stencils at
    h = max(1e-4, tau_i/50), the second Richardson-extrapolated over the
    (h, 2h) pair, i.e. the 5-point stencil.
    """
    if not (0.0 <= gamma < 2.0):
        raise DomainError(f"spread exists for gamma in [0, 2), got {gamma}")
    if tol is None:
        tol = Tolerance(abs_tol=1e-11, rel_tol=1e-9)

    def sigma_at(tv: float) -> float:
        dens = _density_fn(tau, n, tv, params)

        def f(q):
            q = np.asarray(q, dtype=float)
            return 2.0 * q ** gamma * dens(q)

        tail = AlgebraicTail(
            3.0 - gamma,
            coefficient=2.0 * eig.density_tail_coefficient(tau, n, tv, params),
        )
        hint = _density_cutoff_hint(tau, n, tv, params)
        return float(
            integrate_semi_infinite(f, IntervalSpec(0.0, math.inf), tail, tol, cutoff_hint=hint).value
        )

    h = max(1e-4, tau.tau_i / 50.0)
    s_m2, s_m1, s_0, s_p1, s_p2 = (sigma_at(t + k * h) for k in (-2, -1, 0, 1, 2))
    d1 = finite_difference([s_m1, s_0, s_p1], 1, h)
    d2_h = finite_difference([s_m1, s_0, s_p1], 2, h)
    d2_2h = finite_difference([s_m2, s_0, s_p2], 2, 2.0 * h)
    d2 = (4.0 * d2_h - d2_2h) / 3.0
    return SpreadResult(gamma=gamma, t=t, sigma=s_0, d1=d1, d2=d2)


def energy_uncertainty(tau: Eigenvalue, n: int = 0,
                       params: PhysicalParams = PhysicalParams(),
                       tol: Tolerance | None = None) -> float:
    """Delta E from momentum-space moments of E = p^2/2mu; equals hbar/2 tau_i.

    Both parities share the same momentum density, so n only labels the
    state.  Moments are genuine quadratures with exact Gaussian-moment
    tails.
    """
    eig._check_parity(n)
    eig._require_normalizable(tau)
    if tol is None:
        tol = Tolerance(abs_tol=1e-13, rel_tol=1e-11)
    c = eig.momentum_decay_rate(tau, params)
    a1 = c / params.mu          # full-line |phi|^2 E    -> a1 p^3 exp(-c p^2) on (0, inf)
    a2 = c / (2.0 * params.mu ** 2)  # full-line |phi|^2 E^2 -> a2 p^5 exp(-c p^2)

    def f3(p):
        p = np.asarray(p, dtype=float)
        return a1 * p ** 3 * np.exp(-c * p * p)

    def f5(p):
        p = np.asarray(p, dtype=float)
        return a2 * p ** 5 * np.exp(-c * p * p)

    e1 = integrate_semi_infinite(f3, IntervalSpec(0.0, math.inf), GaussianPowerTail(c, 3, a1), tol)
    e2 = integrate_semi_infinite(f5, IntervalSpec(0.0, math.inf), GaussianPowerTail(c, 5, a2), tol)
    var = float(e2.value) - float(e1.value) ** 2
    return math.sqrt(max(var, 0.0))


def _scaled_mass_prefactor(n: int) -> float:
    return math.pi * 4.0 ** (1 - n) / math.gamma((1.0 + 2.0 * n) / 4.0) ** 2


def _scaled_integrand(n: int):
    a, b = 0.75 + 0.5 * n, 0.5 + n

    def g(u):
        u = np.asarray(u, dtype=float)
        z = -(u * u).astype(complex)
        vals = specfun.hyp1f1_grid(a, b, z)[0].real
        return u ** (2 * n) * vals * vals

    return g


def _scaled_tail_coefficient(n: int) -> float:
    a, b = 0.75 + 0.5 * n, 0.5 + n
    amp = abs(specfun.gamma(b) * specfun.recip_gamma(b - a))
    return amp * amp


def delta_sequence_test(interval: IntervalSpec, n: int, tau_r: float,
                        tau_i_sequence, params: PhysicalParams = PhysicalParams()) -> DeltaTestReport:
    """Interval masses of the collapse density along a shrinking tau_i sequence.

    Masses over intervals that avoid the origin must fall to zero, over
    straddling intervals rise to one; the dependence on tau_i is moved into
    the integration bounds through u = sqrt(mu / 2 hbar tau_i) q, so the
    integrand is evaluated once per mass in a tau_i-free form.  Both-negative
    intervals map exactly onto their mirror image.  Straddling masses are
    computed as one minus the two half-line tails, which keeps 1 - m accurate
    when it is tiny.
    """
    if not interval.finite:
        raise DomainError("delta test needs a finite interval")
    alpha, beta = interval.lower, interval.upper
    if alpha == 0.0 or beta == 0.0:
        raise DomainError("interval endpoints must be non-vanishing")
    seq = tuple(float(v) for v in tau_i_sequence)
    if not seq or any(v <= 0.0 for v in seq):
        raise ValueError("tau_i sequence must be positive")
    if any(b >= a for a, b in zip(seq[:-1], seq[1:])):
        raise ValueError("tau_i sequence must be strictly decreasing")

    pref = _scaled_mass_prefactor(n)
    g = _scaled_integrand(n)
    c_tail = _scaled_tail_coefficient(n)
    tol = Tolerance(abs_tol=1e-12, rel_tol=1e-10)
    straddles = alpha < 0.0 < beta

    masses = []
    errs = []
    for tau_i in seq:
        Eigenvalue(tau_r, tau_i)  # validates the pair
        s = math.sqrt(params.mu / (2.0 * params.hbar * tau_i))
        if straddles:
            lost = 0.0
            lost_err = 0.0
            for edge in (abs(alpha), beta):
                r = integrate_semi_infinite(
                    g, IntervalSpec(s * edge, math.inf),
                    AlgebraicTail(3.0, coefficient=c_tail), tol,
                    cutoff_hint=max(2.0 * s * edge, 40.0),
                )
                lost += pref * float(r.value)
                lost_err += pref * r.abs_err_est
            masses.append(1.0 - lost)
            errs.append(lost_err)
        else:
            lo, hi = (alpha, beta) if alpha > 0.0 else (abs(beta), abs(alpha))
            r = integrate_finite(g, IntervalSpec(s * lo, s * hi), tol)
            masses.append(pref * float(r.value))
            errs.append(pref * r.abs_err_est)

    verdict = DeltaVerdict.TENDS_TO_ONE if straddles else DeltaVerdict.TENDS_TO_ZERO
    tol_mono = [e1 + e2 + 1e-12 for e1, e2 in zip(errs[:-1], errs[1:])]
    for i, slack in enumerate(tol_mono):
        step = masses[i + 1] - masses[i]
        if verdict is DeltaVerdict.TENDS_TO_ZERO and step > slack:
            raise NonMonotoneError(
                f"mass rose from {masses[i]:.6g} to {masses[i + 1]:.6g} while tending to zero"
            )
        if verdict is DeltaVerdict.TENDS_TO_ONE and step < -slack:
            raise NonMonotoneError(
                f"mass fell from {masses[i]:.6g} to {masses[i + 1]:.6g} while tending to one"
            )

    logs = np.log(np.array(seq))
    track = np.array(masses) if verdict is DeltaVerdict.TENDS_TO_ZERO else 1.0 - np.array(masses)
    track = np.maximum(track, 1e-300)
    rate = float(np.polyfit(logs, np.log(track), 1)[0])
    return DeltaTestReport(
        interval=interval,
        tau_i_sequence=seq,
        masses=tuple(masses),
        verdict=verdict,
        fitted_rate=rate,
    )


def half_mass_limit(n: int, params: PhysicalParams = PhysicalParams(),
                    tol: Tolerance | None = None) -> float:
    """Scaled half-line mass integral; its exact value is 1/2."""
    eig._check_parity(n)
    if tol is None:
        tol = Tolerance(abs_tol=1e-11, rel_tol=1e-10)
    g = _scaled_integrand(n)
    r = integrate_semi_infinite(
        g, IntervalSpec(0.0, math.inf),
        AlgebraicTail(3.0, coefficient=_scaled_tail_coefficient(n)), tol,
        cutoff_hint=120.0,
    )
    return _scaled_mass_prefactor(n) * float(r.value)


def integral_formula_check(c: complex, n: int,
                           tol: Tolerance | None = None) -> IntegralFormulaResult:
    """Half-line integral of q^{2n} |1F1(n/2+3/4; 1/2+n; -c q^2)|^2 vs closed form.

    Valid for Re(c) > 0.  The closed form is
    4^{n-1} |c|^{1/2-n} Gamma(1/4+n/2)^2 / (2 pi Re c); the quadrature side
    fits its own q^-3 tail, keeping the two routes independent.
    """
    c = complex(c)
    if not c.real > 0.0:
        raise DomainError(f"formula requires Re(c) > 0, got {c}")
    if n < 0 or n != int(n):
        raise DomainError(f"n must be a nonnegative integer, got {n}")
    n = int(n)
    if tol is None:
        tol = Tolerance(abs_tol=1e-11, rel_tol=1e-10)
    a, b = 0.5 * n + 0.75, 0.5 + n

    def w(q):
        q = np.asarray(q, dtype=float)
        z = -c * (q * q).astype(complex)
        vals = specfun.hyp1f1_grid(a, b, z)[0]
        return q ** (2 * n) * np.abs(vals) ** 2

    lhs = integrate_semi_infinite(
        w, IntervalSpec(0.0, math.inf), AlgebraicTail(3.0), tol,
        cutoff_hint=max(20.0, 8.0 / math.sqrt(c.real)),
    )
    rhs = (
        4.0 ** (n - 1) * abs(c) ** (0.5 - n)
        * math.gamma(0.25 + 0.5 * n) ** 2 / (2.0 * math.pi * c.real)
    )
    rel_dev = abs(float(lhs.value) - rhs) / rhs
    return IntegralFormulaResult(lhs=lhs, rhs=rhs, rel_dev=rel_dev)


def peak_census(tau: Eigenvalue, n: int, t: float = 0.0,
                params: PhysicalParams = PhysicalParams(),
                min_rel_height: float = DEFAULT_PEAK_FLOOR) -> PeakCensus:
    """Count and locate the principal maxima of the evolved density.

    Local maxima are found on a grid on [0, qmax], refined by golden-section
    search, and mirrored to negative q (the density is exactly even).
    Maxima below ``min_rel_height`` times the global maximum are reported
    separately as minor: the even envelope rebounds to a few percent after
    its zero, and that algebraic ripple is not a collapse peak.
    """
    dens = _density_fn(tau, n, t, params)
    shift = abs(complex(tau.tau_r - t, tau.tau_i))
    q_w = shift * math.sqrt(2.0 * params.hbar / (params.mu * tau.tau_i))
    q_s = math.sqrt(2.0 * params.hbar * shift / params.mu)
    qmax = 4.0 * max(q_w, q_s)
    grid = np.linspace(0.0, qmax, 2001)
    d = dens(grid)

    peak = float(d.max())
    if peak <= 0.0:
        return PeakCensus(n_peaks=0, positions=())

    found = []
    if d[0] > d[1]:
        found.append((0.0, float(d[0])))
    interior = np.nonzero((d[1:-1] > d[:-2]) & (d[1:-1] > d[2:]))[0] + 1
    for i in interior:
        q_pk, h_pk = _refine_maximum(dens, grid[i - 1], grid[i + 1])
        found.append((q_pk, h_pk))

    top = max(h for _, h in found)
    principal = []
    minor = []
    for q_pk, h_pk in found:
        mirrored = [(q_pk, h_pk)] if q_pk == 0.0 else [(-q_pk, h_pk), (q_pk, h_pk)]
        if h_pk >= min_rel_height * top:
            principal.extend(mirrored)
        else:
            minor.extend(mirrored)
    principal.sort()
    minor.sort()
    return PeakCensus(
        n_peaks=len(principal),
        positions=tuple(q for q, _ in principal),
        minor_maxima=tuple(minor),
    )


def schrodinger_residual(tau: Eigenvalue, n: int,
                         params: PhysicalParams = PhysicalParams(),
                         q_half_span: float = 2.5, t_max: float | None = None,
                         nq: int = 50, nt: int = 50, h: float = 1e-3) -> float:
    """Max relative residual of i hbar d_t phi + (hbar^2/2mu) d_q^2 phi = 0.

    Central differences at step h in both variables; the residual at each
    grid point is normalized by the sum of the two term magnitudes (with a
    small floor where both vanish, e.g. on the odd state's node line).
    """
    eig._check_parity(n)
    eig._require_normalizable(tau)
    if t_max is None:
        t_max = 2.0 * tau.tau_r if tau.tau_r > 0 else 1.0
    qs = np.linspace(-q_half_span, q_half_span, nq)
    ts = np.linspace(0.0, t_max, nt)
    hb = params.hbar
    worst = 0.0
    rels = []
    for t in ts:
        p0 = eig.varphi_evolved(qs, t, tau, n, params)
        ppq = eig.varphi_evolved(qs + h, t, tau, n, params)
        pmq = eig.varphi_evolved(qs - h, t, tau, n, params)
        ppt = eig.varphi_evolved(qs, t + h, tau, n, params)
        pmt = eig.varphi_evolved(qs, t - h, tau, n, params)
        term_t = 1j * hb * (ppt - pmt) / (2.0 * h)
        term_q = (hb * hb / (2.0 * params.mu)) * (ppq - 2.0 * p0 + pmq) / (h * h)
        resid = np.abs(term_t + term_q)
        denom = np.abs(term_t) + np.abs(term_q)
        rels.append((resid, denom))
    floor = 1e-6 * max(float(d.max()) for _, d in rels)
    for resid, denom in rels:
        ok = denom > floor
        if ok.any():
            worst = max(worst, float((resid[ok] / denom[ok]).max()))
    return worst


def eigenvalue_residual(tau: Eigenvalue, n: int,
                        params: PhysicalParams = PhysicalParams(),
                        p_values=None, h: float = 1e-4) -> float:
    """Max relative residual of the momentum-space operator equation.

    Applies -i mu hbar (p^{-1} d_p - (2p^2)^{-1}) with a central difference
    to the normalized eigenfunction and compares against tau * phi, away
    from p = 0.
    """
    eig._check_parity(n)
    eig._require_normalizable(tau)
    if p_values is None:
        base = np.linspace(0.25, 3.0, 25)
        p_values = np.concatenate([-base[::-1], base])
    p = np.asarray(p_values, dtype=float)
    if np.any(p == 0.0):
        raise DomainError("operator residual is defined away from p = 0")
    mu, hb = params.mu, params.hbar
    f0 = eig.varphi_momentum(p, tau, n, params)
    fp = eig.varphi_momentum(p + h, tau, n, params)
    fm = eig.varphi_momentum(p - h, tau, n, params)
    dphi = (fp - fm) / (2.0 * h)
    applied = -1j * mu * hb * (dphi / p - f0 / (2.0 * p * p))
    target = tau.value * f0
    return float((np.abs(applied - target) / np.abs(target)).max())
