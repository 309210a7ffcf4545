"""Adaptive integration engines and finite-difference helpers.

Panel rule: an embedded pair of nested Clenshaw-Curtis rules (17 points with
the 9-point subset as the lower-order estimate); the difference of the two
is the local error, and the worst panel is always bisected first.  Panel
sums are assembled in positional order so repeated runs report identical
digits.  Semi-infinite integrals combine a finite part with a closed-form
tail model (algebraic or Gaussian-moment); the oscillatory Fourier-identity
integrals use an integration-by-parts boundary series for their tails.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from . import specfun
from .errors import (
    DepthExceeded,
    DomainError,
    StencilError,
    TailModelError,
    ToleranceNotMet,
)

_EPS = np.finfo(float).eps
_MAX_PANELS = 50_000


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_depth: int = 50

    def __post_init__(self):
        if not (self.abs_tol > 0.0 and self.rel_tol > 0.0):
            raise ValueError("tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")

    def target(self, magnitude: float) -> float:
        return max(self.abs_tol, self.rel_tol * magnitude)


@dataclass(frozen=True)
class IntervalSpec:
    """Integration interval; either endpoint may be infinite."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"need lower < upper, got [{self.lower}, {self.upper}]")

    @property
    def finite(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)


@dataclass
class QuadratureResult:
    value: object  # float or complex
    abs_err_est: float
    n_evals: int
    tail_contribution: float = 0.0

    def __post_init__(self):
        if not self.abs_err_est >= 0.0:
            raise ValueError("abs_err_est must be nonnegative")
        if self.n_evals < 1:
            raise ValueError("n_evals must be at least 1")


def _clenshaw_curtis(n: int):
    """Nodes/weights of the (n+1)-point Clenshaw-Curtis rule on [-1, 1].

    Closed-form weights for even n (Trefethen, Spectral Methods in MATLAB,
    clencurt); exact for polynomials of degree n.
    """
    theta = np.pi * np.arange(n + 1) / n
    x = np.cos(theta)
    w = np.zeros(n + 1)
    v = np.ones(n - 1)
    for m in range(1, n // 2):
        v -= 2.0 * np.cos(2.0 * m * theta[1:-1]) / (4.0 * m * m - 1.0)
    v -= np.cos(n * theta[1:-1]) / (n * n - 1.0)
    w[1:-1] = 2.0 * v / n
    w[0] = w[-1] = 1.0 / (n * n - 1.0)
    return x, w


_NODES17, _W17 = _clenshaw_curtis(16)
_W9 = _clenshaw_curtis(8)[1]


def _eval_vectorized(f, x: np.ndarray) -> np.ndarray:
    fx = np.asarray(f(x))
    if fx.shape != x.shape:
        fx = np.asarray([f(float(xi)) for xi in x])
    if not np.all(np.isfinite(fx)):
        bad = x[~np.isfinite(fx)][:3]
        raise DomainError(f"integrand not finite near x = {bad}")
    return fx


class _Panel:
    __slots__ = ("a", "b", "depth", "value", "err", "alive", "complex_valued")

    def __init__(self, a, b, depth, value, err, complex_valued):
        self.a = a
        self.b = b
        self.depth = depth
        self.value = value
        self.err = err
        self.alive = True
        self.complex_valued = complex_valued


def _rate_panel(f, a: float, b: float) -> _Panel:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fx = _eval_vectorized(f, mid + half * _NODES17)
    hi = half * np.dot(_W17, fx)
    lo = half * np.dot(_W9, fx[::2])
    return _Panel(a, b, 0, hi, abs(hi - lo), bool(np.iscomplexobj(fx)))


def integrate_finite(f, iv: IntervalSpec, tol: Tolerance = Tolerance()) -> QuadratureResult:
    """Adaptive integration over a finite interval.

    ``f`` must accept an ndarray of abscissae.  When the interval straddles
    zero, the origin is made a panel boundary up front (the densities have a
    cusp-like derivative there).  Raises ToleranceNotMet or DepthExceeded
    with the best result attached when the target cannot be reached.
    """
    if not iv.finite:
        raise DomainError("integrate_finite requires finite bounds")

    bounds = [iv.lower, iv.upper]
    if iv.lower < 0.0 < iv.upper:
        bounds = [iv.lower, 0.0, iv.upper]

    heap = []          # splittable panels, worst error first
    panels = []        # every panel ever created; leaves have alive=True
    seq = 0
    n_evals = 0
    n_leaves = 0
    total_val = 0.0 + 0.0j
    active_err = 0.0   # error carried by panels still in the heap
    frozen_err = 0.0   # error carried by panels at the depth/width limit

    def push(panel):
        nonlocal seq, total_val, active_err, n_leaves
        panels.append(panel)
        n_leaves += 1
        total_val += panel.value
        active_err += panel.err
        heapq.heappush(heap, (-panel.err, seq, panel))
        seq += 1

    for lo, hi in zip(bounds[:-1], bounds[1:]):
        push(_rate_panel(f, lo, hi))
        n_evals += 17

    def assemble(failed_cls=None, message=""):
        ordered = sorted((p for p in panels if p.alive), key=lambda p: p.a)
        value = sum(p.value for p in ordered)
        err = float(sum(p.err for p in ordered))
        if any(p.complex_valued for p in ordered):
            value = complex(value)
        else:
            value = float(np.real(value))
        result = QuadratureResult(value=value, abs_err_est=err, n_evals=n_evals)
        if failed_cls is not None:
            raise failed_cls(message, result=result)
        return result

    while active_err + frozen_err > tol.target(abs(total_val)):
        if not heap:
            return assemble(DepthExceeded, f"max bisection depth {tol.max_depth} reached")
        _, _, worst = heapq.heappop(heap)
        active_err -= worst.err
        mid = 0.5 * (worst.a + worst.b)
        if worst.depth >= tol.max_depth or mid <= worst.a or mid >= worst.b:
            frozen_err += worst.err
            continue
        worst.alive = False
        n_leaves -= 1
        total_val -= worst.value
        for lo, hi in ((worst.a, mid), (mid, worst.b)):
            child = _rate_panel(f, lo, hi)
            child.depth = worst.depth + 1
            n_evals += 17
            push(child)
        if n_leaves > _MAX_PANELS:
            return assemble(ToleranceNotMet, f"panel budget {_MAX_PANELS} exhausted")

    return assemble()


class AlgebraicTail:
    """Tail model C * |x|^(-k) for k > 1.

    The coefficient may be supplied (e.g. from the eigenfunction asymptotics)
    or fitted at the cutoff; either way the model is validated against the
    integrand over [X, 2X] and rejected when residuals exceed 5 percent.
    """

    fit_factors = np.array([1.0, 1.1487, 1.3195, 1.5157, 1.7411, 2.0])

    def __init__(self, exponent: float, coefficient: float | None = None):
        if not exponent > 1.0:
            raise DomainError(f"algebraic tail needs exponent > 1, got {exponent}")
        self.exponent = float(exponent)
        self.coefficient = coefficient

    def calibrate(self, f, cutoff: float):
        xs = cutoff * self.fit_factors
        vals = np.real(_eval_vectorized(f, xs)) * xs ** self.exponent
        c = self.coefficient if self.coefficient is not None else float(np.mean(vals))
        scale = max(abs(c), float(np.max(np.abs(vals))), 5e-324)
        resid = float(np.max(np.abs(vals - c))) / scale
        return c, resid, xs.size

    def integral_beyond(self, cutoff: float, coefficient: float) -> float:
        k = self.exponent
        return coefficient * cutoff ** (1.0 - k) / (k - 1.0)

    def initial_cutoff(self, finite_edge: float, tol: Tolerance) -> float:
        return max(20.0, 2.0 * abs(finite_edge) + 10.0)


class GaussianPowerTail:
    """Tail model A * x^m * exp(-c x^2) with closed-form remainder, odd m."""

    def __init__(self, decay: float, power: int, coefficient: float):
        if not decay > 0.0:
            raise DomainError("gaussian tail needs positive decay rate")
        if power not in (1, 3, 5):
            raise DomainError("gaussian tail supports powers 1, 3, 5")
        self.decay = float(decay)
        self.power = int(power)
        self.coefficient = float(coefficient)

    def _remainder(self, cutoff: float) -> float:
        c = self.decay
        u = c * cutoff * cutoff
        e = math.exp(-u)
        if self.power == 1:
            return e / (2.0 * c)
        if self.power == 3:
            return e * (u + 1.0) / (2.0 * c * c)
        return e * (u * u + 2.0 * u + 2.0) / (2.0 * c ** 3)

    def calibrate(self, f, cutoff: float):
        xs = cutoff * np.array([1.0, 1.05, 1.1])
        model = self.coefficient * xs ** self.power * np.exp(-self.decay * xs * xs)
        vals = np.real(_eval_vectorized(f, xs))
        scale = max(float(np.max(np.abs(model))), float(np.max(np.abs(vals))), 5e-324)
        resid = float(np.max(np.abs(vals - model))) / scale
        return self.coefficient, resid, xs.size

    def integral_beyond(self, cutoff: float, coefficient: float) -> float:
        return coefficient * self._remainder(cutoff)

    def initial_cutoff(self, finite_edge: float, tol: Tolerance) -> float:
        x = max(1.0, abs(finite_edge), 1.0 / math.sqrt(self.decay))
        for _ in range(60):
            if abs(self.integral_beyond(x, self.coefficient)) < 0.05 * tol.abs_tol:
                break
            x *= 1.4
        return x


def integrate_semi_infinite(
    f,
    iv: IntervalSpec,
    tail,
    tol: Tolerance = Tolerance(),
    cutoff_hint: float | None = None,
) -> QuadratureResult:
    """Integral over a half line (or the whole line) with a modeled tail.

    The finite part runs up to an adaptively chosen cutoff X; beyond it the
    closed-form tail integral is added and recorded in tail_contribution.
    X grows until the tail-model error is below a tenth of the absolute
    tolerance; persistent model residuals above 5 percent raise
    TailModelError.
    """
    if math.isinf(iv.lower) and math.isinf(iv.upper):
        right = integrate_semi_infinite(
            f, IntervalSpec(0.0, math.inf), tail, tol, cutoff_hint
        )
        left = integrate_semi_infinite(
            lambda y: f(-np.asarray(y)), IntervalSpec(0.0, math.inf), tail, tol, cutoff_hint
        )
        return QuadratureResult(
            value=left.value + right.value,
            abs_err_est=left.abs_err_est + right.abs_err_est,
            n_evals=left.n_evals + right.n_evals,
            tail_contribution=left.tail_contribution + right.tail_contribution,
        )
    if math.isinf(iv.lower):
        return integrate_semi_infinite(
            lambda y: f(-np.asarray(y)),
            IntervalSpec(-iv.upper, math.inf),
            tail,
            tol,
            cutoff_hint,
        )
    if not math.isinf(iv.upper):
        raise DomainError("integrate_semi_infinite requires an infinite endpoint")

    cutoff = cutoff_hint if cutoff_hint is not None else tail.initial_cutoff(iv.lower, tol)
    cutoff = max(cutoff, iv.lower + 1.0)

    n_calib = 0
    coeff = resid = tail_val = 0.0
    ok = False
    for _ in range(14):
        coeff, resid, used = tail.calibrate(f, cutoff)
        n_calib += used
        tail_val = tail.integral_beyond(cutoff, coeff)
        tail_err = resid * abs(tail_val)
        if abs(tail_val) < 0.01 * tol.abs_tol:
            ok = True
            break
        if resid > 0.05 or tail_err > 0.1 * tol.abs_tol:
            cutoff *= 2.0
            continue
        ok = True
        break
    if not ok and resid > 0.05 and abs(tail_val) > 0.1 * tol.abs_tol:
        raise TailModelError(
            f"tail model residual {resid:.2%} at cutoff {cutoff:.3g}",
            result=None,
        )

    finite = integrate_finite(f, IntervalSpec(iv.lower, cutoff), tol)
    return QuadratureResult(
        value=finite.value + tail_val,
        abs_err_est=finite.abs_err_est + resid * abs(tail_val) + _EPS * abs(tail_val),
        n_evals=finite.n_evals + n_calib,
        tail_contribution=tail_val,
    )


def _ibp_oscillatory_tail(k: float, cutoff: float, s: float = 1.5, max_terms: int = 12):
    """int_X^inf exp(-i k x) x^(-s) dx by repeated integration by parts.

    Returns (value, remainder_bound).  The boundary series is
    -e^{-ikX} * sum_j (s)_j X^{-s-j} / (-ik)^{j+1}, truncated where the
    remainder bound is smallest.  k = 0 degenerates to the exact monomial
    integral.
    """
    if k == 0.0:
        return cutoff ** (1.0 - s) / (s - 1.0), 0.0
    dinv = 1.0 / (-1j * k)
    phase = -np.exp(-1j * k * cutoff)
    poch = 1.0
    total = 0.0 + 0.0j
    best_val = 0.0 + 0.0j
    best_bound = math.inf
    for j in range(max_terms):
        total += phase * poch * cutoff ** (-s - j) * dinv ** (j + 1)
        poch_next = poch * (s + j)
        bound = poch_next * cutoff ** (-s - j) / ((s + j) * abs(k) ** (j + 1))
        if bound < best_bound:
            best_bound = bound
            best_val = total
        else:
            break
        poch = poch_next
    return best_val, best_bound


def integrate_oscillatory_ft(
    parity: int,
    k: float,
    beta: complex,
    tol: Tolerance = Tolerance(abs_tol=1e-8, rel_tol=1e-6),
) -> QuadratureResult:
    """Fourier transform of the eigenfunction kernel x^n 1F1(.;.;-i beta x^2).

    parity selects the even (n=0) or odd (n=1) kernel.  Valid for
    Im(beta) < 0 strictly: the exponential branch of the integrand then
    decays like exp(Im(beta) x^2) and the remaining algebraic |x|^(-3/2)
    branch is integrated analytically beyond the cutoff.
    """
    if parity not in (0, 1):
        raise DomainError(f"parity must be 0 or 1, got {parity}")
    beta = complex(beta)
    if not beta.imag < 0.0:
        raise DomainError(f"requires Im(beta) < 0, got Im(beta) = {beta.imag}")
    a = 0.75 + 0.5 * parity
    b = 0.5 + parity

    def integrand(x):
        x = np.asarray(x, dtype=float)
        z = -1j * beta * x * x
        vals = specfun.hyp1f1_grid(a, b, z)[0]
        out = np.exp(-1j * k * x) * vals
        if parity:
            out = out * x
        return out

    c_alg = specfun.gamma(b) * specfun.recip_gamma(b - a) * (1j * beta) ** (-a)
    c_exp = specfun.gamma(b) * specfun.recip_gamma(a) * (-1j * beta) ** (a - b)
    sign_left = -1.0 if parity else 1.0

    abs_im = -beta.imag
    cutoff = max(10.0 / math.sqrt(abs_im), 50.0 * abs(k) / abs(beta), 10.0)

    tail_plus = tail_minus = 0.0 + 0.0j
    tail_err = math.inf
    for _ in range(10):
        tp, bp = _ibp_oscillatory_tail(k, cutoff)
        tm, bm = _ibp_oscillatory_tail(-k, cutoff)
        tail_plus = c_alg * tp
        tail_minus = sign_left * c_alg * tm
        # dropped corrections: next algebraic order, both sides, plus the
        # exponentially damped branch
        bias_alg = (
            2.0 * abs(c_alg) * abs(a * (a - b + 1.0)) / abs(beta) * 0.4 * cutoff ** -2.5
        )
        bias_exp = (
            2.0 * abs(c_exp) * math.sqrt(cutoff)
            * math.exp(-abs_im * cutoff * cutoff) / (2.0 * abs_im * cutoff)
        )
        tail_err = abs(c_alg) * (bp + bm) + bias_alg + bias_exp
        if tail_err <= 0.25 * tol.abs_tol:
            break
        cutoff *= 1.4

    core_tol = Tolerance(abs_tol=0.5 * tol.abs_tol, rel_tol=tol.rel_tol, max_depth=tol.max_depth)
    core = integrate_finite(integrand, IntervalSpec(-cutoff, cutoff), core_tol)
    tail_total = tail_plus + tail_minus
    return QuadratureResult(
        value=core.value + tail_total,
        abs_err_est=core.abs_err_est + tail_err,
        n_evals=core.n_evals,
        tail_contribution=abs(tail_total),
    )


def finite_difference(fvals, order: int, h: float) -> float:
    """Central difference from a 3-point stencil [f(x-h), f(x), f(x+h)].

    O(h^2) truncation for both the first and second derivative.
    """
    if not h > 0.0:
        raise StencilError(f"step must be positive, got {h}")
    vals = [float(v) for v in fvals]
    if len(vals) != 3:
        raise StencilError(f"need exactly 3 stencil values, got {len(vals)}")
    if order == 1:
        return (vals[2] - vals[0]) / (2.0 * h)
    if order == 2:
        return (vals[2] - 2.0 * vals[1] + vals[0]) / (h * h)
    raise StencilError(f"order must be 1 or 2, got {order}")
