"""Arrival-time eigenfunctions of the free particle and their evolution.

Momentum representation, the normalized even/odd (nonnodal/nodal) forms,
their closed-form position representation built on Kummer's 1F1, unitary
time evolution through the covariance shift tau -> tau - t, the collapse
density at t = Re(tau), and the large-|q| asymptotics used by quadrature
tail models.  All evaluators accept scalar or ndarray coordinates.

Conventions: Heaviside(0) = 1/2, sign(0) = 0, arrival point fixed at the
origin.  A state is normalizable only for Im(tau) > 0; operations on
normalized states reject other eigenvalues.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import ConvergenceError, DomainError, NormalizabilityError

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhysicalParams:
    """Mass and hbar, the only dimensional knobs (defaults 1)."""

    mu: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.mu > 0.0 and math.isfinite(self.mu)):
            raise ValueError(f"mu must be positive and finite, got {self.mu}")
        if not (self.hbar > 0.0 and math.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive and finite, got {self.hbar}")


@dataclass(frozen=True)
class Eigenvalue:
    """Complex arrival-time eigenvalue tau = tau_r + i tau_i.

    tau_i > 0 is required for normalizable states; tau_i = 0 is accepted
    only by the generalized-eigenfunction entry points (momentum kernel and
    the asymptotic form).
    """

    tau_r: float
    tau_i: float

    def __post_init__(self):
        if not (math.isfinite(self.tau_r) and math.isfinite(self.tau_i)):
            raise ValueError("eigenvalue components must be finite")
        if self.tau_i < 0.0:
            raise ValueError("tau_i < 0 grows exponentially and is unsupported")

    @property
    def value(self) -> complex:
        return complex(self.tau_r, self.tau_i)

    @property
    def is_normalizable(self) -> bool:
        return self.tau_i > 0.0


@dataclass(frozen=True)
class MomentumBranch:
    """Sign of the momentum support of a degenerate eigenfunction."""

    alpha: int = 1

    def __post_init__(self):
        if self.alpha not in (1, -1):
            raise ValueError(f"alpha must be +1 or -1, got {self.alpha}")


def _check_parity(n: int) -> int:
    if n not in (0, 1):
        raise ValueError(f"parity index must be 0 (even) or 1 (odd), got {n}")
    return n


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("coordinates must be finite")
    return arr, arr.ndim == 0


def _maybe_scalar(values, scalar: bool):
    if scalar:
        v = values[()]
        return complex(v) if np.iscomplexobj(values) else float(v)
    return values


def _require_normalizable(tau: Eigenvalue):
    if not tau.is_normalizable:
        raise NormalizabilityError(
            f"tau = {tau.value} has Im(tau) <= 0; state is not normalizable"
        )


def phi_momentum(p, tau: Eigenvalue, branch: MomentumBranch = MomentumBranch(), params: PhysicalParams = PhysicalParams()):
    """Unnormalized degenerate eigenfunction sqrt|p| e^{i p^2 tau / 2 mu hbar} H(alpha p)."""
    arr, scalar = _as_array(p)
    heav = np.where(branch.alpha * arr > 0, 1.0, np.where(arr == 0.0, 0.5, 0.0))
    phase = np.exp(1j * arr * arr * tau.value / (2.0 * params.mu * params.hbar))
    return _maybe_scalar(np.sqrt(np.abs(arr)) * phase * heav, scalar)


def varphi_momentum(p, tau: Eigenvalue, n: int, params: PhysicalParams = PhysicalParams()):
    """Unit-normalized even (n=0) or odd (n=1) eigenfunction in momentum space."""
    _check_parity(n)
    _require_normalizable(tau)
    arr, scalar = _as_array(p)
    amp = np.sqrt(np.abs(arr) * tau.tau_i / (params.mu * params.hbar))
    phase = np.exp(1j * arr * arr * tau.value / (2.0 * params.mu * params.hbar))
    out = amp * phase
    if n == 1:
        out = out * np.sign(arr)
    return _maybe_scalar(out, scalar)


def momentum_decay_rate(tau: Eigenvalue, params: PhysicalParams = PhysicalParams()) -> float:
    """Gaussian decay rate c of |varphi(p)|^2 = (tau_i/mu hbar) |p| e^{-c p^2}."""
    return tau.tau_i / (params.mu * params.hbar)


def normalization_constant(tau: Eigenvalue, n: int, params: PhysicalParams = PhysicalParams()) -> float:
    """Prefactor C_n of the position representation (real and positive)."""
    _check_parity(n)
    tau_abs = abs(tau.value)
    expo = 0.25 + 0.5 * n
    return (
        math.sqrt(8.0 * tau.tau_i * math.pi / tau_abs)
        / math.gamma(0.25 + 0.5 * n)
        * (params.mu / (8.0 * params.hbar * tau_abs)) ** expo
    )


def _hyp_args(n: int):
    return 0.75 + 0.5 * n, 0.5 + n


def _checked_hyp(a, b, z, policy):
    values, est, _, _, scale, _ = specfun.hyp1f1_grid(a, b, z, policy)
    abs_unc = est * np.abs(values)
    bad = abs_unc > policy.target_rel_err * scale
    if bad.any():
        i = int(np.argmax(np.where(bad, abs_unc / scale, 0.0)))
        raise ConvergenceError(
            f"1F1 accuracy target missed at z = {z.flat[i]} "
            f"(est_rel_err = {est.flat[i]:.3g})"
        )
    return values


def varphi_position(q, tau: Eigenvalue, n: int, params: PhysicalParams = PhysicalParams(),
                    policy: specfun.RegimePolicy = specfun.DEFAULT_POLICY):
    """Position representation C_n q^n 1F1(3/4+n/2; 1/2+n; -i mu q^2 / 2 hbar tau)."""
    _check_parity(n)
    _require_normalizable(tau)
    arr, scalar = _as_array(q)
    a, b = _hyp_args(n)
    z = (-1j * params.mu / (2.0 * params.hbar * tau.value)) * (arr * arr).astype(complex)
    vals = _checked_hyp(a, b, z, policy)
    out = normalization_constant(tau, n, params) * vals
    if n == 1:
        out = out * arr
    return _maybe_scalar(out, scalar)


def varphi_evolved(q, t: float, tau: Eigenvalue, n: int,
                   params: PhysicalParams = PhysicalParams(),
                   policy: specfun.RegimePolicy = specfun.DEFAULT_POLICY):
    """Time-evolved eigenfunction: tau -> tau - t everywhere, including |tau - t|.

    Exact covariance under time translation; t is real so Im(tau - t) stays
    positive and |tau - t| never vanishes.
    """
    if not math.isfinite(t):
        raise DomainError("time must be finite")
    return varphi_position(q, Eigenvalue(tau.tau_r - t, tau.tau_i), n, params, policy)


def collapse_density(q, tau: Eigenvalue, n: int, params: PhysicalParams = PhysicalParams(),
                     policy: specfun.RegimePolicy = specfun.DEFAULT_POLICY):
    """|varphi(q, t=tau_r)|^2: the real-argument closed form.

    8 pi q^{2n} Gamma((1+2n)/4)^{-2} [mu/(8 tau_i hbar)]^{1/2+n}
    1F1((3+2n)/4; 1/2+n; -mu q^2 / 2 hbar tau_i)^2, nonnegative.
    """
    _check_parity(n)
    _require_normalizable(tau)
    arr, scalar = _as_array(q)
    a, b = _hyp_args(n)
    z = (-params.mu / (2.0 * params.hbar * tau.tau_i)) * (arr * arr).astype(complex)
    vals = _checked_hyp(a, b, z, policy).real
    pref = (
        8.0 * math.pi / math.gamma((1.0 + 2.0 * n) / 4.0) ** 2
        * (params.mu / (8.0 * tau.tau_i * params.hbar)) ** (0.5 + n)
    )
    out = pref * arr ** (2 * n) * vals * vals
    return _maybe_scalar(out, scalar)


def _asymptotic_shape(arr, tau_c: complex, n: int, params: PhysicalParams):
    """Two-term-per-branch large-|q| form, without the normalization constant."""
    a, b = _hyp_args(n)
    mu_term = params.mu / (2.0 * params.hbar * tau_c)
    z = -1j * mu_term * arr * arr
    kappa1 = (-1j * mu_term) ** (0.25 - 0.5 * n)
    kappa2 = (1j * mu_term) ** (-0.75 - 0.5 * n)
    gb = specfun.gamma(b)
    ga_inv = specfun.recip_gamma(a)
    gba_inv = specfun.recip_gamma(b - a)
    aq = np.abs(arr)
    branch1 = np.sqrt(aq) * np.exp(z) * kappa1 * ga_inv * (1.0 + (a - 1.0) * (a - b) / z)
    branch2 = aq ** -1.5 * kappa2 * gba_inv * (1.0 - a * (a - b + 1.0) / z)
    out = gb * (branch1 + branch2)
    if n == 1:
        out = out * np.sign(arr)
    return out


_CROSSOVER_CACHE: dict = {}
_CROSSOVER_LOCK = threading.Lock()


def varphi_asymptotic(q, tau: Eigenvalue, n: int, params: PhysicalParams = PhysicalParams(),
                      threshold: float | None = None):
    """Large-|q| form of the eigenfunction (both branches, two terms each).

    Below the crossover threshold (default: the cached crossover point where
    this form matches the full evaluation to 1e-3) a DomainError is raised.
    tau_i = 0 is accepted: the oscillatory |q|^{1/2} branch then no longer
    decays, which is exactly the non-normalizable behaviour of real
    eigenvalues; since the sqrt(tau_i) normalization vanishes there, the
    returned value omits that factor for tau_i = 0.
    """
    _check_parity(n)
    arr, scalar = _as_array(q)
    if threshold is None:
        if not tau.is_normalizable:
            raise DomainError("an explicit threshold is required for tau_i = 0")
        threshold = asymptotic_crossover(tau, n, params)
    if np.any(np.abs(arr) < threshold):
        raise DomainError(f"asymptotic form needs |q| >= {threshold:.6g}")
    if tau.is_normalizable:
        scale = normalization_constant(tau, n, params)
    else:
        # real tau: the state is non-normalizable, keep the tau_i-free part
        tau_abs = abs(tau.value)
        scale = (
            math.sqrt(8.0 * math.pi / tau_abs)
            / math.gamma(0.25 + 0.5 * n)
            * (params.mu / (8.0 * params.hbar * tau_abs)) ** (0.25 + 0.5 * n)
        )
    return _maybe_scalar(scale * _asymptotic_shape(arr, tau.value, n, params), scalar)


def asymptotic_crossover(tau: Eigenvalue, n: int, params: PhysicalParams = PhysicalParams(),
                         rel: float = 1e-3) -> float:
    """Smallest |q| where the asymptotic form agrees with the full evaluation.

    Found once per (tau, n, params, rel) by a geometric scan plus bisection
    and cached; the cache is written under a lock and read concurrently.
    """
    _check_parity(n)
    _require_normalizable(tau)
    key = (tau.tau_r, tau.tau_i, n, params.mu, params.hbar, rel)
    hit = _CROSSOVER_CACHE.get(key)
    if hit is not None:
        return hit

    c_n = normalization_constant(tau, n, params)

    def agree(qv: float) -> bool:
        full = varphi_position(np.array([qv]), tau, n, params)[0]
        asym = c_n * _asymptotic_shape(np.array([qv]), tau.value, n, params)[0]
        return abs(full - asym) <= rel * abs(full)

    q0 = math.sqrt(2.0 * params.hbar * abs(tau.value) / params.mu)
    lo = 0.05 * q0
    hi = None
    qv = lo
    for _ in range(60):
        if agree(qv) and agree(1.2 * qv):
            hi = qv
            break
        lo = qv
        qv *= 1.5
    if hi is None:
        raise ConvergenceError("no crossover found within scan range")
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if agree(mid) and agree(1.2 * mid):
            hi = mid
        else:
            lo = mid
    with _CROSSOVER_LOCK:
        _CROSSOVER_CACHE[key] = hi
    return hi


def density_tail_coefficient(tau: Eigenvalue, n: int, t: float = 0.0,
                             params: PhysicalParams = PhysicalParams()) -> float:
    """Coefficient C of the algebraic density tail |varphi(q,t)|^2 -> C q^{-3}.

    From the q^{-3/2} branch of the asymptotic form; independent of parity in
    the power (the q^{2n} prefactor cancels against the branch exponent).
    """
    _check_parity(n)
    _require_normalizable(tau)
    tau_shift = Eigenvalue(tau.tau_r - t, tau.tau_i)
    a, b = _hyp_args(n)
    c_n = normalization_constant(tau_shift, n, params)
    mu_scale = params.mu / (2.0 * params.hbar * abs(tau_shift.value))
    amp = c_n * abs(specfun.gamma(b) * specfun.recip_gamma(b - a)) * mu_scale ** (-0.75 - 0.5 * n)
    return amp * amp
