"""Parameters, the emission probability q(x), the gain/loss ratio w(x), and
exact stationary photon distributions.

All photon-number dependence enters through the scaled variable ``x = n/N``.
Exact zeros of ``sin`` (trapping points) are preserved: phases within a few
ulps of a multiple of pi are snapped, so that ``q`` vanishes bitwise there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from .errors import DivergenceError, DomainError, InvalidParameterError, TruncationError

__all__ = [
    "MaserParams",
    "PhysicalParams",
    "PhotonDistribution",
    "Moments",
    "from_physical",
    "q",
    "q_prime",
    "ratio_r",
    "w",
    "theta_eff",
    "theta_eff_sq",
    "stationary_distribution",
    "moments",
    "thermal_distribution",
    "thermal_mean",
]

_SNAP_ULPS = 16.0


@dataclass(frozen=True)
class MaserParams:
    """Dimensionless parameter point of the micromaser.

    Parameters
    ----------
    a : float
        Probability that an injected atom is excited, ``0 <= a <= 1``.
    n_b : float
        Mean thermal photon number of the cavity walls.
    Delta : float
        Scaled detuning, ``Delta**2 = delta**2 / N``.
    theta : float
        Pump parameter ``g * tau * sqrt(N)``.
    N : float
        Atoms injected per cavity lifetime.
    """

    a: float = 1.0
    n_b: float = 0.15
    Delta: float = 0.0
    theta: float = 1.0
    N: float = 100.0

    def __post_init__(self):
        for name in ("a", "n_b", "Delta", "theta", "N"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidParameterError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, float(v))
        if not 0.0 <= self.a <= 1.0:
            raise InvalidParameterError(f"a must lie in [0, 1], got {self.a}")
        if self.n_b < 0:
            raise InvalidParameterError(f"n_b must be >= 0, got {self.n_b}")
        if self.theta < 0:
            raise InvalidParameterError(f"theta must be >= 0, got {self.theta}")
        if self.N <= 0:
            raise InvalidParameterError(f"N must be > 0, got {self.N}")

    @property
    def b(self) -> float:
        return 1.0 - self.a

    @property
    def gain(self) -> float:
        """The recurring combination ``a + n_b (2a - 1)``."""
        return self.a + self.n_b * (2.0 * self.a - 1.0)

    def with_(self, **changes) -> "MaserParams":
        """Copy with some fields replaced."""
        d = {k: getattr(self, k) for k in ("a", "n_b", "Delta", "theta", "N")}
        d.update(changes)
        return MaserParams(**d)


@dataclass(frozen=True)
class PhysicalParams:
    """Laboratory inputs; ``delta_omega`` is the atom-field detuning."""

    g: float
    tau: float
    R: float
    gamma: float
    delta_omega: float = 0.0

    def __post_init__(self):
        for name in ("g", "tau", "R", "gamma"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidParameterError(f"{name} must be positive, got {v}")
        if not math.isfinite(self.delta_omega):
            raise InvalidParameterError("delta_omega must be finite")


def from_physical(phys: PhysicalParams, a: float = 1.0, n_b: float = 0.15) -> MaserParams:
    """Map laboratory parameters to the dimensionless point.

    ``N = R/gamma``, ``theta = g tau sqrt(N)``, ``delta = delta_omega/(2g)`` and
    ``Delta = delta/sqrt(N)``; ``a`` and ``n_b`` describe the atom preparation and
    the cavity temperature and are passed through.
    """
    N = phys.R / phys.gamma
    theta = phys.g * phys.tau * math.sqrt(N)
    delta = phys.delta_omega / (2.0 * phys.g)
    return MaserParams(a=a, n_b=n_b, Delta=delta / math.sqrt(N), theta=theta, N=N)


def _snapped_sinc(u: np.ndarray) -> np.ndarray:
    """``sin(u)/u`` with exact zeros at numerically exact multiples of pi."""
    s = np.sinc(u / np.pi)
    j = np.rint(u / np.pi)
    near = (j != 0) & (np.abs(u - j * np.pi) <= _SNAP_ULPS * np.finfo(float).eps * np.abs(u))
    return np.where(near, 0.0, s)


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("x must be non-negative")
    return x


def ratio_r(x, theta: float, Delta: float):
    """``q(x)/x = theta**2 sinc**2(theta sqrt(x + Delta**2))``; finite at x = 0."""
    x = _check_x(x)
    u = theta * np.sqrt(x + Delta * Delta)
    return theta * theta * _snapped_sinc(u) ** 2


def q(x, theta: float, Delta: float = 0.0):
    """Probability that an atom changes state while crossing the cavity.

    ``q(x) = x/(x + Delta**2) sin**2(theta sqrt(x + Delta**2))``, written as
    ``x * theta**2 * sinc**2`` so that no 0/0 occurs at ``x = 0``.
    """
    x = _check_x(x)
    out = x * ratio_r(x, theta, Delta)
    return out if out.ndim else float(out)


def q_prime(x, theta: float, Delta: float = 0.0):
    """Derivative ``dq/dx``."""
    x = _check_x(x)
    s2 = x + Delta * Delta
    u = theta * np.sqrt(s2)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (Delta * Delta * theta * theta / s2) * np.sinc(u / np.pi) ** 2 \
            + (x * theta * theta / s2) * np.sinc(2 * u / np.pi)
    val = np.where(s2 == 0, theta * theta, val)
    return val if val.ndim else float(val)


def theta_eff_sq(theta, Delta: float):
    """``theta_eff**2 = theta**2 sin**2(theta Delta)/(theta Delta)**2``."""
    theta = np.asarray(theta, dtype=float)
    out = theta * theta * _snapped_sinc(theta * abs(Delta)) ** 2
    return out if out.ndim else float(out)


def theta_eff(theta, Delta: float):
    """Effective pump parameter felt by the thermal phase."""
    return np.sqrt(theta_eff_sq(theta, Delta))


def w(x, params: MaserParams):
    """Gain/loss ratio ``(n_b x + a q)/((1 + n_b) x + b q)``.

    Evaluated as ``(n_b + a r)/(1 + n_b + b r)`` with ``r = q/x``, whose
    denominator is at least 1, so the ``x -> 0`` limit needs no special case.
    """
    r = ratio_r(x, params.theta, params.Delta)
    out = (params.n_b + params.a * r) / (1.0 + params.n_b + params.b * r)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PhotonDistribution:
    """Truncated stationary photon-number distribution.

    Attributes
    ----------
    log_weights : ndarray
        Unnormalized log-probabilities for ``n = 0..n_max``, shifted so the
        maximum is 0; exact zeros are ``-inf``.
    probs : ndarray
        Normalized probabilities.
    n_max : int
        Largest retained photon number.
    tail_mass_bound : float
        Upper bound on the probability of ``n > n_max``.
    params : MaserParams or None
        Parameter point the distribution was built for.
    """

    log_weights: np.ndarray
    probs: np.ndarray
    n_max: int
    tail_mass_bound: float
    params: MaserParams | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.n_max + 1)

    @property
    def mean(self) -> float:
        return moments(self).mean

    @property
    def variance(self) -> float:
        return moments(self).variance


class Moments(NamedTuple):
    mean: float
    variance: float
    cumulative: np.ndarray
    mean_q: float


def _log_ratios(params: MaserParams, n: np.ndarray) -> np.ndarray:
    # p_n / p_{n-1} = w(n/N) exactly.
    r = ratio_r(n / params.N, params.theta, params.Delta)
    with np.errstate(divide="ignore"):
        return np.log(params.n_b + params.a * r) - np.log1p(params.n_b + params.b * r)


def log_weights(params: MaserParams, n_max: int) -> np.ndarray:
    """Unnormalized ``log p_n`` for ``n = 0..n_max`` with ``log p_0 = 0``.

    The running sum is accumulated in extended precision.
    """
    lr = _log_ratios(params, np.arange(1, n_max + 1, dtype=float))
    out = np.empty(n_max + 1, dtype=np.longdouble)
    out[0] = 0.0
    np.cumsum(lr.astype(np.longdouble), out=out[1:])
    return out


def _tail_ratio_bound(params: MaserParams, n_max: int) -> float:
    """Upper bound on ``w(n/N)`` for all ``n > n_max``."""
    if params.gain <= 0:
        r = 0.0  # w decreases with r
    else:
        x = (n_max + 1) / params.N
        r = min(params.theta ** 2, 1.0 / (x + params.Delta ** 2))
    return (params.n_b + params.a * r) / (1.0 + params.n_b + params.b * r)


def _initial_n_max(params: MaserParams) -> int:
    N, a = params.N, params.a
    guess = N * (2 * a - 1 + params.Delta ** 2) + 12 * math.sqrt(N * params.n_b + N) + 40
    return int(math.ceil(max(64.0, guess)))


def stationary_distribution(params: MaserParams, tol: float = 1e-14,
                            max_n: int = 1 << 24) -> PhotonDistribution:
    """Exact stationary distribution of the one-step master equation.

    ``p_n = p_0 prod_{m=1..n} w(m/N)``, accumulated in log space. The truncation
    point doubles until the last weight is ``e**-36`` below the peak and a
    geometric bound on the discarded tail is below ``tol``.

    Raises
    ------
    TruncationError
        If no admissible truncation below ``max_n`` exists.
    """
    if tol <= 0:
        raise InvalidParameterError("tol must be positive")
    n_max = _initial_n_max(params)
    while True:
        lw = log_weights(params, n_max)
        top = lw.max()
        last = lw[-1]
        log_z = logsumexp(np.asarray(lw - top, dtype=float))
        rb = _tail_ratio_bound(params, n_max)
        if last == -np.inf:
            tail = 0.0
        elif rb < 1:
            tail = float(np.exp(float(last - top) - log_z)) * rb / (1 - rb)
        else:
            tail = np.inf
        if (last == -np.inf or last < top - 36) and tail < tol:
            break
        if 2 * n_max > max_n:
            raise TruncationError(f"no truncation below n = {max_n} reaches tol = {tol}")
        n_max *= 2
    shifted = np.asarray(lw - top, dtype=float)
    probs = np.exp(shifted - log_z)
    return PhotonDistribution(shifted, probs, n_max, float(tail), params)


def moments(dist: PhotonDistribution) -> Moments:
    """Mean, variance, cumulative ``P_n = sum_{m<n} p_m`` and ``<q_n>``.

    ``cumulative`` has ``n_max + 2`` entries so that ``P_{n_max+1} = 1``.
    """
    cached = dist._cache.get("moments")
    if cached is not None:
        return cached
    p = dist.probs
    n = np.arange(p.size, dtype=float)
    mean = float(n @ p)
    var = float(((n - mean) ** 2) @ p)
    cum = np.concatenate([[0.0], np.cumsum(p)])
    if dist.params is not None:
        mq = float(q(n / dist.params.N, dist.params.theta, dist.params.Delta) @ p)
    else:
        mq = float("nan")
    m = Moments(mean, var, cum, mq)
    dist._cache["moments"] = m
    return m


def thermal_distribution(params: MaserParams, tol: float = 1e-14) -> PhotonDistribution:
    """Geometric distribution of the thermal phase.

    Ratio ``(n_b + a T)/(1 + n_b + b T)`` with ``T = theta_eff**2``; valid while
    ``T (2a - 1) < 1``.

    Raises
    ------
    DivergenceError
        If ``T (2a - 1) >= 1``.
    """
    t = theta_eff_sq(params.theta, params.Delta)
    if t * (2 * params.a - 1) >= 1:
        raise DivergenceError("thermal series diverges: theta_eff^2 (2a-1) >= 1")
    r = (params.n_b + params.a * t) / (1 + params.n_b + params.b * t)
    if r == 0:
        return PhotonDistribution(np.array([0.0]), np.array([1.0]), 0, 0.0, params)
    n_max = max(1, int(math.ceil(math.log(tol * (1 - r)) / math.log(r))))
    n = np.arange(n_max + 1)
    lw = n * math.log(r)
    probs = (1 - r) * np.exp(lw)
    return PhotonDistribution(lw, probs, n_max, float(r ** (n_max + 1)), params)


def thermal_mean(params: MaserParams) -> float:
    """Closed-form ``<n>`` of the thermal phase, ``(n_b + a T)/(1 + (1 - 2a) T)``."""
    t = theta_eff_sq(params.theta, params.Delta)
    den = 1 + (1 - 2 * params.a) * t
    if den <= 0:
        raise DivergenceError("thermal series diverges: theta_eff^2 (2a-1) >= 1")
    return (params.n_b + params.a * t) / den
