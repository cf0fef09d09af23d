"""Trapping states and their imprint on the order parameter and correlations.

With ``n_b = 0`` the up rate from ``m - 1`` vanishes whenever
``theta sqrt(m/N + Delta^2) = k pi``; the cavity cannot be pumped past ``m``
photons. These pump values are ``theta_tr(m, k) = k pi / sqrt(m/N + Delta^2)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import MaserParams, moments, stationary_distribution, thermal_mean, w
from .correlation import exact_correlation
from .errors import DomainError
from .potential import enumerate_saddles

__all__ = [
    "TrappingState",
    "Dip",
    "trapping_thetas",
    "theta_tr_min",
    "x_of_trapping",
    "std_x",
    "order_parameter_scan",
    "dip_scan",
    "correlation_trapping_scan",
    "local_peaks",
]


@dataclass(frozen=True)
class TrappingState:
    m: int
    k: int
    theta_tr: float
    x_tr: float


def trapping_thetas(N: float, Delta: float, theta_window: tuple[float, float],
                    x_max: float = 1.0) -> list[TrappingState]:
    """All trapping pump values in ``theta_window`` with ``0 < x_tr = m/N <= x_max``.

    Sorted by ``theta``; ``m = 0`` only contributes when ``Delta != 0``.
    """
    if N <= 0:
        raise DomainError("N must be positive")
    lo, hi = theta_window
    if hi <= 0 or hi < lo:
        return []
    d2 = Delta * Delta
    out = []
    k = 1
    while k * math.pi / math.sqrt(x_max + d2) <= hi:
        # lo <= k pi / sqrt(m/N + d2) <= hi  <=>  (k pi/hi)^2 <= m/N + d2 <= (k pi/lo)^2
        m_lo = max(0, math.ceil(N * ((k * math.pi / hi) ** 2 - d2) - 1e-9))
        m_hi = math.floor(N * x_max + 1e-9)
        if lo > 0:
            m_hi = min(m_hi, math.floor(N * ((k * math.pi / lo) ** 2 - d2) + 1e-9))
        for m in range(m_lo, m_hi + 1):
            x = m / N
            if x + d2 == 0:
                continue
            th = k * math.pi / math.sqrt(x + d2)
            if lo <= th <= hi:
                out.append(TrappingState(m, k, th, x))
        k += 1
    return sorted(out, key=lambda s: (s.theta_tr, s.k))


def theta_tr_min(Delta: float) -> float:
    """Smallest trapping pump value for ``x <= 1``: ``pi/sqrt(1 + Delta^2)``."""
    return math.pi / math.sqrt(1 + Delta * Delta)


def x_of_trapping(theta, Delta: float, k: int):
    """``x_k(theta) = (k pi/theta)^2 - Delta^2``; negative (unphysical) values become ``nan``."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0):
        raise DomainError("theta must be positive")
    x = (k * math.pi / theta) ** 2 - Delta * Delta
    x = np.where(x < 0, np.nan, x)
    return x if x.ndim else float(x)


def std_x(params: MaserParams) -> float:
    """Exact standard deviation of ``x = n/N``."""
    m = moments(stationary_distribution(params))
    return math.sqrt(max(m.variance, 0.0)) / params.N


def _map(fn, items, workers: int):
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


def order_parameter_scan(params: MaserParams, thetas, workers: int = 1) -> np.ndarray:
    """Exact ``<x>`` along a grid of pump values."""
    def one(th):
        return moments(stationary_distribution(params.with_(theta=float(th)))).mean / params.N
    return np.array(_map(one, list(np.asarray(thetas, dtype=float)), workers))


def local_peaks(values) -> np.ndarray:
    """Indices of strict interior local maxima."""
    v = np.asarray(values, dtype=float)
    return np.flatnonzero((v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])) + 1


@dataclass(frozen=True)
class Dip:
    """A local minimum of ``<x>(theta)`` and the trapping state closest to it.

    ``depth`` is ``baseline - x`` where ``baseline`` is the mean-field branch
    value the distribution sits under.
    """

    theta: float
    x: float
    baseline: float
    depth: float
    nearest: TrappingState | None
    distance: float


def _mean_field_x(params: MaserParams, x_exact: float) -> float:
    """Locally stable mean-field value (maser branch or thermal) closest to ``x_exact``."""
    xs = [s.x for s in enumerate_saddles(params, with_potential=False) if s.is_minimum]
    if w(0.0, params) < 1:
        xs.append(thermal_mean(params) / params.N)
    if not xs:
        return 0.0
    return min(xs, key=lambda v: abs(v - x_exact))


def dip_scan(params: MaserParams, thetas, threshold: float = 1e-4, workers: int = 1,
             x=None) -> list[Dip]:
    """Locate trapping dips of the exact order parameter along ``thetas``.

    A grid point is a dip when ``<x>`` is below both neighbours and more than
    ``threshold`` below the mean-field branch value at that pump. Each dip is
    matched to the nearest trapping pump value.

    Parameters
    ----------
    params : MaserParams
        Fixed parameters; ``theta`` is ignored and ``n_b`` must be zero.
    thetas : array_like
        Increasing pump grid.
    x : array_like, optional
        Precomputed ``<x>`` on ``thetas``.
    """
    if params.n_b != 0:
        raise DomainError("trapping needs n_b = 0")
    thetas = np.asarray(thetas, dtype=float)
    if x is None:
        x = order_parameter_scan(params, thetas, workers)
    x = np.asarray(x, dtype=float)
    step = float(np.min(np.diff(thetas))) if thetas.size > 1 else 0.0
    traps = trapping_thetas(params.N, params.Delta,
                            (max(thetas[0] - step, 1e-9), thetas[-1] + step))
    tr = np.array([t.theta_tr for t in traps])
    dips = []
    for i in range(1, x.size - 1):
        if not (x[i] < x[i - 1] and x[i] < x[i + 1]):
            continue
        base = _mean_field_x(params.with_(theta=float(thetas[i])), float(x[i]))
        depth = base - x[i]
        if depth <= threshold:
            continue
        if tr.size:
            j = int(np.argmin(np.abs(tr - thetas[i])))
            near, dist = traps[j], float(abs(tr[j] - thetas[i]))
        else:
            near, dist = None, math.inf
        dips.append(Dip(float(thetas[i]), float(x[i]), float(base), float(depth), near, dist))
    return dips


def correlation_trapping_scan(N_list, thetas, a: float = 1.0, Delta: float = 0.0,
                              n_b: float = 0.0, workers: int = 1) -> dict:
    """Exact ``log(gamma xi)`` along ``thetas`` for each ``N``.

    Returns ``{N: (log_xi, peak_thetas)}``.
    """
    if n_b != 0:
        raise DomainError("trapping needs n_b = 0")
    thetas = np.asarray(thetas, dtype=float)
    out = {}
    for N in N_list:
        base = MaserParams(a=a, n_b=0.0, Delta=Delta, theta=1.0, N=N)
        lx = np.array(_map(lambda th: exact_correlation(base.with_(theta=float(th))).log_xi,
                           list(thetas), workers))
        out[N] = (lx, thetas[local_peaks(lx)])
    return out
