"""Critical lines, phase classification and the order parameter.

Phases are decided by the global minimum of ``V0``: the thermal point
``x = 0`` (``V0 = 0``) or a minimum on one of the maser branches. Critical
pump values follow from comparing branch minima along their ``phi``
parametrization, which keeps every root search one-dimensional.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .core import MaserParams, moments, stationary_distribution, theta_eff_sq, thermal_mean, w
from .errors import (DivergenceError, DomainError, NoCrossingError, NoMaserBranchError,
                     NoTransitionError)
from .potential import (_monotone_pieces, _one_minus_phi_cot, _solve_on_piece, branch_interval,
                        enumerate_saddles, phi0, tan_root, theta_of_phi, v0_on_branch, x_of_phi)

__all__ = [
    "PhasePoint",
    "PhaseBoundary",
    "PhaseDiagram",
    "TriplePoint",
    "ThermalProfile",
    "theta0_star",
    "theta_k",
    "theta_maser_maser",
    "theta_thermal_maser",
    "theta_maser_thermal",
    "critical_detuning",
    "triple_points",
    "classify",
    "dxdtheta",
    "thermal_mean_profile",
    "thermal_extrema",
    "order_parameter_vs_a",
    "count_steps",
    "phase_diagram",
]


def _c(a: float) -> float:
    if a <= 0.5:
        raise NoMaserBranchError(f"no maser branch for a = {a} <= 1/2")
    return math.sqrt(2 * a - 1)


def theta0_star(a: float, Delta: float) -> float:
    """Pump at which the first maser extremum appears.

    ``arcsin(|Delta|/sqrt(2a-1))/|Delta|``, tending to ``1/sqrt(2a-1)`` at zero detuning.
    """
    D = abs(Delta)
    if a <= 0.5 + D * D / 2:
        raise NoTransitionError(f"no thermal-maser transition for a = {a}, |Delta| = {D}")
    c = math.sqrt(2 * a - 1)
    if D < 1e-6:
        return (1 + D * D / (6 * c * c)) / c
    return math.asin(D / c) / D


def theta_k(a: float, k: int) -> float:
    """Pump at which branch ``k >= 1`` is born (its minimum and maximum split off)."""
    c = _c(a)
    pk = tan_root(k)
    return pk / (c * abs(math.sin(pk)))


def theta_maser_thermal(a: float, Delta: float, k: int) -> float:
    """Second-order exit of branch ``k`` into the thermal phase, ``((k+1)pi - phi0)/|Delta|``.

    Returns ``inf`` at zero detuning, where the branch never reaches ``x = 0``.
    """
    D = abs(Delta)
    if a <= 0.5 + D * D / 2:
        raise NoTransitionError(f"branch {k} does not exist for a = {a}, |Delta| = {D}")
    if D == 0:
        return math.inf
    return ((k + 1) * math.pi - phi0(a, D)) / D


# -- branch minima as functions of theta ------------------------------------

def _min_piece(k: int, a: float, Delta: float) -> tuple[float, float]:
    return _monotone_pieces(k, a, Delta)[-1]


def _min_phi(theta: float, a: float, Delta: float, k: int) -> float | None:
    """``phi`` of the branch-``k`` minimum at pump ``theta``, or None if absent."""
    left, right = _min_piece(k, a, Delta)
    r = _solve_on_piece(theta, math.sqrt(2 * a - 1), left, right)
    if r is None or x_of_phi(r, a, Delta) <= 0:
        return None
    return r


def _vmin(theta: float, a: float, n_b: float, Delta: float, k: int):
    phi = _min_phi(theta, a, Delta, k)
    if phi is None:
        return None, None
    return phi, v0_on_branch(phi, a, n_b, Delta)


def _lower_competitor(theta: float, a: float, n_b: float, Delta: float, level: float,
                      skip: Iterable[int], tol: float = 1e-9) -> bool:
    """True if some other minimum (or the thermal point) lies below ``level``."""
    p = MaserParams(a=a, n_b=n_b, Delta=Delta, theta=theta)
    skip = set(skip)
    if w(0.0, p) <= 1 and 0.0 < level - tol and -1 not in skip:
        return True
    for s in enumerate_saddles(p):
        if s.is_minimum and s.branch_k not in skip and s.V0 < level - tol:
            return True
    return False


def _sign_changes(values: Sequence[float | None], direction: int):
    """Index pairs ``(i, j)`` of consecutive defined samples whose sign flips.

    ``direction=+1`` keeps negative-to-positive flips, ``-1`` the reverse.
    """
    idx = [i for i, v in enumerate(values) if v is not None]
    out = []
    for i, j in zip(idx[:-1], idx[1:]):
        vi, vj = values[i], values[j]
        if direction > 0 and vi < 0 <= vj:
            out.append((i, j))
        elif direction < 0 and vi > 0 >= vj:
            out.append((i, j))
    return out


def _sample_phis(left: float, right: float, n: int) -> np.ndarray:
    span = right - left
    # Stay clear of both ends, where theta(phi) or x(phi) degenerate.
    return left + span * (0.5 + 0.5 * np.cos(np.linspace(np.pi, 0.0, n))) * (1 - 2e-3) + span * 1e-3


def theta_maser_maser(a: float, n_b: float, Delta: float, k: int, samples: int = 24,
                      phi_hint: float | None = None) -> float:
    """First-order transition between branches ``k`` and ``k+1``.

    The branch-``(k+1)`` minimum is parametrized by its ``phi``; at each sample
    the branch-``k`` minimum at the same ``theta`` is located and the gap
    ``G = V0_k - V0_{k+1}`` evaluated. A sign change of ``G`` from negative to
    positive is refined with Brent's method; the root is accepted only when
    no third minimum (or the thermal point) is lower.

    Raises
    ------
    NoCrossingError
        If no admissible crossing exists.
    """
    if a <= 0.5 or Delta * Delta >= 2 * a - 1:
        raise NoCrossingError("no maser branches")

    def gap(phi1: float):
        th = theta_of_phi(phi1, a)
        pk, vk = _vmin(th, a, n_b, Delta, k)
        if pk is None:
            return None
        return vk - v0_on_branch(phi1, a, n_b, Delta)

    left, right = _min_piece(k + 1, a, Delta)
    candidates = []
    if phi_hint is not None:
        h = 0.02 * (right - left)
        lo, hi = max(left, phi_hint - h), min(right, phi_hint + h)
        glo, ghi = gap(lo), gap(hi)
        if glo is not None and ghi is not None and glo < 0 <= ghi:
            candidates.append((lo, hi, glo, ghi))
    if not candidates:
        phis = _sample_phis(left, right, samples)
        if Delta != 0:
            # Branch k ends at theta_kt; the crossing can hide just before it.
            end = _solve_on_piece(theta_maser_thermal(a, Delta, k), math.sqrt(2 * a - 1), left, right)
            if end is not None:
                phis = np.sort(np.append(phis, end - 1e-9 * (right - left)))
        vals = [gap(p) for p in phis]
        candidates = [(phis[i], phis[j], vals[i], vals[j]) for i, j in _sign_changes(vals, +1)]
    for lo, hi, glo, ghi in candidates:
        root = brentq(lambda p: gap(p), lo, hi, xtol=1e-13, rtol=1e-15)
        th = theta_of_phi(root, a)
        level = v0_on_branch(root, a, n_b, Delta)
        if not _lower_competitor(th, a, n_b, Delta, level, skip=(k, k + 1)):
            return th
    raise NoCrossingError(f"branches {k} and {k + 1} do not meet at a global minimum")


def theta_thermal_maser(a: float, n_b: float, Delta: float, k: int, samples: int = 48) -> float:
    """First-order jump from the thermal phase onto branch ``k``.

    The branch-``k`` minimum potential is sampled along ``phi``; a crossing of
    ``V0 = 0`` from above is refined and accepted only if no other minimum is
    below zero there.

    Raises
    ------
    NoTransitionError
        If no admissible crossing exists (always the case at zero detuning).
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    if a <= 0.5 or Delta * Delta >= 2 * a - 1:
        raise NoTransitionError("no maser branches")
    left, right = _min_piece(k, a, Delta)
    phis = _sample_phis(left, right, samples)
    vals = [v0_on_branch(p, a, n_b, Delta) for p in phis]
    for i, j in _sign_changes(vals, -1):
        root = brentq(lambda p: v0_on_branch(p, a, n_b, Delta), phis[i], phis[j],
                      xtol=1e-13, rtol=1e-15)
        th = theta_of_phi(root, a)
        if not _lower_competitor(th, a, n_b, Delta, 0.0, skip=(k, -1)):
            return th
    raise NoTransitionError(f"branch {k} never becomes the global minimum from the thermal phase")


def _kt_gap(a: float, n_b: float, Delta: float, k: int):
    """``V0`` of the branch-``(k+1)`` minimum at the pump where branch ``k`` exits."""
    th = theta_maser_thermal(a, Delta, k)
    phi, v = _vmin(th, a, n_b, Delta, k + 1)
    return v


def critical_detuning(n_b: float, k: int, a: float = 1.0, samples: int = 48) -> float:
    """Detuning at which lobes ``k`` and ``k+1`` separate.

    Below it, branch ``k+1`` is already below the thermal level when branch
    ``k`` returns to ``x = 0``; above it, a thermal window opens between them.
    Solves ``V0_{k+1}(theta_kt(Delta)) = 0``, i.e.
    ``|Delta| = |sin phi*|/phi* ((k+1)pi - arcsin|Delta|)`` with ``phi*`` the
    vanishing branch-``(k+1)`` minimum.
    """
    c = math.sqrt(2 * a - 1)
    grid = np.linspace(0.01, 0.99 * c, samples)

    def h(D):
        v = _kt_gap(a, n_b, D, k)
        return 1.0 if v is None else v

    vals = [h(D) for D in grid]
    for i, j in _sign_changes(vals, +1):
        lo, hi = grid[i], grid[j]
        if _kt_gap(a, n_b, hi, k) is None:
            # Branch k+1 is born after theta_kt at hi; shrink to the defined part.
            g = lambda D: 1.0 if _kt_gap(a, n_b, D, k) is None else -1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if g(mid) < 0:
                    lo = mid
                else:
                    hi = mid
            if _kt_gap(a, n_b, hi, k) is None and h(lo) < 0:
                continue
        return brentq(h, lo, hi, xtol=1e-13, rtol=1e-15)
    raise NoTransitionError(f"lobes {k} and {k + 1} never separate for a = {a}")


@dataclass(frozen=True)
class TriplePoint:
    a: float
    theta: float
    k: int
    residual: float


def triple_points(n_b: float, Delta: float, k_max: int = 3, a_step: float = 1e-3) -> list[TriplePoint]:
    """Points where the thermal phase and branches ``k``, ``k+1`` are degenerate.

    At ``theta_kt(a)`` branch ``k`` has merged with ``x = 0``; the gap function
    ``V0_{k+1}(theta_kt(a), a)`` changes sign where lobes ``k`` and ``k+1``
    connect. The scan steps ``a`` by ``a_step`` and refines each sign change.
    """
    if Delta == 0:
        raise DomainError("triple points need nonzero detuning")
    a_lo = 0.5 + Delta * Delta / 2
    grid = np.arange(1.0, a_lo, -a_step)[::-1]
    grid = grid[grid > a_lo + 1e-9]
    out = []
    for k in range(k_max + 1):
        vals = []
        for a in grid:
            v = _kt_gap(a, n_b, Delta, k)
            vals.append(1.0 if v is None else v)
        for i, j in _sign_changes(vals, -1):
            lo, hi = grid[i], grid[j]
            if _kt_gap(a=hi, n_b=n_b, Delta=Delta, k=k) is None or _kt_gap(lo, n_b, Delta, k) is None:
                continue
            a_star = brentq(lambda a: _kt_gap(a, n_b, Delta, k), lo, hi, xtol=1e-12, rtol=1e-15)
            th = theta_maser_thermal(a_star, Delta, k)
            res = abs(_kt_gap(a_star, n_b, Delta, k))
            if _lower_competitor(th, a_star, n_b, Delta, 0.0, skip=(k, k + 1, -1), tol=1e-8):
                continue
            out.append(TriplePoint(float(a_star), float(th), k, float(res)))
    return sorted(out, key=lambda t: t.theta)


# -- classification and order parameter -------------------------------------

@dataclass(frozen=True)
class PhasePoint:
    """Phase of a parameter point.

    ``branch`` is the maser branch index (None in the thermal phase) and
    ``competitors`` lists the degenerate minima in a coexistence region, with
    ``-1`` standing for the thermal point.
    """

    params: MaserParams
    phase: str
    branch: int | None
    order_parameter: float
    slope: float
    v0_min: float
    competitors: tuple = ()


def dxdtheta(phi: float, a: float) -> float:
    """Slope of the maser order parameter along a branch.

    ``2 (2a-1)^{3/2} |sin phi|^3 / (tan phi - phi)``; infinite where a branch is born.
    """
    c = _c(a)
    den = math.tan(phi) - phi
    if den == 0:
        return math.inf
    return 2 * c ** 3 * abs(math.sin(phi)) ** 3 / den


def _thermal_slope(params: MaserParams) -> float:
    t = theta_eff_sq(params.theta, params.Delta)
    dt = 2 * params.theta * float(np.sinc(2 * params.theta * abs(params.Delta) / np.pi))
    den = 1 + (1 - 2 * params.a) * t
    if den == 0:
        return math.inf
    return params.gain / den ** 2 * dt / params.N


def classify(params: MaserParams, coexistence_tol: float | None = None) -> PhasePoint:
    """Phase decided by the global minimum of ``V0``.

    Two candidates within ``coexistence_tol`` (default ``10/N``) of the lowest
    value are reported as coexisting; the order parameter is then the
    saddle-mass-weighted mean of their positions.
    """
    N = params.N
    tol = 10.0 / N if coexistence_tol is None else coexistence_tol
    w0 = float(w(0.0, params))
    cands = []  # (V0, key, x, curvature, phi)
    if w0 <= 1:
        try:
            x_th = thermal_mean(params) / N
        except DivergenceError:
            x_th = math.nan
        cands.append((0.0, -1, x_th, math.nan, math.nan))
    for s in enumerate_saddles(params):
        if s.is_minimum:
            cands.append((s.V0, s.branch_k, s.x, s.curvature, s.phi))
    cands.sort(key=lambda c: c[0])
    best = cands[0]
    close = [c for c in cands if c[0] - best[0] < tol]
    if len(close) > 1:
        lm = []
        for v, key, x, curv, _ in close:
            if key == -1:
                lm.append(-math.log1p(-w0) if w0 < 1 else 0.0)
            else:
                lm.append(-N * v + 0.5 * math.log(2 * math.pi * N / curv) - 0.5 * math.log(max(w0, 1e-300)))
        lm = np.array(lm)
        wt = np.exp(lm - lm.max())
        wt /= wt.sum()
        xs = np.array([c[2] for c in close])
        return PhasePoint(params, "coexistence", None, float(wt @ xs), math.nan, best[0],
                          tuple(c[1] for c in close))
    v, key, x, curv, phi = best
    if key == -1:
        return PhasePoint(params, "thermal", None, x, _thermal_slope(params), 0.0)
    return PhasePoint(params, "maser", key, x, dxdtheta(phi, params.a), v)


@dataclass(frozen=True)
class ThermalProfile:
    theta: np.ndarray
    mean_n: np.ndarray
    valid: np.ndarray


def thermal_mean_profile(a: float, n_b: float, Delta: float, thetas) -> ThermalProfile:
    """Thermal ``<n>(theta)``; points where the geometric series diverges are flagged.

    With nonzero detuning the profile is periodic in ``theta`` with period
    ``pi/|Delta|`` (the twinkling mode).
    """
    thetas = np.asarray(thetas, dtype=float)
    t = theta_eff_sq(thetas, Delta)
    den = 1 + (1 - 2 * a) * t
    valid = den > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        mean = np.where(valid, (n_b + a * t) / den, np.nan)
    return ThermalProfile(thetas, mean, valid)


def thermal_extrema(a: float, n_b: float, Delta: float) -> tuple[float, float]:
    """Largest and smallest thermal ``<n>`` over one twinkling period."""
    if Delta == 0:
        raise DomainError("the thermal profile is periodic only for nonzero detuning")
    d2 = Delta * Delta
    den = 1 + (1 - 2 * a) / d2
    if den <= 0:
        raise DivergenceError("thermal series diverges at the profile maximum")
    return (n_b + a / d2) / den, n_b


def order_parameter_vs_a(n_b: float, Delta: float, theta: float, N: float, a_grid,
                         workers: int = 1) -> np.ndarray:
    """Exact finite-``N`` order parameter ``<n>/N`` along a grid in ``a``."""
    def one(a):
        d = stationary_distribution(MaserParams(a=a, n_b=n_b, Delta=Delta, theta=theta, N=N))
        return moments(d).mean / N

    a_grid = list(np.asarray(a_grid, dtype=float))
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return np.array(list(ex.map(one, a_grid)))
    return np.array([one(a) for a in a_grid])


def count_steps(grid, values, min_jump: float = 0.01, slope_factor: float = 4.0) -> list[float]:
    """Locations of step-like jumps in a sampled curve.

    A step is a run of consecutive intervals whose slope exceeds
    ``slope_factor`` times the median absolute slope and whose total rise is at
    least ``min_jump``. Returns the grid midpoint of the steepest interval of
    each run.
    """
    x = np.asarray(grid, dtype=float)
    y = np.asarray(values, dtype=float)
    s = np.diff(y) / np.diff(x)
    ref = np.median(np.abs(s))
    steep = np.abs(s) > slope_factor * max(ref, 1e-12)
    steps = []
    i = 0
    while i < s.size:
        if not steep[i]:
            i += 1
            continue
        j = i
        while j + 1 < s.size and steep[j + 1]:
            j += 1
        if abs(y[j + 1] - y[i]) >= min_jump:
            m = i + int(np.argmax(np.abs(s[i:j + 1])))
            steps.append(0.5 * (x[m] + x[m + 1]))
        i = j + 1
    return steps


# -- phase diagram -----------------------------------------------------------

@dataclass
class PhaseBoundary:
    """A critical line as a polyline of ``(theta, a)`` vertices sorted by ``a``."""

    kind: str
    k: int | None
    points: list = field(default_factory=list)
    residuals: list = field(default_factory=list)

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=float).reshape(-1, 2)


@dataclass
class PhaseDiagram:
    boundaries: list
    triple_points: list
    validity: list

    def boundary(self, kind: str, k: int | None = None) -> PhaseBoundary | None:
        for b in self.boundaries:
            if b.kind == kind and b.k == k:
                return b
        return None


def _boundaries_at(a: float, n_b: float, Delta: float, k_max: int, hints: dict):
    """All boundary vertices at one value of ``a`` as ``(kind, k, theta, residual)``."""
    D = abs(Delta)
    out = []
    if a <= 0.5 + D * D / 2:
        return out, {}
    c = math.sqrt(2 * a - 1)
    new_hints = {}
    th0 = theta0_star(a, D)
    res0 = abs(th0 * c - 1) if D == 0 else abs(math.sin(th0 * D) - D / c)
    out.append(("second_order_thermal_maser", 0, th0, res0))
    for k in range(k_max + 1):
        try:
            th = theta_maser_maser(a, n_b, D, k, phi_hint=hints.get(k))
            phi1 = _min_phi(th, a, D, k + 1)
            new_hints[k] = phi1
            pk = _min_phi(th, a, D, k)
            res = abs(v0_on_branch(pk, a, n_b, D) - v0_on_branch(phi1, a, n_b, D))
            out.append(("first_order_maser_maser", k, th, res))
            continue
        except NoCrossingError:
            pass
        if D == 0:
            continue
        thkt = theta_maser_thermal(a, D, k)
        out.append(("second_order_maser_thermal", k, thkt,
                    abs(thkt * D - ((k + 1) * math.pi - phi0(a, D)))))
        try:
            th = theta_thermal_maser(a, n_b, D, k + 1)
            ph = _min_phi(th, a, D, k + 1)
            out.append(("first_order_thermal_maser", k + 1, th, abs(v0_on_branch(ph, a, n_b, D))))
        except NoTransitionError:
            pass
    return out, new_hints


def _validity_lines(a_grid, Delta: float, theta_max: float) -> list[PhaseBoundary]:
    """Curves where the thermal series stops converging, ``(2a-1) theta_eff^2 = 1``.

    With detuning this is the family ``theta |Delta| = j pi +- phi0``; line
    ``2j`` is the ``+`` root and ``2j + 1`` the ``-`` root of period ``j``.
    """
    D = abs(Delta)
    lines: dict[int, PhaseBoundary] = {}
    for a in a_grid:
        if a <= 0.5:
            continue
        c = math.sqrt(2 * a - 1)
        if D == 0:
            roots = [(0, 1 / c)]
        elif D / c < 1:
            p0 = math.asin(D / c)
            roots = []
            j = 0
            while (j * math.pi + p0) / D <= theta_max:
                roots.append((2 * j, (j * math.pi + p0) / D))
                roots.append((2 * j + 1, ((j + 1) * math.pi - p0) / D))
                j += 1
        else:
            continue
        for idx, th in roots:
            if th > theta_max:
                continue
            line = lines.setdefault(idx, PhaseBoundary("thermal_validity", idx))
            line.points.append((th, float(a)))
            res = abs(th * c - 1) if D == 0 else abs(math.sin(th * D) ** 2 * c * c - D * D)
            line.residuals.append(res)
    return [lines[i] for i in sorted(lines)]


def phase_diagram(n_b: float, Delta: float, a_grid=None, k_max: int = 3,
                  with_triple_points: bool = True, theta_max: float | None = None) -> PhaseDiagram:
    """Critical lines in the ``(theta, a)`` plane at fixed ``n_b`` and ``Delta``.

    For each ``a`` the onset ``theta0*`` is recorded and, per branch ``k``,
    either the maser-maser line ``theta*_{k,k+1}`` or (with detuning) the pair
    ``theta*_kt``, ``theta*_{t,k+1}``. The convergence boundary of the thermal
    series is returned separately as ``validity`` (one polyline per root,
    up to ``theta_max``, default the largest boundary value plus 10%).
    """
    if a_grid is None:
        a_grid = np.round(np.arange(0.5, 1.0 + 1e-9, 0.002), 12)
    a_grid = np.sort(np.round(np.asarray(a_grid, dtype=float), 12))
    lines: dict = {}
    hints: dict = {}
    for a in a_grid:
        verts, hints = _boundaries_at(float(a), n_b, Delta, k_max, hints)
        for kind, k, th, res in verts:
            key = (kind, k)
            if key not in lines:
                lines[key] = PhaseBoundary(kind, k)
            lines[key].points.append((th, float(a)))
            lines[key].residuals.append(res)
    order = ["second_order_thermal_maser", "first_order_maser_maser",
             "second_order_maser_thermal", "first_order_thermal_maser"]
    boundaries = sorted(lines.values(), key=lambda b: (order.index(b.kind), b.k))
    if theta_max is None:
        finite = [t for b in boundaries for t, _ in b.points if math.isfinite(t)]
        theta_max = 1.1 * max(finite) if finite else 30.0
    validity = _validity_lines(a_grid, Delta, theta_max)
    tps = triple_points(n_b, Delta, k_max=k_max) if (with_triple_points and Delta != 0) else []
    return PhaseDiagram(boundaries, tps, validity)
