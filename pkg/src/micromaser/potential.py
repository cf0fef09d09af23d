"""Large-N effective potential and its saddle-point branches.

For ``N -> inf`` the stationary distribution behaves as ``exp(-N V0(x))`` with
``V0(x) = -int_0^x ln w(nu) dnu``. The extrema satisfy ``w(x) = 1``, which is
solved parametrically:

    x + Delta**2 = (2a - 1) sin(phi)**2,    theta = phi / (sqrt(2a - 1) |sin phi|).

Branch ``k`` collects ``phi`` in ``[phi0 + k pi, (k + 1) pi - phi0]``. On a branch the
potential is most stably written with ``chi = theta sqrt(nu + Delta**2)``:

    V0 = -(2/theta**2) int_{theta |Delta|}^{phi} chi ln w(chi) dchi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .core import MaserParams, q, q_prime, theta_eff_sq, w
from .errors import DomainError, NoMaserBranchError, QuadratureSingularityError, ThermalPhaseError
from .quadrature import integrate, integrate_endpoint_singular

__all__ = [
    "SaddlePoint",
    "GaussianComponent",
    "GaussianMixture",
    "phi0",
    "tan_root",
    "branch_interval",
    "branch_index",
    "theta_of_phi",
    "x_of_phi",
    "curvature_phi",
    "branch_point",
    "v0_of_x",
    "v0_phi_theta",
    "v0_on_branch",
    "dv0_dtheta",
    "v0_second",
    "enumerate_saddles",
    "gaussian_mixture",
]

_RTOL = 1e-10
_ATOL = 1e-13


def _amp(a: float) -> float:
    if a <= 0.5:
        raise NoMaserBranchError(f"no maser branch for a = {a} <= 1/2")
    return math.sqrt(2.0 * a - 1.0)


def phi0(a: float, Delta: float) -> float:
    """Lower end of branch 0, ``arcsin(|Delta| / sqrt(2a - 1))``."""
    c = _amp(a)
    s = abs(Delta) / c
    if s > 1.0:
        raise NoMaserBranchError(f"|Delta| = {abs(Delta)} exceeds sqrt(2a-1) = {c}")
    return math.asin(s)


@lru_cache(maxsize=None)
def tan_root(k: int) -> float:
    """k-th positive root of ``tan(phi) = phi``, located in ``(k pi, k pi + pi/2)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    g = lambda p: math.sin(p) - p * math.cos(p)
    return brentq(g, k * math.pi, k * math.pi + math.pi / 2, xtol=1e-15, rtol=1e-15)


def branch_interval(k: int, a: float, Delta: float) -> tuple[float, float]:
    p0 = phi0(a, Delta)
    return p0 + k * math.pi, (k + 1) * math.pi - p0


def branch_index(phi: float, a: float, Delta: float) -> int:
    """Index of the branch containing ``phi``.

    Raises
    ------
    DomainError
        If ``phi`` falls in a gap between branches.
    """
    p0 = phi0(a, Delta)
    k = max(0, int(math.floor((phi - p0) / math.pi + 1e-12)))
    lo, hi = p0 + k * math.pi, (k + 1) * math.pi - p0
    tol = 1e-12 * max(1.0, abs(phi))
    if not (lo - tol <= phi <= hi + tol):
        raise DomainError(f"phi = {phi} lies outside every branch interval")
    return k


def theta_of_phi(phi, a: float):
    """Pump parameter at which ``phi`` is a saddle, ``phi / (sqrt(2a-1)|sin phi|)``."""
    phi = np.asarray(phi, dtype=float)
    with np.errstate(divide="ignore"):
        out = 1.0 / (_amp(a) * np.abs(np.sinc(phi / np.pi)))
    return out if out.ndim else float(out)


def x_of_phi(phi, a: float, Delta: float):
    phi = np.asarray(phi, dtype=float)
    out = (2 * a - 1) * np.sin(phi) ** 2 - Delta * Delta
    return out if out.ndim else float(out)


def _one_minus_phi_cot(phi: float) -> float:
    if abs(phi) < 1e-3:
        p2 = phi * phi
        return p2 / 3 + p2 * p2 / 45 + 2 * p2 ** 3 / 945
    return 1.0 - phi / math.tan(phi)


def curvature_phi(phi: float, a: float, n_b: float) -> float:
    """``V0''`` at the saddle labelled by ``phi``: ``(1 - phi cot phi)/(sin^2 phi (a + n_b(2a-1)))``."""
    gain = a + n_b * (2 * a - 1)
    if abs(phi) < 1e-3:
        # (1 - phi cot phi)/sin^2 phi -> 1/3 + 2 phi^2/45 + ...
        return (1 / 3 + 2 * phi * phi / 45) / gain
    return _one_minus_phi_cot(phi) / (math.sin(phi) ** 2 * gain)


def _log_w_chi(chi, theta, a, n_b):
    r = theta * theta * np.sinc(chi / np.pi) ** 2
    return np.log(n_b + a * r) - np.log1p(n_b + (1.0 - a) * r)


def _pi_breaks(lo: float, hi: float) -> list[float]:
    j0 = int(math.floor(lo / math.pi)) + 1
    j1 = int(math.ceil(hi / math.pi))
    return [j * math.pi for j in range(j0, j1)]


def v0_phi_theta(phi: float, theta: float, a: float, n_b: float, Delta: float) -> float:
    """``V0`` at ``x = (phi/theta)**2 - Delta**2`` for pump ``theta``, in the chi form."""
    if theta <= 0:
        raise DomainError("theta must be positive")
    lo = theta * abs(Delta)
    if phi < lo - 1e-15 * max(1.0, lo):
        raise DomainError("phi below theta |Delta| corresponds to x < 0")
    if phi <= lo:
        return 0.0
    if n_b == 0 and a == 0:
        raise QuadratureSingularityError("w vanishes identically for a = n_b = 0")
    f = lambda c: c * _log_w_chi(c, theta, a, n_b)
    if n_b == 0:
        # ln w has integrable log singularities at the trapping zeros chi = j pi.
        val, _ = integrate_endpoint_singular(f, lo, phi, rtol=_RTOL, atol=_ATOL,
                                             breakpoints=_pi_breaks(lo, phi))
    else:
        val, _ = integrate(f, lo, phi, rtol=_RTOL, atol=_ATOL,
                           breakpoints=_pi_breaks(lo, phi), max_width=math.pi / 2)
    return -2.0 * val / (theta * theta)


def v0_on_branch(phi: float, a: float, n_b: float, Delta: float) -> float:
    """Potential at the extremum labelled by ``phi`` (pump fixed by ``theta_of_phi``)."""
    if abs(phi) < 1e-300:
        return 0.0
    return v0_phi_theta(phi, theta_of_phi(phi, a), a, n_b, Delta)


def v0_of_x(x: float, params: MaserParams) -> float:
    """``V0(x) = -int_0^x ln w(nu) dnu`` by adaptive quadrature.

    Raises
    ------
    QuadratureSingularityError
        With ``n_b = 0`` when ``w`` has a zero in ``(0, x]``.
    """
    if x < 0:
        raise DomainError("x must be non-negative")
    if x == 0:
        return 0.0
    th, D = params.theta, params.Delta
    breaks = []
    if th > 0:
        j0 = int(math.floor(th * abs(D) / math.pi)) + 1
        j = j0
        while True:
            nu = (j * math.pi / th) ** 2 - D * D
            if nu > x:
                break
            if nu > 0:
                breaks.append(nu)
            j += 1
    if params.n_b == 0 and (breaks or params.a == 0):
        raise QuadratureSingularityError("ln w is singular at a trapping zero inside [0, x]")
    f = lambda nu: np.log(w(nu, params))
    val, _ = integrate(f, 0.0, x, rtol=_RTOL, atol=_ATOL, breakpoints=breaks)
    return -val


def dv0_dtheta(phi: float, a: float, n_b: float, Delta: float) -> float:
    """Rate of change of the branch minimum ``V0`` with ``theta``.

    ``-(2/theta)(a + n_b(2a-1)) int_{theta|Delta|}^{phi} sin(2chi)/((n_b + a r)(1 + n_b + b r)) dchi``
    with ``r = theta**2 sinc**2(chi)``. Requires ``n_b > 0``.
    """
    k = branch_index(phi, a, Delta)
    if k >= 1 and phi < tan_root(k):
        raise DomainError("phi lies on the maximum sub-branch")
    if n_b <= 0:
        raise DomainError("the derivative integral has a pole for n_b = 0")
    theta = theta_of_phi(phi, a)
    lo = theta * abs(Delta)
    if phi <= lo:
        return 0.0
    b = 1.0 - a

    def f(c):
        r = theta * theta * np.sinc(c / np.pi) ** 2
        return np.sin(2 * c) / ((n_b + a * r) * (1 + n_b + b * r))

    val, _ = integrate(f, lo, phi, rtol=_RTOL, atol=_ATOL,
                       breakpoints=_pi_breaks(lo, phi), max_width=math.pi / 2)
    return -2.0 / theta * (a + n_b * (2 * a - 1)) * val


def v0_second(x: float, params: MaserParams) -> float:
    """Curvature ``V0''(x) = (2a-1)^2/(a + n_b(2a-1)) (q - x q')/x^2`` at a saddle.

    Raises
    ------
    DomainError
        If ``w(x) != 1`` within ``1e-10``.
    """
    if x <= 0:
        raise DomainError("saddle curvature formula needs x > 0")
    if abs(w(x, params) - 1.0) > 1e-10:
        raise DomainError(f"x = {x} is not a saddle: w(x) = {w(x, params)}")
    a = params.a
    qq = q(x, params.theta, params.Delta)
    qp = q_prime(x, params.theta, params.Delta)
    return (2 * a - 1) ** 2 / params.gain * (qq - x * qp) / (x * x)


@dataclass(frozen=True)
class SaddlePoint:
    """One extremum of ``V0``.

    ``curvature`` is ``V0''`` at the point; ``kind`` is ``"minimum"`` when it is
    positive. ``V0`` is ``nan`` when the potential was not requested.
    """

    phi: float
    x: float
    theta: float
    branch_k: int
    kind: str
    V0: float
    curvature: float

    @property
    def is_minimum(self) -> bool:
        return self.kind == "minimum"


def branch_point(phi: float, a: float, n_b: float, Delta: float,
                 with_potential: bool = True) -> SaddlePoint:
    """Saddle labelled by ``phi``; ``theta`` follows from the parametrization."""
    k = branch_index(phi, a, Delta)
    x = max(0.0, x_of_phi(phi, a, Delta))
    curv = curvature_phi(phi, a, n_b)
    kind = "minimum" if _one_minus_phi_cot(phi) > 0 else "maximum"
    v = v0_on_branch(phi, a, n_b, Delta) if with_potential else float("nan")
    return SaddlePoint(phi, x, theta_of_phi(phi, a), k, kind, v, curv)


def _monotone_pieces(k: int, a: float, Delta: float):
    """Sub-intervals of branch ``k`` on which ``theta(phi)`` is monotone."""
    lo, hi = branch_interval(k, a, Delta)
    if k == 0:
        if lo == 0.0:
            lo = 1e-300  # phi = 0 is the thermal point itself
        return [(lo, hi)]
    pk = tan_root(k)
    if pk > lo:
        return [(lo, pk), (pk, hi)]
    return [(lo, hi)]


def _solve_on_piece(theta: float, c: float, left: float, right: float):
    # theta(phi) = theta  <=>  phi - theta c |sin phi| = 0, continuous at sin = 0.
    g = lambda p: p - theta * c * abs(math.sin(p))
    gl, gr = g(left), g(right)
    if gl == 0:
        return left
    if gr == 0:
        return right
    if gl * gr > 0:
        return None
    return brentq(g, left, right, xtol=1e-14, rtol=1e-15, maxiter=200)


def enumerate_saddles(params: MaserParams, with_potential: bool = True) -> list[SaddlePoint]:
    """All extrema of ``V0`` with ``x > 0`` at the pump ``params.theta``.

    Branches ``k = 0..floor(theta sqrt(2a-1)/pi) + 1`` are searched; the result is
    ordered by ``(k, phi)``. Empty when no maser branch exists.
    """
    a, D, th = params.a, params.Delta, params.theta
    if a <= 0.5 or D * D >= 2 * a - 1 or th <= 0:
        return []
    c = math.sqrt(2 * a - 1)
    p0 = phi0(a, D)
    k_max = int(math.floor(th * c / math.pi)) + 1
    out: list[SaddlePoint] = []
    for k in range(k_max + 1):
        roots: list[float] = []
        for left, right in _monotone_pieces(k, a, D):
            r = _solve_on_piece(th, c, left, right)
            if r is None:
                continue
            if roots and abs(r - roots[-1]) < 1e-12:
                continue
            roots.append(r)
        for r in roots:
            # The branch ends at x = 0 merge with the thermal point; skip them.
            if D != 0 and (abs(r - (p0 + k * math.pi)) < 1e-13 or
                           abs(r - ((k + 1) * math.pi - p0)) < 1e-13):
                continue
            if r < 1e-200:
                continue
            out.append(branch_point(r, a, params.n_b, D, with_potential))
    return out


@dataclass(frozen=True)
class GaussianComponent:
    """One peak of the saddle-point mixture.

    ``weight`` is the probability mass; ``T`` is the relative weight
    ``exp(-N V0_j) / sum_m exp(-N V0_m)/sqrt(V0''_m)`` over the maser minima
    (``nan`` for the thermal component).
    """

    center: float
    width: float
    weight: float
    T: float
    kind: str = "gaussian"
    branch_k: int | None = None


@dataclass(frozen=True)
class GaussianMixture:
    components: tuple
    params: MaserParams

    @property
    def mean_x(self) -> float:
        return sum(c.weight * c.center for c in self.components)

    def pmf(self, n_max: int) -> np.ndarray:
        """Mixture discretized at ``x = n/N`` for ``n = 0..n_max`` and renormalized."""
        N = self.params.N
        n = np.arange(n_max + 1)
        x = n / N
        out = np.zeros(n_max + 1)
        for comp in self.components:
            if comp.kind == "thermal":
                r = _thermal_ratio(self.params)
                out += comp.weight * (1 - r) * r ** n
            else:
                z = (x - comp.center) / comp.width
                out += comp.weight * np.exp(-0.5 * z * z) / (comp.width * N * math.sqrt(2 * math.pi))
        return out / out.sum()


def _thermal_ratio(params: MaserParams) -> float:
    return float(w(0.0, params))


def gaussian_mixture(params: MaserParams) -> GaussianMixture:
    """Saddle-point approximation of the stationary distribution.

    Each minimum ``x_j`` contributes a Gaussian of width ``1/sqrt(N V0''_j)`` and
    mass proportional to ``exp(-N V0_j) sqrt(2 pi N / V0''_j)``. When ``x = 0`` is
    itself a local minimum (``w(0) < 1``) a geometric thermal peak of mass
    ``1/(1 - w(0))`` is added.

    Raises
    ------
    ThermalPhaseError
        If there is no maser minimum.
    """
    N = params.N
    minima = [s for s in enumerate_saddles(params) if s.is_minimum]
    if not minima:
        raise ThermalPhaseError("no maser minimum; use thermal_distribution")
    w0 = _thermal_ratio(params)
    log_mass, kinds = [], []
    for s in minima:
        lm = -N * s.V0 + 0.5 * math.log(2 * math.pi * N / s.curvature)
        if w0 > 0:
            lm -= 0.5 * math.log(w0)
        log_mass.append(lm)
        kinds.append(s)
    if 0 < w0 < 1:
        log_mass.append(-math.log1p(-w0))
        kinds.append(None)
    log_mass = np.array(log_mass)
    mass = np.exp(log_mass - log_mass.max())
    mass /= mass.sum()
    logT = np.array([-N * s.V0 for s in minima])
    norm = np.logaddexp.reduce(logT - 0.5 * np.log([s.curvature for s in minima]))
    comps = []
    for i, s in enumerate(kinds):
        if mass[i] < 1e-300:
            continue
        if s is None:
            comps.append(GaussianComponent(w0 / (1 - w0) / N, math.sqrt(w0) / (1 - w0) / N,
                                           float(mass[i]), float("nan"), "thermal"))
        else:
            comps.append(GaussianComponent(s.x, 1 / math.sqrt(N * s.curvature), float(mass[i]),
                                           float(math.exp(logT[i] - norm)), "gaussian", s.branch_k))
    total = sum(c.weight for c in comps)
    comps = tuple(GaussianComponent(c.center, c.width, c.weight / total, c.T, c.kind, c.branch_k)
                  for c in comps)
    return GaussianMixture(comps, params)
