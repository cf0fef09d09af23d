"""Master-equation generator, exact correlation length and its approximations.

The photon number performs a one-step (birth-death) process with

    up rate    u_n = n_b (n+1) + N a q_{n+1}        (n -> n+1)
    down rate  v_n = (1+n_b) n + N b q_n            (n -> n-1)

so ``dp/dt = -L p`` with a tridiagonal ``L``. Detailed balance makes ``L``
similar to a symmetric matrix. Its zero eigenvalue is removed exactly by
writing the symmetric form as ``G^T G`` and working with ``G G^T``, whose
entries are sums of positive rates; a Sturm count on that matrix gives the
gap ``lambda_nz`` to high relative accuracy even when it is ``1e-200``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded
from scipy.optimize import brentq
from scipy.special import logsumexp

from .core import (MaserParams, log_weights, moments, q, stationary_distribution,
                   theta_eff_sq)
from .errors import (DomainError, InvalidParameterError, NoBarrierError, NoMaserBranchError,
                     TruncationError)
from .potential import enumerate_saddles

__all__ = [
    "GeneratorMatrix",
    "CorrelationResult",
    "AtomCorrelator",
    "MasterEstimate",
    "MeanFieldCurve",
    "BarrierEstimate",
    "build_generator",
    "lambda_nz",
    "dense_spectrum",
    "exact_correlation",
    "atom_statistics",
    "joint_probability",
    "gamma_A",
    "fit_xi_A",
    "xi_thermal",
    "xi_ansatz_E",
    "xi_master_M",
    "xi_master_peak",
    "chi",
    "xi_mean_field",
    "xi_mean_field_at",
    "mean_field_peak",
    "xi_barrier",
    "xi_sumrule",
]


@dataclass(frozen=True)
class GeneratorMatrix:
    """Tridiagonal generator ``L`` on photon numbers ``0..dim-1``.

    The top state reflects (``up[-1] = 0``) so every column of ``L`` sums to
    zero and ``log_p`` is the exact stationary state of the truncated chain.
    When the up rate vanishes exactly at some ``n`` (a trapping state with
    ``n_b = 0``) only the leading block ``0..block-1`` carries probability and
    spectral quantities refer to that block.
    """

    params: MaserParams
    dim: int
    up: np.ndarray
    down: np.ndarray
    qn: np.ndarray
    log_p: np.ndarray
    block: int

    @property
    def decoupled(self) -> bool:
        return self.block < self.dim

    @property
    def stationary(self) -> np.ndarray:
        return np.exp(self.log_p)

    @property
    def diag(self) -> np.ndarray:
        return self.up + self.down

    @property
    def sub(self) -> np.ndarray:
        """``L[n+1, n]``."""
        return -self.up[:-1]

    @property
    def super(self) -> np.ndarray:
        """``L[n, n+1]``."""
        return -self.down[1:]

    @property
    def sym_diag(self) -> np.ndarray:
        return self.diag[: self.block]

    @property
    def sym_off(self) -> np.ndarray:
        """Off-diagonal of ``D^{-1/2} L D^{1/2}`` on the leading block."""
        b = self.block
        return -np.sqrt(self.up[: b - 1] * self.down[1:b])

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.super * v[1:]
        out[1:] += self.sub * v[:-1]
        return out

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.super, 1) + np.diag(self.sub, -1)

    def m_column_sums(self, s: int) -> np.ndarray:
        """Column sums of ``M(s)``: the probability that an atom leaves in state ``s``."""
        a, b = self.params.a, self.params.b
        q_n, q_n1 = self.qn[:-1], self.qn[1:]
        if s > 0:
            return a * (1 - q_n1) + b * q_n
        return b * (1 - q_n) + a * q_n1

    def m_matvec(self, s: int, v: np.ndarray) -> np.ndarray:
        """``M(s) v``; ``M(+)`` keeps or lowers ``n``, ``M(-)`` keeps or raises it."""
        a, b = self.params.a, self.params.b
        q_n, q_n1 = self.qn[:-1], self.qn[1:]
        if s > 0:
            out = a * (1 - q_n1) * v
            out[:-1] += b * q_n1[:-1] * v[1:]
        else:
            out = b * (1 - q_n) * v
            out[1:] += a * q_n[1:] * v[:-1]
        return out


def build_generator(params: MaserParams, dim: int | None = None) -> GeneratorMatrix:
    """Assemble ``L = L_C - N(M - 1)`` in banded form.

    ``dim`` defaults to the adaptive truncation of the stationary distribution
    plus 16 guard states.
    """
    if dim is None:
        dim = stationary_distribution(params).n_max + 1 + 16
    if dim < 8:
        raise InvalidParameterError("dim must be >= 8")
    N, a, b, nb = params.N, params.a, params.b, params.n_b
    n = np.arange(dim, dtype=float)
    qn = q(np.arange(dim + 1) / N, params.theta, params.Delta)
    up = nb * (n + 1) + N * a * qn[1:]
    up[-1] = 0.0
    down = (1 + nb) * n + N * b * qn[:-1]
    lw = np.asarray(log_weights(params, dim - 1), dtype=float)
    lw = lw - logsumexp(lw)
    zeros = np.flatnonzero(up[:-1] == 0)
    block = int(zeros[0]) + 1 if zeros.size else dim
    return GeneratorMatrix(params, dim, up, down, qn, lw, block)


def _sturm_count(u: list, v: list, sigma: float) -> int:
    """Eigenvalues of ``G G^T`` below ``sigma`` (differential LDL^T recurrence)."""
    cnt = 0
    s = u[0] - sigma
    m = len(v)
    for i in range(m):
        d = v[i] + s
        if d < 0:
            cnt += 1
        elif d == 0:
            d = -1e-300
            cnt += 1
        if i + 1 < m:
            s = u[i + 1] * s / d - sigma
    return cnt


def lambda_nz(gen: GeneratorMatrix, rtol: float = 1e-13) -> float:
    """Smallest nonzero eigenvalue of ``L`` (in units of the cavity decay rate).

    Bisection on a logarithmic scale with Sturm counts of the zero-free
    matrix ``G G^T`` whose diagonal is ``u_{n-1} + v_n`` and off-diagonal
    ``-sqrt(v_n u_n)``. Returns ``inf`` when the block is a single state.
    """
    m = gen.block - 1
    if m < 1:
        return math.inf
    u = gen.up[:m].tolist()
    v = gen.down[1 : m + 1].tolist()
    hi = 2.0 * (max(u) + max(v)) + 1.0
    if _sturm_count(u, v, hi) < 1:
        hi *= 4
    lo = hi
    while _sturm_count(u, v, lo) > 0:
        lo /= 256.0
        if lo < 1e-305:
            return 0.0
    hi = lo * 256.0
    while hi > lo * (1 + rtol):
        mid = math.sqrt(lo * hi)
        if _sturm_count(u, v, mid) >= 1:
            hi = mid
        else:
            lo = mid
    return math.sqrt(lo * hi)


def dense_spectrum(gen: GeneratorMatrix) -> np.ndarray:
    """All eigenvalues of the symmetrized leading block (dense reference)."""
    return np.linalg.eigvalsh(np.diag(gen.sym_diag) + np.diag(gen.sym_off, 1) + np.diag(gen.sym_off, -1))


@dataclass(frozen=True)
class CorrelationResult:
    """Correlation length ``gamma xi = 1/lambda_nz`` from one of several methods.

    ``log_xi`` is the natural logarithm of ``gamma xi``; it stays meaningful
    when ``xi`` overflows. ``flag`` is ``"asymptotic"`` when the value comes
    from the barrier formula because the gap underflows.
    """

    lambda_nz: float
    xi: float
    method: str
    log_xi: float = math.nan
    flag: str = ""


def exact_correlation(params: MaserParams, dim: int | None = None,
                      check_truncation: bool = False) -> CorrelationResult:
    """Exact ``gamma xi`` from the spectral gap.

    Raises
    ------
    TruncationError
        With ``check_truncation``, if doubling ``dim`` moves the gap by more than
        ``1e-6`` relative.
    """
    gen = build_generator(params, dim)
    lam = lambda_nz(gen)
    if check_truncation:
        lam2 = lambda_nz(build_generator(params, 2 * gen.dim))
        if abs(lam2 - lam) > 1e-6 * lam:
            raise TruncationError(f"gap moved from {lam} to {lam2} on doubling dim")
    if lam < 1e-280:
        est = xi_barrier(params)
        return CorrelationResult(math.exp(-est.log_xi), math.inf, "exact", est.log_xi, "asymptotic")
    return CorrelationResult(lam, 1.0 / lam, "exact", -math.log(lam))


# -- atomic statistics ---------------------------------------------------------

class AtomCorrelator:
    """Two-atom statistics of the stationary beam.

    ``P(s1, s2, t) = u0^T M(s2) exp(-L t) S(s1) p`` with
    ``S(s) = (1 + L_C/N)^{-1} M(s)``. Time evolution uses the eigenpairs of the
    symmetrized generator restricted to the states carrying probability.
    """

    def __init__(self, params: MaserParams, dim: int | None = None, log_floor: float = -1300.0):
        gen = build_generator(params, dim)
        self.gen = gen
        lp = gen.log_p[: gen.block]
        keep = np.flatnonzero(lp > lp.max() + log_floor)
        lo, hi = int(keep[0]), int(keep[-1]) + 1
        self._lo, self._hi = lo, hi
        sl = slice(lo, hi)
        p = np.exp(gen.log_p)
        self.p = p
        self.p_plus = float(gen.m_column_sums(+1) @ p)
        self.p_minus = float(gen.m_column_sums(-1) @ p)

        # Symmetrized generator on [lo, hi), reflecting at both cut ends.
        up = gen.up[sl].copy()
        down = gen.down[sl].copy()
        up[-1] = 0.0
        down[0] = 0.0
        diag = up + down
        off = -np.sqrt(up[:-1] * down[1:])
        lam, vec = eigh_tridiagonal(diag, off)
        self.eigenvalues = lam
        half = 0.5 * gen.log_p[sl]
        self._alpha = {}
        self._beta = {}
        nb, N = params.n_b, params.N
        n = np.arange(gen.dim, dtype=float)
        # 1 + L_C/N as a banded matrix (rows: super, diag, sub).
        ab = np.zeros((3, hi - lo))
        up_c = nb * (n[sl] + 1)
        dn_c = (1 + nb) * n[sl]
        up_c[-1] = 0.0
        dn_c[0] = 0.0
        ab[1] = 1 + (up_c + dn_c) / N
        ab[0, 1:] = -dn_c[1:] / N
        ab[2, :-1] = -up_c[:-1] / N
        for s in (+1, -1):
            c = gen.m_column_sums(s)[sl]
            y = solve_banded((1, 1), ab, gen.m_matvec(s, p)[sl])
            self._alpha[s] = vec.T @ (np.exp(half) * c)
            self._beta[s] = vec.T @ (y * np.exp(-half))

    @property
    def mean_s(self) -> float:
        return self.p_plus - self.p_minus

    def joint(self, s1: int, s2: int, t: float) -> float:
        """``P(s1, s2, t)``: first atom in ``s1``, a later one (delay ``t``) in ``s2``."""
        if t < 0:
            raise DomainError("t must be non-negative")
        e = np.exp(-self.eigenvalues * t)
        return float(np.sum(e * self._alpha[s2] * self._beta[s1]))

    def connected(self, t: float) -> float:
        """``<s s>_t - <s>^2`` summed over the nonzero modes only."""
        e = np.exp(-self.eigenvalues[1:] * t)
        A = self._alpha[+1] - self._alpha[-1]
        B = self._beta[+1] - self._beta[-1]
        return float(np.sum(e * A[1:] * B[1:]))

    def gamma_A(self, t: float) -> float:
        m = self.mean_s
        if abs(m) >= 1 - 1e-15:
            raise DomainError("normalization undefined for <s> = +-1")
        if t < 0:
            raise DomainError("t must be non-negative")
        return self.connected(t) / (1 - m * m)


def atom_statistics(params: MaserParams, dim: int | None = None) -> tuple[float, float]:
    """Probabilities ``(P(+), P(-))`` that an outgoing atom is excited / de-excited."""
    gen = build_generator(params, dim)
    p = gen.stationary
    return float(gen.m_column_sums(+1) @ p), float(gen.m_column_sums(-1) @ p)


def joint_probability(params: MaserParams, s1: int, s2: int, t: float,
                      dim: int | None = None) -> float:
    return AtomCorrelator(params, dim).joint(s1, s2, t)


def gamma_A(params: MaserParams, t, dim: int | None = None):
    """Normalized atomic correlation ``(<s s>_t - <s>^2)/(1 - <s>^2)``."""
    ac = AtomCorrelator(params, dim)
    if np.ndim(t):
        return np.array([ac.gamma_A(float(ti)) for ti in np.asarray(t)])
    return ac.gamma_A(float(t))


def fit_xi_A(params: MaserParams, dim: int | None = None, span=(3.0, 8.0), points: int = 26) -> float:
    """Atomic correlation length from the log-slope of ``|gamma_A|`` over ``t in span/lambda_nz``."""
    ac = AtomCorrelator(params, dim)
    lam = lambda_nz(ac.gen)
    t = np.linspace(span[0], span[1], points) / lam
    g = np.array([ac.gamma_A(ti) for ti in t])
    slope = np.polyfit(t, np.log(np.abs(g)), 1)[0]
    return -1.0 / slope


# -- approximation schemes -------------------------------------------------------

def xi_thermal(params: MaserParams) -> float:
    """Large-``N`` thermal-phase value ``1/(1 - (2a-1) theta_eff^2)`` shared by all schemes."""
    return 1.0 / (1.0 - (2 * params.a - 1) * theta_eff_sq(params.theta, params.Delta))


def xi_ansatz_E(params: MaserParams, dist=None) -> CorrelationResult:
    """Linear-eigenfunction estimate ``sigma_n^2 / ((n_b+1)<n> + N b <q_n>)``."""
    if dist is None:
        dist = stationary_distribution(params)
    m = moments(dist)
    den = (params.n_b + 1) * m.mean + params.N * params.b * m.mean_q
    xi = m.variance / den
    return CorrelationResult(1 / xi, xi, "ansatz_E", math.log(xi))


class MasterEstimate(NamedTuple):
    xi: float
    alpha: float
    beta: float
    gamma_c: float
    x0: float
    valid: bool


def _beta(a: float, theta: float, Delta: float) -> float:
    u = theta * abs(Delta)
    if u < 1e-3:
        u2 = u * u
        return (2 * a - 1) * theta ** 4 * (1 / 3 - 4 * u2 / 45 + u2 * u2 / 105)
    D2 = Delta * Delta
    return (2 * a - 1) * (math.sin(u) ** 2 / (D2 * D2) - theta * math.sin(u) * math.cos(u) / (D2 * abs(Delta)))


def xi_master_M(params: MaserParams) -> MasterEstimate:
    """Small-``x`` expansion of the master equation around the eigenfunction node.

    ``gamma xi_M = 1/sqrt(alpha^2 + 4 beta gamma_c / N)`` with
    ``alpha = 1 - (2a-1) theta_eff^2``, ``gamma_c = n_b + a theta_eff^2`` (the drift
    coefficient, not the cavity decay rate). ``valid`` reports whether the
    expansion parameter ``theta sqrt(x0 + Delta^2)`` is below one.
    """
    a, th, D, N = params.a, params.theta, params.Delta, params.N
    te2 = theta_eff_sq(th, D)
    alpha = 1 - (2 * a - 1) * te2
    beta = _beta(a, th, D)
    gc = params.n_b + a * te2
    disc = alpha * alpha + 4 * beta * gc / N
    xi = 1 / math.sqrt(disc) if disc > 0 else math.nan
    if beta != 0:
        r = alpha / (2 * beta)
        rad = r * r + gc / (beta * N)
        x0 = -r + math.sqrt(rad) if rad >= 0 else math.nan
    else:
        x0 = gc / (N * alpha) if alpha != 0 else math.nan
    valid = bool(math.isfinite(xi) and math.isfinite(x0) and x0 >= 0 and th * math.sqrt(x0 + D * D) < 1)
    return MasterEstimate(xi, alpha, beta, gc, x0, valid)


def chi(x: float) -> float:
    """``sqrt(sin^2 x / (1 - x cot x))`` with ``chi(0) = sqrt(3)``."""
    if abs(x) < 1e-4:
        return math.sqrt(3) * (1 - x * x / 5)
    return math.sqrt(math.sin(x) ** 2 / (1 - x / math.tan(x)))


def xi_master_peak(a: float, n_b: float, Delta: float, N: float) -> float:
    """Value of ``xi_M`` at the onset ``theta0*``: ``(2a-1)/2 sqrt(N/(a + n_b(2a-1))) chi(theta0* |Delta|)``."""
    D = abs(Delta)
    if a < 0.5 + D * D / 2:
        raise DomainError("the peak formula needs a >= 1/2 + Delta^2/2")
    if a == 0.5:
        return 0.0
    c = math.sqrt(2 * a - 1)
    u = math.asin(D / c)
    return (2 * a - 1) / 2 * math.sqrt(N / (a + n_b * (2 * a - 1))) * chi(u)


@dataclass(frozen=True)
class MeanFieldCurve:
    phi: np.ndarray
    theta: np.ndarray
    x0: np.ndarray
    xi: np.ndarray


def _mf_x0(phi, a, n_b, Delta, N):
    f = a / (2 * a - 1)
    s2 = np.sin(phi) ** 2
    h = (f - n_b) / N + Delta ** 2 - (2 * a - 1) * s2
    g = n_b * f / N ** 2 + Delta ** 2 * n_b / N + f / N * (2 * a - 1) * s2
    # Stable root of x^2 + h x - g = 0 (g >= 0).
    disc = np.sqrt(h * h + 4 * g)
    with np.errstate(divide="ignore", invalid="ignore"):
        x0 = np.where(h <= 0, 0.5 * (-h + disc), 2 * g / (h + disc))
    return x0


def mean_field_xi(phi, x0, a: float, Delta: float, f_over_N: float):
    """``1/(1 - (2a-1) q'(phi))`` with ``q'`` evaluated at ``X = x0 + f/N``."""
    X = x0 + f_over_N
    s, c = np.sin(phi), np.cos(phi)
    qp = (Delta ** 2 * s * s + X * phi * s * c) / (X + Delta ** 2) ** 2
    return 1.0 / (1.0 - (2 * a - 1) * qp)


def xi_mean_field(params: MaserParams, phis=None) -> MeanFieldCurve:
    """Mean-field correlation length along its ``phi`` parametrization.

    ``params.theta`` is ignored; the pump follows from ``theta(phi) = phi/sqrt(x0 + f/N + Delta^2)``
    with ``f = a/(2a-1)``.
    """
    a, nb, D, N = params.a, params.n_b, params.Delta, params.N
    if a <= 0.5:
        raise NoMaserBranchError("mean-field weight f = a/(2a-1) needs a > 1/2; use xi_ansatz_E")
    if phis is None:
        phis = np.linspace(1e-3, 3 * np.pi, 3000)
    phis = np.asarray(phis, dtype=float)
    f = a / (2 * a - 1)
    x0 = _mf_x0(phis, a, nb, D, N)
    theta = phis / np.sqrt(x0 + f / N + D * D)
    return MeanFieldCurve(phis, theta, x0, mean_field_xi(phis, x0, a, D, f / N))


def xi_mean_field_at(params: MaserParams, phi_max: float = math.pi) -> float:
    """Mean-field ``gamma xi`` at ``params.theta`` on the first mean-field branch."""
    a, nb, D, N = params.a, params.n_b, params.Delta, params.N
    if a <= 0.5:
        raise NoMaserBranchError("mean-field weight f = a/(2a-1) needs a > 1/2; use xi_ansatz_E")
    f = a / (2 * a - 1)

    def th(p):
        return p / math.sqrt(float(_mf_x0(p, a, nb, D, N)) + f / N + D * D)

    grid = np.linspace(1e-9, phi_max, 400)
    vals = np.array([th(p) for p in grid]) - params.theta
    idx = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
    if idx.size == 0:
        raise DomainError(f"theta = {params.theta} is not reached on the first mean-field branch")
    i = int(idx[0])
    p = brentq(lambda p: th(p) - params.theta, grid[i], grid[i + 1], xtol=1e-14)
    x0 = float(_mf_x0(p, a, nb, D, N))
    return float(mean_field_xi(p, x0, a, D, f / N))


def mean_field_peak(a: float, n_b: float, N: float) -> tuple[float, float]:
    """Approximate location ``phi0*`` and value of the first mean-field peak at zero detuning."""
    if a <= 0.5:
        raise NoMaserBranchError("needs a > 1/2")
    f = a / (2 * a - 1)
    phi = (3 * (n_b + f) / (N * (2 * a - 1))) ** 0.25
    return phi, (2 * a - 1) / 2 * math.sqrt(3 * N / (a + n_b * (2 * a - 1)))


class BarrierEstimate(NamedTuple):
    xi: float
    log_xi: float
    delta_v0: float
    x0: float
    x1: float
    x2: float
    log_f0: float = math.nan
    log_f2: float = math.nan


def xi_barrier(params: MaserParams) -> BarrierEstimate:
    """Barrier-crossing estimate between the two lowest maser minima.

    ``gamma xi = 2 pi / ([x1(1+n_b) + b q(x1)] sqrt(-V0''(x1)) f)`` with
    ``f = sqrt(V0''(x0)) e^{-N(V1-V0)} + sqrt(V0''(x2)) e^{-N(V1-V2)}``; ``x1`` is
    the highest maximum between the minima. Evaluated in log form; the two
    terms of ``log f`` are returned as ``log_f0`` and ``log_f2``.
    """
    sad = sorted(enumerate_saddles(params), key=lambda s: s.x)
    mins = [s for s in sad if s.is_minimum]
    if len(mins) < 2:
        raise NoBarrierError("fewer than two maser minima")
    m0, m2 = sorted(sorted(mins, key=lambda s: s.V0)[:2], key=lambda s: s.x)
    between = [s for s in sad if not s.is_minimum and m0.x < s.x < m2.x]
    if not between:
        raise NoBarrierError("no maximum between the two lowest minima")
    m1 = max(between, key=lambda s: s.V0)
    N = params.N
    rate = m1.x * (1 + params.n_b) + params.b * q(m1.x, params.theta, params.Delta)
    lf0 = 0.5 * math.log(m0.curvature) - N * (m1.V0 - m0.V0)
    lf2 = 0.5 * math.log(m2.curvature) - N * (m1.V0 - m2.V0)
    lf = np.logaddexp(lf0, lf2)
    log_xi = math.log(2 * math.pi) - math.log(rate) - 0.5 * math.log(-m1.curvature) - float(lf)
    xi = math.exp(log_xi) if log_xi < 700 else math.inf
    dv = min(m1.V0 - m0.V0, m1.V0 - m2.V0)
    return BarrierEstimate(xi, log_xi, dv, m0.x, m1.x, m2.x, lf0, lf2)


def xi_sumrule(params: MaserParams, n_end: int | None = None) -> CorrelationResult:
    """Sum-rule estimate ``gamma xi ~ 1 + sum_n [P_n(1-P_n)/(B_n p_n) - (1 - r^n)/n]``.

    ``B_n = (1+n_b) n + N b q_n`` and ``r = n_b/(1+n_b)``. Cumulative sums are
    formed in log space. If the ladder is cut by a trapping state, the sum
    runs over the populated block only.
    """
    N, nb, b = params.N, params.n_b, params.b
    dist = stationary_distribution(params)
    if n_end is None:
        n_end = int(min(5_000_000, max(4 * dist.n_max, 2000 * N)))
    lw = np.asarray(log_weights(params, n_end), dtype=float)
    finite = np.isfinite(lw)
    if not finite.all():
        n_end = int(np.flatnonzero(~finite)[0]) - 1
        lw = lw[: n_end + 1]
    log_z = logsumexp(lw)
    head = np.logaddexp.accumulate(lw)           # log sum_{m<=n}
    tail = np.logaddexp.accumulate(lw[::-1])[::-1]  # log sum_{m>=n}
    n = np.arange(1, n_end + 1, dtype=float)
    B = (1 + nb) * n + N * b * q(n / N, params.theta, params.Delta)
    with np.errstate(divide="ignore"):
        t1 = np.exp(head[:-1] + tail[1:] - 2 * log_z - lw[1:] + log_z - np.log(B))
    r = nb / (1 + nb)
    t2 = -np.expm1(n * math.log(r)) / n if r > 0 else 1.0 / n
    xi = 1.0 + float(np.sum(t1 - t2))
    return CorrelationResult(1 / xi if xi > 0 else math.nan, xi, "sumrule",
                             math.log(xi) if xi > 0 else math.nan)
