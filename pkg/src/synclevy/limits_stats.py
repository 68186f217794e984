"""Limit laws, empirical characteristic functions and goodness of fit.

Limit laws are geometric-stable: ``1 / (1 + m zeta(lam) / 2)``. In one
dimension this gives the Laplace law (``alpha = 2``) and the symmetric
Linnik law ``1 / (1 + c^alpha |lam|^alpha)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import linalg, optimize

from .levy import symmetric_stable_1d
from .simulator import DifferenceSample


# -- limit laws --------------------------------------------------------------------

def _lam(lam, d=1):
    lam = np.asarray(lam, dtype=float)
    if d == 1 and (lam.ndim == 0 or lam.shape[-1] != 1):
        lam = lam[..., None]
    return lam


@dataclass(frozen=True)
class GeometricStable:
    """``1 / (1 + m zeta0(lam) / 2)`` for a symmetric stable exponent ``zeta0``."""

    m: float
    zeta0: Callable

    def cf(self, lam):
        return 1.0 / (1.0 + 0.5 * self.m * np.asarray(self.zeta0(lam), dtype=float))


@dataclass(frozen=True)
class Laplace1D:
    """Laplace law with density ``exp(-|y|/c0) / (2 c0)``, CF ``1 / (1 + c0^2 lam^2)``."""

    c0: float

    def __post_init__(self):
        if not self.c0 > 0:
            raise ValueError("c0 must be positive")

    def as_geometric_stable(self, m=1.0):
        k = 2.0 * self.c0**2 / m
        return GeometricStable(m, lambda lam: k * _lam(lam)[..., 0] ** 2)

    def cf(self, lam):
        return self.as_geometric_stable().cf(lam)

    def sample(self, rng, size):
        return rng.laplace(0.0, self.c0, size)


@dataclass(frozen=True)
class Linnik1D:
    """Symmetric Linnik law, CF ``1 / (1 + c^alpha |lam|^alpha)``."""

    alpha: float
    c: float

    def __post_init__(self):
        if not (0 < self.alpha <= 2 and self.c > 0):
            raise ValueError("need 0 < alpha <= 2 and c > 0")

    def cf(self, lam):
        lam = _lam(lam)[..., 0]
        return 1.0 / (1.0 + (self.c * np.abs(lam)) ** self.alpha)

    def sample(self, rng, size):
        """Exponential mixture of stable laws: ``c E^{1/alpha} S``."""
        e = rng.exponential(1.0, size)
        if self.alpha == 2:
            s = np.sqrt(2.0) * rng.standard_normal(size)
        else:
            s = symmetric_stable_1d(self.alpha, rng, size)
        return self.c * e ** (1.0 / self.alpha) * s


def limit_cf(law, lam):
    return law.cf(lam)


def laplace_c0(sigma=1.0, m=1.0, N=None):
    """Laplace scale: ``sigma sqrt(m/2)`` in the limit, ``sigma sqrt((N-1)m/2)`` at finite N."""
    k = m if N is None else (N - 1) * m
    return sigma * np.sqrt(k / 2.0)


def laplace_density(c0, y):
    if not c0 > 0:
        raise ValueError("c0 must be positive")
    return np.exp(-np.abs(y) / c0) / (2.0 * c0)


def laplace_cdf(c0, y):
    if not c0 > 0:
        raise ValueError("c0 must be positive")
    y = np.asarray(y, dtype=float)
    half = 0.5 * np.exp(-np.abs(y) / c0)
    return np.where(y < 0, half, 1.0 - half)


# -- empirical characteristic functions ------------------------------------------------

def default_lambda_grid(d=1, lo=0.05, hi=5.0, n=20):
    """Zero plus ``n`` log-spaced magnitudes of each sign.

    For ``d = 1`` this is 41 points. For ``d > 1`` the magnitudes are placed
    along each coordinate axis and along the normalised main diagonal.
    """
    mags = np.geomspace(lo, hi, n)
    signed = np.concatenate([-mags[::-1], [0.0], mags])
    if d == 1:
        return signed[:, None]
    dirs = np.vstack([np.eye(d), np.ones((1, d)) / np.sqrt(d)])
    pts = [np.zeros(d)] + [s * u for u in dirs for s in signed if s != 0]
    return np.array(pts)


@dataclass
class CFTable:
    lambda_grid: np.ndarray
    empirical: np.ndarray
    se_re: np.ndarray
    se_im: np.ndarray
    n: int
    theoretical: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def with_theory(self, values):
        th = np.asarray(values, dtype=float).reshape(self.empirical.shape)
        return CFTable(self.lambda_grid, self.empirical, self.se_re, self.se_im, self.n, th,
                       dict(self.metadata))

    @property
    def abs_err(self):
        if self.theoretical is None:
            raise ValueError("theoretical side not populated")
        return np.abs(self.empirical.real - self.theoretical)

    @property
    def distance(self):
        return float(self.abs_err.max())

    @property
    def max_imag(self):
        return float(np.abs(self.empirical.imag).max())

    @property
    def imag_z(self):
        """``|Im| / SE`` per probe; probes with zero SE and zero Im count as 0."""
        se = np.where(self.se_im > 0, self.se_im, np.inf)
        z = np.abs(self.empirical.imag) / se
        return np.where((self.se_im == 0) & (self.empirical.imag != 0), np.inf, z)


def _values(samples):
    if isinstance(samples, DifferenceSample):
        return samples.values
    v = np.asarray(samples, dtype=float)
    return v[:, None] if v.ndim == 1 else v


def empirical_cf(samples, lambda_grid=None, min_samples=100, chunk=1 << 22) -> CFTable:
    """Mean of ``exp(i <lam, x>)`` over samples with per-part standard errors."""
    x = _values(samples)
    n, d = x.shape
    if n < min_samples:
        raise ValueError(f"too few samples: {n} < {min_samples}")
    lam = default_lambda_grid(d) if lambda_grid is None else _lam(lambda_grid, d).reshape(-1, d)
    L = lam.shape[0]
    s_c, s_s, q_c, q_s = (np.zeros(L) for _ in range(4))
    step = max(1, chunk // max(L, 1))
    for i in range(0, n, step):
        ph = x[i:i + step] @ lam.T
        c, s = np.cos(ph), np.sin(ph)
        s_c += c.sum(0)
        s_s += s.sum(0)
        q_c += (c * c).sum(0)
        q_s += (s * s).sum(0)
    mc, ms = s_c / n, s_s / n
    ddof = n - 1 if n > 1 else 1
    var_c = np.maximum(q_c - n * mc**2, 0.0) / ddof
    var_s = np.maximum(q_s - n * ms**2, 0.0) / ddof
    meta = dict(samples.metadata) if isinstance(samples, DifferenceSample) else {}
    return CFTable(lam, mc + 1j * ms, np.sqrt(var_c / n), np.sqrt(var_s / n), n, None, meta)


class CFDistance(NamedTuple):
    distance: float
    max_imag: float


def cf_distance(table: CFTable) -> CFDistance:
    """``sup |Re(empirical) - theory|`` and ``sup |Im(empirical)|`` over the grid."""
    return CFDistance(table.distance, table.max_imag)


# -- Kolmogorov-Smirnov -----------------------------------------------------------------

class KSResult(NamedTuple):
    n: int
    statistic: float
    critical: float
    passed: bool

    def as_dict(self):
        return {"n": self.n, "statistic": self.statistic, "critical": self.critical,
                "pass": self.passed}


def ks_statistic(x, cdf):
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    F = cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def ks_test_laplace(samples, c0, critical=None) -> KSResult:
    """KS distance to Laplace(``c0``); default critical value ``1.36/sqrt(n)``."""
    x = _values(samples)
    if x.shape[1] != 1:
        raise ValueError("KS test needs one-dimensional samples")
    x = x[:, 0]
    n = x.size
    stat = ks_statistic(x, lambda y: laplace_cdf(c0, y))
    crit = 1.36 / np.sqrt(n) if critical is None else float(critical)
    return KSResult(n, stat, float(crit), bool(stat < crit))


# -- rescaling --------------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarRescale:
    b_N: float

    def __post_init__(self):
        if not self.b_N > 0:
            raise ValueError("b_N must be positive")

    def matrix(self, N, d):
        return np.eye(d) / self.b_N


@dataclass(frozen=True)
class MatrixRescale:
    """``N^{-B} = expm(-B ln N)``; eigenvalues of ``B`` need real part >= 1/2."""

    B: np.ndarray

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        if B.shape[0] != B.shape[1]:
            raise ValueError("matrix exponent must be square")
        if np.min(np.linalg.eigvals(B).real) < 0.5 - 1e-12:
            raise ValueError("matrix exponent eigenvalues must have real part >= 1/2")
        object.__setattr__(self, "B", B)

    def matrix(self, N, d):
        if self.B.shape[0] != d:
            raise ValueError("matrix exponent dimension mismatch")
        return linalg.expm(-self.B * np.log(N))


def rescale(samples, rule, N=None) -> DifferenceSample:
    x = _values(samples)
    if isinstance(rule, ScalarRescale):
        y = x / rule.b_N
    else:
        y = x @ rule.matrix(N, x.shape[1]).T
    meta = dict(samples.metadata) if isinstance(samples, DifferenceSample) else {}
    meta["rescale"] = repr(rule)
    return DifferenceSample(y, meta)


# -- Linnik scale fit ----------------------------------------------------------------------------

class LinnikFit(NamedTuple):
    c: float
    residual: float


def fit_linnik_scale(lam, values, alpha, c_init=1.0) -> LinnikFit:
    """Least-squares ``c`` for ``1/(1 + c^alpha |lam|^alpha)``; residual is the sup error."""
    lam = np.abs(np.asarray(lam, dtype=float).ravel())
    values = np.asarray(values, dtype=float).ravel()

    def resid(p):
        return Linnik1D(alpha, np.exp(p[0])).cf(lam) - values

    sol = optimize.least_squares(resid, [np.log(c_init)], xtol=1e-14, ftol=1e-14)
    c = float(np.exp(sol.x[0]))
    return LinnikFit(c, float(np.max(np.abs(resid(sol.x)))))
