"""Lévy exponents and exact increment samplers for the free dynamics.

Each spec exposes ``rho(lam)`` (the exponent, so that an increment over ``dt``
has characteristic function ``exp(dt * rho(lam))``), ``eta(lam) = -2 Re rho``
(the decay exponent of the difference of two independent copies) and a
vectorised ``sample_increment(dt, rng)``.

Supported families:

* :class:`BrownianDrift` -- ``i<b,lam> - <sigma sigma^T lam, lam>/2``
* :class:`CompoundPoisson` with :class:`ParetoSymmetric` (d = 1) or
  :class:`ParetoRadial` (``xi = W * Theta``) jumps
* :class:`SymmetricStable` -- ``-zeta(lam)/2`` with ``zeta`` either isotropic
  ``c^alpha |lam|^alpha`` or spectral ``sum_i w_i |<lam, xi_i>|^alpha``
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import cos, gamma, pi
from typing import Callable

import numpy as np
from scipy import integrate


def _as_lambda(lam, d):
    lam = np.asarray(lam, dtype=float)
    if d == 1 and (lam.ndim == 0 or lam.shape[-1] != 1):
        lam = lam[..., None]
    if lam.shape[-1] != d:
        raise ValueError(f"lambda must have trailing dimension {d}")
    return lam


def _unit_rows(directions, d):
    u = np.atleast_2d(np.asarray(directions, dtype=float))
    if u.shape[1] != d:
        raise ValueError("direction vectors must have length d")
    norms = np.linalg.norm(u, axis=1)
    if np.any(norms == 0):
        raise ValueError("zero direction vector")
    return u / norms[:, None]


def _as_dt(dt):
    dt = np.asarray(dt, dtype=float)
    if np.any(dt < 0):
        raise ValueError("dt must be nonnegative")
    return dt


# -- jump laws -----------------------------------------------------------------

@dataclass(frozen=True)
class ParetoSymmetric:
    """``mu(dq) = (a/2) |q|^{-1-a} 1{|q| >= 1} dq`` on the line."""

    a: float
    d: int = field(default=1, init=False)

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("Pareto index must be positive")

    @property
    def directions(self):
        return np.array([[1.0], [-1.0]])

    @property
    def weights(self):
        return np.array([0.5, 0.5])

    @property
    def alpha(self):
        return self.a

    def sample(self, rng, n):
        radius = (1.0 - rng.random(n)) ** (-1.0 / self.a)
        sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        return (sign * radius)[:, None]


@dataclass(frozen=True)
class ParetoRadial:
    """``xi = W * Theta`` with ``P(W > R) = R^{-alpha}`` for ``R >= 1``.

    ``Theta`` takes the unit vectors ``directions`` with probabilities ``weights``.
    """

    alpha: float
    directions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("Pareto index must be positive")
        u = np.atleast_2d(np.asarray(self.directions, dtype=float))
        u = _unit_rows(u, u.shape[1])
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (u.shape[0],) or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
            raise ValueError("angular weights must be a probability vector")
        object.__setattr__(self, "directions", u)
        object.__setattr__(self, "weights", w)

    @property
    def d(self):
        return self.directions.shape[1]

    def sample(self, rng, n):
        radius = (1.0 - rng.random(n)) ** (-1.0 / self.alpha)
        idx = rng.choice(self.weights.size, size=n, p=self.weights)
        return radius[:, None] * self.directions[idx]


_W_SPLIT = 20.0 * pi


def _head(f, lo):
    # geometric breakpoints below 1 keep the near-singular end well resolved
    pts = [lo] + [x for x in np.geomspace(lo, 1.0, 8)[1:-1] if lo < 1.0] + \
          ([1.0] if lo < 1.0 else []) + [_W_SPLIT]
    return sum(integrate.quad(f, p, q, epsabs=0.0, epsrel=1e-12, limit=200)[0]
               for p, q in zip(pts[:-1], pts[1:]))


def _pareto_one_minus_cos(u, a):
    """``a int_1^inf (1 - cos(u s)) s^{-1-a} ds``.

    With ``w = |u| s`` this is ``a |u|^a int_{|u|}^inf (1 - cos w) w^{-1-a} dw``;
    the head is done by plain quadrature, the tail by the power integral
    minus a unit-frequency Fourier integral.
    """
    u = abs(u)
    if u == 0:
        return 0.0
    lo = u
    head = 0.0
    if lo < _W_SPLIT:
        head = _head(lambda w: 2.0 * np.sin(0.5 * w) ** 2 * w ** (-1.0 - a), lo)
        lo = _W_SPLIT
    osc, _ = integrate.quad(lambda w: w ** (-1.0 - a), lo, np.inf, weight="cos", wvar=1.0,
                            epsabs=1e-13)
    return a * u**a * (head + lo ** (-a) / a - osc)


def _pareto_sin(u, a):
    """``a int_1^inf sin(u s) s^{-1-a} ds`` (zero for the symmetric jump laws' net sum)."""
    if u == 0:
        return 0.0
    au = abs(u)
    lo = au
    head = 0.0
    if lo < _W_SPLIT:
        head = _head(lambda w: np.sin(w) * w ** (-1.0 - a), lo)
        lo = _W_SPLIT
    osc, _ = integrate.quad(lambda w: w ** (-1.0 - a), lo, np.inf, weight="sin", wvar=1.0,
                            epsabs=1e-13)
    return float(np.sign(u)) * a * au**a * (head + osc)


def _stable_scale_constant(a):
    """``2 Gamma(1-a) cos(pi a / 2)``: small-``u`` coefficient of the Pareto ``eta``."""
    if a == 1:
        return pi
    return 2.0 * gamma(1.0 - a) * cos(pi * a / 2.0)


# -- Lévy specs -------------------------------------------------------------------

class LevySpec:
    d: int

    def rho(self, lam):
        raise NotImplementedError

    def eta(self, lam):
        val = -2.0 * np.real(self.rho(lam))
        if np.any(val < -1e-12):
            raise ArithmeticError("negative eta: exponent is not a valid Lévy exponent")
        return np.maximum(val, 0.0)

    def sample_increment(self, dt, rng):
        raise NotImplementedError


@dataclass(frozen=True)
class BrownianDrift(LevySpec):
    sigma: np.ndarray
    b: np.ndarray

    def __init__(self, sigma=1.0, b=0.0, d=None):
        sigma = np.asarray(sigma, dtype=float)
        if d is None:
            d = sigma.shape[0] if sigma.ndim == 2 else 1
        sigma = sigma * np.eye(d) if sigma.ndim < 2 else sigma
        b = np.broadcast_to(np.asarray(b, dtype=float), (d,)).copy()
        if sigma.shape != (d, d):
            raise ValueError("sigma must be a d x d matrix")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "b", b)

    @property
    def d(self):
        return self.b.size

    @property
    def covariance(self):
        return self.sigma @ self.sigma.T

    def rho(self, lam):
        lam = _as_lambda(lam, self.d)
        quad = np.einsum("...i,ij,...j->...", lam, self.covariance, lam)
        return 1j * (lam @ self.b) - 0.5 * quad

    def sample_increment(self, dt, rng):
        dt = _as_dt(dt)
        z = rng.standard_normal(dt.shape + (self.d,))
        return dt[..., None] * self.b + np.sqrt(dt)[..., None] * (z @ self.sigma.T)


@dataclass(frozen=True)
class CompoundPoisson(LevySpec):
    beta: float
    jump: object

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("jump intensity must be positive")

    @property
    def d(self):
        return self.jump.d

    def rho(self, lam):
        lam = _as_lambda(lam, self.d)
        proj = lam @ self.jump.directions.T          # (..., n_dir)
        a = self.jump.alpha
        c = np.vectorize(lambda u: _pareto_one_minus_cos(u, a), otypes=[float])(proj)
        s = np.vectorize(lambda u: _pareto_sin(u, a), otypes=[float])(proj)
        w = self.jump.weights
        return self.beta * (-(c @ w) + 1j * (s @ w))

    def sample_increment(self, dt, rng):
        dt = _as_dt(dt)
        flat = dt.ravel()
        counts = rng.poisson(self.beta * flat)
        out = np.zeros((flat.size, self.d))
        total = int(counts.sum())
        if total:
            jumps = self.jump.sample(rng, total)
            owner = np.repeat(np.arange(flat.size), counts)
            for k in range(self.d):
                out[:, k] = np.bincount(owner, weights=jumps[:, k], minlength=flat.size)
        return out.reshape(dt.shape + (self.d,))

    def sample_counts(self, dt, rng):
        return rng.poisson(self.beta * _as_dt(dt))


def symmetric_stable_1d(alpha, rng, size):
    """Chambers-Mallows-Stuck draw with characteristic function ``exp(-|t|^alpha)``."""
    v = rng.uniform(-pi / 2, pi / 2, size)
    w = -np.log1p(-rng.random(size))
    if alpha == 1:
        return np.tan(v)
    return (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha))


def positive_stable(beta, rng, size):
    """Kanter draw with Laplace transform ``exp(-s^beta)``, ``0 < beta < 1``."""
    v = rng.uniform(0.0, pi, size)
    w = -np.log1p(-rng.random(size))
    return (np.sin(beta * v) / np.sin(v) ** (1.0 / beta)
            * (np.sin((1.0 - beta) * v) / w) ** ((1.0 - beta) / beta))


@dataclass(frozen=True)
class SymmetricStable(LevySpec):
    """Symmetric alpha-stable free dynamics, ``rho = -zeta/2``.

    Either isotropic (``c``) or spectral (``directions`` with ``weights``).
    """

    alpha: float
    c: float | None = None
    directions: np.ndarray | None = None
    weights: np.ndarray | None = None
    dim: int = 1

    def __post_init__(self):
        if not 0 < self.alpha <= 2:
            raise ValueError("alpha must lie in (0, 2]")
        if self.alpha == 1:
            raise ValueError("alpha = 1 is not supported")
        if (self.c is None) == (self.directions is None):
            raise ValueError("give either an isotropic scale c or a spectral measure")
        if self.c is not None and not self.c > 0:
            raise ValueError("scale must be positive")
        if self.directions is not None:
            u = np.atleast_2d(np.asarray(self.directions, dtype=float))
            u = _unit_rows(u, u.shape[1])
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (u.shape[0],) or np.any(w <= 0):
                raise ValueError("spectral weights must be positive, one per direction")
            object.__setattr__(self, "directions", u)
            object.__setattr__(self, "weights", w)
            object.__setattr__(self, "dim", u.shape[1])

    @property
    def d(self):
        return self.dim

    def zeta(self, lam):
        lam = _as_lambda(lam, self.d)
        if self.c is not None:
            return self.c**self.alpha * np.linalg.norm(lam, axis=-1) ** self.alpha
        return (np.abs(lam @ self.directions.T) ** self.alpha) @ self.weights

    def rho(self, lam):
        return -0.5 * self.zeta(lam) + 0j

    def sample_increment(self, dt, rng):
        dt = _as_dt(dt)
        a = self.alpha
        if self.c is not None:
            # increment CF exp(-(c^a dt / 2) |lam|^a), scale s = c (dt/2)^(1/a)
            s = self.c * (dt / 2.0) ** (1.0 / a)
            if self.d == 1 or a == 2:
                z = (symmetric_stable_1d(a, rng, dt.shape + (self.d,)) if self.d == 1
                     else np.sqrt(2.0) * rng.standard_normal(dt.shape + (self.d,)))
                return s[..., None] * z
            # sub-Gaussian: sqrt(A) G has CF exp(-(|lam|^2/2)^(a/2))
            A = positive_stable(a / 2.0, rng, dt.shape)
            g = rng.standard_normal(dt.shape + (self.d,))
            return (s * np.sqrt(2.0) * np.sqrt(A))[..., None] * g
        out = np.zeros(dt.shape + (self.d,))
        for u, w in zip(self.directions, self.weights):
            s = (0.5 * w * dt) ** (1.0 / a)
            out += (s * symmetric_stable_1d(a, rng, dt.shape))[..., None] * u
        return out


# -- attraction targets --------------------------------------------------------------

@dataclass
class AttractionTarget:
    """Stable target ``zeta(lam)`` and normalising rule ``b_N``."""

    alpha: float
    zeta0: Callable
    b_table: dict | None = None

    def b_N(self, N):
        if self.b_table is not None:
            if N not in self.b_table:
                raise KeyError(f"no b_N tabulated for N={N}")
            return float(self.b_table[N])
        return float(N) ** (1.0 / self.alpha)


def attraction_target(spec: LevySpec, b_table=None) -> AttractionTarget:
    """Catalogued domain-of-normal-attraction targets of the supported specs."""
    if isinstance(spec, BrownianDrift):
        cov = spec.covariance
        return AttractionTarget(
            2.0, lambda lam: np.einsum("...i,ij,...j->...", _as_lambda(lam, spec.d), cov,
                                       _as_lambda(lam, spec.d)), b_table)
    if isinstance(spec, SymmetricStable):
        return AttractionTarget(spec.alpha, spec.zeta, b_table)
    if isinstance(spec, CompoundPoisson):
        a = spec.jump.alpha
        if isinstance(spec.jump, ParetoSymmetric) and a > 2:
            D = spec.beta * a / (a - 2.0)
            return AttractionTarget(2.0, lambda lam: D * _as_lambda(lam, 1)[..., 0] ** 2, b_table)
        if 0 < a < 2:
            k = spec.beta * _stable_scale_constant(a)
            u, w = spec.jump.directions, spec.jump.weights
            return AttractionTarget(
                a, lambda lam: k * (np.abs(_as_lambda(lam, spec.d) @ u.T) ** a) @ w, b_table)
    raise ValueError("no known attraction target")


def pareto_variance_constant(spec: CompoundPoisson) -> float:
    """``D = beta a / (a - 2)`` for the finite-variance Pareto walk."""
    a = spec.jump.alpha
    if not a > 2:
        raise ValueError("variance is infinite for a <= 2")
    return spec.beta * a / (a - 2.0)


# -- module-level operations ------------------------------------------------------------

def rho(spec: LevySpec, lam):
    return spec.rho(lam)


def eta(spec: LevySpec, lam):
    return spec.eta(lam)


def sample_increment(spec: LevySpec, dt, rng):
    return spec.sample_increment(dt, rng)
