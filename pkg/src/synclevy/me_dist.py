"""Inter-event distributions with rational Laplace transforms.

An :class:`MEDistribution` holds the transform ``p*(z) = P(z)/Q(z)`` of the
inter-event density and, for the phase-type catalogue (exponential, Erlang,
hyperexponential, Coxian), a samplable representation ``(alpha, T)``.

Generating functions of renewal counts are kept as partial fractions:

* ordinary process, ``phi*(z, v) = (1 - p*) / (z (1 - v p*)) = R1 / (Q - vP)``
* stationary process, ``phi2*(z, v) = (1 - pV*)/z + v pV* phi*`` with
  ``pV* = (1 - p*)/(m z)``, which reduces to ``S_v / (m (Q - vP))``

with ``R1 = (Q - P)/z``, ``R2 = (mQ - R1)/z`` and
``S_v = (R2 (Q - vP) + v R1^2) / Q`` exact polynomial quotients, so the
removable point ``z = 0`` never needs special casing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import factorial

import numpy as np

from .polyrat import (
    PartialFractions,
    Polynomial,
    RationalFunction,
    group_roots,
    partial_fractions,
    roots,
)

_PROBE_POINTS = np.array(
    [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 0.3j, 1j, 3j, 0.2 + 0.7j, 1 - 2j, 4 + 1j,
     0.05 - 0.05j, 10.0, 2 + 8j, 0.7, 1.5 + 0.5j, 6j, 3 - 3j, 20.0],
    dtype=complex,
)


# -- samplable forms ---------------------------------------------------------

@dataclass(frozen=True)
class Exponential:
    mean: float

    def __post_init__(self):
        if not self.mean > 0:
            raise ValueError("mean must be positive")

    def phase_type(self):
        return np.array([1.0]), np.array([[-1.0 / self.mean]])

    def transform(self):
        mu = 1.0 / self.mean
        return RationalFunction([mu], [mu, 1.0], den_roots=[(-mu, 1)])

    def ppf(self, u):
        return -self.mean * np.log1p(-np.asarray(u))

    def sample(self, rng, size=None):
        return self.ppf(rng.random(size))


@dataclass(frozen=True)
class Erlang:
    k: int
    mean: float

    def __post_init__(self):
        if not (1 <= self.k <= 8):
            raise ValueError("Erlang stages must be in 1..8")
        if not self.mean > 0:
            raise ValueError("mean must be positive")

    def phase_type(self):
        mu = self.k / self.mean
        T = -mu * np.eye(self.k) + mu * np.eye(self.k, k=1)
        alpha = np.zeros(self.k)
        alpha[0] = 1.0
        return alpha, T

    def transform(self):
        mu = self.k / self.mean
        den = Polynomial.from_roots([-mu] * self.k)
        return RationalFunction([mu**self.k], den, den_roots=[(-mu, self.k)])

    def sample(self, rng, size=None):
        # sum of k exponential stages with mean m/k
        shape = () if size is None else tuple(np.atleast_1d(size))
        u = rng.random((self.k,) + shape)
        return -(self.mean / self.k) * np.log1p(-u).sum(axis=0)


@dataclass(frozen=True)
class HyperExponential:
    weights: tuple
    means: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.weights) != len(self.means) or not 1 <= w.size <= 4:
            raise ValueError("hyperexponential needs 1..4 matching weights and means")
        if np.any(w <= 0) or abs(w.sum() - 1) > 1e-12:
            raise ValueError("weights must be positive and sum to 1")
        if any(not m > 0 for m in self.means):
            raise ValueError("means must be positive")
        object.__setattr__(self, "weights", tuple(float(x) for x in self.weights))
        object.__setattr__(self, "means", tuple(float(x) for x in self.means))

    def phase_type(self):
        return np.asarray(self.weights), np.diag([-1.0 / m for m in self.means])

    def transform(self):
        rates = [1.0 / m for m in self.means]
        groups: dict[float, float] = {}
        for w, mu in zip(self.weights, rates):
            groups[mu] = groups.get(mu, 0.0) + w
        mus = list(groups)
        den = Polynomial.from_roots([-mu for mu in mus])
        num = Polynomial([0.0])
        for i, mu in enumerate(mus):
            others = [-x for j, x in enumerate(mus) if j != i]
            num = num + Polynomial.from_roots(others, groups[mu] * mu)
        return RationalFunction(num, den, den_roots=[(-mu, 1) for mu in mus])

    def sample(self, rng, size=None):
        w = np.asarray(self.weights)
        branch = rng.choice(w.size, size=size, p=w)
        means = np.asarray(self.means)[branch]
        return -means * np.log1p(-rng.random(size))


@dataclass(frozen=True)
class Coxian:
    """Stages with ``rates``; after stage i the chain exits with ``exit_probs[i]``."""

    rates: tuple
    exit_probs: tuple

    def __post_init__(self):
        n = len(self.rates)
        if not 1 <= n <= 4 or len(self.exit_probs) != n:
            raise ValueError("Coxian needs 1..4 stages with matching exit probabilities")
        if any(not r > 0 for r in self.rates):
            raise ValueError("rates must be positive")
        e = list(map(float, self.exit_probs))
        if any(not 0 <= x <= 1 for x in e) or abs(e[-1] - 1.0) > 1e-12:
            raise ValueError("exit probabilities must lie in [0,1] with the last equal to 1")
        e[-1] = 1.0
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        object.__setattr__(self, "exit_probs", tuple(e))

    def phase_type(self):
        n = len(self.rates)
        T = np.diag([-r for r in self.rates])
        for i in range(n - 1):
            T[i, i + 1] = self.rates[i] * (1 - self.exit_probs[i])
        alpha = np.zeros(n)
        alpha[0] = 1.0
        return alpha, T

    def transform(self):
        lam = self.rates
        den = Polynomial.from_roots([-r for r in lam])
        num = Polynomial([0.0])
        reach = 1.0
        for i, e in enumerate(self.exit_probs):
            prod_rates = float(np.prod(lam[: i + 1]))
            tail_roots = [-r for r in lam[i + 1:]]
            num = num + Polynomial.from_roots(tail_roots, reach * e * prod_rates)
            reach *= 1 - e
        counts: dict[float, int] = {}
        for r in lam:
            counts[r] = counts.get(r, 0) + 1
        return RationalFunction(num, den, den_roots=[(-r, k) for r, k in counts.items()])

    def sample(self, rng, size=None):
        return sample_phase_type(*self.phase_type(), rng, size)


def sample_phase_type(alpha, T, rng, size=None):
    """Absorption times of the CTMC with initial law ``alpha`` and sub-generator ``T``."""
    alpha = np.asarray(alpha, dtype=float)
    T = np.asarray(T, dtype=float)
    shape = () if size is None else tuple(np.atleast_1d(size))
    n = int(np.prod(shape)) if shape else 1
    k = alpha.size
    exit_rates = -T.sum(axis=1)
    out_rate = -np.diag(T)
    # jump table: columns 0..k-1 move to that phase, column k absorbs
    jump = np.zeros((k, k + 1))
    jump[:, :k] = T / out_rate[:, None]
    np.fill_diagonal(jump[:, :k], 0.0)
    jump[:, k] = exit_rates / out_rate
    cum = np.cumsum(jump, axis=1)
    cum[:, -1] = 1.0
    state = rng.choice(k, size=n, p=alpha / alpha.sum())
    total = np.zeros(n)
    alive = np.arange(n)
    while alive.size:
        s = state[alive]
        total[alive] += -np.log1p(-rng.random(alive.size)) / out_rate[s]
        u = rng.random(alive.size)
        nxt = (u[:, None] > cum[s]).sum(axis=1)
        state[alive] = nxt
        alive = alive[nxt < k]
    return total.reshape(shape) if shape else float(total[0])


# -- the distribution ---------------------------------------------------------

class MEDistribution:
    """Inter-event law given by its rational Laplace transform."""

    def __init__(self, p_star: RationalFunction, sampler=None, name=None):
        self.p_star = p_star
        self.sampler = sampler
        self.name = name or (type(sampler).__name__ if sampler is not None else "ME")
        self._validate()

    # constructors for the catalogue
    @classmethod
    def exponential(cls, mean):
        s = Exponential(mean)
        return cls(s.transform(), s, name=f"Exponential(m={mean:g})")

    @classmethod
    def erlang(cls, k, mean):
        s = Erlang(int(k), mean)
        return cls(s.transform(), s, name=f"Erlang-{k}(m={mean:g})")

    @classmethod
    def hyperexponential(cls, weights, means):
        s = HyperExponential(tuple(weights), tuple(means))
        return cls(s.transform(), s, name="HyperExponential")

    @classmethod
    def coxian(cls, rates, exit_probs):
        s = Coxian(tuple(rates), tuple(exit_probs))
        return cls(s.transform(), s, name="Coxian")

    @classmethod
    def from_coefficients(cls, num, den):
        """Analytics-only law from ascending transform coefficients."""
        return cls(RationalFunction(num, den), None, name="ME(raw)")

    def __repr__(self):
        return f"MEDistribution({self.name})"

    def _validate(self):
        f = self.p_star
        if not f.is_proper:
            raise ValueError("p* must be a proper rational function")
        if abs(f(0.0) - 1) > 1e-12:
            raise ValueError(f"p*(0) = {f(0.0)} differs from 1")
        if not f.is_rpfn:
            raise ValueError("p* has a pole with Re >= 0")
        if not self.mean > 0:
            raise ValueError("mean must be positive")
        if self.sampler is not None:
            alpha, T = self.sampler.phase_type()
            exit_vec = -T.sum(axis=1)
            eye = np.eye(alpha.size)
            for z in _PROBE_POINTS:
                ph = alpha @ np.linalg.solve(z * eye - T, exit_vec)
                pz = f(z)
                if abs(ph - pz) > 1e-10 * max(1.0, abs(pz)):
                    raise ValueError("sampler transform does not match p*")

    # -- transform ------------------------------------------------------------

    @property
    def P(self) -> Polynomial:
        return self.p_star.num

    @property
    def Q(self) -> Polynomial:
        return self.p_star.den

    def p_star_eval(self, z):
        z = complex(z)
        for p, _ in self.p_star.poles():
            if abs(z - p) <= 1e-12 * max(1.0, abs(p)):
                raise ZeroDivisionError(f"p* evaluated at its pole {p}")
        return complex(self.p_star(z))

    @cached_property
    def _series(self):
        return self.p_star.series_at_zero(5)

    def moment(self, r: int) -> float:
        """``m_r = (-1)^r (p*)^{(r)}(0)`` from the exact power series at 0."""
        if not 1 <= r <= 4:
            raise ValueError("moments are available for r = 1..4")
        return float(((-1) ** r * factorial(r) * self._series[r]).real)

    @property
    def mean(self) -> float:
        return self.moment(1)

    @cached_property
    def R1(self) -> Polynomial:
        """``(Q - P) / z``; ``F-bar*(z) = R1/Q``."""
        return (self.Q - self.P).divide_by_z(1)

    @cached_property
    def R2(self) -> Polynomial:
        return (self.mean * self.Q - self.R1).divide_by_z(1)

    @cached_property
    def R3(self) -> Polynomial:
        """``(P - Q + m z P) / z^2``; ``theta(z) = R3 / (m R1)``."""
        m = self.mean
        return (self.P - self.Q + Polynomial([0.0, m]) * self.P).divide_by_z(2)

    # -- sampling -------------------------------------------------------------

    def _require_sampler(self):
        if self.sampler is None:
            raise ValueError("analytics-only distribution")

    def sample(self, rng, size=None):
        self._require_sampler()
        return self.sampler.sample(rng, size)

    @cached_property
    def _stationary_ph(self):
        alpha, T = self.sampler.phase_type()
        a_e = np.linalg.solve(-T.T, alpha) / self.mean
        return a_e, T

    def sample_stationary_first(self, rng, size=None):
        """Draw from the equilibrium density ``F-bar(w)/m``."""
        self._require_sampler()
        if isinstance(self.sampler, Exponential):
            return self.sampler.sample(rng, size)
        return sample_phase_type(*self._stationary_ph, rng, size)

    # -- time-domain building blocks ------------------------------------------

    @cached_property
    def density_pf(self) -> PartialFractions:
        return partial_fractions(self.p_star)

    @cached_property
    def survival_pf(self) -> PartialFractions:
        """Partial fractions of ``F-bar*(z) = (1 - p*)/z``."""
        return partial_fractions(RationalFunction(self.R1, self.Q, self.p_star.poles()))

    @cached_property
    def renewal_roots(self):
        """Nonzero roots of ``1 - p*(z)`` (simple by assumption)."""
        if self.R1.degree == 0:
            return []
        r = roots(self.R1)
        try:
            grouped = group_roots(r)
        except ValueError:
            raise ValueError("multiple root of 1 - p*: simple-root assumption violated") from None
        if any(k > 1 for _, k in grouped):
            raise ValueError("multiple root of 1 - p*: simple-root assumption violated")
        return [z for z, _ in grouped]

    @cached_property
    def renewal_pf(self) -> PartialFractions:
        den_roots = [(0.0, 1)] + [(z, 1) for z in self.renewal_roots]
        return partial_fractions(RationalFunction(self.P, self.Q - self.P, den_roots))

    def stationary_numerator(self, v) -> Polynomial:
        """``S_v = (R2 (Q - vP) + v R1^2) / Q``; the division is exact."""
        top = self.R2 * (self.Q - v * self.P) + v * self.R1 * self.R1
        quo, rem = divmod(top, self.Q)
        if np.abs(rem.coeffs).max() > 1e-9 * np.abs(top.coeffs).max():
            raise ArithmeticError("stationary numerator is not divisible by Q")
        return quo

    def generating_poles(self, v):
        """Roots of ``Q - vP`` (poles of both count generating transforms)."""
        if v == 0:
            return self.p_star.poles()
        r = roots(self.Q - v * self.P)
        try:
            grouped = group_roots(r)
        except ValueError:
            raise ValueError("multiple root of 1 - v p*") from None
        return grouped

    def generating_pf(self, v, stationary=False) -> PartialFractions:
        """Partial fractions of ``phi*(., v)`` or, if ``stationary``, ``phi2*(., v)``."""
        key = (float(v), bool(stationary))
        cache = self.__dict__.setdefault("_gen_cache", {})
        if key not in cache:
            den = self.Q - v * self.P
            poles = self.generating_poles(v)
            if stationary:
                f = RationalFunction(self.stationary_numerator(v), self.mean * den, poles)
            else:
                f = RationalFunction(self.R1, den, poles)
            cache[key] = partial_fractions(f)
        return cache[key]


# -- module-level operations ---------------------------------------------------

def p_star_eval(dist: MEDistribution, z) -> complex:
    return dist.p_star_eval(z)


def moments(dist: MEDistribution, r: int) -> float:
    return dist.moment(r)


def sample(dist: MEDistribution, rng, size=None):
    return dist.sample(rng, size)


def sample_stationary_first(dist: MEDistribution, rng, size=None):
    return dist.sample_stationary_first(rng, size)


def renewal_density_pf(dist: MEDistribution) -> PartialFractions:
    """``h*(z) = p*/(1 - p*)``: simple pole at 0 with residue ``1/m``."""
    return dist.renewal_pf


def renewal_function(dist: MEDistribution, t):
    """``H(t)``, expected number of renewals in ``[0, t]``."""
    return np.real(dist.renewal_pf.integral(t))


def _check_off_roots(dist, z, v):
    den = dist.Q - v * dist.P
    scale = den.scale_at(z)
    if abs(den(z)) <= 1e-13 * scale:
        raise ZeroDivisionError("evaluation at a root of 1 - v p*")


def phi_star(dist: MEDistribution, z, v) -> complex:
    """Laplace transform of ``E v^{Pi_u}`` for the ordinary renewal process."""
    z = complex(z)
    _check_off_roots(dist, z, v)
    return complex(dist.R1(z) / (dist.Q(z) - v * dist.P(z)))


def phi2_star(dist: MEDistribution, z, v) -> complex:
    """Same for the stationary (equilibrium-delayed) renewal process."""
    z = complex(z)
    _check_off_roots(dist, z, v)
    return complex(dist.stationary_numerator(v)(z) / (dist.mean * (dist.Q(z) - v * dist.P(z))))


def theta_eval(dist: MEDistribution, z) -> complex:
    """``theta(z) = (p* - 1 + m z p*) / (m z (1 - p*))``, removable at 0."""
    z = complex(z)
    r1 = dist.R1(z)
    if abs(r1) <= 1e-13 * dist.R1.scale_at(z):
        raise ZeroDivisionError("evaluation at a root of 1 - p*")
    return complex(dist.R3(z) / (dist.mean * r1))


def phi_time(dist: MEDistribution, t, v):
    """``E v^{Pi_t}`` for the ordinary renewal process."""
    return np.real(dist.generating_pf(v).inverse(t))


def phi2_time(dist: MEDistribution, t, v):
    """``E v^{Pi_t}`` for the stationary renewal process."""
    return np.real(dist.generating_pf(v, stationary=True).inverse(t))


# -- perturbed roots ------------------------------------------------------------

def k_N(N: int, kappa: float = 2.0) -> float:
    return 1.0 - kappa / ((N - 1) * N)


@dataclass
class PerturbedRootData:
    N: int
    k_N: float
    gamma_N: float
    kappa_N: float
    seed: float
    other_roots: list
    c_coeffs: list = field(default_factory=list)
    d_coeffs: list = field(default_factory=list)

    @property
    def c0(self) -> complex:
        return self.c_coeffs[0]

    @property
    def d0(self) -> complex:
        return self.d_coeffs[0]


def kappa_seed(dist: MEDistribution, gamma: float) -> float:
    m1, m2 = dist.moment(1), dist.moment(2)
    return -gamma / m1 + m2 * gamma**2 / (2 * m1**3)


def solve_perturbed_roots(dist: MEDistribution, N: int) -> PerturbedRootData:
    """Roots of ``1 - k_N p*(z)`` and the residues of ``phi*``, ``phi2*`` there."""
    if N < 2:
        raise ValueError("N must be at least 2")
    v = k_N(N)
    if v <= 0:
        raise ValueError("no real root in the separation window (k_N = 0)")
    gamma = 1.0 / v - 1.0
    seed = kappa_seed(dist, gamma)

    # Newton on f(z) = Q(z) - v P(z), real arithmetic
    f = (dist.Q - v * dist.P)
    coeffs = f.coeffs.real
    dcoeffs = f.deriv().coeffs.real
    z = seed
    for _ in range(100):
        step = np.polyval(coeffs[::-1], z) / np.polyval(dcoeffs[::-1], z)
        z -= step
        if abs(step) <= 1e-12:
            break
    else:
        raise ValueError("Newton iteration for kappa_N did not converge")
    kappa = float(z)

    all_roots = roots(f)
    try:
        group_roots(all_roots)
    except ValueError:
        raise ValueError("root multiplicity detected for 1 - k_N p*") from None
    i0 = int(np.argmin(np.abs(all_roots - kappa)))
    others = [complex(r) for i, r in enumerate(all_roots) if i != i0]

    unperturbed = dist.renewal_roots
    lo = 0.5 * max(r.real for r in unperturbed) if unperturbed else -np.inf
    if not lo < kappa < 0:
        raise ValueError("no real root in the separation window")
    for r in others:
        if lo < r.real:
            raise ValueError("separation window contains another root")

    fprime = f.deriv()
    poles = [kappa] + others
    c = [complex(dist.R1(p) / fprime(p)) for p in poles]
    s_v = dist.stationary_numerator(v)
    d = [complex(s_v(p) / (dist.mean * fprime(p))) for p in poles]
    return PerturbedRootData(N=N, k_N=v, gamma_N=gamma, kappa_N=kappa, seed=seed,
                             other_roots=others, c_coeffs=c, d_coeffs=d)
