import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from synclevy.levy import (BrownianDrift, CompoundPoisson, ParetoRadial, ParetoSymmetric,
                           SymmetricStable, attraction_target, eta, pareto_variance_constant,
                           rho, sample_increment)


def specs():
    return [
        BrownianDrift(1.0, 0.0),
        BrownianDrift([[1.0, 0.3], [0.0, 0.5]], [0.2, -0.1]),
        CompoundPoisson(1.0, ParetoSymmetric(1.5)),
        CompoundPoisson(0.7, ParetoSymmetric(3.0)),
        CompoundPoisson(2.0, ParetoRadial(1.2, [[1, 0], [0, 1], [-1, 0], [0, -1]], [0.25] * 4)),
        SymmetricStable(1.5, c=1.0),
        SymmetricStable(0.8, c=2.0, dim=2),
        SymmetricStable(1.7, directions=[[1, 0], [0.6, 0.8]], weights=[1.0, 0.5]),
    ]


def probe(spec, k=1.0):
    return np.full(spec.d, k) if spec.d > 1 else k


def test_rho_examples():
    assert rho(BrownianDrift(1.0, 0.0), 2.0) == pytest.approx(-2)
    assert rho(SymmetricStable(1.5, c=1.0), 2.0).real == pytest.approx(-0.5 * 2**1.5)
    assert rho(SymmetricStable(1.5, c=1.0), 2.0).real == pytest.approx(-1.41421, abs=1e-5)
    for spec in specs():
        assert rho(spec, np.zeros(spec.d)) == 0


def test_eta_examples():
    assert eta(BrownianDrift(1.0, 0.0), 1.0) == pytest.approx(1)
    assert eta(BrownianDrift(2.0, 5.0), 1.0) == pytest.approx(4)
    assert eta(SymmetricStable(1.5, c=1.0), 2.0) == pytest.approx(2.82843, abs=1e-5)
    for spec in specs():
        assert eta(spec, np.zeros(spec.d)) == 0


@pytest.mark.parametrize("spec", specs(), ids=lambda s: type(s).__name__)
def test_eta_nonnegative_and_symmetric(spec):
    rng = np.random.default_rng(3)
    lam = rng.normal(size=(25, spec.d)) * 3
    e = spec.eta(lam)
    assert np.all(e >= 0)
    assert np.allclose(e, spec.eta(-lam), atol=1e-12)


def test_pareto_exponent_quadrature():
    cp = CompoundPoisson(1.0, ParetoSymmetric(3.0))
    # closed form for a=3: a int_1^inf cos(u s) s^{-4} ds checked against direct quad
    from scipy import integrate
    u = 0.7
    direct = integrate.quad(lambda s: (1 - np.cos(u * s)) * 3 * s**-4, 1, 2000, limit=2000)[0]
    assert cp.eta(u) == pytest.approx(2 * direct, abs=1e-6)


@pytest.mark.parametrize("spec", specs(), ids=lambda s: type(s).__name__)
def test_increment_cf_matches_exponent(spec):
    rng = np.random.default_rng(4)
    n, dt = 10**6, 0.6
    x = sample_increment(spec, np.full(n, dt), rng)
    assert x.shape == (n, spec.d)
    for k in (0.4, 1.3):
        lam = np.atleast_1d(probe(spec, k))
        ph = x @ lam
        emp = np.mean(np.exp(1j * ph))
        th = np.exp(dt * spec.rho(lam))
        se_re, se_im = np.cos(ph).std() / 1e3, np.sin(ph).std() / 1e3
        assert abs(emp.real - th.real) < 4 * se_re
        assert abs(emp.imag - th.imag) < 4 * se_im + 1e-12


@pytest.mark.parametrize("spec", specs()[:3], ids=lambda s: type(s).__name__)
def test_half_steps_equal_full_step(spec):
    rng = np.random.default_rng(5)
    n = 4 * 10**5
    a = sample_increment(spec, np.full(n, 0.5), rng) + sample_increment(spec, np.full(n, 0.5), rng)
    b = sample_increment(spec, np.full(n, 1.0), rng)
    lam = np.atleast_1d(probe(spec, 0.8))
    ca, cb = np.cos(a @ lam), np.cos(b @ lam)
    se = np.hypot(ca.std(), cb.std()) / np.sqrt(n)
    assert abs(ca.mean() - cb.mean()) < 4 * se


def test_jump_count_mean():
    rng = np.random.default_rng(6)
    cp = CompoundPoisson(1.0, ParetoSymmetric(1.5))
    k = cp.sample_counts(np.ones(10**6), rng)
    assert abs(k.mean() - 1) < 0.004


def test_increment_dt_zero_and_brownian_moments():
    rng = np.random.default_rng(7)
    for spec in specs():
        assert np.all(spec.sample_increment(np.zeros(5), rng) == 0)
    b = BrownianDrift(2.0, 1.0)
    x = b.sample_increment(np.full(10**6, 0.5), rng)[:, 0]
    assert x.mean() == pytest.approx(0.5, abs=0.01)
    assert x.var() == pytest.approx(2.0, rel=0.01)


def test_stable_rejects_alpha_one_and_bad_input():
    with pytest.raises(ValueError):
        SymmetricStable(1.0, c=1.0)
    with pytest.raises(ValueError):
        SymmetricStable(2.5, c=1.0)
    with pytest.raises(ValueError):
        SymmetricStable(1.5)
    with pytest.raises(ValueError):
        ParetoRadial(1.5, [[1, 0]], [0.5])


@settings(max_examples=50, deadline=None)
@given(st.floats(0.2, 1.95).filter(lambda a: abs(a - 1) > 1e-3), st.floats(0.1, 5),
       st.floats(-20, 20), st.integers(1, 10**6))
def test_stable_normal_attraction_identity(alpha, c, lam, N):
    s = SymmetricStable(alpha, c=c)
    lhs = N * s.eta(lam / N ** (1 / alpha))
    rhs = attraction_target(s).zeta0(lam)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


def test_attraction_examples():
    t = attraction_target(BrownianDrift(1.0, 0.0))
    assert t.alpha == 2 and t.zeta0(3.0) == pytest.approx(9) and t.b_N(16) == pytest.approx(4)
    cp = CompoundPoisson(1.0, ParetoSymmetric(3.0))
    assert pareto_variance_constant(cp) == pytest.approx(3)
    t = attraction_target(cp)
    assert t.alpha == 2 and t.zeta0(1.0) == pytest.approx(3)
    # D lam^2 is the small-lambda behaviour of eta for finite variance jumps
    assert cp.eta(1e-3) / 1e-6 == pytest.approx(3, rel=1e-2)
    t = attraction_target(SymmetricStable(1.5, c=2.0))
    assert t.alpha == 1.5 and t.b_N(8) == pytest.approx(8 ** (2 / 3))
    assert t.zeta0(1.0) == pytest.approx(2**1.5)
    heavy = CompoundPoisson(1.0, ParetoSymmetric(1.5))
    t = attraction_target(heavy)
    assert t.alpha == 1.5
    for N in (10**4, 10**6):
        assert N * heavy.eta(1.0 / N ** (1 / 1.5)) == pytest.approx(t.zeta0(1.0), rel=0.05)
    assert attraction_target(heavy, b_table={20: 7.0}).b_N(20) == 7.0
    with pytest.raises(ValueError, match="no known attraction target"):
        attraction_target(CompoundPoisson(1.0, ParetoSymmetric(2.0)))


def test_zeta_properties():
    for spec in specs():
        try:
            t = attraction_target(spec)
        except ValueError:
            continue
        lam = np.random.default_rng(0).normal(size=(10, spec.d))
        z = np.asarray(t.zeta0(lam))
        assert np.all(z >= 0) and np.allclose(z, t.zeta0(-lam))
        assert t.zeta0(np.zeros(spec.d)) == 0
