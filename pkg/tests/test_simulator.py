import numpy as np
import pytest
from scipy import stats

from synclevy import MEDistribution
from synclevy.analytic import chi_markov_t
from synclevy.levy import BrownianDrift
from synclevy.limits_stats import empirical_cf
from synclevy.simulator import (BLOCK_SIZE, AllZero, FixedInitial, IIDInitial, RoutingMatrix,
                                SymmetricUniform, SyncSystemConfig, chi_mc, contraction_oracle,
                                init_state, run_until, sample_differences, step, v_statistic,
                                v_trajectory)


def normal_init(rng, shape):
    return rng.standard_normal(shape)


def markov(N=5, T=100.0, **kw):
    return SyncSystemConfig(N, BrownianDrift(1.0, 0.0), MEDistribution.exponential(1.0), T, **kw)


# -- step ------------------------------------------------------------------------------

def test_two_components_without_noise_stay_equal(expo):
    cfg = SyncSystemConfig(2, BrownianDrift(0.0, 0.0), expo, 10.0, initial=IIDInitial(normal_init))
    st = init_state(cfg, seed=3)
    assert st.x[0, 0] != st.x[1, 0]
    step(st, cfg)
    for _ in range(50):
        assert np.array_equal(st.x[0], st.x[1])
        step(st, cfg)


def test_step_copies_sender_to_recipient(expo):
    cfg = SyncSystemConfig(4, BrownianDrift(0.0, 0.0), expo, 1.0, initial=IIDInitial(normal_init))
    st = init_state(cfg, seed=1)
    for _ in range(20):
        before = st.x.copy()
        t0 = st.t
        step(st, cfg)
        T, k, j = st.last_event
        assert T > t0 and j != k
        assert np.array_equal(st.x[j], before[k])
        others = [i for i in range(4) if i != j]
        assert np.array_equal(st.x[others], before[others])
        assert all(f[0] > st.t for f in st.next_fire)


def test_recipient_frequencies():
    N, n = 6, 10**6
    rng = np.random.default_rng(0)
    senders = rng.integers(0, N, n)
    rec = SymmetricUniform().recipients(senders, N, rng)
    assert not np.any(rec == senders)
    off = (rec - senders) % N
    counts = np.bincount(off, minlength=N)[1:]
    p = 1.0 / (N - 1)
    se = np.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) < 4 * se)


def test_scalar_engine_recipients_uniform(expo):
    cfg = SyncSystemConfig(4, BrownianDrift(0.0, 0.0), expo, 1.0)
    st = init_state(cfg, seed=2)
    n = 20000
    off = np.empty(n, int)
    for i in range(n):
        step(st, cfg)
        _, k, j = st.last_event
        off[i] = (j - k) % 4
    counts = np.bincount(off, minlength=4)[1:]
    se = np.sqrt(n * (1 / 3) * (2 / 3))
    assert np.all(np.abs(counts - n / 3) < 4 * se)


def test_event_count_mean(expo):
    N, T, reps = 4, 5.0, 400
    cfg = SyncSystemConfig(N, BrownianDrift(1.0, 0.0), expo, T)
    counts = np.array([run_until(init_state(cfg, seed=s), cfg, T).event_count for s in range(reps)])
    se = counts.std(ddof=1) / np.sqrt(reps)
    assert abs(counts.mean() - N * T / 1.0) < 4 * se


def test_superposition_gaps_exponential():
    N, m = 5, 2.0
    cfg = SyncSystemConfig(N, BrownianDrift(0.0, 0.0), MEDistribution.exponential(m), 1.0)
    st = init_state(cfg, seed=11)
    times = []
    for _ in range(5000):
        step(st, cfg)
        times.append(st.t)
    gaps = np.diff(np.concatenate([[0.0], times]))
    assert stats.kstest(gaps, "expon", args=(0, m / N)).pvalue > 0.01


def test_scripted_recurrence():
    # fixed epochs, uniform senders: E V after each epoch follows k V e^{-dt eta} + l
    N, lam = 4, 1.0
    x0 = np.array([[0.0], [0.7], [-1.1], [2.0]])
    cfg = SyncSystemConfig(N, BrownianDrift(0.6, 0.0), MEDistribution.exponential(1.0), 3.0,
                           initial=FixedInitial(x0))
    epochs = [0.3, 0.5, 1.2, 1.6, 2.5]
    reps = 4000
    v = np.zeros((reps, len(epochs)))
    for r in range(reps):
        st = init_state(cfg, seed=r, epochs=epochs)
        for i in range(len(epochs)):
            step(st, cfg)
            v[r, i] = v_statistic(st, lam)
    k = 1 - 2 / ((N - 1) * N)
    eta = cfg.levy.eta(lam)
    pred, prev, t = [], v_statistic(x0, lam), 0.0
    for e in epochs:
        prev = k * prev * np.exp(-(e - t) * eta) + (1 - k)
        pred.append(prev)
        t = e
    se = v.std(axis=0, ddof=1) / np.sqrt(reps)
    assert np.all(np.abs(v.mean(axis=0) - pred) < 4 * se)


def test_scripted_senders_respected(expo):
    cfg = SyncSystemConfig(3, BrownianDrift(0.0, 0.0), expo, 1.0)
    st = init_state(cfg, epochs=[0.1, 0.2, 0.3], senders=[2, 0, 1])
    got = []
    for _ in range(3):
        step(st, cfg)
        got.append(st.last_event[1])
    assert got == [2, 0, 1]
    with pytest.raises(IndexError):
        step(st, cfg)
    with pytest.raises(ValueError):
        init_state(cfg, epochs=[0.2, 0.1])


# -- samples ----------------------------------------------------------------------------

def test_zero_horizon_gives_zero_differences():
    s = sample_differences(markov(T=0.0), replicas=100)
    assert s.values.shape == (100, 1) and np.all(s.values == 0)


def test_markov_sample_moments():
    s = sample_differences(markov(), replicas=100000, base_seed=7)
    x = s.values[:, 0]
    se = x.std(ddof=1) / np.sqrt(x.size)
    assert abs(x.mean()) < 4 * se
    assert np.mean(x**2) == pytest.approx(4.0, rel=0.05)


def test_empirical_cf_imaginary_part_small():
    s = sample_differences(markov(T=20.0), replicas=20000, base_seed=5)
    assert np.all(empirical_cf(s).imag_z < 4)


def test_relabeled_pairs_indistinguishable():
    cfg = markov(N=4, T=10.0, initial=IIDInitial(normal_init))
    a = sample_differences(cfg, (0, 1), 10000, base_seed=1).values[:, 0]
    b = sample_differences(cfg, (3, 2), 10000, base_seed=2).values[:, 0]
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_batch_and_scalar_engines_agree(erlang2):
    cfg = SyncSystemConfig(4, BrownianDrift(1.0, 0.0), erlang2, 6.0)
    batch = sample_differences(cfg, replicas=3000, base_seed=4).values[:, 0]
    scalar = []
    for s in range(3000):
        st = run_until(init_state(cfg, seed=10**6 + s), cfg, cfg.horizon)
        scalar.append(st.x[0, 0] - st.x[1, 0])
    assert stats.ks_2samp(batch, scalar).pvalue > 0.01


def test_thread_count_does_not_change_results():
    cfg = markov(T=5.0)
    n = BLOCK_SIZE + 123
    a = sample_differences(cfg, replicas=n, base_seed=9, threads=1).values
    b = sample_differences(cfg, replicas=n, base_seed=9, threads=2).values
    assert np.array_equal(a, b)
    c = sample_differences(cfg, replicas=n, base_seed=10).values
    assert not np.array_equal(a, c)


# -- V statistic --------------------------------------------------------------------------

def test_v_statistic_examples():
    x = np.array([1.3, 1.3, 1.3, 1.3])
    assert v_statistic(x, 0.7) == pytest.approx(1.0)
    assert v_statistic(np.array([0.0, 2.0, -5.0]), 0.0) == pytest.approx(1.0)
    lam = 0.8
    x = np.array([0.0, np.pi / (2 * lam), np.pi / lam])
    assert v_statistic(x, lam) == pytest.approx(-1 / 3, abs=1e-12)


def test_v_statistic_matches_pair_sum(rng):
    x = rng.standard_normal((6, 2))
    lam = np.array([0.4, -1.1])
    pairs = [np.cos(lam @ (x[i] - x[j])) for i in range(6) for j in range(i + 1, 6)]
    assert v_statistic(x, lam) == pytest.approx(2 * sum(pairs) / 30, abs=1e-12)
    grid = np.array([[0.4, -1.1], [0.0, 0.0]])
    assert np.allclose(v_statistic(x, grid), [v_statistic(x, grid[0]), 1.0])


def test_contraction_examples(rng):
    assert contraction_oracle(np.full(4, 2.5), 1.0) == pytest.approx((0.0, 0.0))
    avg, pred = contraction_oracle(np.array([0.0, 3.0]), 1.3)
    assert avg == pytest.approx(0.0, abs=1e-15) and pred == pytest.approx(0.0, abs=1e-15)
    x = np.array([0.0, 1.0, 2.0])
    avg, pred = contraction_oracle(x, 1.0)
    assert abs(avg - pred) < 1e-12
    assert pred == pytest.approx((2 / 3) * (v_statistic(x, 1.0) - 1))
    for N in range(2, 9):
        avg, pred = contraction_oracle(rng.standard_normal((N, 2)), np.array([0.3, 0.9]))
        assert abs(avg - pred) < 1e-12
    with pytest.raises(ValueError, match="enumeration too large"):
        contraction_oracle(np.zeros(9), 1.0)


# -- chi_mc ----------------------------------------------------------------------------------

def test_chi_mc_at_time_zero():
    tab = chi_mc(markov(), [1.0, 2.0], 50, 0, [0.0])
    assert np.all(tab.estimate == 1.0) and np.all(tab.se == 0.0)


def test_chi_mc_markov_limit():
    tab = chi_mc(markov(), [1.0], 20000, 3, [100.0])
    assert abs(tab.estimate[0, 0] - 1 / 3) < 3 * tab.se[0, 0]


def test_chi_mc_follows_markov_trajectory():
    times = [1.0, 2.0, 5.0, 10.0]
    tab = chi_mc(markov(), [1.0], 20000, 21, times)
    exact = chi_markov_t(5, 1.0, 1.0, np.array(times))
    assert np.all(np.abs(tab.estimate[:, 0] - exact) < 3 * tab.se[:, 0])
    assert len(list(tab.rows())) == 4


def test_chi_mc_rejects_asymmetric_models():
    R = np.array([[0, 1, 0], [0.5, 0, 0.5], [1, 0, 0]], float)
    for cfg in (markov(N=3, routing=RoutingMatrix(R)),
                markov(N=3, initial=FixedInitial([[0.0], [1.0], [0.0]]))):
        assert not cfg.symmetric
        with pytest.raises(ValueError, match="V-estimator requires symmetric model"):
            chi_mc(cfg, [1.0], 10, 0, [1.0])


def test_free_decay_without_synchronization():
    x0 = np.array([[0.0], [0.5], [1.5], [-1.0]])
    cfg = markov(N=4, T=2.0, initial=FixedInitial(x0), synchronize=False)
    lam, times = 1.0, [0.0, 0.5, 1.0, 2.0]
    v = v_trajectory(cfg, [lam], 20000, 8, times)[:, :, 0]
    se = np.maximum(v.std(axis=1, ddof=1) / np.sqrt(v.shape[1]), 1e-15)
    pred = v_statistic(x0, lam) * np.exp(-np.array(times) * cfg.levy.eta(lam))
    assert np.all(np.abs(v.mean(axis=1) - pred) < 3 * se + 1e-12)


# -- configuration -----------------------------------------------------------------------------

def test_routing_matrix_validation():
    with pytest.raises(ValueError, match="row 1"):
        RoutingMatrix(np.array([[0, 1.0], [0.5, 0]]))
    with pytest.raises(ValueError, match="diagonal"):
        RoutingMatrix(np.array([[0.5, 0.5], [1.0, 0]]))
    with pytest.raises(ValueError, match="negative"):
        RoutingMatrix(np.array([[0, 1.5, -0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]]))


def test_routing_matrix_frequencies():
    R = np.array([[0, 0.2, 0.8], [0.5, 0, 0.5], [1.0, 0, 0]])
    rng = np.random.default_rng(1)
    n = 200000
    rec = RoutingMatrix(R).recipients(np.zeros(n, int), 3, rng)
    freq = np.bincount(rec, minlength=3) / n
    assert np.allclose(freq, R[0], atol=4 * np.sqrt(0.16 / n))
    assert np.all(RoutingMatrix(R).recipients(np.full(100, 2), 3, rng) == 0)


def test_config_validation(expo):
    bm = BrownianDrift(1.0, 0.0)
    with pytest.raises(ValueError):
        SyncSystemConfig(1, bm, expo, 1.0)
    with pytest.raises(ValueError):
        SyncSystemConfig(3, bm, expo, -1.0)
    with pytest.raises(ValueError):
        SyncSystemConfig(3, bm, expo, 1.0, sender="other")
    with pytest.raises(ValueError):
        SyncSystemConfig(3, bm, expo, 1.0, routing=RoutingMatrix(np.array([[0, 1.0], [1.0, 0]])))
    with pytest.raises(ValueError):
        SyncSystemConfig(3, bm, expo, 1.0, initial=FixedInitial(np.zeros((2, 1))))
    assert FixedInitial(np.ones((3, 1))).exchangeable
    assert AllZero().exchangeable and SyncSystemConfig(3, bm, expo, 1.0).symmetric
