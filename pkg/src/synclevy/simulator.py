"""Event-driven simulation of the N-component synchronization system.

Two engines share one model description (:class:`SyncSystemConfig`):

* a scalar engine (:func:`init_state`, :func:`step`, :func:`run_until`) that
  advances every component at every epoch. It is the reference
  implementation and supports a scripted-clock mode;
* a batch engine (:func:`simulate_block`) vectorised over replicas. It only
  moves a component when it sends, gets overwritten or is observed. Free
  motion between those moments is a single Lévy increment, so the law is
  unchanged.

Randomness is derived from ``SeedSequence(base_seed, spawn_key=(block,))``
with one independent child stream each for clocks, Lévy increments, routing
and initial states. Blocks hold a fixed number of replicas, so results do not
depend on how blocks are scheduled across threads.
"""

from __future__ import annotations

import heapq
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .levy import LevySpec
from .me_dist import MEDistribution

BLOCK_SIZE = 4096


# -- model description --------------------------------------------------------------

@dataclass(frozen=True)
class SymmetricUniform:
    """Recipient uniform over the other ``N - 1`` components."""

    def recipients(self, senders, N, rng):
        return (senders + 1 + rng.integers(0, N - 1, size=np.shape(senders))) % N


@dataclass(frozen=True)
class RoutingMatrix:
    """Recipient of sender ``i`` drawn from row ``i`` of ``R``."""

    R: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise ValueError("routing matrix must be square")
        for i, row in enumerate(R):
            if row[i] != 0:
                raise ValueError(f"routing row {i}: diagonal entry must be 0")
            if np.any(row < 0):
                raise ValueError(f"routing row {i}: negative entry")
            if abs(row.sum() - 1.0) > 1e-12:
                raise ValueError(f"routing row {i}: sums to {row.sum():.17g}, not 1")
        object.__setattr__(self, "R", R)
        cum = np.cumsum(R, axis=1)
        cum[:, -1] = 1.0
        object.__setattr__(self, "_cum", cum)

    def recipients(self, senders, N, rng):
        u = rng.random(np.shape(senders))
        return (self._cum[senders] <= u[..., None]).sum(axis=-1)


@dataclass(frozen=True)
class AllZero:
    exchangeable = True

    def draw(self, rng, shape):
        return np.zeros(shape)


@dataclass(frozen=True)
class IIDInitial:
    """Components drawn i.i.d.; ``sampler(rng, shape)`` returns an array of ``shape``."""

    sampler: object
    exchangeable = True

    def draw(self, rng, shape):
        return np.asarray(self.sampler(rng, shape), dtype=float).reshape(shape)


@dataclass(frozen=True)
class FixedInitial:
    """Deterministic ``N x d`` starting configuration, shared by every replica."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.atleast_2d(np.asarray(self.values, dtype=float)))

    @property
    def exchangeable(self):
        return bool(np.all(self.values == self.values[0]))

    def draw(self, rng, shape):
        return np.broadcast_to(self.values, shape).copy()


@dataclass
class SyncSystemConfig:
    N: int
    levy: LevySpec
    inter_event: MEDistribution
    horizon: float
    routing: object = field(default_factory=SymmetricUniform)
    initial: object = field(default_factory=AllZero)
    synchronize: bool = True
    sender: str = "clock"

    def __post_init__(self):
        if self.sender not in ("clock", "uniform"):
            raise ValueError("sender must be 'clock' or 'uniform'")
        if int(self.N) != self.N or self.N < 2:
            raise ValueError("N must be an integer >= 2")
        self.N = int(self.N)
        if self.inter_event.sampler is None:
            raise ValueError("analytics-only distribution")
        if not self.horizon >= 0:
            raise ValueError("horizon must be nonnegative")
        if isinstance(self.routing, RoutingMatrix) and self.routing.R.shape[0] != self.N:
            raise ValueError("routing matrix must be N x N")
        if isinstance(self.initial, FixedInitial) and self.initial.values.shape != (self.N, self.d):
            raise ValueError("fixed initial state must be N x d")

    @property
    def d(self):
        return self.levy.d

    @property
    def symmetric(self):
        return isinstance(self.routing, SymmetricUniform) and self.initial.exchangeable


@dataclass
class DifferenceSample:
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        self.values = v[:, None] if v.ndim == 1 else v

    def __len__(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]


def block_streams(base_seed, block):
    """Independent generators (clock, levy, routing, init) for one replica block."""
    ss = np.random.SeedSequence(int(base_seed), spawn_key=(int(block),))
    return [np.random.Generator(np.random.PCG64(s)) for s in ss.spawn(4)]


# -- V-statistic ---------------------------------------------------------------------

def _phases(x, lam):
    lam = np.atleast_2d(np.asarray(lam, dtype=float))
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != lam.shape[-1]:
        lam = lam.reshape(-1, x.shape[-1])
    return x @ lam.T                                  # (..., N, L)


def v_statistic(state, lam):
    """``(2/((N-1)N)) sum_{j1<j2} cos<lam, x_j1 - x_j2>``.

    ``state`` may be a :class:`SimulationState` or an array ``(..., N, d)``;
    ``lam`` is one probe or a grid ``(L, d)``. Uses
    ``sum_{j1<j2} cos(a_j1 - a_j2) = (|sum_j e^{i a_j}|^2 - N) / 2``.
    """
    x = state.x if isinstance(state, SimulationState) else np.asarray(state, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    N = x.shape[-2]
    ph = _phases(x, lam)
    s = np.abs(np.exp(1j * ph).sum(axis=-2)) ** 2
    out = (s - N) / ((N - 1) * N)
    lam_arr = np.asarray(lam, dtype=float)
    single = lam_arr.ndim == 0 or (lam_arr.ndim == 1 and lam_arr.size == x.shape[-1])
    return out[..., 0] if single else out


def contraction_oracle(x, lam):
    """Average of ``V0 = V - 1`` over all ``(N-1)N`` synchronization maps.

    Returns ``(avg, predicted)`` with ``predicted = (1 - 2/((N-1)N)) V0(x)``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    N = x.shape[0]
    if N > 8:
        raise ValueError("enumeration too large")
    if N < 2:
        raise ValueError("need N >= 2")
    v0 = v_statistic(x, lam) - 1.0
    total = 0.0
    for i, j in itertools.permutations(range(N), 2):
        y = x.copy()
        y[j] = x[i]
        total += v_statistic(y, lam) - 1.0
    avg = total / ((N - 1) * N)
    return avg, (1.0 - 2.0 / ((N - 1) * N)) * v0


# -- scalar engine ---------------------------------------------------------------------

@dataclass
class SimulationState:
    t: float
    x: np.ndarray
    next_fire: list
    rngs: dict
    event_count: int = 0
    script: object = None
    senders: object = None
    last_event: tuple | None = None


def init_state(config: SyncSystemConfig, seed=0, epochs=None, senders=None):
    """Fresh state at ``t = 0``.

    Passing ``epochs`` switches to scripted-clock mode: the epoch sequence is
    fixed, senders come from ``senders`` when given and are otherwise uniform.
    """
    clock, levy_rng, route, init = block_streams(seed, 0)
    N, d = config.N, config.d
    x = config.initial.draw(init, (N, d))
    state = SimulationState(0.0, x, [], {"clock": clock, "levy": levy_rng, "route": route})
    if epochs is not None:
        e = np.asarray(epochs, dtype=float)
        if np.any(np.diff(e) <= 0) or (e.size and e[0] <= 0):
            raise ValueError("scripted epochs must be positive and increasing")
        state.script = iter(e.tolist())
        state.senders = None if senders is None else iter(np.asarray(senders, int).tolist())
        nxt = next(state.script, None)
        if nxt is not None:
            state.next_fire = [(nxt, -1)]
    else:
        gaps = config.inter_event.sample(clock, N)
        state.next_fire = [(float(g), k) for k, g in enumerate(gaps)]
        heapq.heapify(state.next_fire)
    return state


def _advance_all(state, config, dt):
    if dt > 0:
        inc = config.levy.sample_increment(np.full(config.N, dt), state.rngs["levy"])
        state.x = state.x + inc


def step(state: SimulationState, config: SyncSystemConfig) -> SimulationState:
    """Process the next epoch: free motion of all components, then ``x_j <- x_k``."""
    if not state.next_fire:
        raise IndexError("no pending epochs")
    T, k = heapq.heappop(state.next_fire)
    _advance_all(state, config, T - state.t)
    state.t = T
    N = config.N
    if state.script is not None:
        if state.senders is not None:
            k = next(state.senders)
        else:
            k = int(state.rngs["route"].integers(N))
        nxt = next(state.script, None)
        if nxt is not None:
            heapq.heappush(state.next_fire, (nxt, -1))
    else:
        gap = float(config.inter_event.sample(state.rngs["clock"], 1)[0])
        heapq.heappush(state.next_fire, (T + gap, k))
        if config.sender == "uniform":
            k = int(state.rngs["route"].integers(N))
    j = int(config.routing.recipients(np.array(k), N, state.rngs["route"]))
    if config.synchronize:
        state.x[j] = state.x[k]
    state.event_count += 1
    state.last_event = (T, k, j)
    return state


def run_until(state, config, T):
    """Step through all epochs ``<= T`` and move every component to time ``T``."""
    while state.next_fire and state.next_fire[0][0] <= T:
        step(state, config)
    _advance_all(state, config, T - state.t)
    state.t = T
    return state


# -- batch engine -----------------------------------------------------------------------

def simulate_block(config: SyncSystemConfig, n_rep, base_seed, block, time_points, observe):
    """Run ``n_rep`` replicas of one block, calling ``observe(x)`` at each time point.

    ``x`` has shape ``(n_rep, N, d)``; the list of ``observe`` results (one
    per time point) is returned. Only senders are advanced at epochs.
    Recipients take the sender's position and its update time.
    With ``config.sender == "uniform"`` the epoch comes from the clocks but
    the sender is drawn uniformly and independently of which clock fired.
    """
    clock, levy_rng, route, init = block_streams(base_seed, block)
    N, d = config.N, config.d
    levy, dist = config.levy, config.inter_event
    x = config.initial.draw(init, (n_rep, N, d))
    last = np.zeros((n_rep, N))
    fire = dist.sample(clock, (n_rep, N)).reshape(n_rep, N)
    rows = np.arange(n_rep)
    out = []
    for tp in time_points:
        if config.synchronize:
            while True:
                k = np.argmin(fire, axis=1)
                tk = fire[rows, k]
                act = np.flatnonzero(tk <= tp)
                if act.size == 0:
                    break
                k, tk = k[act], tk[act]
                fire[act, k] = tk + dist.sample(clock, act.size)
                if config.sender == "uniform":
                    k = route.integers(0, N, act.size)
                x[act, k] += levy.sample_increment(tk - last[act, k], levy_rng)
                j = config.routing.recipients(k, N, route)
                x[act, j] = x[act, k]
                last[act, k] = tk
                last[act, j] = tk
        # commit every component to the observation time
        x += levy.sample_increment(tp - last, levy_rng)
        last[:] = tp
        out.append(observe(x))
    return out


def _blocks(replicas):
    full, rest = divmod(int(replicas), BLOCK_SIZE)
    sizes = [BLOCK_SIZE] * full + ([rest] if rest else [])
    return list(enumerate(sizes))


def run_replicas(config, replicas, base_seed, time_points, observe, threads=1):
    """Blockwise driver; results per time point are concatenated in block order."""
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    tps = np.asarray(time_points, dtype=float)
    if np.any(np.diff(tps) < 0) or np.any(tps < 0):
        raise ValueError("time points must be nonnegative and nondecreasing")

    def job(item):
        b, n = item
        return simulate_block(config, n, base_seed, b, tps, observe)

    items = _blocks(replicas)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, items))
    else:
        results = [job(it) for it in items]
    return [np.concatenate([r[i] for r in results], axis=0) for i in range(tps.size)]


def sample_differences(config: SyncSystemConfig, pair=(0, 1), replicas=1000, base_seed=0,
                       threads=1, time=None) -> DifferenceSample:
    """Draws of ``x_j(T) - x_k(T)`` over independent replicas."""
    j, k = pair
    if not (0 <= j < config.N and 0 <= k < config.N) or j == k:
        raise ValueError("pair must name two distinct components")
    T = config.horizon if time is None else time
    (vals,) = run_replicas(config, replicas, base_seed, [T],
                           lambda x: x[:, j, :] - x[:, k, :], threads)
    meta = {"T": T, "replicas": int(replicas), "base_seed": int(base_seed), "pair": (j, k)}
    return DifferenceSample(vals, meta)


def v_trajectory(config, lambda_grid, replicas, base_seed, time_points, threads=1):
    """Per-replica V at each time point: array ``(n_times, replicas, n_lambda)``."""
    lam = np.asarray(lambda_grid, dtype=float).reshape(-1, config.d)
    res = run_replicas(config, replicas, base_seed, time_points,
                       lambda x: v_statistic(x, lam).reshape(x.shape[0], -1), threads)
    return np.stack(res)


@dataclass
class ChiTable:
    times: np.ndarray
    lambdas: np.ndarray
    estimate: np.ndarray      # (n_times, n_lambda)
    se: np.ndarray

    def rows(self):
        for a, t in enumerate(self.times):
            for b, lam in enumerate(self.lambdas):
                yield t, lam, self.estimate[a, b], self.se[a, b]


def chi_mc(config, lambda_grid, replicas, base_seed, time_points, threads=1) -> ChiTable:
    """Monte Carlo ``chi_N(t; lam)`` as the replica mean of the V-statistic."""
    if not config.symmetric:
        raise ValueError("V-estimator requires symmetric model")
    lam = np.asarray(lambda_grid, dtype=float).reshape(-1, config.d)
    v = v_trajectory(config, lam, replicas, base_seed, time_points, threads)
    est = v.mean(axis=1)
    se = v.std(axis=1, ddof=1) / np.sqrt(replicas) if replicas > 1 else np.zeros_like(est)
    return ChiTable(np.asarray(time_points, dtype=float), lam, est, se)
