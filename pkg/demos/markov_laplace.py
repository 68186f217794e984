"""Markov clocks with Brownian drift: the difference of two components settles
to a Laplace law whose scale grows like sqrt(N - 1).

Run:  python demos/markov_laplace.py
"""

import numpy as np

from synclevy import MEDistribution
from synclevy.analytic import chi_markov_inf, chi_markov_t
from synclevy.levy import BrownianDrift
from synclevy.limits_stats import empirical_cf, ks_test_laplace, laplace_c0
from synclevy.simulator import SyncSystemConfig, chi_mc, sample_differences

bm = BrownianDrift(1.0, 0.0)
clock = MEDistribution.exponential(1.0)

print("N   var(d)/(N-1)   KS vs Laplace   sup|ecf - theory|")
for N in (3, 5, 10, 20):
    cfg = SyncSystemConfig(N, bm, clock, horizon=100.0)
    s = sample_differences(cfg, replicas=20000, base_seed=N)
    tab = empirical_cf(s)
    tab = tab.with_theory(chi_markov_inf(N, 1.0, bm.eta(tab.lambda_grid)))
    ks = ks_test_laplace(s, laplace_c0(1.0, 1.0, N))
    print(f"{N:<3} {s.values.var() / (N - 1):>12.3f}   {ks.statistic:>13.4f}   {tab.distance:>17.4f}")

# relaxation towards the limit, estimated through the V-statistic
cfg = SyncSystemConfig(5, bm, clock, horizon=20.0)
times = np.array([0.5, 1, 2, 5, 10, 20])
tab = chi_mc(cfg, [1.0], replicas=20000, base_seed=1, time_points=times)
print("\nt      chi_mc          exact")
for t, est, se, ex in zip(times, tab.estimate[:, 0], tab.se[:, 0],
                          chi_markov_t(5, 1.0, bm.eta(1.0), times)):
    print(f"{t:<5g}  {est:.4f} ± {se:.4f}  {ex:.4f}")
