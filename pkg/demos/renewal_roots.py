"""Laplace-domain view of an Erlang-2 clock: renewal function, the perturbed
root kappa_N and how theta_1 = 1/(N |kappa_N|) approaches m N / 2.

Run:  python demos/renewal_roots.py
"""

import numpy as np

from synclevy import MEDistribution
from synclevy.analytic import sync_constants, theta2_remainder
from synclevy.me_dist import renewal_function, solve_perturbed_roots

e2 = MEDistribution.erlang(2, 1.0)
t = np.array([0.1, 1.0, 10.0])
print("H(t):", renewal_function(e2, t))
print("t - (1 - e^{-4t})/4:", t - (1 - np.exp(-4 * t)) / 4)

print("\nN     kappa_N        seed error   theta1/(mN/2)   sup remainder")
grid = np.geomspace(0.1, 10, 21)
for N in (5, 10, 20, 40, 80, 160):
    pr = solve_perturbed_roots(e2, N)
    ratio = sync_constants(N, e2).theta1_N / (N / 2)
    print(f"{N:<5} {pr.kappa_N:.10f}  {abs(pr.seed - pr.kappa_N):.2e}     {ratio:.6f}"
          f"        {theta2_remainder(e2, N, grid):.2e}")
