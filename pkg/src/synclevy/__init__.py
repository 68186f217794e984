"""Simulation and Laplace-domain analytics for stochastic synchronization systems.

N components follow independent Lévy free dynamics. At the epochs of N
superposed renewal clocks with matrix-exponential inter-event laws, the
sender's state is copied to a uniformly chosen recipient. The package
estimates the characteristic function of inter-component differences by
Monte Carlo and computes it from rational Laplace transforms.
"""

__version__ = "0.1.0"

from .polyrat import (Polynomial, RationalFunction, PartialFractions, roots,  # noqa: E402
                      partial_fractions, evaluate, inverse_laplace)
from .me_dist import (MEDistribution, PerturbedRootData, solve_perturbed_roots,  # noqa: E402
                      phi_star, phi2_star, theta_eval, phi_time, phi2_time,
                      renewal_density_pf, renewal_function, moments, p_star_eval)
from .levy import (BrownianDrift, CompoundPoisson, ParetoSymmetric, ParetoRadial,  # noqa: E402
                   SymmetricStable, AttractionTarget, attraction_target, rho, eta,
                   sample_increment)
from .simulator import (SyncSystemConfig, SimulationState, DifferenceSample,  # noqa: E402
                        SymmetricUniform, RoutingMatrix, AllZero, IIDInitial, FixedInitial,
                        init_state, step, run_until, sample_differences, v_statistic,
                        chi_mc, contraction_oracle)
from .analytic import (SyncConstants, sync_constants, chi_markov_inf, chi_markov_t,  # noqa: E402
                       J_N_infinity, chi_general_inf, chi_asymptotic, theta2_remainder,
                       I_N_finite_t, J_N_finite_t, chi_general_t)
from .limits_stats import (GeometricStable, Laplace1D, Linnik1D, CFTable,  # noqa: E402
                           ScalarRescale, MatrixRescale, limit_cf, laplace_density,
                           laplace_cdf, empirical_cf, cf_distance, ks_test_laplace, rescale,
                           default_lambda_grid, fit_linnik_scale)
