"""Theoretical characteristic functions of inter-component differences.

* Markov case (exponential inter-event times): closed forms for the limit
  and the finite-time trajectory.
* General ME case: ``chi_N(inf) = l_N J_N(inf)``, with
  ``J_N(inf) = (N/m) int_0^inf e^{-u eta} phi2(u)^{N-1} phi(u) du``,
  where ``phi``/``phi2`` are the ordinary/stationary generating functions of
  the renewal counts at ``v = k_N``.
* Large-N form ``1/(1 + theta1 eta)`` with ``theta1 = 1/(N |kappa_N|)``.
* Validation-grade finite-time ``I_N(t)`` and ``J_N(t)``.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .me_dist import MEDistribution, solve_perturbed_roots
from .polyrat import PartialFractions


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach its tolerance."""

    def __init__(self, msg, estimate=None, error=None):
        super().__init__(msg)
        self.estimate = estimate
        self.error = error


# -- quadrature ------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def _gl(f, lo, hi):
    half = 0.5 * (hi - lo)
    u = (0.5 * (hi + lo))[:, None] + half[:, None] * _GL_NODES
    vals = np.asarray(f(u.ravel()), dtype=float).reshape(u.shape)
    return half * (vals @ _GL_WEIGHTS)


def adaptive_gauss_legendre(f, a, b, tol=1e-9, panels=16, max_panels=1 << 15):
    """Composite 20-point Gauss-Legendre with dyadic refinement.

    ``f`` must be vectorised. A panel is accepted once its value and the sum
    of its two halves differ by at most ``tol * width / (b - a)``, so the
    accepted error budget adds up to ``tol``.
    """
    if b <= a:
        return 0.0
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1], edges[1:]
    coarse = _gl(f, lo, hi)
    total = 0.0
    while True:
        mid = 0.5 * (lo + hi)
        left, right = _gl(f, lo, mid), _gl(f, mid, hi)
        fine = left + right
        err = np.abs(fine - coarse)
        ok = err <= tol * (hi - lo) / (b - a)
        total += fine[ok].sum()
        bad = ~ok
        if not bad.any():
            return float(total)
        if 2 * bad.sum() > max_panels or np.min(hi[bad] - lo[bad]) < 1e-12 * (b - a):
            raise QuadratureError(
                f"quadrature did not converge on [{a}, {b}]: {int(bad.sum())} panels above "
                f"tolerance, worst panel error {err[bad].max():.3g}",
                estimate=float(total + fine[bad].sum()), error=float(err[bad].sum()))
        lo, hi = np.concatenate([lo[bad], mid[bad]]), np.concatenate([mid[bad], hi[bad]])
        coarse = np.concatenate([left[bad], right[bad]])


# -- constants -----------------------------------------------------------------------

@dataclass(frozen=True)
class SyncConstants:
    N: int
    kappa: float
    k_N: float
    l_N: float
    theta1_N: float | None = None
    theta3_N: float | None = None


def sync_constants(N, dist: MEDistribution | None = None, kappa=2.0) -> SyncConstants:
    """``k_N``, ``l_N`` and, when ``dist`` is given, ``theta1_N`` and ``theta3_N``."""
    if int(N) != N or N < 2:
        raise ValueError("N must be an integer >= 2")
    l = kappa / ((N - 1) * N)
    th1 = th3 = None
    if dist is not None and N > 2:
        pr = solve_perturbed_roots(dist, N)
        a = abs(pr.kappa_N)
        th1 = 1.0 / (N * a)
        th3 = float(np.real(pr.d0 ** (N - 1) * pr.c0)) * l / (dist.mean * a) - 1.0
    return SyncConstants(int(N), kappa, 1.0 - l, l, th1, th3)


# -- Markov case ----------------------------------------------------------------------

def chi_markov_inf(N, m, eta_val):
    """``1 / (1 + (N-1) m eta / 2)``."""
    if N < 2 or not m > 0:
        raise ValueError("need N >= 2 and m > 0")
    return 1.0 / (1.0 + 0.5 * (N - 1) * m * np.asarray(eta_val, dtype=float))


def chi_markov_t(N, m, eta_val, t, chi0=1.0):
    """Solution of ``chi' = -q chi + w`` with ``w = 2/((N-1)m)``, ``q = eta + w``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    w = 2.0 / ((N - 1) * m)
    q = np.asarray(eta_val, dtype=float) + w
    e = np.exp(-q * t)
    return chi0 * e + (w / q) * (1.0 - e)


# -- general case -----------------------------------------------------------------------

def _generating_pfs(dist, N):
    v = 1.0 - 2.0 / ((N - 1) * N)
    return dist.generating_pf(v), dist.generating_pf(v, stationary=True)


def _slowest_decay(*pfs):
    return min(-max(p.real for p in pf.poles) for pf in pfs)


def _stationary_integrand(dist, N, eta_val):
    phi, phi2 = _generating_pfs(dist, N)

    def f(u):
        a = np.real(phi2.inverse(u))
        b = np.real(phi.inverse(u))
        return np.exp(-u * eta_val) * a ** (N - 1) * b

    return f, _slowest_decay(phi, phi2)


def J_N_infinity(dist: MEDistribution, N, eta_val, tol=1e-9):
    """``(N/m) int_0^inf e^{-u eta} phi2(u, k_N)^{N-1} phi(u, k_N) du``.

    Truncated at ``u_max = 40 / (N a + eta)`` with ``a`` the slowest decay
    rate of the generating functions (``|kappa_N|`` for ``N >= 3``). ``tol``
    is absolute on ``l_N J_N``.
    """
    eta_val = float(eta_val)
    if eta_val < 0:
        raise ValueError("eta must be nonnegative")
    f, a = _stationary_integrand(dist, N, eta_val)
    u_max = 40.0 / (N * a + eta_val)
    l = 2.0 / ((N - 1) * N)
    scale = N / dist.mean
    val = adaptive_gauss_legendre(lambda u: l * scale * f(u), 0.0, u_max, tol)
    return val / l


def chi_general_inf(dist: MEDistribution, N, eta_val, tol=1e-9):
    """``l_N J_N(inf)``; vectorised over ``eta_val``."""
    l = 2.0 / ((N - 1) * N)
    eta = np.asarray(eta_val, dtype=float)
    out = np.array([l * J_N_infinity(dist, N, e, tol) for e in eta.ravel()])
    return out.reshape(eta.shape) if eta.ndim else float(out[0])


def chi_asymptotic(dist: MEDistribution, N, eta_val):
    """``1 / (1 + theta1_N eta)`` with ``theta1_N = 1/(N |kappa_N|)``."""
    th1 = sync_constants(N, dist).theta1_N
    return 1.0 / (1.0 + th1 * np.asarray(eta_val, dtype=float))


def theta2_remainder(dist: MEDistribution, N, eta_grid, tol=1e-9):
    """``sup_eta |chi_general_inf - chi_asymptotic|`` over ``eta_grid``."""
    eta = np.asarray(eta_grid, dtype=float).ravel()
    return float(np.max(np.abs(chi_general_inf(dist, N, eta, tol) - chi_asymptotic(dist, N, eta))))


# -- finite time (validation grade) --------------------------------------------------

def _basis(pole, q):
    """Transform of ``e_{pole,q}(u) = u^q e^{pole u} / q!``."""
    c = np.zeros(q + 1, dtype=complex)
    c[q] = 1.0
    return PartialFractions([(pole, c)])


class _FirstRenewalBasis:
    """``phi_{1,s}(w) = sum_{z,q} G_{z,q}(s) A_{z,q}(w)`` for the ordinary process.

    The density of the first renewal after ``s`` is
    ``g_s(w) = p(s+w) + int_0^s h(y) p(s+w-y) dy = sum G_{z,q}(s) e_{z,q}(w)``, with
    ``G_{z,q}(s) = sum_{k>q} c_{z,k} [e_{z,k-1-q}(s) + (h * e_{z,k-1-q})(s)]``
    and ``A_{z,q} = tail(e_{z,q}) + v (e_{z,q} * phi)``.
    """

    def __init__(self, dist, v):
        dens = dist.density_pf
        h = dist.renewal_pf
        phi = dist.generating_pf(v)
        self.items = []
        for pole, c in dens.terms:
            K = c.size
            for q in range(K):
                B = PartialFractions()
                for k in range(q + 1, K + 1):
                    e = _basis(pole, k - 1 - q)
                    B = B + c[k - 1] * (e + h * e)
                e_q = _basis(pole, q)
                A = e_q.tail() + v * (e_q * phi)
                self.items.append((B, A))

    def __call__(self, s, w):
        out = np.zeros(np.broadcast(s, w).shape, dtype=complex)
        for B, A in self.items:
            out += B.inverse(s) * A.inverse(w)
        return np.real(out)


def _finite_integral(dist, N, eta_val, t, inner, tol):
    h = dist.renewal_pf
    phi = dist.generating_pf(1.0 - 2.0 / ((N - 1) * N))

    def f(s):
        u = t - s
        return (N * np.real(h.inverse(s)) * np.exp(-u * eta_val)
                * inner(s, u) ** (N - 1) * np.real(phi.inverse(u)))

    return adaptive_gauss_legendre(f, 0.0, t, tol, panels=max(16, int(np.ceil(t))))


def I_N_finite_t(dist: MEDistribution, N, eta_val, t, tol=1e-6):
    """``N int_0^t h(s) e^{-(t-s) eta} phi_{1,s}(t-s)^{N-1} phi(t-s) ds``."""
    if t < 0 or t > 200:
        raise ValueError("t must lie in [0, 200] for the validation-grade integral")
    if t == 0:
        return 0.0
    basis = _FirstRenewalBasis(dist, 1.0 - 2.0 / ((N - 1) * N))
    return _finite_integral(dist, N, eta_val, t, basis, tol)


def J_N_finite_t(dist: MEDistribution, N, eta_val, t, tol=1e-6):
    """``N int_0^t h(s) e^{-(t-s) eta} phi2(t-s)^{N-1} phi(t-s) ds``."""
    if t == 0:
        return 0.0
    phi2 = dist.generating_pf(1.0 - 2.0 / ((N - 1) * N), stationary=True)
    return _finite_integral(dist, N, eta_val, t,
                            lambda s, u: np.real(phi2.inverse(u)), tol)


def chi_general_t(dist: MEDistribution, N, eta_val, t, chi0=1.0, tol=1e-6):
    """Finite-time ``chi_N(t)`` for ordinary clocks started at 0.

    ``chi0 e^{-t eta} phi(t, k_N)^N + l_N I_N(t)``.
    """
    l = 2.0 / ((N - 1) * N)
    phi_t = np.real(dist.generating_pf(1.0 - l).inverse(t))
    return chi0 * np.exp(-t * eta_val) * phi_t**N + l * I_N_finite_t(dist, N, eta_val, t, tol)


__all__ = [
    "QuadratureError", "adaptive_gauss_legendre", "SyncConstants", "sync_constants",
    "chi_markov_inf", "chi_markov_t", "J_N_infinity", "chi_general_inf", "chi_asymptotic",
    "theta2_remainder", "I_N_finite_t", "J_N_finite_t", "chi_general_t",
]
