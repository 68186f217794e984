"""Complex polynomials, rational functions and their partial fractions.

Everything in the Laplace-domain analytics reduces to proper rational
functions ``num(z) / den(z)``. A :class:`PartialFractions` object is the sum of
principal parts

.. math:: f(z) = \\sum_j \\sum_{k=1}^{n_j} c_{j,k} (z - z_j)^{-k}

and doubles as an exponential polynomial in the time domain,
``f(t) = sum c_{j,k} t^{k-1} e^{z_j t} / (k-1)!``. Products of two such
objects (time-domain convolutions), time shifts and tail integrals stay inside
the class, which is what the finite-time renewal computations rely on.
"""

from __future__ import annotations

from math import comb, factorial

import numpy as np
from numpy.polynomial import polynomial as npoly

#: relative separation below which two computed roots are treated as one
CLUSTER_TOL = 1e-8
#: distance below which an evaluation point is considered to sit on a pole
POLE_TOL = 1e-12
MAX_DEGREE = 64


class Polynomial:
    """Polynomial with complex coefficients in ascending order of degree."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).copy()
        if c.ndim != 1:
            raise ValueError("coefficients must be one-dimensional")
        nz = np.nonzero(c)[0]
        c = c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=complex)
        if c.size - 1 > MAX_DEGREE:
            raise ValueError(f"degree {c.size - 1} exceeds {MAX_DEGREE}")
        c.setflags(write=False)
        self.coeffs = c

    @classmethod
    def from_roots(cls, roots, lead=1.0):
        roots = np.asarray(roots, dtype=complex)
        if roots.size == 0:
            return cls([lead])
        coeffs = lead * npoly.polyfromroots(roots)
        if np.isreal(lead) and _conjugate_closed(roots):
            coeffs = coeffs.real
        return cls(coeffs)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.coeffs.imag == 0))

    def __call__(self, z):
        return npoly.polyval(z, self.coeffs)

    def __repr__(self):
        return f"Polynomial({np.array2string(self.coeffs, precision=6)})"

    def __eq__(self, other):
        return isinstance(other, Polynomial) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __add__(self, other):
        return Polynomial(npoly.polyadd(self.coeffs, _coeffs(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return Polynomial(npoly.polysub(self.coeffs, _coeffs(other)))

    def __rsub__(self, other):
        return Polynomial(npoly.polysub(_coeffs(other), self.coeffs))

    def __mul__(self, other):
        return Polynomial(npoly.polymul(self.coeffs, _coeffs(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return Polynomial(-self.coeffs)

    def __divmod__(self, other):
        q, r = npoly.polydiv(self.coeffs, _coeffs(other))
        return Polynomial(q), Polynomial(r)

    def deriv(self, order=1):
        if self.degree < order:
            return Polynomial([0.0])
        return Polynomial(npoly.polyder(self.coeffs, order))

    def divide_by_z(self, power=1):
        """Exact division by ``z**power``; the dropped low coefficients must be ~0."""
        c = self.coeffs
        scale = np.abs(c).max()
        if np.any(np.abs(c[:power]) > 1e-9 * scale):
            raise ValueError("polynomial does not vanish at 0 to the requested order")
        return Polynomial(c[power:]) if c.size > power else Polynomial([0.0])

    def taylor(self, z0, order):
        """Coefficients ``a_0..a_{order-1}`` of ``p(z0 + w) = sum a_r w^r``."""
        out = np.zeros(order, dtype=complex)
        p = self.coeffs
        for r in range(order):
            if p.size == 0:
                break
            out[r] = npoly.polyval(z0, p) / factorial(r)
            p = npoly.polyder(p) if p.size > 1 else np.zeros(0)
        return out

    def scale_at(self, z):
        """Sum of ``|c_k| |z|^k``: the natural magnitude of ``p`` near ``z``."""
        return float(npoly.polyval(abs(z), np.abs(self.coeffs)))


def _coeffs(p):
    if isinstance(p, Polynomial):
        return p.coeffs
    return np.atleast_1d(np.asarray(p, dtype=complex))


def _conjugate_closed(r, tol=1e-12):
    pool = list(np.conj(r))
    for z in r:
        i = int(np.argmin(np.abs(np.asarray(pool) - z)))
        if abs(pool[i] - z) > tol * max(1.0, abs(z)):
            return False
        pool.pop(i)
    return True


def _sort_roots(r):
    return np.array(sorted(r, key=lambda z: (z.real, z.imag)), dtype=complex)


def roots(p: Polynomial) -> np.ndarray:
    """All complex roots of ``p`` with multiplicity.

    Eigenvalues of the companion matrix, followed by one Newton step per root.
    Real polynomials return exactly conjugate-closed sets. Roots are sorted by
    (real part, imaginary part).
    """
    if p.degree < 1:
        raise ValueError("constant polynomial")
    c = p.coeffs
    if p.degree == 1:
        r = np.array([-c[0] / c[1]])
    else:
        r = np.linalg.eigvals(npoly.polycompanion(c)).astype(complex)
        dp = p.deriv()
        for i, z in enumerate(r):
            d = dp(z)
            if d != 0:
                step = p(z) / d
                # reject steps that worsen the residual (multiple roots, overflow)
                cand = z - step
                if np.isfinite(cand) and abs(p(cand)) <= abs(p(z)):
                    r[i] = cand
    if p.is_real:
        r = _conjugate_close(r)
    return _sort_roots(r)


def _conjugate_close(r):
    tol = 1e-10 * (1.0 + np.abs(r))
    real = r.real[np.abs(r.imag) <= tol]
    upper = r[r.imag > tol]
    lower = r[r.imag < -tol]
    if upper.size != lower.size:
        return r
    # pair each upper root with its nearest lower partner and average them
    lower = list(lower)
    merged = []
    for z in upper:
        i = int(np.argmin([abs(z - np.conj(w)) for w in lower]))
        w = lower.pop(i)
        merged.append(0.5 * (z + np.conj(w)))
    merged = np.array(merged, dtype=complex)
    return np.concatenate([real.astype(complex), merged, merged.conj()])


def group_roots(r, tol=CLUSTER_TOL):
    """Group (sorted) roots into ``[(root, multiplicity)]`` by exact equality.

    Raises ``ValueError("unresolved multiple pole")`` when two distinct values lie
    closer than ``tol`` relative to the root scale.
    """
    r = _sort_roots(np.asarray(r, dtype=complex))
    scale = max(1.0, float(np.abs(r).max())) if r.size else 1.0
    out: list[tuple[complex, int]] = []
    for z in r:
        for i, (w, k) in enumerate(out):
            if z == w:
                out[i] = (w, k + 1)
                break
            if abs(z - w) < tol * scale:
                raise ValueError("unresolved multiple pole")
        else:
            out.append((complex(z), 1))
    return out


class RationalFunction:
    """``num(z) / den(z)``, optionally with a known factorisation of ``den``.

    ``den_roots`` is a sequence of ``(root, multiplicity)`` pairs. When given it
    is trusted for the pole structure; this is how exactly repeated poles (e.g.
    Erlang transforms) are represented without asking the root finder to
    resolve them.
    """

    def __init__(self, num, den, den_roots=None):
        self.num = num if isinstance(num, Polynomial) else Polynomial(num)
        self.den = den if isinstance(den, Polynomial) else Polynomial(den)
        if self.den.is_zero:
            raise ValueError("zero denominator")
        if den_roots is not None:
            den_roots = tuple((complex(z), int(k)) for z, k in den_roots)
            if sum(k for _, k in den_roots) != self.den.degree:
                raise ValueError("den_roots multiplicities do not match the degree")
        self._den_roots = den_roots

    def __repr__(self):
        return f"RationalFunction(num={self.num!r}, den={self.den!r})"

    def __call__(self, z):
        return self.num(z) / self.den(z)

    @property
    def is_proper(self) -> bool:
        return self.num.is_zero or self.num.degree < self.den.degree

    def poles(self):
        """Distinct poles with multiplicities, ``[(pole, order)]``."""
        if self._den_roots is None:
            if self.den.degree == 0:
                self._den_roots = ()
            else:
                self._den_roots = tuple(group_roots(roots(self.den)))
        return list(self._den_roots)

    @property
    def is_rpfn(self) -> bool:
        return self.is_proper and all(z.real < 0 for z, _ in self.poles())

    def series_at_zero(self, order):
        """Taylor coefficients ``a_0..a_{order-1}`` of ``num/den`` at 0."""
        n = np.zeros(order, dtype=complex)
        d = np.zeros(order, dtype=complex)
        n[: min(order, self.num.coeffs.size)] = self.num.coeffs[:order]
        d[: min(order, self.den.coeffs.size)] = self.den.coeffs[:order]
        return _series_div(n, d, order)


def _series_div(n, d, order):
    if d[0] == 0:
        raise ValueError("denominator vanishes at the expansion point")
    out = np.zeros(order, dtype=complex)
    for r in range(order):
        acc = n[r] if r < n.size else 0.0
        for i in range(1, min(r, d.size - 1) + 1):
            acc -= d[i] * out[r - i]
        out[r] = acc / d[0]
    return out


class PartialFractions:
    """Sum of principal parts; also an exponential polynomial in time.

    ``terms`` maps each distinct pole to its coefficient vector
    ``[c_1, ..., c_n]`` where ``c_k`` multiplies ``(z - pole)^{-k}``.
    """

    def __init__(self, terms=()):
        merged: dict[complex, np.ndarray] = {}
        for pole, coeffs in terms:
            pole = complex(pole)
            c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
            if pole in merged:
                a = merged[pole]
                n = max(a.size, c.size)
                merged[pole] = np.pad(a, (0, n - a.size)) + np.pad(c, (0, n - c.size))
            else:
                merged[pole] = c.copy()
        self.terms = sorted(merged.items(), key=lambda kv: (kv[0].real, kv[0].imag))
        for p, c in self.terms:
            c.setflags(write=False)

    def __repr__(self):
        parts = ", ".join(f"{p:.6g}: {np.array2string(c, precision=6)}" for p, c in self.terms)
        return f"PartialFractions({{{parts}}})"

    @property
    def poles(self):
        return [p for p, _ in self.terms]

    @property
    def orders(self):
        return [c.size for _, c in self.terms]

    def residue(self, pole):
        for p, c in self.terms:
            if p == pole:
                return c[0]
        raise KeyError(pole)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for p, c in self.terms:
            w = z - p
            for k, ck in enumerate(c, start=1):
                out = out + ck / w**k
        return out

    # Laplace-domain algebra ------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, PartialFractions):
            return NotImplemented
        return PartialFractions(list(self.terms) + list(other.terms))

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, a):
        if isinstance(a, PartialFractions):
            return NotImplemented
        return PartialFractions([(p, a * c) for p, c in self.terms])

    def __mul__(self, other):
        """Product of transforms, i.e. convolution of the time functions."""
        if not isinstance(other, PartialFractions):
            return self.__rmul__(other)
        out = []
        for a, ca in self.terms:
            for b, cb in other.terms:
                for i, ci in enumerate(ca, start=1):
                    if ci == 0:
                        continue
                    for j, cj in enumerate(cb, start=1):
                        if cj == 0:
                            continue
                        out.extend(_product_terms(a, i, b, j, ci * cj))
        return PartialFractions(out)

    def shift(self, s):
        """Transform of ``t -> f(t + s)`` (as an exponential polynomial)."""
        out = []
        for p, c in self.terms:
            n = c.size
            new = np.zeros(n, dtype=complex)
            e = np.exp(p * s)
            for k in range(1, n + 1):
                for q in range(k):
                    new[q] += c[k - 1] * e * s ** (k - 1 - q) / factorial(k - 1 - q)
            out.append((p, new))
        return PartialFractions(out)

    def tail(self):
        """Transform of ``t -> integral_t^inf f``; all poles need Re < 0."""
        out = []
        for p, c in self.terms:
            if p.real >= 0:
                raise ValueError("tail integral diverges: pole with Re >= 0")
            new = np.zeros(c.size, dtype=complex)
            for k in range(1, c.size + 1):
                for r in range(k):
                    new[r] += c[k - 1] * (-p) ** (-(k - r))
            out.append((p, new))
        return PartialFractions(out)

    def integral(self, t):
        """``integral_0^t f``; a simple pole at 0 contributes ``c * t``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        rest = []
        for p, c in self.terms:
            if abs(p) <= POLE_TOL:
                if c.size > 1 and np.any(c[1:] != 0):
                    raise ValueError("integral of a multiple pole at 0 is not supported")
                out = out + c[0] * t
            else:
                rest.append((p, c))
        if rest:
            tl = PartialFractions(rest).tail()
            out = out + tl.inverse(0.0) - tl.inverse(t)
        return out

    def inverse(self, t):
        """Time-domain value ``sum c_{j,k} t^{k-1} e^{z_j t} / (k-1)!``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for p, c in self.terms:
            e = np.exp(p * t)
            poly = np.full(t.shape, c[-1], dtype=complex)
            for k in range(c.size - 1, 0, -1):
                poly = poly * t / k + c[k - 1]
            out = out + poly * e
        return out


def _product_terms(a, i, b, j, scale):
    """Principal parts of ``scale / ((z-a)^i (z-b)^j)``."""
    if a == b:
        c = np.zeros(i + j, dtype=complex)
        c[-1] = scale
        return [(a, c)]
    ca = np.zeros(i, dtype=complex)
    cb = np.zeros(j, dtype=complex)
    for k in range(1, i + 1):
        n = i - k
        ca[k - 1] = scale * comb(j + n - 1, n) * (-1) ** n / (a - b) ** (j + n)
    for k in range(1, j + 1):
        n = j - k
        cb[k - 1] = scale * comb(i + n - 1, n) * (-1) ** n / (b - a) ** (i + n)
    return [(a, ca), (b, cb)]


def partial_fractions(f: RationalFunction) -> PartialFractions:
    """Decompose a proper rational function into principal parts.

    Coefficients come from the Taylor expansion of ``num / g_j`` at each pole,
    where ``g_j`` is the denominator with the ``j``-th factor removed.
    """
    if not f.is_proper:
        raise ValueError("improper fraction: deg num >= deg den")
    if f.num.is_zero:
        return PartialFractions()
    poles = f.poles()
    lead = f.den.coeffs[-1]
    terms = []
    for j, (zj, nj) in enumerate(poles):
        others = [z for i, (z, k) in enumerate(poles) if i != j for _ in range(k)]
        g = Polynomial.from_roots(others, lead)
        num_t = f.num.taylor(zj, nj)
        g_t = g.taylor(zj, nj)
        series = _series_div(num_t, g_t, nj)
        # c_{j,k} multiplies (z-zj)^{-k}; series[r] multiplies (z-zj)^{r-nj}
        terms.append((zj, series[::-1]))
    return PartialFractions(terms)


def evaluate(f, z):
    """Evaluate a :class:`RationalFunction` or :class:`PartialFractions` at ``z``."""
    z = complex(z)
    poles = f.poles() if isinstance(f, RationalFunction) else f.terms
    for p, _ in poles:
        if abs(z - p) <= POLE_TOL * max(1.0, abs(p)):
            raise ZeroDivisionError(f"evaluation at pole {p}")
    return complex(f(z))


def inverse_laplace(pf: PartialFractions, t):
    """Inverse Laplace transform of a decomposed transform at time(s) ``t >= 0``.

    Poles must lie in Re < 0, except a simple pole at 0 which contributes its
    residue as a constant.
    """
    for p, c in pf.terms:
        if abs(p) <= POLE_TOL:
            if c.size > 1 and np.any(c[1:] != 0):
                raise ValueError("unstable transform: multiple pole at 0")
        elif p.real > POLE_TOL * max(1.0, abs(p)):
            raise ValueError("unstable transform")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    out = pf.inverse(t)
    return out if out.ndim else complex(out)
