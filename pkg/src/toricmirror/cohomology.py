"""Sector cohomology rings, orbifold classes and the orbifold Poincaré pairing.

Each twisted sector X_v is itself a toric orbifold with data (𝕃, {D_i}_{i∈S_v}, η),
so H*(X_v) = ℚ[p̄_1..p̄_{r′}] / J_v with J_v generated by ∏_{i∈I} D̄_i for
I ⊆ S_v with S_v∖I not an anticone. Normal forms are computed degree by
degree with exact row reduction in graded-lex order.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Callable, Sequence

import mpmath

from . import lattice as la
from .errors import DegreeMismatch, IdentityViolated
from .stack import BoxSector, NefBasis

Monomial = tuple[int, ...]


def monomials(nvars: int, deg: int) -> list[Monomial]:
    """Degree-`deg` exponent tuples in descending lex order (the leading ones first)."""
    if nvars == 0:
        return [()] if deg == 0 else []
    out = []

    def rec(prefix, left, k):
        if k == nvars - 1:
            out.append(tuple(prefix + [left]))
            return
        for e in range(left, -1, -1):
            rec(prefix + [e], left - e, k + 1)

    rec([], deg, 0)
    return out


def poly_mul(f: dict, g: dict) -> dict:
    out: dict = {}
    for a, x in f.items():
        for b, y in g.items():
            k = tuple(i + j for i, j in zip(a, b))
            out[k] = out.get(k, 0) + x * y
    return {k: v for k, v in out.items() if v != 0}


def linear_form(coeffs: Sequence) -> dict:
    n = len(coeffs)
    return {tuple(int(i == a) for i in range(n)): Fraction(c) for a, c in enumerate(coeffs) if c}


def to_mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    if isinstance(x, int):
        return mpmath.mpf(x)
    return x


class SectorRing:
    """H*(X_v) with a graded-lex monomial basis."""

    def __init__(self, basis: NefBasis, sector: BoxSector):
        inertia = basis.inertia
        self.sector = sector
        self.nvars = basis.r_prime
        self.top = sector.n_v
        S = sorted(sector.support)
        self.Dbar_forms = [linear_form(basis.Dbar(i)) for i in range(inertia.m)]
        gens = []
        for k in range(0, len(S) + 1):
            for I in combinations(S, k):
                rest = frozenset(S) - set(I)
                if rest in inertia.anticones:
                    continue
                if any(set(J) <= set(I) for J, _ in gens):
                    continue
                f = {tuple([0] * self.nvars): Fraction(1)}
                for i in I:
                    f = poly_mul(f, self.Dbar_forms[i])
                gens.append((I, f))
        self.generators = gens
        self._rows: dict[int, list] = {}
        self.basis: list[Monomial] = []
        self.degree_of: list[int] = []
        for k in range(self.top + 2):
            mons = monomials(self.nvars, k)
            rows = []
            for _, g in gens:
                dg = sum(next(iter(g))) if g else 0
                if not g or dg > k:
                    continue
                for mono in monomials(self.nvars, k - dg):
                    h = poly_mul(g, {mono: Fraction(1)})
                    rows.append([h.get(mu, Fraction(0)) for mu in mons])
            R, piv = la.rref(rows) if rows else ([], [])
            self._rows[k] = (mons, R[:len(piv)], piv)
            std = [mu for c, mu in enumerate(mons) if c not in piv]
            if k == self.top + 1:
                if std:
                    raise IdentityViolated(f"sector {sector.index}: ring not zero above degree {self.top}")
                continue
            self.basis += std
            self.degree_of += [k] * len(std)
        self.dim = len(self.basis)
        self.index = {mu: i for i, mu in enumerate(self.basis)}
        dims = [self.degree_of.count(k) for k in range(self.top + 1)]
        if dims != dims[::-1] or (dims and dims[-1] != 1):
            raise IdentityViolated(f"sector {sector.index}: Poincaré duality fails, dims {dims}")
        self.dims = dims
        self._mult = [[self.reduce(poly_mul({a: Fraction(1)}, {b: Fraction(1)}))
                       for b in self.basis] for a in self.basis]
        self._top_integral = self._integration(basis)

    # -- normal forms -----------------------------------------------------
    def reduce(self, f: dict) -> list:
        """Normal form of a polynomial (any degrees) as a basis vector."""
        out = [Fraction(0)] * self.dim
        bydeg: dict[int, dict] = {}
        for mu, c in f.items():
            bydeg.setdefault(sum(mu), {})[mu] = c
        for k, part in bydeg.items():
            if k > self.top:
                continue
            mons, rows, piv = self._rows[k]
            vec = [part.get(mu, Fraction(0)) for mu in mons]
            for row, c in zip(rows, piv):
                if vec[c] != 0:
                    f0 = vec[c]
                    vec = [a - f0 * b for a, b in zip(vec, row)]
            for c, mu in enumerate(mons):
                if vec[c] != 0:
                    out[self.index[mu]] += vec[c]
        return out

    def _integration(self, basis: NefBasis) -> Fraction:
        inertia = basis.inertia
        S = self.sector.support
        vals = set()
        for I in inertia.minimal_anticones:
            if not set(I) <= S:
                continue
            f = {tuple([0] * self.nvars): Fraction(1)}
            for i in sorted(S - set(I)):
                f = poly_mul(f, self.Dbar_forms[i])
            vec = self.reduce(f)
            c = vec[-1]
            if c == 0 or any(vec[:-1]):
                raise IdentityViolated(f"sector {self.sector.index}: fixed-point monomial vanishes")
            order = abs(la.det([list(inertia.data.D[i]) for i in I]))
            vals.add(1 / (c * order))
        if len(vals) != 1:
            raise IdentityViolated(f"sector {self.sector.index}: inconsistent integration {vals}")
        return vals.pop()

    @property
    def top_integral(self) -> Fraction:
        """∫_{X_v} of the top basis monomial."""
        return self._top_integral

    # -- arithmetic on coefficient vectors --------------------------------
    @cached_property
    def _mult_mp(self):
        return [[[to_mp(x) for x in v] for v in row] for row in self._mult]

    def mul(self, a: Sequence, b: Sequence, exact: bool = True) -> list:
        table = self._mult if exact else self._mult_mp
        zero = Fraction(0) if exact else mpmath.mpf(0)
        out = [zero] * self.dim
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                if y == 0:
                    continue
                xy = x * y
                for k, c in enumerate(table[i][j]):
                    if c != 0:
                        out[k] = out[k] + xy * c
        return out

    def one(self, exact: bool = True) -> list:
        zero, unit = (Fraction(0), Fraction(1)) if exact else (mpmath.mpf(0), mpmath.mpf(1))
        return [unit] + [zero] * (self.dim - 1)

    def linear(self, coeffs: Sequence) -> list:
        return self.reduce(linear_form(coeffs))

    def Dbar(self, i: int) -> list:
        return self.reduce(self.Dbar_forms[i])

    def series(self, x: Sequence, coeffs: Sequence, exact: bool = True) -> list:
        """Σ_k coeffs[k] x^k for nilpotent x (x must have no degree-0 part)."""
        result = [c * 0 for c in self.one(exact)]
        power = self.one(exact)
        for k in range(min(len(coeffs), self.top + 1)):
            if k:
                power = self.mul(power, x, exact)
            ck = coeffs[k] if exact else to_mp(coeffs[k])
            result = [a + ck * b for a, b in zip(result, power)]
        return result

    def exp(self, x: Sequence, exact: bool = True) -> list:
        fact = [Fraction(1)]
        for k in range(1, self.top + 1):
            fact.append(fact[-1] / k)
        return self.series(x, fact, exact)

    def integrate_vec(self, vec: Sequence, exact: bool = True):
        """∫ of the top-degree part (other degrees are dropped)."""
        c = vec[-1] if self.degree_of[-1] == self.top else 0
        return c * (self._top_integral if exact else to_mp(self._top_integral))

    def point_class(self, exact: bool = True) -> list:
        """The class with ∫ = 1 (Poincaré dual of a point map pt → X_v)."""
        zero = Fraction(0) if exact else mpmath.mpf(0)
        out = [zero] * self.dim
        val = 1 / self._top_integral
        out[-1] = val if exact else to_mp(val)
        return out

    def monomial_name(self, i: int) -> str:
        mu = self.basis[i]
        parts = []
        for a, e in enumerate(mu):
            if e == 1:
                parts.append(f"p{a + 1}")
            elif e > 1:
                parts.append(f"p{a + 1}^{e}")
        return "*".join(parts) or "1"


class OrbifoldCohomology:
    """H*_orb as the direct sum of sector rings, with pairing and gradings."""

    def __init__(self, basis: NefBasis):
        self.basis = basis
        self.inertia = basis.inertia
        self.rings = [SectorRing(basis, s) for s in self.inertia.box]
        for s in self.inertia.box:
            if self.inertia.box[s.inv].support != s.support:
                raise IdentityViolated("inv does not preserve the support")

    @property
    def n(self) -> int:
        return self.inertia.n

    @property
    def dimension(self) -> int:
        return sum(R.dim for R in self.rings)

    def zero(self, exact: bool = True) -> "OrbClass":
        z = Fraction(0) if exact else mpmath.mpf(0)
        return OrbClass(self, tuple(tuple([z] * R.dim) for R in self.rings), exact)

    def unit(self, exact: bool = True) -> "OrbClass":
        return self.one_v(0, exact)

    def one_v(self, v: int, exact: bool = True) -> "OrbClass":
        comps = list(self.zero(exact).comps)
        comps[v] = tuple(self.rings[v].one(exact))
        return OrbClass(self, tuple(comps), exact)

    def from_sector(self, v: int, vec, exact: bool = True) -> "OrbClass":
        comps = list(self.zero(exact).comps)
        comps[v] = tuple(vec)
        return OrbClass(self, tuple(comps), exact)

    def point(self, v: int = 0, exact: bool = True) -> "OrbClass":
        return self.from_sector(v, self.rings[v].point_class(exact), exact)

    def divisor(self, coeffs, exact: bool = True) -> "OrbClass":
        """Σ_a coeffs[a] p̄_a pulled back to every sector."""
        comps = []
        for R in self.rings:
            vec = R.linear(coeffs)
            comps.append(tuple(vec if exact else [to_mp(x) for x in vec]))
        return OrbClass(self, tuple(comps), exact)

    @cached_property
    def rho_bar(self) -> tuple:
        return tuple(self.basis.rho[:self.basis.r_prime])

    # -- pairing ------------------------------------------------------------
    def integrate(self, a: "OrbClass"):
        """∫_{IX} a = Σ_v ∫_{X_v} a_v (top-degree parts only)."""
        return sum((R.integrate_vec(a.comps[v], a.exact) for v, R in enumerate(self.rings)),
                   Fraction(0) if a.exact else mpmath.mpf(0))

    def integrate_sector(self, v: int, vec, exact: bool = True):
        R = self.rings[v]
        if any(x != 0 for x, k in zip(vec, R.degree_of) if k != R.top):
            raise DegreeMismatch(f"class on sector {v} is not of top degree {R.top}")
        return R.integrate_vec(vec, exact)

    def pairing(self, a: "OrbClass", b: "OrbClass"):
        exact = a.exact and b.exact
        if not exact:
            a, b = a.numeric(), b.numeric()
        total = Fraction(0) if exact else mpmath.mpf(0)
        for v, R in enumerate(self.rings):
            w = self.inertia.box[v].inv
            prod = R.mul(a.comps[v], b.comps[w], exact)
            total = total + R.integrate_vec(prod, exact)
        return total

    def flat_basis(self) -> list[tuple[int, int]]:
        return [(v, i) for v, R in enumerate(self.rings) for i in range(R.dim)]

    def gram(self) -> list[list[Fraction]]:
        fb = self.flat_basis()
        elems = [self.from_sector(v, [Fraction(int(k == i)) for k in range(self.rings[v].dim)])
                 for v, i in fb]
        return [[self.pairing(x, y) for y in elems] for x in elems]

    def orbifold_degree(self, v: int, i: int) -> Fraction:
        """Real orbifold degree 2 deg + 2ι_v of basis element i on sector v."""
        return 2 * self.rings[v].degree_of[i] + 2 * self.inertia.box[v].age

    # -- gradings -----------------------------------------------------------
    def apply_degreewise(self, a: "OrbClass", f: Callable[[int, int], object]) -> "OrbClass":
        """Multiply the H^{2k}(X_v) part by f(v, k)."""
        comps = []
        for v, R in enumerate(self.rings):
            comps.append(tuple(x * f(v, k) for x, k in zip(a.comps[v], R.degree_of)))
        return OrbClass(self, tuple(comps), a.exact)

    def mu(self, a: "OrbClass") -> "OrbClass":
        half_n = Fraction(self.n, 2)
        box = self.inertia.box
        if a.exact:
            return self.apply_degreewise(a, lambda v, k: k + box[v].age - half_n)
        return self.apply_degreewise(a, lambda v, k: to_mp(k + box[v].age - half_n))

    def deg_operator(self, a: "OrbClass") -> "OrbClass":
        box = self.inertia.box
        if a.exact:
            return self.apply_degreewise(a, lambda v, k: 2 * k + 2 * box[v].age)
        return self.apply_degreewise(a, lambda v, k: to_mp(2 * k + 2 * box[v].age))

    def rho_multiply(self, a: "OrbClass") -> "OrbClass":
        return self.divisor(self.rho_bar, a.exact) * a

    def inv_star(self, a: "OrbClass") -> "OrbClass":
        box = self.inertia.box
        return OrbClass(self, tuple(a.comps[box[v].inv] for v in range(len(box))), a.exact)

    def exp_class(self, x: "OrbClass") -> "OrbClass":
        """Sectorwise exponential of a class whose degree-0 parts vanish."""
        comps = [tuple(R.exp(x.comps[v], x.exact)) for v, R in enumerate(self.rings)]
        return OrbClass(self, tuple(comps), x.exact)


class OrbClass:
    """Element of H*_orb: one coefficient vector per Box sector."""

    __slots__ = ("coh", "comps", "exact")

    def __init__(self, coh: OrbifoldCohomology, comps, exact: bool = True):
        self.coh = coh
        self.comps = tuple(tuple(c) for c in comps)
        self.exact = exact

    def numeric(self) -> "OrbClass":
        if not self.exact:
            return self
        return OrbClass(self.coh, tuple(tuple(to_mp(x) for x in c) for c in self.comps), False)

    def _coerce(self, other: "OrbClass"):
        if self.exact and other.exact:
            return self, other
        return self.numeric(), other.numeric()

    def __add__(self, other: "OrbClass") -> "OrbClass":
        a, b = self._coerce(other)
        return OrbClass(self.coh, tuple(tuple(x + y for x, y in zip(p, q))
                                        for p, q in zip(a.comps, b.comps)), a.exact)

    def __neg__(self) -> "OrbClass":
        return OrbClass(self.coh, tuple(tuple(-x for x in p) for p in self.comps), self.exact)

    def __sub__(self, other: "OrbClass") -> "OrbClass":
        return self + (-other)

    def scale(self, c) -> "OrbClass":
        exact = self.exact and isinstance(c, (int, Fraction))
        src = self if exact else self.numeric()
        c = c if exact else to_mp(c)
        return OrbClass(self.coh, tuple(tuple(c * x for x in p) for p in src.comps), exact)

    def __mul__(self, other):
        if not isinstance(other, OrbClass):
            return self.scale(other)
        a, b = self._coerce(other)
        comps = tuple(tuple(R.mul(a.comps[v], b.comps[v], a.exact))
                      for v, R in enumerate(self.coh.rings))
        return OrbClass(self.coh, comps, a.exact)

    __rmul__ = scale

    def sector(self, v: int) -> tuple:
        return self.comps[v]

    def is_zero(self) -> bool:
        return all(x == 0 for p in self.comps for x in p)

    def max_abs(self):
        return max((abs(x) for p in self.comps for x in p), default=0)

    def flat(self) -> list:
        return [x for p in self.comps for x in p]

    def __eq__(self, other) -> bool:
        if not isinstance(other, OrbClass):
            return NotImplemented
        return self.comps == other.comps

    def __repr__(self) -> str:
        parts = []
        for v, p in enumerate(self.comps):
            R = self.coh.rings[v]
            for i, x in enumerate(p):
                if x != 0:
                    parts.append(f"({x})*{R.monomial_name(i)}[{v}]")
        return " + ".join(parts) or "0"


def sector_ring(coh: OrbifoldCohomology, v: int) -> SectorRing:
    return coh.rings[v]


def poincare_pairing(a: OrbClass, b: OrbClass):
    """Σ_v ∫_{X_v} a_v ∪ b_{inv v}."""
    return a.coh.pairing(a, b)


def grading_mu(a: OrbClass) -> OrbClass:
    return a.coh.mu(a)
