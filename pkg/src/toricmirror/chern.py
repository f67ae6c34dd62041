"""K-classes through their inertia Chern character; Γ̂ and Todd classes;
orbifold Riemann–Roch, the Mukai pairing, the framing Ψ and Galois actions.

On the sector of d the tangent bundle has Chern roots D̄_i with eigenvalue
ages f_i = {−⟨D_i,d⟩}, i = 1..m (the r trivial summands of the Euler
sequence contribute factors equal to one).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Optional

import mpmath

from . import special as sp
from .cohomology import OrbClass, OrbifoldCohomology, to_mp
from .errors import IdentityViolated, NonIntegerChi
from .stack import frac_part, pair

CHI_TOL = 1e-8


def phase(f: Fraction):
    """e^{2πi f}; exact ±1 when f ∈ {0, 1/2}."""
    f = frac_part(Fraction(f))
    if f == 0:
        return Fraction(1)
    if f == Fraction(1, 2):
        return Fraction(-1)
    return mpmath.expjpi(2 * to_mp(f))


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


@dataclass
class KClass:
    """Integer combination of line bundles L_ξ plus an optional tch-level part."""
    lines: dict = field(default_factory=dict)
    extra: Optional[OrbClass] = None
    label: str = ""

    @classmethod
    def line(cls, xi, coeff: int = 1) -> "KClass":
        return cls({tuple(int(x) for x in xi): coeff}, None, f"L{tuple(xi)}")

    @classmethod
    def direct(cls, value: OrbClass, label: str = "") -> "KClass":
        return cls({}, value, label)

    def __add__(self, other: "KClass") -> "KClass":
        lines = dict(self.lines)
        for k, c in other.lines.items():
            lines[k] = lines.get(k, 0) + c
        extra = self.extra
        if other.extra is not None:
            extra = other.extra if extra is None else extra + other.extra
        return KClass({k: c for k, c in lines.items() if c}, extra)

    def __neg__(self) -> "KClass":
        return KClass({k: -c for k, c in self.lines.items()},
                      None if self.extra is None else -self.extra)

    def __sub__(self, other: "KClass") -> "KClass":
        return self + (-other)

    def scale(self, c: int) -> "KClass":
        return KClass({k: c * v for k, v in self.lines.items()},
                      None if self.extra is None else self.extra.scale(c))


class Chern:
    """Characteristic-class machinery over a fixed orbifold cohomology."""

    def __init__(self, coh: OrbifoldCohomology, digits: Optional[int] = None):
        self.coh = coh
        self.inertia = coh.inertia
        self.basis = coh.basis
        self.digits = digits or mpmath.mp.dps
        self._cache: dict = {}

    # -- roots -----------------------------------------------------------
    def roots(self, v: int) -> list[tuple[Fraction, int]]:
        d = self.inertia.box[v].d
        return [(frac_part(-pair(Di, d)), i) for i, Di in enumerate(self.inertia.data.D)]

    def f_of_xi(self, v: int, xi) -> Fraction:
        return self.inertia.f_of_xi(self.inertia.box[v], xi)

    def _multiplicative(self, coeffs_of) -> OrbClass:
        """∏_i F(f_i, D̄_i) sectorwise, F given by its coefficient list."""
        comps = []
        exact_all = True
        raw = []
        for v, R in enumerate(self.coh.rings):
            parts = []
            for f, i in self.roots(v):
                cs = coeffs_of(f, R.top)
                parts.append((cs, R.Dbar(i)))
            ex = all(all(is_exact(c) for c in cs) for cs, _ in parts)
            exact_all &= ex
            raw.append(parts)
        for v, R in enumerate(self.coh.rings):
            acc = R.one(exact_all)
            for cs, x in raw[v]:
                xv = x if exact_all else [to_mp(t) for t in x]
                acc = R.mul(acc, R.series(xv, cs, exact_all), exact_all)
            comps.append(acc)
        return OrbClass(self.coh, comps, exact_all)

    # -- classes ---------------------------------------------------------
    def gamma_class_TX(self) -> OrbClass:
        if "gamma" not in self._cache:
            with mpmath.workdps(self.digits):
                self._cache["gamma"] = self._multiplicative(
                    lambda f, k: sp.gamma_series(1 - f, k, self.digits))
        return self._cache["gamma"]

    @staticmethod
    def todd_coeffs(f: Fraction, order: int):
        if f == 0:
            return [(-1) ** k * sp.bernoulli(k) / factorial(k) for k in range(order + 1)]
        lam = phase(-f)
        if is_exact(lam):
            one = Fraction(1)
            e = [one * (-1) ** k / factorial(k) for k in range(order + 1)]
        else:
            e = [mpmath.mpf((-1) ** k) / factorial(k) for k in range(order + 1)]
        g = [(1 if k == 0 else 0) - lam * e[k] for k in range(order + 1)]
        return sp.s_inv(g, order)

    def todd_class_TX(self) -> OrbClass:
        if "todd" not in self._cache:
            with mpmath.workdps(self.digits):
                self._cache["todd"] = self._multiplicative(self.todd_coeffs)
        return self._cache["todd"]

    # -- Chern character -------------------------------------------------
    def tch_line(self, xi) -> OrbClass:
        bar = self.basis.bar(xi)
        comps = []
        phases = [phase(self.f_of_xi(v, xi)) for v in range(len(self.coh.rings))]
        exact = all(is_exact(p) for p in phases)
        for v, R in enumerate(self.coh.rings):
            e = R.exp(R.linear(bar), True)
            comps.append([phases[v] * x for x in e] if exact else
                         [to_mp(phases[v]) * to_mp(x) if not is_exact(phases[v]) else to_mp(x) * phases[v]
                          for x in e])
        if not exact:
            comps = [[to_mp(x) for x in c] for c in comps]
        return OrbClass(self.coh, comps, exact)

    def tch(self, V: KClass) -> OrbClass:
        total = self.coh.zero(True)
        for xi, c in sorted(V.lines.items()):
            total = total + self.tch_line(xi).scale(c)
        if V.extra is not None:
            total = total + V.extra
        return total

    def dual(self, V: KClass) -> KClass:
        lines = {tuple(-x for x in xi): c for xi, c in V.lines.items()}
        extra = None
        if V.extra is not None:
            extra = self._dual_tch(V.extra)
        return KClass(lines, extra, f"dual({V.label})")

    def _dual_tch(self, a: OrbClass) -> OrbClass:
        # tch(V^∨)_v: conjugate phases, (-1)^k on H^{2k}
        def conj(x):
            return x if is_exact(x) else mpmath.conj(x)
        comps = []
        for v, R in enumerate(self.coh.rings):
            comps.append([conj(x) * (-1) ** k for x, k in zip(a.comps[v], R.degree_of)])
        return OrbClass(self.coh, comps, a.exact)

    def tensor(self, V1: KClass, V2: KClass) -> KClass:
        lines: dict = {}
        for a, c in V1.lines.items():
            for b, e in V2.lines.items():
                k = tuple(x + y for x, y in zip(a, b))
                lines[k] = lines.get(k, 0) + c * e
        extra = None
        if V1.extra is not None or V2.extra is not None:
            t1 = self.tch(KClass(V1.lines))
            t2 = self.tch(KClass(V2.lines))
            parts = []
            if V2.extra is not None:
                parts.append(t1 * V2.extra)
            if V1.extra is not None:
                parts.append(V1.extra * t2)
            if V1.extra is not None and V2.extra is not None:
                parts.append(V1.extra * V2.extra)
            extra = parts[0]
            for p in parts[1:]:
                extra = extra + p
        return KClass({k: c for k, c in lines.items() if c}, extra)

    def skyscraper(self) -> KClass:
        """𝒪_x for a non-stacky point: tch = [pt] on the untwisted sector."""
        return KClass.direct(self.coh.point(0), "O_pt")

    # -- Riemann–Roch ----------------------------------------------------
    def chi_value(self, V: KClass):
        with mpmath.workdps(self.digits):
            return self.coh.integrate(self.tch(V) * self.todd_class_TX())

    def chi(self, V: KClass, tol: float = CHI_TOL) -> int:
        val = self.chi_value(V)
        if is_exact(val):
            if Fraction(val).denominator != 1:
                raise NonIntegerChi(f"χ = {val} is not an integer", witness=val)
            return int(val)
        re, im = float(mpmath.re(val)), float(mpmath.im(val))
        k = round(re)
        if abs(re - k) > tol or abs(im) > tol:
            raise NonIntegerChi(f"χ = {val} is not within {tol} of an integer", witness=val)
        return int(k)

    def mukai_pairing(self, V1: KClass, V2: KClass, tol: float = CHI_TOL) -> int:
        return self.chi(self.tensor(self.dual(V2), V1), tol)

    def mukai_value(self, V1: KClass, V2: KClass):
        return self.chi_value(self.tensor(self.dual(V2), V1))

    # -- framing ---------------------------------------------------------
    def psi(self, V: KClass) -> OrbClass:
        with mpmath.workdps(self.digits):
            t = self.coh.inv_star(self.tch(V)).numeric()
            two_pi_i = 2j * mpmath.pi
            t = self.coh.apply_degreewise(t, lambda v, k: mpmath.mpc(two_pi_i) ** k)
            n = self.coh.n
            return (self.gamma_class_TX() * t).scale((2 * mpmath.pi) ** (-mpmath.mpf(n) / 2))

    def exp_pi_i_rho(self, a: OrbClass) -> OrbClass:
        rho = self.coh.divisor(self.coh.rho_bar, False).scale(1j * mpmath.pi)
        return self.coh.exp_class(rho) * a

    def exp_pi_i_mu(self, a: OrbClass) -> OrbClass:
        box = self.inertia.box
        half_n = Fraction(self.coh.n, 2)
        return self.coh.apply_degreewise(
            a.numeric(), lambda v, k: mpmath.expjpi(to_mp(k + box[v].age - half_n)))

    def sol_pairing(self, V1: KClass, V2: KClass):
        with mpmath.workdps(self.digits):
            return self.coh.pairing(self.exp_pi_i_rho(self.psi(V1)),
                                    self.exp_pi_i_mu(self.psi(V2)))

    # -- Galois ----------------------------------------------------------
    def galois_dG(self, xi, a: OrbClass) -> OrbClass:
        phases = [phase(self.f_of_xi(v, xi)) for v in range(len(self.coh.rings))]
        if a.exact and all(is_exact(p) for p in phases):
            return self.coh.apply_degreewise(a, lambda v, k: phases[v])
        return self.coh.apply_degreewise(a.numeric(), lambda v, k: to_mp(phases[v]))

    def galois_G(self, xi, tau: OrbClass) -> OrbClass:
        shifted = self.galois_dG(xi, tau)
        xi0 = self.coh.divisor(self.basis.bar(xi), False)
        xi0 = self.coh.from_sector(0, xi0.comps[0], False)
        return shifted.numeric() - xi0.scale(2j * mpmath.pi)

    # -- Γ–Todd identity -------------------------------------------------
    def gamma_todd_identity_check(self, v: int, order: int = 4) -> float:
        """Max coefficient discrepancy of
        ∏ Γ(1−f̄+δ/2πi)Γ(1−f−δ/2πi) = (2πi)^{n−n_v} e^{−ρ/2} e^{−πiι_v} Td_v,
        both as a multivariate series in independent roots (to total order)
        and as classes in H*(X_v)."""
        with mpmath.workdps(self.digits):
            roots = self.roots(v)
            tpi = 2j * mpmath.pi
            n = self.coh.n
            s = self.inertia.box[v]
            const = mpmath.mpc(tpi) ** (n - s.n_v) * mpmath.expjpi(-to_mp(s.age))

            def lhs_root(f, k):
                fbar = 1 - f if f != 0 else Fraction(0)
                a = sp.s_scale_var(sp.gamma_series(1 - fbar, k, self.digits), 1 / tpi, k)
                b = sp.s_scale_var(sp.gamma_series(1 - f, k, self.digits), -1 / tpi, k)
                return sp.s_mul(a, b, k)

            def rhs_root(f, k):
                td = [to_mp(c) for c in self.todd_coeffs(f, k)]
                return sp.s_mul(sp.exp_series(mpmath.mpf(-0.5), k, False), td, k)

            L = _multi_product([lhs_root(f, order) for f, _ in roots], order)
            Rr = _multi_product([rhs_root(f, order) for f, _ in roots], order)
            err = 0.0
            for key in set(L) | set(Rr):
                err = max(err, float(abs(L.get(key, 0) - const * Rr.get(key, 0))))
            R = self.coh.rings[v]
            lc, rc = R.one(False), R.one(False)
            for f, i in roots:
                x = [to_mp(t) for t in R.Dbar(i)]
                lc = R.mul(lc, R.series(x, lhs_root(f, R.top), False), False)
                rc = R.mul(rc, R.series(x, rhs_root(f, R.top), False), False)
            for a, b in zip(lc, rc):
                err = max(err, float(abs(a - const * b)))
            return err

    # -- stacky points ---------------------------------------------------
    def stacky_point_psi(self, anticone, xi=None) -> OrbClass:
        """Closed form of Ψ(𝒪_y ⊗ χ_ξ) at the torus fixed point y of the maximal
        cone complementary to `anticone`; χ_ξ is the character of Aut(y)
        restricted from ξ ∈ 𝕃^∨ (trivial when ξ is None)."""
        inertia = self.inertia
        I = tuple(sorted(anticone))
        D = inertia.data.D
        r = inertia.r
        xi = xi or (0,) * r
        from . import lattice as la
        DI = [list(D[i]) for i in I]
        snf = la.smith_normal_form(DI)
        DIinv = la.inverse(DI)
        order = abs(la.det(DI))
        n = self.coh.n
        with mpmath.workdps(self.digits):
            total = self.coh.zero(False)
            from itertools import product
            for a in product(*[range(t) for t in snf.diagonal]):
                k = [sum(snf.U[i][j] * a[j] for j in range(r)) for i in range(r)]
                d = [sum(DIinv[x][y] * k[y] for y in range(r)) for x in range(r)]
                sec = inertia.sector_of(d)
                fs = [frac_part(-pair(D[i], d)) for i in range(inertia.m)]
                denom = to_mp(Fraction(order))
                for f in fs:
                    if f != 0:
                        denom *= mpmath.gamma(to_mp(f))
                sign = mpmath.expjpi(to_mp(n + sec.n_v + sec.age))
                trace = mpmath.expjpi(2 * to_mp(pair(xi, d)))
                total = total + self.coh.point(sec.index, False).scale(sign * trace / denom)
            tpi = 2j * mpmath.pi
            return total.scale(mpmath.mpc(tpi) ** n / (2 * mpmath.pi) ** (mpmath.mpf(n) / 2))

    def koszul_point(self, anticone, xi=None) -> KClass:
        """𝒪_y ⊗ L_ξ|_y as ∏_{i∉I}(1 − L_{−D_i}) ⊗ L_ξ."""
        inertia = self.inertia
        r = inertia.r
        V = KClass.line(xi or (0,) * r)
        for i in range(inertia.m):
            if i in anticone:
                continue
            Di = inertia.data.D[i]
            V = self.tensor(V, KClass.line((0,) * r) - KClass.line(tuple(-x for x in Di)))
        return V


def line_bundle_basis(chern: Chern, height: Optional[int] = None) -> list[tuple[int, ...]]:
    """Line bundles L_ξ, ξ = −Σ k_a p_a with 0 ≤ k_a ≤ height, whose Mukai Gram
    matrix is unimodular. The default height is max(4, dim H*_orb − 1).

    Greedy on (Σk, lex) first; when that spanning set is not unimodular, the first
    unimodular combination of candidates in the same order is returned."""
    import numpy as np
    from itertools import combinations, product as iproduct

    basis = chern.basis
    target = chern.coh.dimension
    if height is None:
        height = max(4, target - 1)
    ks = sorted(iproduct(range(height + 1), repeat=basis.r), key=lambda k: (sum(k), k))
    cands = []
    for k in ks:
        xi = tuple(int(x) for x in basis.from_coords([-a for a in k]))
        if xi not in cands:
            cands.append(xi)
    chis: dict = {}

    def chi_of(xi):
        if xi not in chis:
            chis[xi] = chern.chi(KClass.line(xi))
        return chis[xi]

    def gram(xs):
        return [[chi_of(tuple(a - b for a, b in zip(x, y))) for y in xs] for x in xs]

    def unimodular(xs):
        return abs(round(np.linalg.det(np.array(gram(xs), dtype=float)))) == 1

    chosen, rows = [], []
    with mpmath.workdps(chern.digits):
        for xi in cands:
            vec = [complex(x) for x in chern.tch_line(xi).numeric().flat()]
            if np.linalg.matrix_rank(np.array(rows + [vec]), tol=1e-9) > len(rows):
                rows.append(vec)
                chosen.append(xi)
                if len(chosen) == target:
                    break
    if len(chosen) < target:
        raise IdentityViolated(f"line bundles of height ≤ {height} span only {len(chosen)} of {target}")
    if unimodular(chosen):
        return chosen
    for combo in combinations(cands, target):
        if combo[0] == cands[0] and unimodular(combo):
            return list(combo)
    raise IdentityViolated("no unimodular line-bundle basis found", witness=chosen)


def mukai_gram(chern: Chern, xis) -> list[list]:
    lines = [KClass.line(x) for x in xis]
    return [[chern.mukai_value(a, b) for b in lines] for a in lines]


def _multi_product(factors, order: int) -> dict:
    """∏_i f_i(x_i) as a dict exponent-tuple → coefficient, total degree ≤ order."""
    out = {(): mpmath.mpc(1)}
    for f in factors:
        new = {}
        for key, c in out.items():
            used = sum(key)
            for k in range(0, order - used + 1):
                if k < len(f) and f[k] != 0:
                    new[key + (k,)] = new.get(key + (k,), 0) + c * f[k]
        out = new
    return out
