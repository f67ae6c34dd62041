"""I-function, mirror map, GKZ operators, H-function and central charges.

Coefficients of I are Laurent polynomials in z with values in one sector
ring, kept as ``{power: vector}`` with exact rationals. The prefactor
e^{Σ p̄_a log q_a / z} is never expanded: operators act through
𝒟_i (e^{Σp̄ log q/z} q^δ c) = e^{Σp̄ log q/z} q^δ (D̄_i + ⟨D_i,δ⟩z) c.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, factorial
from typing import Optional, Sequence

import mpmath

from . import lattice as la
from . import special as sp
from .chern import Chern, KClass, phase
from .cohomology import OrbClass, OrbifoldCohomology, SectorRing, to_mp
from .errors import (AnnihilationFailure, BranchUnspecified, IdentityViolated,
                     NotWeakFano, OutsideDomain, TruncationWarning,
                     UnexpectedPositivePowers)
from .stack import NefBasis, in_closed_kahler, pair

Laurent = dict  # power of z -> coefficient vector
DEFAULT_Q_MAX = Fraction(1, 10)


# ---------------------------------------------------------------------------
# Laurent-polynomial helpers over a sector ring

def _clean(L: Laurent) -> Laurent:
    return {k: v for k, v in L.items() if any(x != 0 for x in v)}


def l_add(a: Laurent, b: Laurent, sign: int = 1) -> Laurent:
    out = dict(a)
    for k, v in b.items():
        if k in out:
            out[k] = [x + sign * y for x, y in zip(out[k], v)]
        else:
            out[k] = [sign * y for y in v]
    return _clean(out)


def l_times_linear(R: SectorRing, L: Laurent, x: Sequence, c: Fraction) -> Laurent:
    """L · (x + c z)."""
    out: Laurent = {}
    for k, v in L.items():
        xv = R.mul(v, x)
        out[k] = [a + b for a, b in zip(out.get(k, [Fraction(0)] * R.dim), xv)]
        if c:
            out[k + 1] = [a + c * b for a, b in zip(out.get(k + 1, [Fraction(0)] * R.dim), v)]
    return _clean(out)


def l_div_linear(R: SectorRing, L: Laurent, x: Sequence, c: Fraction) -> Laurent:
    """L / (x + c z) with c ≠ 0, using nilpotency of x."""
    out: Laurent = {}
    power = {k: list(v) for k, v in L.items()}
    for j in range(R.top + 1):
        scale = Fraction((-1) ** j) / c ** (j + 1)
        for k, v in power.items():
            key = k - j - 1
            acc = out.get(key, [Fraction(0)] * R.dim)
            out[key] = [a + scale * b for a, b in zip(acc, v)]
        power = {k: R.mul(v, x) for k, v in power.items()}
        power = _clean(power)
        if not power:
            break
    return _clean(out)


# ---------------------------------------------------------------------------
# I-function

@dataclass
class QSeries:
    """Truncated q-series Σ_d q^d c_d(z) behind the symbolic prefactor."""
    coh: OrbifoldCohomology
    cap: Fraction
    terms: dict = field(default_factory=dict)   # d -> (sector index, Laurent)

    def keys(self) -> list:
        b = self.coh.basis
        return sorted(self.terms, key=lambda d: (b.degree(d), d))

    def z_coefficient(self, d, k: int) -> OrbClass:
        v, L = self.terms[d]
        R = self.coh.rings[v]
        return self.coh.from_sector(v, L.get(k, [Fraction(0)] * R.dim))


class IFunction:
    def __init__(self, coh: OrbifoldCohomology):
        basis = coh.basis
        if not in_closed_kahler(basis.inertia, basis.rho_hat):
            raise NotWeakFano("ρ̂ is not in the closed extended Kähler cone",
                              witness=list(basis.rho_hat))
        self.coh = coh
        self.basis = basis
        self.inertia = basis.inertia
        self._cache: dict = {}

    def in_keff(self, d) -> bool:
        pr = self.inertia.pairings(d)
        S = frozenset(i for i, x in enumerate(pr) if x.denominator == 1 and x >= 0)
        return S in self.inertia.anticones

    def sector(self, d) -> int:
        return self.inertia.sector_of(d).index

    def coefficient(self, d) -> tuple[int, Laurent]:
        """(v(d), c_d) with c_d the Laurent coefficient of q^d; zero off K_eff."""
        d = tuple(Fraction(x) for x in d)
        if d in self._cache:
            return self._cache[d]
        pr = self.inertia.pairings(d)
        Sint = frozenset(i for i, x in enumerate(pr) if x.denominator == 1)
        if Sint not in self.inertia.anticones:
            res = (None, {})
        else:
            v = self.sector(d)
            if not self.in_keff(d):
                res = (v, {})
            else:
                R = self.coh.rings[v]
                L: Laurent = {0: R.one()}
                for i, l in enumerate(pr):
                    x = R.Dbar(i)
                    if l < 0:
                        for nu in range(ceil(l), 0):
                            L = l_times_linear(R, L, x, l - nu)
                    elif l > 0:
                        for nu in range(0, ceil(l)):
                            L = l_div_linear(R, L, x, l - nu)
                res = (v, L)
        self._cache[d] = res
        return res

    def check_homogeneous(self, d, v: int, L: Laurent):
        R = self.coh.rings[v]
        shift = self.inertia.box[v].age + pair(self.basis.rho_hat, d)
        for k, vec in L.items():
            for x, deg in zip(vec, R.degree_of):
                if x != 0 and k + deg + shift != 0:
                    raise IdentityViolated(f"coefficient of q^{d} is not homogeneous at z^{k}",
                                           witness=(d, k))

    def series(self, cap) -> QSeries:
        cap = Fraction(cap)
        out = QSeries(self.coh, cap)
        for d in self.basis.keff(cap):
            v, L = self.coefficient(d)
            self.check_homogeneous(d, v, L)
            out.terms[d] = (v, L)
        return out


def i_function(coh: OrbifoldCohomology, cap) -> QSeries:
    return IFunction(coh).series(cap)


# ---------------------------------------------------------------------------
# mirror map

@dataclass
class MirrorMap:
    coh: OrbifoldCohomology
    cap: Fraction
    log_part: tuple                 # coefficient of log q_a is p̄_a, a ≤ r′
    corrections: dict               # d -> OrbClass (exact), the z^{-1} part of c_d
    frD: dict                       # j -> coefficient of q^{D_j^∨}

    def is_trivial(self) -> bool:
        return not self.corrections

    def evaluate(self, q: Sequence, log_q: Optional[Sequence] = None) -> OrbClass:
        basis = self.coh.basis
        logs = _logs_of_q(q, log_q)
        rp = basis.r_prime
        tau = _divisor_numeric(self.coh, logs[:rp], untwisted_only=True)
        for d, cls in self.corrections.items():
            w = _q_power(basis, logs, d)
            tau = tau + cls.scale(w)
        return tau


def _divisor_numeric(coh: OrbifoldCohomology, coeffs, untwisted_only: bool = False) -> OrbClass:
    """Σ c_a p̄_a with complex c_a, restricted to every sector (or only the untwisted one)."""
    comps = []
    e = [[Fraction(int(b == a)) for b in range(len(coeffs))] for a in range(len(coeffs))]
    for v, R in enumerate(coh.rings):
        vec = [mpmath.mpc(0)] * R.dim
        if v == 0 or not untwisted_only:
            for a, c in enumerate(coeffs):
                vec = [x + c * to_mp(y) for x, y in zip(vec, R.linear(e[a]))]
        comps.append(vec)
    return OrbClass(coh, comps, False)


def mirror_map(coh: OrbifoldCohomology, cap, ifn: Optional[IFunction] = None) -> MirrorMap:
    ifn = ifn or IFunction(coh)
    I = ifn.series(cap)
    basis = coh.basis
    corrections = {}
    zero = tuple(Fraction(0) for _ in range(basis.r))
    for d in I.keys():
        v, L = I.terms[d]
        pos = [k for k in L if k > 0]
        if pos:
            raise UnexpectedPositivePowers(f"q^{d} carries z^{max(pos)}", witness=(d, max(pos)))
        if d == zero:
            if L != {0: coh.rings[0].one()}:
                raise IdentityViolated("constant term of I is not 1")
            continue
        if 0 in L:
            raise IdentityViolated(f"q^{d} contributes to the z^0 part", witness=d)
        if -1 in L:
            R = coh.rings[v]
            for x, deg in zip(L[-1], R.degree_of):
                if x != 0 and deg + coh.inertia.box[v].age > 1:
                    raise IdentityViolated(f"τ leaves H^≤2 at q^{d}", witness=d)
            corrections[d] = coh.from_sector(v, L[-1])
    frD = {}
    for j, dv in basis.d_vee.items():
        key = tuple(Fraction(x) for x in dv)
        frD[j] = corrections.get(key)
        if frD[j] is None and basis.degree(key) <= Fraction(cap):
            frD[j] = coh.zero()
    log_part = tuple(range(basis.r_prime))
    return MirrorMap(coh, Fraction(cap), log_part, corrections, frD)


# ---------------------------------------------------------------------------
# GKZ operators

@dataclass(frozen=True)
class GKZOperator:
    """𝒫_d = q^d ∏_{⟨D_i,d⟩<0} ∏_{ν<−⟨D_i,d⟩}(𝒟_i − νz) − ∏_{⟨D_i,d⟩>0} ∏_{ν<⟨D_i,d⟩}(𝒟_i − νz)."""
    d: tuple
    pairings: tuple

    @classmethod
    def of(cls, basis: NefBasis, d) -> "GKZOperator":
        d = tuple(int(x) for x in d)
        pr = basis.inertia.pairings(d)
        if any(x.denominator != 1 for x in pr):
            raise IdentityViolated("GKZ operator needs an integral d")
        return cls(d, tuple(int(x) for x in pr))


def _apply_product(R: SectorRing, L: Laurent, delta_pr, pr_op, sign: int) -> Laurent:
    """∏_{i: sign·l_i>0} ∏_{ν<|l_i|} (D̄_i + (⟨D_i,δ⟩ − ν)z) applied to L."""
    for i, l in enumerate(pr_op):
        if sign * l <= 0:
            continue
        x = R.Dbar(i)
        for nu in range(abs(l)):
            L = l_times_linear(R, L, x, delta_pr[i] - nu)
    return L


def gkz_apply(op: GKZOperator, ifn: IFunction, delta) -> tuple[int, Laurent]:
    """Coefficient of q^δ in 𝒫_d applied to I (prefactor stripped)."""
    delta = tuple(Fraction(x) for x in delta)
    shifted = tuple(a - b for a, b in zip(delta, op.d))
    v1, L1 = ifn.coefficient(shifted)
    v2, L2 = ifn.coefficient(delta)
    v = v1 if v1 is not None else v2
    if v is None:
        return None, {}
    R = ifn.coh.rings[v]
    pairings = ifn.inertia.pairings
    A = _apply_product(R, L1, pairings(shifted), op.pairings, -1) if L1 else {}
    B = _apply_product(R, L2, pairings(delta), op.pairings, +1) if L2 else {}
    return v, l_add(A, B, -1)


def gkz_generators(basis: NefBasis) -> list[tuple[int, ...]]:
    """Dual basis of p plus an effective d with ⟨D_i,d⟩ ≥ 1 for all i."""
    gens = [tuple(x) for x in basis.dual_basis]
    pos = positive_relation(basis)
    if pos not in gens:
        gens.append(pos)
    return gens


def positive_relation(basis: NefBasis) -> tuple[int, ...]:
    """Smallest-degree integral d with all ⟨D_i,d⟩ ≥ 1 (exact LP, then scaled)."""
    inertia = basis.inertia
    D = inertia.data.D
    r, m = inertia.r, inertia.m
    # variables d⁺, d⁻ (r each) and slacks s_i: D d − s = 1, s ≥ 0
    A = []
    for i in range(m):
        A.append([D[i][a] for a in range(r)] + [-D[i][a] for a in range(r)]
                 + [-int(k == i) for k in range(m)])
    cost = [-sum(pair(p, [int(a == b) for b in range(r)]) for p in basis.P) for a in range(r)]
    c = cost + [-x for x in cost] + [0] * m
    status, x, _ = la.lp_maximize(c, A, [1] * m)
    if status != "optimal":
        raise IdentityViolated("no relation with all ⟨D_i,d⟩ > 0")
    d = [x[a] - x[r + a] for a in range(r)]
    den = 1
    for t in d:
        den = la.lcm(den, t.denominator)
    return tuple(int(t * den) for t in d)


@dataclass
class AnnihilationReport:
    generator: tuple
    checked: int
    cap: Fraction
    ok: bool


def gkz_annihilation_check(coh: OrbifoldCohomology, cap, generators=None,
                           ifn: Optional[IFunction] = None) -> list[AnnihilationReport]:
    """Exact check 𝒫_d I = 0 for |δ| ≤ cap; raises AnnihilationFailure."""
    ifn = ifn or IFunction(coh)
    basis = coh.basis
    cap = Fraction(cap)
    gens = generators if generators is not None else gkz_generators(basis)
    reports = []
    for g in gens:
        op = GKZOperator.of(basis, g)
        dd = basis.degree(op.d)
        deltas = set(basis.keff(cap))
        deltas |= {tuple(a + b for a, b in zip(x, op.d)) for x in basis.keff(cap - dd)}
        count = 0
        for delta in sorted(deltas, key=lambda x: (basis.degree(x), x)):
            if basis.degree(delta) > cap:
                continue
            v, L = gkz_apply(op, ifn, delta)
            count += 1
            if L:
                k = min(L)
                raise AnnihilationFailure(f"𝒫_{op.d} I has a nonzero q^{delta} z^{k} coefficient",
                                          witness={"d": op.d, "delta": delta, "z_power": k})
        reports.append(AnnihilationReport(op.d, count, cap, True))
    return reports


def derivative_leading_check(coh: OrbifoldCohomology, ifn: Optional[IFunction] = None,
                             extra_shells: int = 1) -> list[dict]:
    """For δ ∈ K with all ⟨D_i,δ⟩ > 0: q^{−δ} ∏∏(𝒟_i − νz) I = 1_{v(δ)} + O(q^{1/e0}).

    Checks the constant coefficient exactly and the vanishing of terms with
    some ⟨p_a, d − δ⟩ < 0 up to |δ| + extra_shells/e0."""
    ifn = ifn or IFunction(coh)
    basis, inertia = coh.basis, coh.inertia
    pos = positive_relation(basis)
    out = []
    for s in inertia.box:
        k = 0
        while True:
            delta = tuple(x + k * y for x, y in zip(s.d, pos))
            if all(pr > 0 for pr in inertia.pairings(delta)):
                break
            k += 1
        ceils = [ceil(pr) for pr in inertia.pairings(delta)]
        bound = basis.degree(delta) + Fraction(extra_shells, inertia.e0)
        bad = []
        const_ok = None
        for d in basis.keff(bound):
            v, L = ifn.coefficient(d)
            if not L:
                continue
            R = coh.rings[v]
            dpr = inertia.pairings(d)
            for i, c in enumerate(ceils):
                for nu in range(c):
                    L = l_times_linear(R, L, R.Dbar(i), dpr[i] - nu)
            diff = [pair(p, d) - pair(p, delta) for p in basis.P]
            if tuple(d) == tuple(delta):
                const_ok = (v == s.index and L == {0: R.one()})
            elif any(x < 0 for x in diff) and L:
                bad.append(d)
        out.append({"sector": s.index, "delta": delta, "constant_is_unit": bool(const_ok),
                    "negative_terms_vanish": not bad})
    return out


# ---------------------------------------------------------------------------
# numerics: branches, H-function, central charges

def _logs_of_q(q: Sequence, log_q: Optional[Sequence] = None) -> list:
    if log_q is not None:
        return [mpmath.mpc(x) for x in log_q]
    logs = []
    for x in q:
        x = mpmath.mpmathify(x)
        if mpmath.im(x) != 0 or mpmath.re(x) <= 0:
            raise BranchUnspecified(f"q = {x} is off the positive real locus; pass log_q",
                                    witness=str(x))
        logs.append(mpmath.log(mpmath.re(x)))
    return logs


def _q_power(basis: NefBasis, logs, d):
    return mpmath.exp(sum(to_mp(e) * lg for e, lg in zip(basis.q_exponent(d), logs)))


def evaluate_i(I: QSeries, q, z, log_q=None) -> OrbClass:
    """Numeric I(q,z) from a truncated series (prefactor included)."""
    coh = I.coh
    basis = coh.basis
    logs = _logs_of_q(q, log_q)
    z = mpmath.mpmathify(z)
    total = coh.zero(False)
    for d in I.keys():
        v, L = I.terms[d]
        w = _q_power(basis, logs, d)
        R = coh.rings[v]
        vec = [mpmath.mpc(0)] * R.dim
        for k, c in L.items():
            vec = [a + w * z ** k * to_mp(b) for a, b in zip(vec, c)]
        total = total + coh.from_sector(v, vec, False)
    P = _divisor_numeric(coh, [lg / z for lg in logs[:basis.r_prime]])
    return coh.exp_class(P) * total


class HFunction:
    """H(q,z) = (−1)^n Σ_{d∈K_eff} x^{p̄/2πi+d} 1_{inv v(d)} / ∏Γ(1+⟨D_i,d⟩+D̄_i/2πi)."""

    def __init__(self, coh: OrbifoldCohomology, digits: Optional[int] = None,
                 q_max=DEFAULT_Q_MAX):
        basis = coh.basis
        if not in_closed_kahler(basis.inertia, basis.rho_hat):
            raise NotWeakFano("ρ̂ is not in the closed extended Kähler cone",
                              witness=list(basis.rho_hat))
        self.coh = coh
        self.basis = basis
        self.inertia = basis.inertia
        self.digits = digits or mpmath.mp.dps
        self.q_max = q_max
        self._coef: dict = {}

    def coefficient(self, d) -> tuple[int, list]:
        """(inv v(d), 1/∏Γ(1+⟨D_i,d⟩+D̄_i/2πi) on that sector)."""
        if d in self._coef:
            return self._coef[d]
        s = self.inertia.sector_of(d)
        w = s.inv
        R = self.coh.rings[w]
        tpi = 2j * mpmath.pi
        acc = R.one(False)
        for i, l in enumerate(self.inertia.pairings(d)):
            cs = sp.rgamma_series(1 + l, R.top, self.digits)
            cs = [c / mpmath.mpc(tpi) ** k for k, c in enumerate(cs)]
            x = [to_mp(t) for t in R.Dbar(i)]
            acc = R.mul(acc, R.series(x, cs, False), False)
        self._coef[d] = (w, acc)
        return w, acc

    def evaluate(self, q, z, cap, log_q=None, log_z=None, check_domain: bool = True):
        """Returns (H value, ratio-test tail estimate)."""
        with mpmath.workdps(self.digits):
            logs = _logs_of_q(q, log_q)
            if check_domain:
                for lg in logs:
                    if abs(mpmath.exp(mpmath.re(lg))) >= to_mp(Fraction(self.q_max)):
                        raise OutsideDomain(f"|q| ≥ {self.q_max}", witness=str(mpmath.exp(lg)))
            if log_z is None:
                z = mpmath.mpmathify(z)
                if z == 0:
                    raise OutsideDomain("z = 0")
                log_z = mpmath.log(z)
            log_z = mpmath.mpc(log_z)
            basis = self.basis
            logx = [lg - basis.rho[a] * log_z for a, lg in enumerate(logs)]
            sign = (-1) ** self.coh.n
            coh = self.coh
            total = coh.zero(False)
            shells: dict = {}
            for d in basis.keff(cap):
                w, vec = self.coefficient(d)
                xd = mpmath.exp(sum(to_mp(e) * lx for e, lx in zip(basis.q_exponent(d), logx)))
                term = coh.from_sector(w, [sign * xd * c for c in vec], False)
                total = total + term
                key = basis.degree(d)
                shells[key] = max(shells.get(key, 0), term.max_abs())
            tpi = 2j * mpmath.pi
            P = _divisor_numeric(coh, [lx / tpi for lx in logx[:basis.r_prime]])
            value = coh.exp_class(P) * total
            tail = _tail_estimate(shells)
            return value, tail


def h_point_series(coh: OrbifoldCohomology, cap) -> dict:
    """(−1)^n i_pt^*H exactly: {q-exponent: (z power, coefficient)} for |d| ≤ cap.

    Only d with v(d) = 0 contribute; the point restriction of 1/Γ(1+l+D̄/2πi) is 1/l!
    (zero for negative integers l)."""
    basis = coh.basis
    inertia = basis.inertia
    out = {}
    for d in basis.keff(cap):
        ls = inertia.pairings(d)
        if inertia.sector_of(d).index != 0 or any(x < 0 for x in ls):
            continue
        c = Fraction(1)
        for x in ls:
            c /= factorial(int(x))
        zp = -sum(Fraction(rh) * pair(p, d) for rh, p in zip(basis.rho, basis.P))
        out[basis.q_exponent(d)] = (int(zp), c)
    return dict(sorted(out.items(), key=lambda kv: (sum(kv[0]), kv[0])))


def _tail_estimate(shells: dict):
    keys = sorted(shells)
    if len(keys) < 3:
        return mpmath.inf if keys and shells[keys[-1]] != 0 else mpmath.mpf(0)
    a, b = shells[keys[-2]], shells[keys[-1]]
    if b == 0:
        return mpmath.mpf(0)
    if a == 0:
        return mpmath.inf
    ratio = b / a
    if ratio >= 1:
        return mpmath.inf
    return b * ratio / (1 - ratio)


def h_function_eval(coh: OrbifoldCohomology, q, z, cap, log_q=None, log_z=None,
                    tol: float = 1e-12, digits: Optional[int] = None) -> OrbClass:
    value, tail = HFunction(coh, digits).evaluate(q, z, cap, log_q, log_z)
    if tail > tol:
        warnings.warn(f"H truncated at |d| ≤ {cap}: tail estimate {mpmath.nstr(tail, 5)}",
                      TruncationWarning)
    return value


def central_charge(chern: Chern, V: KClass, q, z, cap, log_q=None, tol: float = 1e-12,
                   h: Optional[HFunction] = None) -> mpmath.mpc:
    """Z(V) = ∫_{IX} H(q, e^{πi}z) ∪ tch(V^∨) ∪ Td(TX), log(e^{πi}z) = log z + πi."""
    coh = chern.coh
    h = h or HFunction(coh, chern.digits)
    with mpmath.workdps(chern.digits):
        z = mpmath.mpmathify(z)
        log_z = mpmath.log(z) + 1j * mpmath.pi
        value, tail = h.evaluate(q, z, cap, log_q, log_z)
        if tail > tol:
            warnings.warn(f"central charge truncated at |d| ≤ {cap}: tail estimate "
                          f"{mpmath.nstr(tail, 5)}", TruncationWarning)
        cls = value * chern.tch(chern.dual(V)) * chern.todd_class_TX()
        return coh.integrate(cls)


# ---------------------------------------------------------------------------
# Galois monodromy

def galois_monodromy_check(chern: Chern, xi, cap, tol: float = 1e-12,
                           ifn: Optional[IFunction] = None) -> dict:
    """Compare I(e^{−2πiξ}q, z) with G^H(ξ) I(q,z) coefficientwise.

    Path 1 rotates q^d by e^{−2πi⟨ξ,d⟩}; path 2 applies the sector phase
    e^{2πi f_v(ξ)} of the stored Box representative. Both carry the same
    nilpotent factor e^{−2πiξ̄/z} from the prefactor."""
    coh = chern.coh
    ifn = ifn or IFunction(coh)
    I = ifn.series(cap)
    basis = coh.basis
    xi_bar = basis.bar(xi)
    worst = 0.0
    with mpmath.workdps(chern.digits):
        for d in I.keys():
            v, L = I.terms[d]
            R = coh.rings[v]
            x = [to_mp(t) for t in R.linear(xi_bar)]
            nil = _exp_nil(R, x, -2j * mpmath.pi)
            p1 = mpmath.expjpi(-2 * to_mp(pair(xi, d)))
            p2 = phase(chern.f_of_xi(v, xi))
            p2 = to_mp(p2) if isinstance(p2, Fraction) else p2
            for k, vec in L.items():
                num = [to_mp(t) for t in vec]
                for j, nv in nil.items():
                    prod = R.mul(num, nv, False)
                    for a in prod:
                        worst = max(worst, float(abs(p1 * a - p2 * a)))
    return {"xi": tuple(xi), "cap": str(cap), "max_error": worst, "ok": worst <= tol}


def _exp_nil(R: SectorRing, x, c) -> dict:
    """e^{c x / z} as {−k: c^k x^k / k!}."""
    out = {}
    power = R.one(False)
    for k in range(R.top + 1):
        out[-k] = [mpmath.mpc(c) ** k / factorial(k) * t for t in power]
        power = R.mul(power, x, False)
    return out
