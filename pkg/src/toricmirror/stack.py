"""Toric Deligne–Mumford stacks from initial data (𝕃, D, η).

Coordinates: 𝕃 = ℤ^r and 𝕃^∨ = ℤ^r with the standard pairing; row i of D
is the character D_i. Indices of rays are 0-based throughout the code.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from math import ceil, floor
from typing import Optional, Sequence

from . import lattice as la
from .errors import (BasisNotFound, ConditionAViolated, ConditionBViolated,
                     ConditionCViolated, FanIncomplete, FanNotSimplicial,
                     IdentityViolated, NotInK, NotWeakFano, UserBasisInvalid)

log = logging.getLogger(__name__)

DEFAULT_HEIGHT = 8


def frac_part(x: Fraction) -> Fraction:
    return x - floor(x)


def pair(u: Sequence, d: Sequence) -> Fraction:
    return sum((Fraction(a) * Fraction(b) for a, b in zip(u, d)), Fraction(0))


@dataclass(frozen=True)
class StackInitialData:
    r: int
    D: la.IntMatrix
    eta: la.QVec

    @classmethod
    def make(cls, D, eta) -> "StackInitialData":
        D = la.as_matrix(D)
        r = len(D[0]) if D else len(eta)
        return cls(r, D, la.qvec(eta))

    @property
    def m(self) -> int:
        return len(self.D)

    @property
    def n(self) -> int:
        return self.m - self.r


@dataclass(frozen=True)
class BoxSector:
    index: int
    d: la.QVec                  # representative, coordinates reduced into [0,1)
    v: tuple                    # element of N as (free, torsion)
    age: Fraction
    support: frozenset
    n_v: int
    inv: int
    cone: tuple                 # minimal anticone used to find it

    @property
    def untwisted(self) -> bool:
        return self.index == 0


class InertiaData:
    """Validated stack: anticones, stacky fan, Box sectors."""

    def __init__(self, data: StackInitialData):
        self.data = data
        self.r, self.m, self.n = data.r, data.m, data.n
        D = data.D
        self.anticones = self._anticones()
        full = frozenset(range(self.m))
        if full not in self.anticones:
            raise ConditionAViolated("{1..m} is not an anticone", witness=sorted(full))
        self._check_c()
        for I in sorted(self.anticones, key=lambda s: (len(s), sorted(s))):
            if la.rank([D[i] for i in I]) < self.r:
                raise ConditionBViolated(f"anticone {sorted(I)} does not span", witness=sorted(I))
        self.N = la.cokernel(D)
        self.rays = self.N.images()
        self.nonredundant = tuple(i for i in range(self.m) if full - {i} in self.anticones)
        self.redundant = tuple(i for i in range(self.m) if i not in self.nonredundant)
        self.m_prime = len(self.nonredundant)
        # permutation placing non-redundant rays first, as in the usual numbering
        self.perm = self.nonredundant + self.redundant
        minimal = [I for I in self.anticones
                   if not any(J < I for J in self.anticones)]
        self.minimal_anticones = sorted((tuple(sorted(I)) for I in minimal))
        self.max_cones = [tuple(i for i in range(self.m) if i not in I)
                          for I in self.minimal_anticones]
        self._check_fan()
        self.box = self._enumerate_box()
        self._key_index = {s.d: s.index for s in self.box}

    # -- anticones and conditions -------------------------------------------
    def _anticones(self) -> frozenset:
        D, eta = self.data.D, self.data.eta
        out = set()
        for k in range(self.m + 1):
            for I in combinations(range(self.m), k):
                cone = la.RationalCone.of([D[i] for i in I], self.r)
                if la.cone_contains(cone, eta, strict=True) is not None:
                    out.add(frozenset(I))
        return frozenset(out)

    def _check_c(self):
        D = self.data.D
        A = [[D[i][a] for i in range(self.m)] + [0] for a in range(self.r)]
        A.append([1] * self.m + [1])
        status, sol, val = la.lp_maximize([1] * self.m + [0], A, [0] * self.r + [1])
        if status == "optimal" and val > 0:
            c = sol[:self.m]
            den = 1
            for x in c:
                den = la.lcm(den, x.denominator)
            raise ConditionCViolated("nonzero c ≥ 0 with Σ c_i D_i = 0",
                                     witness=[int(x * den) for x in c])

    def is_anticone(self, I) -> bool:
        return frozenset(I) in self.anticones

    # -- fan ----------------------------------------------------------------
    def free(self, i: int) -> tuple[int, ...]:
        return self.rays[i][0]

    def _check_fan(self):
        n = self.n
        for I in self.anticones:
            gens = [self.free(i) for i in range(self.m) if i not in I]
            if gens and la.rank(gens) < len(gens):
                raise FanNotSimplicial(f"cone of anticone {sorted(I)} is not simplicial",
                                       witness=sorted(I))
        for sigma in self.max_cones:
            if len(sigma) != n:
                raise FanIncomplete(f"maximal cone {list(sigma)} is not full dimensional",
                                    witness=list(sigma))
        if n == 0:
            return
        cones = [frozenset(s) for s in self.max_cones]
        for sigma in cones:
            for i in sigma:
                tau = sigma - {i}
                others = [s for s in cones if s != sigma and tau <= s]
                if len(others) != 1:
                    raise FanIncomplete(f"facet {sorted(tau)} lies on {len(others) + 1} maximal cones",
                                        witness=sorted(tau))
                (j,) = tuple(others[0] - tau)
                rows = [self.free(k) for k in tau]
                normal = la.kernel_basis(rows)[0] if rows else (Fraction(1),)
                si = pair(normal, self.free(i))
                sj = pair(normal, self.free(j))
                if si * sj >= 0:
                    raise FanIncomplete(f"cones across facet {sorted(tau)} overlap",
                                        witness=sorted(tau))

    # -- Box ----------------------------------------------------------------
    def pairings(self, d) -> tuple[Fraction, ...]:
        return tuple(pair(Di, d) for Di in self.data.D)

    def support(self, d) -> frozenset:
        return frozenset(i for i, x in enumerate(self.pairings(d)) if x.denominator == 1)

    def v_of(self, d):
        ce = [ceil(x) for x in self.pairings(d)]
        return self.N.represent(ce)

    @staticmethod
    def reduce_d(d) -> la.QVec:
        return tuple(frac_part(Fraction(x)) for x in d)

    def _enumerate_box(self) -> list[BoxSector]:
        D = self.data.D
        found: dict = {}
        ntor = self.N.torsion_order
        for I in self.minimal_anticones:
            DI = [list(D[i]) for i in I]
            snf = la.smith_normal_form(DI)
            diag = snf.diagonal
            DIinv = la.inverse(DI)
            count = 0
            for a in product(*[range(s) for s in diag]):
                k = [sum(snf.U[i][j] * a[j] for j in range(self.r)) for i in range(self.r)]
                d = self.reduce_d([sum(DIinv[x][y] * k[y] for y in range(self.r))
                                   for x in range(self.r)])
                count += 1
                found.setdefault(d, I)
            sigma = [i for i in range(self.m) if i not in I]
            vol = abs(la.det([self.free(i) for i in sigma])) if sigma else 1
            if count != ntor * vol:
                raise IdentityViolated(f"parallelepiped count mismatch at cone {sigma}",
                                       witness=(count, ntor * vol))
        zero = tuple(Fraction(0) for _ in range(self.r))
        raw = []
        for d, I in found.items():
            pr = self.pairings(d)
            age = sum((frac_part(-x) for x in pr), Fraction(0))
            raw.append((d != zero, age, d, I))
        raw.sort()
        keys = {d: idx for idx, (_, _, d, _) in enumerate(raw)}
        out = []
        for idx, (_, age, d, I) in enumerate(raw):
            S = self.support(d)
            inv = keys[self.reduce_d([-x for x in d])]
            out.append(BoxSector(idx, d, self.v_of(d), age, S, len(S) - self.r, inv, I))
        return out

    def sector_of(self, d) -> BoxSector:
        S = self.support(d)
        if S not in self.anticones:
            raise NotInK(f"support {sorted(S)} is not an anticone", witness=sorted(S))
        return self.box[self._key_index[self.reduce_d(d)]]

    def age_of_d(self, d) -> tuple[BoxSector, Fraction]:
        s = self.sector_of(d)
        age = sum((frac_part(-x) for x in self.pairings(d)), Fraction(0))
        return s, age

    def f_of_xi(self, sector: BoxSector, xi) -> Fraction:
        return frac_part(-pair(xi, sector.d))

    @cached_property
    def orbifold_dimension(self) -> int:
        """Total count of maximal cones containing each Box element, summed."""
        return sum(self.sector_cone_count(s) for s in self.box)

    def sector_cone_count(self, s: BoxSector) -> int:
        # maximal cones of X_v = minimal anticones inside the support
        return sum(1 for I in self.minimal_anticones if set(I) <= s.support)

    @cached_property
    def e0(self) -> int:
        e = 1
        for s in self.box:
            for x in s.d:
                e = la.lcm(e, x.denominator)
        return e


def validate(data: StackInitialData) -> InertiaData:
    return InertiaData(data)


def enumerate_box(inertia: InertiaData) -> list[BoxSector]:
    """Box elements, untwisted sector first."""
    return list(inertia.box)


# ---------------------------------------------------------------------------
# Nef basis

@dataclass(frozen=True)
class NefBasis:
    inertia: InertiaData = field(repr=False)
    P: la.IntMatrix                 # rows p_a in D-coordinates
    r_prime: int
    M: la.IntMatrix                 # m_{ia}
    d_vee: dict                     # j -> D_j^∨ (rational r-vector)
    slopes: dict                    # j -> {i: c_{ji}}
    I_of: dict                      # j -> anticone I_j
    rho_hat: tuple[int, ...]
    rho: tuple[int, ...]
    weak_fano: bool
    rho_nonnegative: bool

    @property
    def r(self) -> int:
        return self.inertia.r

    def coords(self, xi) -> tuple[Fraction, ...]:
        """Coordinates of ξ ∈ 𝕃^∨ in the basis p_a."""
        Pinv = la.inverse([list(row) for row in self.P])
        return tuple(sum(Fraction(xi[b]) * Pinv[b][a] for b in range(self.r))
                     for a in range(self.r))

    def from_coords(self, c) -> tuple:
        return tuple(sum(Fraction(c[a]) * self.P[a][b] for a in range(self.r))
                     for b in range(self.r))

    def bar(self, xi) -> tuple[Fraction, ...]:
        """ξ̄ ∈ H²: coefficients on p̄_1..p̄_{r′}."""
        return self.coords(xi)[:self.r_prime]

    def Dbar(self, i: int) -> tuple[int, ...]:
        return tuple(self.M[i][:self.r_prime])

    def degree(self, d) -> Fraction:
        """|d| = Σ_a ⟨p_a, d⟩."""
        return sum((pair(p, d) for p in self.P), Fraction(0))

    def q_exponent(self, d) -> tuple[Fraction, ...]:
        return tuple(pair(p, d) for p in self.P)

    @cached_property
    def dual_basis(self) -> list[tuple[int, ...]]:
        """Basis of 𝕃 dual to p_a (columns of P^{-1})."""
        Pinv = la.inverse([list(row) for row in self.P])
        return [tuple(int(Pinv[b][a]) for b in range(self.r)) for a in range(self.r)]

    def keff(self, cap) -> list[la.QVec]:
        return enumerate_keff(self, cap)


def _nef_inequalities(inertia: InertiaData):
    D = inertia.data.D
    ineq = []
    for I in inertia.minimal_anticones:
        DT = [[D[i][a] for i in I] for a in range(inertia.r)]
        for row in la.inverse(DT):
            ineq.append(tuple(row))
    return ineq


def in_closed_kahler(inertia: InertiaData, x) -> bool:
    return all(pair(u, x) >= 0 for u in _nef_inequalities(inertia))


def _finish_basis(inertia: InertiaData, P, weak_fano: bool) -> NefBasis:
    D = inertia.data.D
    r = inertia.r
    Pinv = la.inverse([list(row) for row in P])
    M = [[sum(D[i][b] * Pinv[b][a] for b in range(r)) for a in range(r)] for i in range(inertia.m)]
    assert all(x.denominator == 1 for row in M for x in row)
    M = la.as_matrix([[int(x) for x in row] for row in M])
    d_vee, slopes, I_of = {}, {}, {}
    for j in inertia.redundant:
        for I in inertia.minimal_anticones:
            DI = [list(D[i]) for i in I]
            e = [int(i == j) for i in I]
            dv = la.solve(DI, e)
            c = {i: -pair(D[i], dv) for i in range(inertia.m) if i not in I}
            if all(x >= 0 for x in c.values()):
                d_vee[j], slopes[j], I_of[j] = dv, c, I
                break
        else:
            raise IdentityViolated(f"no anticone cone contains b_{j + 1}")
    rho_hat = tuple(sum(D[i][a] for i in range(inertia.m)) for a in range(r))
    rho = tuple(sum(M[i][a] for i in range(inertia.m)) for a in range(r))
    return NefBasis(inertia, la.as_matrix(P), r - len(inertia.redundant), M, d_vee, slopes,
                    I_of, rho_hat, rho, weak_fano, all(x >= 0 for x in rho))


def _basis_problems(inertia: InertiaData, P, weak_fano: bool) -> list[str]:
    r = inertia.r
    rp = r - len(inertia.redundant)
    out = []
    if len(P) != r or any(len(row) != r for row in P):
        return ["basis must be r×r"]
    if abs(la.det(P)) != 1:
        out.append("basis is not unimodular")
    for a, p in enumerate(P):
        if not in_closed_kahler(inertia, p):
            out.append(f"p_{a + 1} is not in the closed extended Kähler cone")
    red = la.RationalCone.of([inertia.data.D[j] for j in inertia.redundant], r)
    for a in range(rp, r):
        if la.cone_contains(red, P[a]) is None:
            out.append(f"p_{a + 1} is not in the cone of the extra rays")
    if weak_fano and not in_closed_kahler(inertia, [sum(row[a] for row in inertia.data.D)
                                                    for a in range(r)]):
        out.append("ρ̂ is not in the closed extended Kähler cone")
    return out


def select_nef_basis(inertia: InertiaData, user_basis=None, weak_fano: bool = True,
                     height: int = DEFAULT_HEIGHT) -> NefBasis:
    """Adopt a user basis after checking it, or search for one.

    Search order: increasing height, then lexicographic. In weak-Fano mode a
    basis with all ρ_a ≥ 0 is preferred; when none exists within the height
    bound the best basis is returned with ``rho_nonnegative=False``.
    """
    r = inertia.r
    if user_basis is not None:
        P = [list(map(int, row)) for row in user_basis]
        problems = _basis_problems(inertia, P, weak_fano)
        if problems:
            raise UserBasisInvalid("; ".join(problems), witness=problems)
        nb = _finish_basis(inertia, P, weak_fano)
        if weak_fano and not nb.rho_nonnegative:
            log.warning("user basis has a negative ρ_a: %s", nb.rho)
        return nb
    rho_hat = [sum(row[a] for row in inertia.data.D) for a in range(r)]
    if weak_fano and not in_closed_kahler(inertia, rho_hat):
        raise NotWeakFano("ρ̂ is not in the closed extended Kähler cone", witness=rho_hat)
    ineq = _nef_inequalities(inertia)
    red = la.RationalCone.of([inertia.data.D[j] for j in inertia.redundant], r)
    rp = r - len(inertia.redundant)

    def key(x):
        return (max(map(abs, x)), sum(map(abs, x)), tuple(-c for c in x))

    fallback = None
    for h in range(1, height + 1):
        cands = sorted((x for x in product(range(-h, h + 1), repeat=r)
                        if any(x) and all(pair(u, x) >= 0 for u in ineq)), key=key)
        extra = [x for x in cands if la.cone_contains(red, x) is not None]
        for want_rho in ([True, False] if weak_fano else [False]):
            P = _search(cands, extra, rp, r, rho_hat if want_rho else None)
            if P is not None:
                if want_rho:
                    return _finish_basis(inertia, P, weak_fano)
                if fallback is None:
                    fallback = P
        if fallback is not None and not weak_fano:
            return _finish_basis(inertia, fallback, weak_fano)
    if fallback is not None:
        log.warning("no nef basis with ρ_a ≥ 0 within height %d; using %s", height, fallback)
        return _finish_basis(inertia, fallback, weak_fano)
    raise BasisNotFound(f"no unimodular basis of height ≤ {height}")


def _search(cands, extra, rp, r, rho_hat):
    chosen: list = []

    def ok_final(P):
        if abs(la.det(P)) != 1:
            return False
        if rho_hat is not None:
            Pinv = la.inverse(P)
            co = [sum(Fraction(rho_hat[b]) * Pinv[b][a] for b in range(r)) for a in range(r)]
            return all(c >= 0 for c in co)
        return True

    def rec(k):
        if k == r:
            return list(chosen) if ok_final(chosen) else None
        pool = cands if k < rp else extra
        for x in pool:
            if x in chosen:
                continue
            if la.rank(chosen + [list(x)]) < k + 1:
                continue
            chosen.append(list(x))
            res = rec(k + 1)
            if res is not None:
                return res
            chosen.pop()
        return None

    return rec(0)


def weak_fano_check(basis: NefBasis) -> dict:
    inertia = basis.inertia
    ages = {j + 1: sum(c.values(), Fraction(0)) for j, c in basis.slopes.items()}
    inside = in_closed_kahler(inertia, basis.rho_hat)
    return {
        "rho_hat_in_closed_cone": inside,
        "extra_ray_ages": {k: str(v) for k, v in ages.items()},
        "extra_ray_ages_le_1": all(v <= 1 for v in ages.values()),
        "weak_fano": inside and all(v <= 1 for v in ages.values()),
    }


def enumerate_keff(basis: NefBasis, cap) -> list[la.QVec]:
    """d ∈ K_eff with |d| ≤ cap, sorted by (|d|, d)."""
    inertia = basis.inertia
    cap = Fraction(cap)
    e0 = inertia.e0
    r = inertia.r
    Pinv = la.inverse([list(row) for row in basis.P])
    top = floor(cap * e0)
    out = []

    def rec(prefix, left):
        if len(prefix) == r:
            u = [Fraction(k, e0) for k in prefix]
            d = tuple(sum(Pinv[b][a] * u[a] for a in range(r)) for b in range(r))
            pr = inertia.pairings(d)
            S = frozenset(i for i, x in enumerate(pr) if x.denominator == 1 and x >= 0)
            if S in inertia.anticones:
                out.append(d)
            return
        for k in range(left + 1):
            rec(prefix + [k], left - k)

    rec([], top)
    out.sort(key=lambda d: (basis.degree(d), d))
    return out
