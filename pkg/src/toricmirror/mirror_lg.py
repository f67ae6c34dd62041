"""Landau–Ginzburg mirror W_q = Σ_i q^{ℓ_i} y^{b_i} on Hom(N, ℂ*).

Critical points are found through the Batyrev presentation: a point of the
fiber is critical iff 𝗐 = M𝗉 for some 𝗉 ∈ ℂ^r, and then q_a = ∏_i 𝗐_i^{m_ia}.
That r-dimensional system is solved by total-degree homotopy continuation.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import factorial, prod
from typing import Optional, Sequence

import numpy as np

from . import lattice as la
from .errors import (CountMismatch, DegeneracyWitness, IdentityViolated,
                     SolverNoConvergence)
from .stack import NefBasis

SEED = 20240601


@dataclass
class LGModel:
    basis: NefBasis
    ell: list                 # ℓ_{ia}, rational, with p_a = Σ_i ℓ_{ia} D_i
    b_free: list              # free coordinates of b_i
    b_tor: list               # torsion coordinates of b_i
    torsion: tuple

    @property
    def n(self) -> int:
        return self.basis.inertia.n

    @property
    def m(self) -> int:
        return self.basis.inertia.m

    @property
    def torsion_order(self) -> int:
        return prod(self.torsion) if self.torsion else 1

    def components(self) -> list[tuple[int, ...]]:
        """Characters of N_tor, one per connected component of Hom(N, ℂ*)."""
        return list(product(*[range(t) for t in self.torsion]))

    def coefficients(self, q=None, log_q=None, component=None) -> np.ndarray:
        """c_i = q^{ℓ_i} ζ^{b_i} on one component; log q defaults to the principal branch."""
        if log_q is None:
            # q_a = 0 is allowed: q^0 = 1 and q^ℓ = 0 for ℓ > 0
            log_q = [cmath.log(complex(x)) if x != 0 else None for x in q]
        comp = component or (0,) * len(self.torsion)
        out = []
        for i in range(self.m):
            if any(lg is None and self.ell[i][a] != 0 for a, lg in enumerate(log_q)):
                out.append(0j)
                continue
            e = sum(float(self.ell[i][a]) * log_q[a] for a in range(len(log_q)) if self.ell[i][a])
            tw = sum(Fraction(s * self.b_tor[i][j], t)
                     for j, (s, t) in enumerate(zip(comp, self.torsion)))
            out.append(cmath.exp(e + 2j * cmath.pi * float(tw)))
        return np.array(out)

    def potential(self, c: np.ndarray, logy: np.ndarray) -> np.ndarray:
        """W at y = e^{logy}; logy has shape (..., n)."""
        B = np.array(self.b_free, dtype=float).reshape(self.m, self.n)
        return np.exp(logy @ B.T) @ c

    def describe(self) -> str:
        terms = []
        for i in range(self.m):
            qe = "·".join(f"q{a + 1}^{x}" for a, x in enumerate(self.ell[i]) if x)
            ye = "·".join(f"y{k + 1}^{x}" for k, x in enumerate(self.b_free[i]) if x)
            tor = f"·ζ^{self.b_tor[i]}" if self.torsion else ""
            terms.append((qe + "·" if qe else "") + (ye or "1") + tor)
        return " + ".join(terms)


def build_lg(basis: NefBasis) -> LGModel:
    """Solve Σ_i ℓ_{ia} D_i = p_a on the last minimal anticone."""
    inertia = basis.inertia
    D = inertia.data.D
    r, m = inertia.r, inertia.m
    I = inertia.minimal_anticones[-1]
    DIT = [[D[i][x] for i in I] for x in range(r)]
    ell = [[Fraction(0)] * r for _ in range(m)]
    for a, p in enumerate(basis.P):
        sol = la.solve(DIT, list(p))
        for k, i in enumerate(I):
            ell[i][a] = sol[k]
    for a in range(r):
        got = [sum(ell[i][a] * D[i][x] for i in range(m)) for x in range(r)]
        if got != [Fraction(v) for v in basis.P[a]]:
            raise IdentityViolated("splitting ℓ does not reproduce p_a")
    b_free = [list(f) for f, _ in inertia.rays]
    b_tor = [list(t) for _, t in inertia.rays]
    return LGModel(basis, ell, b_free, b_tor, inertia.N.torsion)


# ---------------------------------------------------------------------------
# Batyrev relations

@dataclass
class BatyrevSystem:
    M: np.ndarray             # m × r integer matrix m_{ia}
    degrees: list

    def w(self, p: np.ndarray) -> np.ndarray:
        return self.M @ p

    def q_of(self, p: np.ndarray) -> np.ndarray:
        """q_a = ∏_i 𝗐_i^{m_ia}."""
        w = self.w(p)
        return np.array([np.prod(w ** self.M[:, a]) for a in range(self.M.shape[1])])

    def residual(self, p: np.ndarray, q: np.ndarray) -> float:
        """Relative residual of ∏_{m>0} 𝗐^m = q ∏_{m<0} 𝗐^{−m}."""
        w = self.w(p)
        worst = 0.0
        for a in range(self.M.shape[1]):
            e = self.M[:, a]
            lhs = np.prod(np.where(e > 0, w ** np.maximum(e, 0), 1))
            rhs = q[a] * np.prod(np.where(e < 0, w ** np.maximum(-e, 0), 1))
            worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
        return worst

    def F(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        w = self.w(p)
        out = []
        for a in range(self.M.shape[1]):
            e = self.M[:, a]
            lhs = np.prod([w[i] ** e[i] for i in range(len(e)) if e[i] > 0])
            rhs = np.prod([w[i] ** -e[i] for i in range(len(e)) if e[i] < 0])
            out.append(lhs - q[a] * rhs)
        return np.array(out)

    def jac(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        w = self.w(p)
        m, r = self.M.shape
        J = np.zeros((r, r), dtype=complex)
        for a in range(r):
            e = self.M[:, a]
            pos = [(i, e[i]) for i in range(m) if e[i] > 0]
            neg = [(i, -e[i]) for i in range(m) if e[i] < 0]
            for part, scale in ((pos, 1.0), (neg, -q[a])):
                for i, k in part:
                    rest = np.prod([w[j] ** kk for j, kk in part if j != i])
                    J[a] += scale * k * w[i] ** (k - 1) * rest * self.M[i]
        return J


def batyrev_relations(basis: NefBasis) -> BatyrevSystem:
    M = np.array(basis.M, dtype=np.int64)
    degs = [int(max(M[:, a][M[:, a] > 0].sum(), (-M[:, a][M[:, a] < 0]).sum()))
            for a in range(M.shape[1])]
    return BatyrevSystem(M, degs)


def relation_strings(basis: NefBasis) -> list[str]:
    out = []
    for a in range(basis.r):
        fac = []
        for i in range(basis.inertia.m):
            e = basis.M[i][a]
            if e:
                w = "+".join(f"{basis.M[i][b]}*p{b + 1}" for b in range(basis.r) if basis.M[i][b])
                fac.append(f"({w})^{e}")
        out.append(f"q{a + 1} = " + "*".join(fac))
    return out


# ---------------------------------------------------------------------------
# homotopy continuation

def _track(sys: BatyrevSystem, q, start, G, Gj, gamma, max_norm=1e7):
    """Follow H(p,t) = (1−t)γG(p) + tF(p) from t=0 to t=1."""
    x = start.astype(complex)
    t, dt = 0.0, 0.02

    def H(x, t):
        return (1 - t) * gamma * G(x) + t * sys.F(x, q)

    def Hx(x, t):
        return (1 - t) * gamma * Gj(x) + t * sys.jac(x, q)

    def Ht(x, t):
        return sys.F(x, q) - gamma * G(x)

    steps = 0
    while t < 1.0:
        steps += 1
        if steps > 20000 or dt < 1e-12:
            return None
        h = min(dt, 1.0 - t)
        try:
            # RK4 predictor on dx/dt = −Hx^{-1} Ht
            def f(x, s):
                return -np.linalg.solve(Hx(x, s), Ht(x, s))
            k1 = f(x, t)
            k2 = f(x + h / 2 * k1, t + h / 2)
            k3 = f(x + h / 2 * k2, t + h / 2)
            k4 = f(x + h * k3, t + h)
            y = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            ok = False
            for _ in range(4):
                dy = np.linalg.solve(Hx(y, t + h), H(y, t + h))
                y = y - dy
                if np.linalg.norm(dy) <= 1e-10 * max(1.0, np.linalg.norm(y)):
                    ok = True
                    break
        except np.linalg.LinAlgError:
            ok = False
        if not ok or np.linalg.norm(y - x) > 0.3 * max(1.0, np.linalg.norm(x)):
            dt = h / 2
            continue
        x, t = y, t + h
        if np.linalg.norm(x) > max_norm:
            return None
        dt = min(2 * h, 0.05)
    return x


def _newton(sys: BatyrevSystem, q, x, iters=50):
    for _ in range(iters):
        try:
            dx = np.linalg.solve(sys.jac(x, q), sys.F(x, q))
        except np.linalg.LinAlgError:
            return x, False
        x = x - dx
        if np.linalg.norm(dx) <= 1e-15 * max(1.0, np.linalg.norm(x)):
            return x, True
    return x, np.linalg.norm(dx) <= 1e-12 * max(1.0, np.linalg.norm(x))


@dataclass
class CriticalPoint:
    p: np.ndarray
    w: np.ndarray
    value: complex
    log_hessian: np.ndarray
    multiplicity: int
    residual: float


@dataclass
class CriticalSet:
    q: tuple
    points: list
    expected: int
    paths: int

    @property
    def count(self) -> int:
        return sum(c.multiplicity for c in self.points)

    @property
    def max_residual(self) -> float:
        return max((c.residual for c in self.points), default=0.0)


def jacobi_critical_points(model: LGModel, q: Sequence, check: bool = True,
                           seed: int = SEED) -> CriticalSet:
    """All critical points of W_q on every component, via the Batyrev system."""
    basis = model.basis
    sys = batyrev_relations(basis)
    r = basis.r
    qv = np.array([complex(x) for x in q])
    rng = np.random.default_rng(seed)
    gamma = cmath.exp(2j * cmath.pi * rng.random())
    degs = sys.degrees
    if any(d == 0 for d in degs):
        raise SolverNoConvergence("a Batyrev relation has degree zero")

    def G(x):
        return np.array([x[a] ** degs[a] - 1 for a in range(r)])

    def Gj(x):
        return np.diag([degs[a] * x[a] ** (degs[a] - 1) for a in range(r)])

    ends = []
    for ks in product(*[range(d) for d in degs]):
        start = np.array([cmath.exp(2j * cmath.pi * k / d) for k, d in zip(ks, degs)])
        x = _track(sys, qv, start, G, Gj, gamma)
        if x is None:
            continue
        x, ok = _newton(sys, qv, x)
        w = sys.w(x)
        scale = max(1.0, float(np.abs(w).max()))
        if not ok or np.any(np.abs(w) < 1e-8 * scale):
            continue
        ends.append(x)
    clusters: list = []
    for x in ends:
        w = sys.w(x)
        for c in clusters:
            if np.max(np.abs(w / c[1] - 1)) < 1e-8:
                c[2] += 1
                break
        else:
            clusters.append([x, w, 1])
    B = np.array(model.b_free, dtype=float).reshape(model.m, model.n)
    points = []
    for x, w, mult in clusters:
        hess = (B.T * w) @ B
        points.append(CriticalPoint(x, w, complex(w.sum()), hess, mult, sys.residual(x, qv)))
    points.sort(key=lambda c: (round(c.value.real, 12), round(c.value.imag, 12)))
    expected = sum(R.dim for R in _rings(basis))
    out = CriticalSet(tuple(q), points, expected, int(prod(degs)))
    if check and out.count != expected:
        raise CountMismatch(f"{out.count} critical points, expected {expected}",
                            witness={"found": out.count, "expected": expected})
    return out


def _rings(basis: NefBasis):
    from .cohomology import OrbifoldCohomology
    return OrbifoldCohomology(basis).rings


# ---------------------------------------------------------------------------
# Newton polytope

def volume_rank_check(model: LGModel, dim_orb: Optional[int] = None) -> dict:
    """|N_tor| n! Vol(Δ̂), Δ̂ = conv{b_i}, against dim H*_orb.

    The sum over fan simplices is reported too; the two agree exactly when the
    rays lie on the boundary of a convex polytope (weak Fano case)."""
    inertia = model.basis.inertia
    fan_vol = 0
    for sigma in inertia.max_cones:
        fan_vol += abs(la.det([model.b_free[i] for i in sigma])) if sigma else 1
    hull_vol = normalized_volume(model.b_free, model.n)
    total = model.torsion_order * hull_vol
    if dim_orb is None:
        dim_orb = sum(R.dim for R in _rings(model.basis))
    if total != dim_orb:
        raise IdentityViolated(f"|N_tor| n! Vol = {total} but dim H*_orb = {dim_orb}",
                               witness=(int(total), int(dim_orb)))
    return {"n_factorial_volume": int(hull_vol), "fan_simplex_volume": int(fan_vol),
            "torsion_order": model.torsion_order, "product": int(total),
            "dim_orb": int(dim_orb), "ok": True}


def normalized_volume(points: Sequence[Sequence[int]], n: int) -> int:
    """n! Vol(conv(points)), exact: Delaunay simplices with integer determinants."""
    if n == 0:
        return 1
    if n == 1:
        xs = [p[0] for p in points]
        return max(xs) - min(xs)
    from scipy.spatial import Delaunay
    pts = np.array(points, dtype=float)
    tri = Delaunay(pts)
    total = Fraction(0)
    for simplex in tri.simplices:
        base = points[simplex[0]]
        rows = [[points[k][j] - base[j] for j in range(n)] for k in simplex[1:]]
        total += abs(la.det(rows))
    return int(total)


def polytope_faces(points: Sequence[Sequence[int]]) -> list[frozenset]:
    """Proper faces of conv(points) as sets of point indices (exact)."""
    pts = [list(map(Fraction, p)) for p in points]
    n = len(pts[0])
    if n == 0:
        return []
    facets = set()
    for S in combinations(range(len(pts)), n):
        base = pts[S[0]]
        rows = [[a - b for a, b in zip(pts[i], base)] for i in S[1:]]
        if rows and la.rank(rows) < n - 1:
            continue
        normal = la.kernel_basis(rows) if rows else [[Fraction(1)]]
        if len(normal) != 1:
            continue
        u = normal[0]
        h = sum(x * y for x, y in zip(u, base))
        vals = [sum(x * y for x, y in zip(u, p)) for p in pts]
        if all(v <= h for v in vals):
            facets.add(frozenset(i for i, v in enumerate(vals) if v == h))
        elif all(v >= h for v in vals):
            facets.add(frozenset(i for i, v in enumerate(vals) if v == h))
    faces = set(facets)
    frontier = set(facets)
    while frontier:
        new = set()
        for a in frontier:
            for b in facets:
                c = a & b
                if c and c not in faces:
                    new.add(c)
        faces |= new
        frontier = new
    return sorted(faces, key=lambda f: (-len(f), sorted(f)))


@dataclass
class FaceReport:
    face: tuple
    starts: int
    witness: Optional[tuple]


def kouchnirenko_face_check(model: LGModel, q: Sequence, samples: int = 100, log_q=None,
                            seed: int = SEED, tol: float = 1e-10,
                            raise_on_witness: bool = True) -> list[FaceReport]:
    """Search each proper face potential W_{q,Δ} for a torus critical point.

    Every proper face misses the origin, so W_Δ = y^{b_0} g with g depending
    only on the face directions; W_Δ is critical iff g = ∇g = 0 there."""
    faces = polytope_faces(model.b_free)
    rng = np.random.default_rng(seed)
    reports = []
    for comp in model.components():
        c = model.coefficients(q, log_q, comp)
        for face in faces:
            idx = sorted(face)
            alpha = _face_exponents([model.b_free[i] for i in idx])
            cf = c[idx]
            wit = None
            k = alpha.shape[1]
            for _ in range(samples if k else 0):
                t = rng.normal(size=k) + 1j * rng.normal(size=k)
                t, res = _face_newton(alpha, cf, t)
                if res < tol:
                    wit = (tuple(idx), comp, tuple(complex(x) for x in np.exp(t)))
                    break
            reports.append(FaceReport(tuple(idx), samples if k else 0, wit))
            if wit is not None and raise_on_witness:
                raise DegeneracyWitness(f"face {[i + 1 for i in idx]} has a critical point",
                                        witness=wit)
    return reports


def _face_exponents(pts) -> np.ndarray:
    """Coordinates of b_i − b_0 in a basis of the face directions."""
    diffs = [[Fraction(a - b) for a, b in zip(p, pts[0])] for p in pts]
    basis = []
    for d in diffs:
        if la.rank(basis + [d]) > len(basis):
            basis.append(d)
    if not basis:
        return np.zeros((len(pts), 0))
    # normal equations are exact here because every difference lies in the span
    G = [[sum(x * y for x, y in zip(u, v)) for v in basis] for u in basis]
    rows = [[float(c) for c in la.solve(G, [sum(x * y for x, y in zip(u, d)) for u in basis])]
            for d in diffs]
    return np.array(rows)


def _face_newton(alpha, cf, t, iters=80):
    """Gauss–Newton on (g, ∇g) / max|monomial|; returns (t, relative residual)."""
    res = np.inf
    with np.errstate(over="ignore", invalid="ignore"):
        return _face_newton_loop(alpha, cf, t, iters, res)


def _face_newton_loop(alpha, cf, t, iters, res):
    for _ in range(iters):
        mon = cf * np.exp(alpha @ t)
        s = np.abs(mon).max()
        if not np.isfinite(s) or s == 0:
            return t, np.inf
        F = np.concatenate([[mon.sum()], alpha.T @ mon]) / s
        J = np.vstack([alpha.T @ mon, (alpha.T * mon) @ alpha]) / s
        res = np.linalg.norm(F)
        if res < 1e-14:
            break
        step, *_ = np.linalg.lstsq(J, F, rcond=1e-12)
        t = t - step
    return t, res


# ---------------------------------------------------------------------------
# residue series of the compact cycle

def residue_series(model: LGModel, cap) -> dict:
    """Σ_{k ∈ ℤ≥0^m, Σk_ib_i = 0 in N} q^{Σk_iℓ_i} z^{−Σk_i} / ∏k_i!.

    Returns {q-exponent: (z power, coefficient)} for q-degree ≤ cap."""
    inertia = model.basis.inertia
    basis = model.basis
    cap = Fraction(cap)
    bound = int(cap * _rho_slope(basis)) + 1 if cap > 0 else 0
    out = {}
    m = model.m
    N = inertia.N

    def rec(prefix, left):
        if len(prefix) == m:
            free, tor = N.represent(prefix)
            if any(free) or any(tor):
                return
            qe = tuple(sum(k * model.ell[i][a] for i, k in enumerate(prefix))
                       for a in range(basis.r))
            if sum(qe) > cap:
                return
            coeff = Fraction(1, prod(factorial(k) for k in prefix))
            out[qe] = (-sum(prefix), coeff)
            return
        for k in range(left + 1):
            rec(prefix + [k], left - k)

    rec([], bound)
    return dict(sorted(out.items(), key=lambda kv: (sum(kv[0]), kv[0])))


def _rho_slope(basis: NefBasis) -> Fraction:
    """max ⟨ρ̂,d⟩ over d with Dd ≥ 0 and |d| = 1 (exact LP)."""
    inertia = basis.inertia
    D = inertia.data.D
    r, m = inertia.r, inertia.m
    A = [[D[i][a] for a in range(r)] + [-D[i][a] for a in range(r)]
         + [-int(k == i) for k in range(m)] for i in range(m)]
    deg = [sum(p[a] for p in basis.P) for a in range(r)]
    A.append(deg + [-x for x in deg] + [0] * m)
    c = list(basis.rho_hat) + [-x for x in basis.rho_hat] + [0] * m
    status, _, val = la.lp_maximize(c, A, [0] * m + [1])
    if status != "optimal":
        raise IdentityViolated("effective cone is unbounded in degree")
    return val


def evaluate_series(series: dict, q: Sequence, z, log_q=None) -> complex:
    import mpmath
    if log_q is None:
        log_q = [mpmath.log(mpmath.mpmathify(x)) for x in q]
    z = mpmath.mpmathify(z)
    total = mpmath.mpc(0)
    for qe, (k, c) in series.items():
        w = mpmath.exp(sum(mpmath.mpf(e.numerator) / e.denominator * lg
                           for e, lg in zip(qe, log_q)))
        total += w * z ** k * mpmath.mpf(c.numerator) / c.denominator
    return total
