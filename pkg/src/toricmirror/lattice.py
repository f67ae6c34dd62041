"""Exact integer and rational linear algebra.

Smith normal form with transforms, cokernels with torsion, rational
Gaussian elimination, and cone membership by an exact simplex method
(Bland's rule, so pivoting is deterministic and never cycles).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

from .errors import RankDeficient

IntMatrix = tuple[tuple[int, ...], ...]
QVec = tuple[Fraction, ...]


def as_matrix(rows: Sequence[Sequence[int]]) -> IntMatrix:
    return tuple(tuple(int(x) for x in row) for row in rows)


def identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a, b):
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    return [[sum(a[i][k] * b[k][j] for k in range(inner)) for j in range(cols)]
            for i in range(len(a))]


def transpose(a):
    if not a:
        return []
    return [list(col) for col in zip(*a)]


# ---------------------------------------------------------------------------
# Smith normal form

@dataclass(frozen=True)
class SmithDecomposition:
    """M = U S V with U, V unimodular and S diagonal (d_1 | d_2 | ...)."""
    U: IntMatrix
    S: IntMatrix
    V: IntMatrix
    U_inv: IntMatrix
    V_inv: IntMatrix

    @property
    def diagonal(self) -> tuple[int, ...]:
        k = min(len(self.S), len(self.S[0]) if self.S else 0)
        return tuple(self.S[i][i] for i in range(k))


def smith_normal_form(M: Sequence[Sequence[int]]) -> SmithDecomposition:
    m = len(M)
    r = len(M[0]) if m else 0
    S = [list(map(int, row)) for row in M]
    U, Ui = identity(m), identity(m)
    V, Vi = identity(r), identity(r)

    # Each elementary move updates S and keeps M = U S V, plus the inverses.
    def row_swap(i, j):
        S[i], S[j] = S[j], S[i]
        Ui[i], Ui[j] = Ui[j], Ui[i]
        for row in U:
            row[i], row[j] = row[j], row[i]

    def row_add(i, j, c):  # row i += c * row j
        if c == 0:
            return
        S[i] = [a + c * b for a, b in zip(S[i], S[j])]
        Ui[i] = [a + c * b for a, b in zip(Ui[i], Ui[j])]
        for row in U:
            row[j] -= c * row[i]

    def row_neg(i):
        S[i] = [-a for a in S[i]]
        Ui[i] = [-a for a in Ui[i]]
        for row in U:
            row[i] = -row[i]

    def col_swap(i, j):
        for row in S:
            row[i], row[j] = row[j], row[i]
        for row in Vi:
            row[i], row[j] = row[j], row[i]
        V[i], V[j] = V[j], V[i]

    def col_add(i, j, c):  # col i += c * col j
        if c == 0:
            return
        for row in S:
            row[i] += c * row[j]
        for row in Vi:
            row[i] += c * row[j]
        V[j] = [a - c * b for a, b in zip(V[j], V[i])]

    for t in range(min(m, r)):
        while True:
            nz = [(abs(S[i][j]), i, j) for i in range(t, m) for j in range(t, r) if S[i][j]]
            if not nz:
                break
            _, pi, pj = min(nz)
            row_swap(t, pi)
            col_swap(t, pj)
            done = True
            for i in range(t + 1, m):
                q = S[i][t] // S[t][t]
                row_add(i, t, -q)
                if S[i][t]:
                    done = False
            for j in range(t + 1, r):
                q = S[t][j] // S[t][t]
                col_add(j, t, -q)
                if S[t][j]:
                    done = False
            if not done:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, r)
                        if S[i][j] % S[t][t]), None)
            if bad is None:
                break
            row_add(t, bad[0], 1)
        if t < m and t < r and S[t][t] < 0:
            row_neg(t)

    return SmithDecomposition(as_matrix(U), as_matrix(S), as_matrix(V),
                              as_matrix(Ui), as_matrix(Vi))


def hermite_rows(B: Sequence[Sequence[int]]):
    """Row-style Hermite normal form: returns (H, T) with H = T B, T unimodular.

    Pivots are positive and entries above a pivot are reduced into [0, pivot).
    """
    H = [list(map(int, row)) for row in B]
    n = len(H)
    cols = len(H[0]) if n else 0
    T = identity(n)
    prow = 0
    for c in range(cols):
        if prow >= n:
            break
        # gcd-reduce column c below prow
        while True:
            nz = [(abs(H[i][c]), i) for i in range(prow, n) if H[i][c]]
            if not nz:
                break
            _, i0 = min(nz)
            H[prow], H[i0] = H[i0], H[prow]
            T[prow], T[i0] = T[i0], T[prow]
            clean = True
            for i in range(prow + 1, n):
                q = H[i][c] // H[prow][c]
                if q:
                    H[i] = [a - q * b for a, b in zip(H[i], H[prow])]
                    T[i] = [a - q * b for a, b in zip(T[i], T[prow])]
                if H[i][c]:
                    clean = False
            if clean:
                break
        if H[prow][c] == 0:
            continue
        if H[prow][c] < 0:
            H[prow] = [-a for a in H[prow]]
            T[prow] = [-a for a in T[prow]]
        p = H[prow][c]
        for i in range(prow):
            q = H[i][c] // p
            if q:
                H[i] = [a - q * b for a, b in zip(H[i], H[prow])]
                T[i] = [a - q * b for a, b in zip(T[i], T[prow])]
        prow += 1
    return H, T


# ---------------------------------------------------------------------------
# Finitely generated abelian groups

@dataclass(frozen=True)
class FinAbGroup:
    """ℤ^m / im(M) presented as ℤ^n ⊕ ⊕ ℤ/t_j.

    `proj` maps ambient coordinates to the free part, `tproj` rows give the
    torsion coordinates (reduced mod t_j).
    """
    rank: int
    torsion: tuple[int, ...]
    proj: IntMatrix
    tproj: IntMatrix
    ambient: int

    @property
    def torsion_order(self) -> int:
        out = 1
        for t in self.torsion:
            out *= t
        return out

    def represent(self, x: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
        free = tuple(sum(a * b for a, b in zip(row, x)) for row in self.proj)
        tor = tuple(sum(a * b for a, b in zip(row, x)) % t
                    for row, t in zip(self.tproj, self.torsion))
        return free, tor

    def images(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        m = self.ambient
        return [self.represent([int(i == j) for j in range(m)]) for i in range(m)]

    def reduce(self, elem):
        free, tor = elem
        return tuple(free), tuple(a % t for a, t in zip(tor, self.torsion))


def cokernel(M: Sequence[Sequence[int]]) -> FinAbGroup:
    m = len(M)
    r = len(M[0]) if m else 0
    snf = smith_normal_form(M)
    diag = snf.diagonal
    if any(d == 0 for d in diag) or len(diag) < r:
        raise RankDeficient("columns of the weight matrix are linearly dependent",
                            witness=diag)
    Ui = [list(row) for row in snf.U_inv]
    free_rows = Ui[r:]
    tors = [(d, Ui[k]) for k, d in enumerate(diag) if d > 1]
    # canonical coordinates on the free part
    if free_rows:
        _, T = hermite_rows(free_rows)
        free_rows = matmul(T, free_rows)
    tproj = tuple(tuple(row) for _, row in tors)
    return FinAbGroup(m - r, tuple(d for d, _ in tors), as_matrix(free_rows), tproj, m)


# ---------------------------------------------------------------------------
# Rational linear algebra

def qvec(xs) -> QVec:
    return tuple(Fraction(x) for x in xs)


def rref(A):
    """Reduced row echelon form over ℚ; returns (R, pivot columns)."""
    R = [[Fraction(x) for x in row] for row in A]
    rows = len(R)
    cols = len(R[0]) if rows else 0
    piv = []
    pr = 0
    for c in range(cols):
        p = next((i for i in range(pr, rows) if R[i][c] != 0), None)
        if p is None:
            continue
        R[pr], R[p] = R[p], R[pr]
        inv = 1 / R[pr][c]
        R[pr] = [x * inv for x in R[pr]]
        for i in range(rows):
            if i != pr and R[i][c] != 0:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[pr])]
        piv.append(c)
        pr += 1
        if pr == rows:
            break
    return R, piv


def rank(A) -> int:
    if not A:
        return 0
    return len(rref(A)[1])


def det(A) -> Fraction:
    n = len(A)
    R = [[Fraction(x) for x in row] for row in A]
    out = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if R[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            R[c], R[p] = R[p], R[c]
            out = -out
        out *= R[c][c]
        for i in range(c + 1, n):
            if R[i][c]:
                f = R[i][c] / R[c][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[c])]
    return out


def inverse(A):
    n = len(A)
    aug = [list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(A)]
    R, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise RankDeficient("singular matrix")
    return [row[n:] for row in R]


def solve(A, b) -> Optional[QVec]:
    """Some rational solution of A x = b (free variables set to 0), or None."""
    rows = len(A)
    cols = len(A[0]) if rows else 0
    R, piv = rref([list(A[i]) + [b[i]] for i in range(rows)])
    if cols in piv:
        return None
    x = [Fraction(0)] * cols
    for i, c in enumerate(piv):
        x[c] = R[i][cols]
    return tuple(x)


def kernel_basis(A) -> list[QVec]:
    rows = len(A)
    cols = len(A[0]) if rows else 0
    R, piv = rref(A) if rows else ([], [])
    free = [c for c in range(cols) if c not in piv]
    out = []
    for f in free:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for i, c in enumerate(piv):
            v[c] = -R[i][f]
        out.append(tuple(v))
    return out


def lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b) if a and b else max(a, b)


# ---------------------------------------------------------------------------
# Exact linear programming

def lp_maximize(c, A_eq, b_eq):
    """Maximize c·x subject to A_eq x = b_eq, x ≥ 0, over ℚ.

    Returns (status, x, value) with status in {"optimal", "infeasible",
    "unbounded"}. Two-phase tableau simplex with Bland's rule.
    """
    nv = len(c)
    rows = [[Fraction(a) for a in row] for row in A_eq]
    rhs = [Fraction(v) for v in b_eq]
    for i in range(len(rows)):
        if rhs[i] < 0:
            rows[i] = [-a for a in rows[i]]
            rhs[i] = -rhs[i]
    nr = len(rows)
    # tableau columns: x (nv), artificials (nr), rhs
    T = [rows[i] + [Fraction(int(i == k)) for k in range(nr)] + [rhs[i]] for i in range(nr)]
    basis = [nv + i for i in range(nr)]
    ncol = nv + nr

    def pivot(pr, pc):
        inv = 1 / T[pr][pc]
        T[pr] = [v * inv for v in T[pr]]
        for i in range(len(T)):
            if i != pr and T[i][pc] != 0:
                f = T[i][pc]
                T[i] = [a - f * b for a, b in zip(T[i], T[pr])]
        basis[pr] = pc

    def run(obj, allowed):
        # obj: coefficients to maximize over columns; reduced costs recomputed each step
        while True:
            cb = [obj[b] for b in basis]
            enter = None
            for j in allowed:
                if j in basis:
                    continue
                red = obj[j] - sum(cb[i] * T[i][j] for i in range(len(T)))
                if red > 0:
                    enter = j
                    break
            if enter is None:
                return "optimal"
            best = None
            for i in range(len(T)):
                if T[i][enter] > 0:
                    ratio = T[i][-1] / T[i][enter]
                    if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                        best = (ratio, i)
            if best is None:
                return "unbounded"
            pivot(best[1], enter)

    phase1 = [Fraction(0)] * nv + [Fraction(-1)] * nr
    run(phase1, range(ncol))
    if sum(T[i][-1] for i in range(nr) if basis[i] >= nv) != 0:
        return "infeasible", None, None
    # drive artificials out of the basis
    for i in range(nr):
        if basis[i] >= nv:
            j = next((j for j in range(nv) if T[i][j] != 0), None)
            if j is not None:
                pivot(i, j)
    keep = [i for i in range(nr) if basis[i] < nv]
    T[:] = [T[i] for i in keep]
    basis[:] = [basis[i] for i in keep]
    obj = [Fraction(x) for x in c] + [Fraction(0)] * nr
    status = run(obj, range(nv))
    if status == "unbounded":
        return "unbounded", None, None
    x = [Fraction(0)] * nv
    for i, b in enumerate(basis):
        x[b] = T[i][-1]
    return "optimal", tuple(x), sum(Fraction(ci) * xi for ci, xi in zip(c, x))


@dataclass(frozen=True)
class RationalCone:
    generators: tuple[QVec, ...]
    dim: int

    @classmethod
    def of(cls, gens, dim: int) -> "RationalCone":
        return cls(tuple(qvec(g) for g in gens), dim)


def cone_contains(cone: RationalCone, x, strict: bool = False) -> Optional[QVec]:
    """Coefficients c ≥ 0 (c > 0 if strict) with Σ c_i g_i = x, or None."""
    x = qvec(x)
    k = len(cone.generators)
    d = cone.dim
    if k == 0:
        return () if all(v == 0 for v in x) else None
    G = [[cone.generators[j][i] for j in range(k)] for i in range(d)]
    if not strict:
        status, sol, _ = lp_maximize([0] * k, G, x)
        return sol if status == "optimal" else None
    # c = t·1 + c', maximize t with t ≤ 1
    A = [[sum(row)] + row + [0] for row in G]
    A.append([1] + [0] * k + [1])
    b = list(x) + [1]
    status, sol, val = lp_maximize([1] + [0] * (k + 1), A, b)
    if status != "optimal" or val <= 0:
        return None
    t = sol[0]
    return tuple(t + sol[1 + j] for j in range(k))
