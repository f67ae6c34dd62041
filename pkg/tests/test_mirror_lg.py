import cmath
from fractions import Fraction as F
from math import factorial

import mpmath
import numpy as np
import pytest

from toricmirror.errors import CountMismatch, DegeneracyWitness, IdentityViolated
from toricmirror.mirror_lg import (build_lg, evaluate_series, jacobi_critical_points,
                                   kouchnirenko_face_check, normalized_volume, polytope_faces,
                                   relation_strings, residue_series, volume_rank_check)

from conftest import WEAK_FANO, family


def model(name):
    return build_lg(family(name).basis)


def test_p1_potential():
    m = model("P1")
    c = m.coefficients([0.04])
    assert sorted(np.round(c.real, 12)) == [0.04, 1.0]
    assert m.describe().count("+") == 1


def test_splitting_reproduces_p():
    for name in WEAK_FANO:
        f = family(name)
        m = build_lg(f.basis)
        D = f.inertia.data.D
        for a, p in enumerate(f.basis.P):
            assert [sum(m.ell[i][a] * D[i][x] for i in range(m.m)) for x in range(m.m - m.n)] == list(p)


@pytest.mark.parametrize("name,dim", [("P1", 2), ("P2", 3), ("P1xP1", 4), ("P12", 3), ("P112", 4),
                                      ("P112x", 4), ("P122", 5), ("P135", 9), ("G", 4)])
def test_volume_equals_rank(name, dim):
    rep = volume_rank_check(model(name))
    assert rep["product"] == rep["dim_orb"] == dim


def test_volume_rank_fails_off_weak_fano():
    with pytest.raises(IdentityViolated) as exc:
        volume_rank_check(model("F3"))
    assert exc.value.witness == (5, 4)


def test_normalized_volume():
    assert normalized_volume([[0, 0], [1, 0], [0, 1], [1, 1]], 2) == 2
    assert normalized_volume([[-1, -1], [1, 0], [0, 1]], 2) == 3
    assert normalized_volume([[2], [-3]], 1) == 5


def test_polytope_faces_square():
    faces = polytope_faces([[1, 0], [0, 1], [-1, 0], [0, -1]])
    assert sorted(len(f) for f in faces) == [1, 1, 1, 1, 2, 2, 2, 2]


def test_p1_critical_values():
    q = 0.01
    cs = jacobi_critical_points(model("P1"), [q])
    vals = sorted(c.value.real for c in cs.points)
    assert np.allclose(vals, [-2 * q ** 0.5, 2 * q ** 0.5], atol=1e-14)


@pytest.mark.parametrize("name", [k for k in WEAK_FANO if k != "P135"])
def test_critical_count(name):
    m = model(name)
    for q in (0.01, 0.003, 0.02):
        cs = jacobi_critical_points(m, [q] * m.basis.r)
        assert cs.count == cs.expected == family(name).coh.dimension
        assert cs.max_residual < 1e-10


def test_critical_points_are_critical():
    m = model("P2")
    q = [0.02]
    cs = jacobi_critical_points(m, q)
    c = m.coefficients(q)
    B = np.array(m.b_free, dtype=float)
    for pt in cs.points:
        # the 𝗐_i are the monomials c_i y^{b_i} at the critical point
        assert np.allclose(B.T @ pt.w, 0, atol=1e-12)
        assert abs(pt.value - pt.w.sum()) < 1e-14


def test_count_mismatch_off_weak_fano():
    with pytest.raises(CountMismatch):
        jacobi_critical_points(model("F3"), [0.02, 0.02])


def test_solver_is_reproducible():
    a = jacobi_critical_points(model("P112x"), [0.01, 0.02])
    b = jacobi_critical_points(model("P112x"), [0.01, 0.02])
    assert [p.value for p in a.points] == [p.value for p in b.points]


def test_relations_p2():
    assert len(relation_strings(family("P2").basis)) == 1


@pytest.mark.parametrize("name", ["P1", "P2", "P12", "P1xP1", "P112"])
def test_nondegenerate_at_small_q(name):
    m = model(name)
    reps = kouchnirenko_face_check(m, [0.01] * m.basis.r, samples=30)
    assert all(r.witness is None for r in reps)


def test_degenerate_face_found():
    # on the face through b1, b3, b4 the restricted potential of the extended
    # ℙ(1,1,2) mirror acquires a torus critical point at q = (4, 1)
    m = model("P112x")
    with pytest.raises(DegeneracyWitness) as exc:
        kouchnirenko_face_check(m, [4, 1], samples=60)
    assert exc.value.witness[0] == (0, 2, 3)


def test_residue_series_p1():
    s = residue_series(model("P1"), 6)
    assert s == {(F(k),): (-2 * k, F(1, factorial(k) ** 2)) for k in range(7)}


def test_residue_series_gerbe_skips_torsion():
    # Σ k_i b_i must vanish in N including its ℤ/2 part
    s = residue_series(model("G"), 4)
    assert all(qe[0].denominator == 1 for qe in s)


def test_evaluate_series():
    s = residue_series(model("P1"), 12)
    val = evaluate_series(s, [mpmath.mpf("0.05")], 1)
    assert abs(val - mpmath.besseli(0, 2 * mpmath.sqrt(mpmath.mpf("0.05")))) < 1e-25
