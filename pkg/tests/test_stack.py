from fractions import Fraction as F

import pytest

from toricmirror import lattice as la
from toricmirror.errors import (ConditionAViolated, ConditionBViolated, ConditionCViolated,
                                NotInK, NotWeakFano, UserBasisInvalid)
from toricmirror.stack import (StackInitialData, select_nef_basis, validate,
                               weak_fano_check)

from conftest import family


def box_table(name):
    return [(s.d, s.age, s.n_v, sorted(s.support), s.inv) for s in family(name).inertia.box]


def test_p1_is_a_manifold():
    X = family("P1").inertia
    assert X.minimal_anticones == [(0,), (1,)]
    assert box_table("P1") == [((F(0),), 0, 1, [0, 1], 0)]
    assert X.m_prime == 2 and X.redundant == ()


def test_p12_box():
    assert box_table("P12") == [((F(0),), 0, 1, [0, 1], 0), ((F(1, 2),), F(1, 2), 0, [1], 1)]


def test_p13_box_inverse_pairs():
    rows = box_table("P13")
    assert [r[1] for r in rows] == [0, F(1, 3), F(2, 3)]
    # v(1/3) and v(2/3) are mutually inverse
    assert [r[4] for r in rows] == [0, 2, 1]


def test_p135_ages():
    X = family("P135").inertia
    ages = sorted((s.d[0], s.age) for s in X.box)
    # age(d) = Σ{−⟨D_i,d⟩}
    for d, age in ages:
        assert age == sum(((-w * d) % 1 for w in (1, 3, 5)), F(0))
    assert [d for d, _ in ages] == [F(0), F(1, 5), F(1, 3), F(2, 5), F(3, 5), F(2, 3), F(4, 5)]


def test_gerbe_has_torsion():
    X = family("G").inertia
    assert X.N.torsion == (2,)
    assert [s.age for s in X.box] == [0, 0]
    assert [s.n_v for s in X.box] == [1, 1]


def test_extended_p112():
    f = family("P112x")
    X = f.inertia
    assert X.redundant == (3,) and X.m_prime == 3
    assert [s.age for s in X.box] == [0, 1]
    assert f.basis.d_vee[3] == (F(-1, 2), F(0))
    wf = weak_fano_check(f.basis)
    assert wf["weak_fano"] and wf["extra_ray_ages"] == {4: "1"}


def test_condition_a():
    with pytest.raises(ConditionAViolated):
        validate(StackInitialData.make([[1], [1]], [-1]))


def test_condition_b():
    with pytest.raises(ConditionBViolated):
        validate(StackInitialData.make([[1, 0], [0, 1], [1, 1]], [1, 1]))


def test_condition_c():
    with pytest.raises(ConditionCViolated) as exc:
        validate(StackInitialData.make([[1], [-1]], [1]))
    assert exc.value.witness == [1, 1]


def test_nef_basis_is_unimodular_and_nef():
    for name in ("P1", "P2", "P1xP1", "P112", "P122"):
        B = family(name).basis
        assert all(x >= 0 for x in B.rho)
        assert abs(la.det(B.P)) == 1
        # D_i = Σ_a m_ia p_a
        for i, row in enumerate(B.M):
            assert B.from_coords(row) == tuple(B.inertia.data.D[i])


def test_user_basis():
    X = family("P1xP1").inertia
    assert select_nef_basis(X, [[1, 1], [0, 1]]).P == ((1, 1), (0, 1))
    for bad in ([[1, -1], [0, 1]], [[2, 0], [0, 1]]):
        with pytest.raises(UserBasisInvalid):
            select_nef_basis(X, bad)


def test_not_weak_fano():
    X = family("F3").inertia
    with pytest.raises(NotWeakFano):
        select_nef_basis(X, weak_fano=True)


def test_keff_p12():
    B = family("P12").basis
    assert B.keff(2) == [(F(k, 2),) for k in range(5)]


def test_keff_is_sorted_by_degree():
    B = family("P112x").basis
    ds = B.keff(3)
    degs = [B.degree(d) for d in ds]
    assert degs == sorted(degs) and max(degs) <= 3


def test_sector_of_off_k():
    X = family("P1xP1").inertia
    with pytest.raises(NotInK):
        X.sector_of((F(1, 2), F(0)))
