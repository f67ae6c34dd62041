from fractions import Fraction as F

import mpmath
import pytest

from toricmirror.chern import KClass
from toricmirror.errors import BranchUnspecified, NotWeakFano, OutsideDomain
from toricmirror.hypergeom import (GKZOperator, HFunction, IFunction, central_charge,
                                   derivative_leading_check, evaluate_i, gkz_apply,
                                   gkz_annihilation_check, gkz_generators,
                                   galois_monodromy_check, h_point_series, i_function,
                                   mirror_map, positive_relation)
from toricmirror.mirror_lg import build_lg, residue_series

from conftest import WEAK_FANO, family


def test_i_coefficients_by_hand():
    # ℙ¹: 1/(p+z)² = z^{-2}(1 − 2p/z)
    assert IFunction(family("P1").coh).coefficient((F(1),)) == (0, {-2: [1, 0], -3: [0, -2]})
    # ℙ(1,2), d = 1/2: 1/((z/2)·z) on the twisted sector
    assert IFunction(family("P12").coh).coefficient((F(1, 2),)) == (1, {-2: [2]})
    # ℙ(1,2), d = 1: 1/((p+z)(2p+z)(2p+2z)) = (1/2z³)(1 − 4p/z)
    assert IFunction(family("P12").coh).coefficient((F(1),)) == (0, {-3: [F(1, 2), 0], -4: [0, -2]})


def test_i_off_k_vanishes():
    I = IFunction(family("P1xP1").coh)
    assert I.coefficient((F(-1), F(2)))[1] == {}


def test_i_leading_term_and_no_z0():
    for name in WEAK_FANO:
        I = i_function(family(name).coh, 3)
        for d in I.keys():
            v, L = I.terms[d]
            if all(x == 0 for x in d):
                assert L == {0: family(name).coh.rings[0].one()}
            else:
                assert 0 not in L and all(k < 0 for k in L), (name, d)


def test_not_weak_fano():
    with pytest.raises(NotWeakFano):
        IFunction(family("F3").coh)


@pytest.mark.parametrize("name,cap", [("P1", 6), ("P2", 6), ("P12", 4), ("P1xP1", 4),
                                      ("P112", 4), ("P112x", 4), ("P122", 4), ("P13", 4),
                                      ("G", 4), ("P135", 3)])
def test_gkz_annihilation(name, cap):
    reps = gkz_annihilation_check(family(name).coh, cap)
    assert reps and all(r.ok and r.checked > 0 for r in reps)


def test_gkz_operator_detects_wrong_series():
    # a perturbed coefficient is caught: 𝒫 applied to the true I is zero, but
    # its q^1 coefficient depends on the q^1 term of I
    f = family("P1")
    ifn = IFunction(f.coh)
    op = GKZOperator.of(f.basis, gkz_generators(f.basis)[0])
    assert gkz_apply(op, ifn, (F(1),))[1] == {}
    ifn._cache[(F(1),)] = (0, {-2: [2, 0]})
    assert gkz_apply(op, ifn, (F(1),))[1] != {}


def test_positive_relation():
    for name in ("P1xP1", "P112x"):
        B = family(name).basis
        pos = positive_relation(B)
        assert all(x > 0 for x in B.inertia.pairings(pos))


@pytest.mark.parametrize("name", ["P1", "P12", "P2", "P112", "P112x", "P1xP1", "G"])
def test_derivative_leading(name):
    for rec in derivative_leading_check(family(name).coh):
        assert rec["constant_is_unit"] and rec["negative_terms_vanish"], rec


def test_mirror_map_trivial():
    for name in ("P1", "P12", "P2", "P1xP1", "P112"):
        mm = mirror_map(family(name).coh, 5)
        assert mm.is_trivial(), name


def test_mirror_map_extended():
    f = family("P112x")
    mm = mirror_map(f.coh, 4)
    assert mm.frD[3] == f.coh.one_v(1)
    assert list(mm.corrections) == [f.basis.d_vee[3]]


def test_evaluate_i_p1_constant_term():
    f = family("P1")
    I = i_function(f.coh, 10)
    q, z = mpmath.mpf("0.01"), mpmath.mpf(1)
    val = evaluate_i(I, [q], z)
    # point restriction of I: Σ q^d / (d!)² z^{2d}
    ref = mpmath.besseli(0, 2 * mpmath.sqrt(q) / z)
    assert abs(val.sector(0)[0] - ref) < 1e-18


def test_branch_required_off_positive_axis():
    I = i_function(family("P1").coh, 2)
    with pytest.raises(BranchUnspecified):
        evaluate_i(I, [mpmath.mpf(-0.01)], 1)


def test_h_outside_domain():
    h = HFunction(family("P1").coh)
    with pytest.raises(OutsideDomain):
        h.evaluate([mpmath.mpf("0.5")], 1, 4)


@pytest.mark.parametrize("name", ["P1", "P12", "P2", "P1xP1", "P112", "P112x", "P122", "G"])
def test_point_restriction_equals_residue_series(name):
    f = family(name)
    assert h_point_series(f.coh, 8) == residue_series(build_lg(f.basis), 8)


@pytest.mark.parametrize("q,z", [("0.01", 1), ("0.05", 1), ("0.02", 2)])
def test_central_charges_p1(q, z):
    f = family("P1")
    ch = f.chern
    q, z = mpmath.mpf(q), mpmath.mpf(z)
    x = 2 * mpmath.sqrt(q) / z
    zo = central_charge(ch, KClass.line((0,)), [q], z, 14)
    assert abs(zo - 2 * mpmath.besselk(0, x) / (2j * mpmath.pi)) < 1e-20
    zp = central_charge(ch, ch.skyscraper(), [q], z, 14)
    assert abs(zp - mpmath.besseli(0, x)) < 1e-20


def test_central_charge_additive():
    ch = family("P12").chern
    q, z = [mpmath.mpf("0.05")], 1
    a, b = KClass.line((0,)), KClass.line((-1,))
    lhs = central_charge(ch, a + b, q, z, 10)
    rhs = central_charge(ch, a, q, z, 10) + central_charge(ch, b, q, z, 10)
    assert abs(lhs - rhs) < 1e-20


@pytest.mark.parametrize("name", ["P12", "P1xP1", "P13", "P112x"])
def test_galois_monodromy(name):
    f = family(name)
    for a in range(f.basis.r):
        xi = tuple(f.basis.P[a])
        rep = galois_monodromy_check(f.chern, xi, 4)
        assert rep["ok"] and rep["max_error"] < 1e-12
