import math

import mpmath
import pytest

from toricmirror.errors import ToleranceUnmet
from toricmirror.mirror_lg import build_lg, evaluate_series, residue_series
from toricmirror.oscint import (CONVENTIONS, QuadratureSpec, compact_cycle_integral,
                                real_thimble_integral, verify_mirror_identities, window_box)

from conftest import family


def model(name):
    return build_lg(family(name).basis)


def test_real_thimble_bessel():
    q = 0.01
    res = real_thimble_integral(model("P1"), [q], 1.0)
    ref = complex(2 * mpmath.besselk(0, 2 * mpmath.sqrt(q)) / (2j * mpmath.pi))
    assert abs(res.value - ref) / abs(ref) < 1e-10
    assert res.error < 1e-10 * abs(ref)


def test_real_thimble_is_real_before_normalization():
    res = real_thimble_integral(model("P2"), [0.01], 1.0)
    assert all(isinstance(h, float) for h in res.history)
    scaled = res.value * (2j * math.pi) ** 2
    assert abs(scaled.imag) < 1e-12 * abs(scaled)


@pytest.mark.parametrize("name,q", [("P1", [0.01]), ("P2", [0.01]), ("P12", [0.05]),
                                    ("P1xP1", [0.02, 0.02])])
def test_quadrature_converges_monotonically(name, q):
    res = real_thimble_integral(model(name), q, 1.0, QuadratureSpec(rtol=1e-13))
    diffs = [abs(b - a) for a, b in zip(res.history, res.history[1:])]
    floor = 1e-13 * abs(res.history[-1])
    for a, b in zip(diffs, diffs[1:]):
        if a > floor:
            assert b <= a / 4 or b <= floor


def test_window_contains_the_bulk():
    m = model("P2")
    c = m.coefficients([0.01]).real
    lo, hi = window_box(m, c, 1.0, QuadratureSpec())
    # the critical point on the positive locus sits inside the window
    t0 = math.log(0.01) / 3
    assert all(a < t0 < b for a, b in zip(lo, hi))


def test_dimension_guard():
    with pytest.raises(ToleranceUnmet):
        real_thimble_integral(model("P2"), [0.01], 1.0, QuadratureSpec(max_dim=1))


def test_thimble_needs_positive_data():
    with pytest.raises(ValueError):
        real_thimble_integral(model("P1"), [0.01], -1.0)


def test_compact_cycle_at_q_zero():
    for name in ("P1", "P2", "P12"):
        m = model(name)
        assert abs(compact_cycle_integral(m, [0.0] * m.basis.r, 1.0) - 1) < 1e-14


def test_compact_cycle_p1_bessel():
    q = mpmath.mpf("0.05")
    val = compact_cycle_integral(model("P1"), [0.05], 1.0)
    assert abs(val - complex(mpmath.besseli(0, 2 * mpmath.sqrt(q)))) < 1e-14


@pytest.mark.parametrize("name", ["P12", "G", "P122"])
def test_compact_cycle_matches_residue_series(name):
    m = model(name)
    q = [0.05] * m.basis.r
    torus = compact_cycle_integral(m, q, 1.0)
    res = evaluate_series(residue_series(m, 10), [mpmath.mpf("0.05")] * m.basis.r, -1)
    assert abs(torus - complex(res)) < 1e-12


@pytest.mark.parametrize("name", ["P1", "P12", "G"])
def test_compact_cycle_is_single_valued(name):
    m = model(name)
    lq = math.log(0.05)
    a = compact_cycle_integral(m, None, 1.0, log_q=[lq])
    b = compact_cycle_integral(m, None, 1.0, log_q=[lq + 2j * math.pi])
    assert abs(a - b) < 1e-10


@pytest.mark.parametrize("name,q,tol", [("P1", 0.01, 1e-6), ("P12", 0.05, 1e-5), ("P2", 0.01, 1e-5),
                                        ("G", 0.02, 1e-6)])
def test_verify_mirror(name, q, tol):
    f = family(name)
    rep = verify_mirror_identities(f.chern, build_lg(f.basis), [mpmath.mpf(q)], 1.0, 10, tol=tol)
    assert rep["ok"], rep
    assert rep["conventions"] == CONVENTIONS
