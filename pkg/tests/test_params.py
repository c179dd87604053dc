import math

import pytest
from hypothesis import given, settings, strategies as st

from walkalloc import bounds, derive


def test_worked_example_dense():
    p = derive(2 ** 50, 4, 40)
    assert p.log_d_n == pytest.approx(25.0)
    assert p.gamma == pytest.approx(5.0)
    assert (p.k, p.delta, p.rho, p.h) == (8, 1, 150, 2)
    assert p.r_g == 1
    assert not p.degenerate


def test_small_l_degenerates():
    # log_d n = 25, l = 10: floor(10/5) = 2 < 4 so k = 4, delta = 0
    p = derive(2 ** 50, 4, 10)
    assert p.k == 4
    assert p.delta == 0
    assert p.degenerate
    assert p.rho is None and p.ndelta_threshold is None


def test_sparse_spacing_example():
    p = derive(2 ** 20, 3, 8, mode="sparse")
    # ceil(2 * log2(ln 2^20)) = ceil(2 * log2(13.8629)) = ceil(7.594) = 8
    assert p.r_g == 8
    assert p.gamma == pytest.approx(math.sqrt(p.log_d_n / 8))
    assert p.sparse_degree_ok is True


def test_rho_constant_variant():
    p6 = derive(2 ** 50, 4, 40, rho_constant=6)
    p8 = derive(2 ** 50, 4, 40, rho_constant=8)
    assert p6.rho == 150 and p8.rho == 200
    with pytest.raises(ValueError):
        derive(2 ** 50, 4, 40, rho_constant=7)


def test_preconditions():
    with pytest.raises(ValueError):
        derive(3, 3, 4)
    with pytest.raises(ValueError):
        derive(100, 2, 4)
    with pytest.raises(ValueError):
        derive(100, 3, 1)
    with pytest.raises(ValueError):
        derive(100, 3, 4, mode="medium")


def test_ndelta_thresholds():
    p = derive(2 ** 50, 4, 40)
    expect = 6 * math.log(2 ** 50) / math.log(3) / p.delta
    assert p.ndelta_threshold == pytest.approx(expect)
    assert p.ndelta_threshold_pb == pytest.approx(2 * expect)


def test_regime_partition_and_boundary():
    # gamma = 5: the boundary l = 20 belongs to regime II
    p = derive(2 ** 50, 4, 20)
    b = bounds(p)
    assert b.regime == "II"
    assert b.upper_bound == pytest.approx(
        math.log(math.log(2 ** 50)) / math.log(20 / 5))
    p_low = derive(2 ** 50, 4, 12)
    assert bounds(p_low).regime == "I"


def test_regime_I_lower_guide_value():
    # log_d n = 25, l = 10, r_g = 1: lower guide 25/100
    p = derive(2 ** 50, 4, 10)
    b = bounds(p)
    assert b.regime == "I"
    assert b.lower_bound == pytest.approx(0.25)
    assert not b.available  # delta = 0 at this l
    assert b.threshold_load is None


def test_gamma_note_emitted():
    p = derive(2 ** 50, 4, 5)  # l == gamma exactly
    b = bounds(p)
    assert b.note is not None and "lnln n" in b.note


def test_threshold_load_formula():
    p = derive(2 ** 50, 4, 40)
    b = bounds(p, c=3)
    assert b.threshold_load == p.h * p.rho + 3 + 1


@settings(max_examples=60, deadline=None)
@given(l=st.integers(2, 200), l2=st.integers(2, 200))
def test_k_monotone_in_l(l, l2):
    if l > l2:
        l, l2 = l2, l
    p1 = derive(2 ** 30, 8, l)
    p2 = derive(2 ** 30, 8, l2)
    assert p1.k <= p2.k


def test_delta_positive_for_l16_and_up():
    # floor(l/k) >= 4 is guaranteed at l >= 16 when k stays at its floor of 4;
    # when k grows as floor(l/gamma) the same holds once gamma >= 4
    for n, d in [(2 ** 40, 16), (2 ** 64, 16), (2 ** 50, 4)]:
        for l in range(16, 60):
            p = derive(n, d, l)
            if p.k == 4 or p.gamma >= 4:
                assert p.delta >= 1, (n, d, l, p.k, p.delta)


@settings(max_examples=40, deadline=None)
@given(n_exp=st.integers(4, 60), d=st.integers(3, 64), l=st.integers(2, 100))
def test_derive_is_pure_and_regime_total(n_exp, d, l):
    n = 2 ** n_exp
    if d >= n:
        return
    p1 = derive(n, d, l)
    p2 = derive(n, d, l)
    assert p1 == p2
    assert bounds(p1).regime in ("I", "II")
