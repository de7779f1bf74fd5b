"""Kloosterman sums, mod-4 classification, and the membership criterion."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftunital import (CyclotomicInt, FieldError, VerificationError,
                         classify_mod4, count_classes, kloosterman,
                         lambda_vanishes_mod2, make_atlas, make_char_field,
                         make_field, spectrum_size, square_spec,
                         thm_membership_criterion, trace)


def slow_kloosterman_counts(fld, a):
    """Direct trace histogram of x^-1 + a*x over the multiplicative group."""
    counts = [0] * fld.p
    for x in range(1, fld.n):
        counts[trace(fld, fld.add(fld.inv(x), fld.mul(a, x)))] += 1
    return tuple(counts)


def test_gf3_values():
    fld = make_field(3, 1)
    vals = [kloosterman(fld, a).value for a in range(3)]
    assert sorted(vals) == [-1, -1, 2]
    assert kloosterman(fld, 0).value == -1


@pytest.mark.parametrize("m", [1, 2, 3])
def test_matches_direct_sum(m):
    fld = make_field(3, m)
    for a in range(0, fld.n, max(1, fld.n // 9)):
        rec = kloosterman(fld, a)
        assert rec.cyclotomic.counts == slow_kloosterman_counts(fld, a)
        n0, n1, n2 = rec.cyclotomic.counts
        assert n1 == n2
        assert rec.value == n0 - n1


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_weil_bound_and_reality(m):
    fld = make_field(3, m)
    for a in range(fld.n):
        rec = kloosterman(fld, a)
        assert rec.value * rec.value <= 4 * fld.n
        assert rec.cyclotomic.is_real()
    assert kloosterman(fld, 0).value == -1


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_exchange_of_sums(m):
    fld = make_field(3, m)
    vals = [kloosterman(fld, a).value for a in range(fld.n)]
    assert sum(vals) == 0
    assert sum(vals[1:]) == 1


@pytest.mark.parametrize("m,counts", [(1, (0, 1)), (2, (3, 2)), (3, (10, 7)),
                                      (4, (33, 20))])
def test_class_counts(m, counts):
    got = count_classes(m)
    assert (got["count_b"], got["count_c"]) == counts
    assert got["count_a"] == 3**m - counts[0] - counts[1] - 1


@pytest.mark.parametrize("m", [1, 2, 3])
def test_classification_congruences(m):
    fld = make_field(3, m)
    tally = {"odd_square_trace": 0, "case_b": 0, "case_c": 0}
    for a in range(1, fld.n):
        tag, mod4, t = classify_mod4(fld, a)
        tally[tag] += 1
        k = kloosterman(fld, a).value
        assert k % 4 == mod4
        if tag == "odd_square_trace":
            assert k % 2 == 1
            assert t is None
        else:
            assert k % 2 == 0
            # the witness is a nontrivial root of t^2 - t^3 = a
            assert t not in (0, 1)
            t2 = fld.mul(t, t)
            assert fld.sub(t2, fld.mul(t2, t)) == a
    counts = count_classes(m)
    assert tally["case_b"] == counts["count_b"]
    assert tally["case_c"] == counts["count_c"]
    assert tally["odd_square_trace"] == counts["count_a"]


def test_cyclotomic_int_identities():
    zeta_plus_zeta2 = CyclotomicInt(3, (0, 1, 1))
    minus_one = CyclotomicInt(3, (-1, 0, 0))
    assert zeta_plus_zeta2 == minus_one
    assert hash(zeta_plus_zeta2) == hash(minus_one)
    assert (CyclotomicInt(3, (1, 2, 3)) + CyclotomicInt(3, (1, 1, 1))) == \
        CyclotomicInt(3, (2, 3, 4))
    assert CyclotomicInt(3, (5, 2, 2)).to_int() == 3
    with pytest.raises(FieldError):
        CyclotomicInt(3, (1, 2))


@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50),
       st.integers(-50, 50))
@settings(max_examples=100, deadline=None)
def test_cyclotomic_shift_invariance(a, b, c, k):
    assert CyclotomicInt(3, (a, b, c)) == CyclotomicInt(3, (a + k, b + k, c + k))
    assert CyclotomicInt(3, (a, b, b)).is_real()


def test_lambda_vanishes_mod2_matches_gf4_sum():
    fld = make_field(3, 2)
    cf = make_char_field(3)
    rng = np.random.default_rng(6)
    from shiftunital import chi_table
    tab = chi_table(cf, fld)
    for _ in range(300):
        vals = [int(x) for x in rng.integers(0, fld.n, rng.integers(1, 12))]
        acc = 0
        for x in vals:
            acc ^= tab[x]
        assert lambda_vanishes_mod2(fld, vals) == (acc == 0)


def test_atlas_format():
    fld = make_field(3, 2)
    atlas = make_atlas(fld)
    lines = atlas.splitlines()
    assert lines[0] == "# p=3 m=2 modulus=2,1,1"
    assert lines[1] == "a_index,K,K_mod4,case,t_witness"
    assert len(lines) == 2 + fld.n
    assert lines[2].startswith("0,-1,3,odd_square_trace,")
    assert make_atlas(fld) == atlas


def test_atlas_p5_degrades_gracefully():
    fld = make_field(5, 1)
    rec = kloosterman(fld, 2)
    assert isinstance(rec.value, CyclotomicInt)
    assert rec.value.is_real()
    assert rec.mod4 is None and rec.case_tag is None
    atlas = make_atlas(fld)
    for line in atlas.splitlines()[2:]:
        fields = line.split(",")
        assert fields[2] == fields[3] == fields[4] == ""
        assert ":" in fields[1]


def test_membership_criterion_validation(instances):
    tower, f, setup, design = instances[9, "square"]
    with pytest.raises(FieldError):
        thm_membership_criterion(setup, 1, 1, 1)
    with pytest.raises(FieldError):
        thm_membership_criterion(setup, 0, 0, 1)
    with pytest.raises(FieldError):
        thm_membership_criterion(setup, 1, 0, 0)


def test_membership_criterion_sound_q9(instances):
    tower, f, setup, design = instances[9, "square"]
    res = spectrum_size(setup, f)
    checked = met = 0
    for w in range(1, 9):
        for u in range(1, 9):
            for ch in ((u, 0, w), (0, u, w)):
                out = thm_membership_criterion(setup, *ch[:2], ch[2])
                checked += 1
                if out["criterion_met"]:
                    met += 1
                    assert res.member(*ch)
    assert checked == 2 * 8 * 8
    assert met == 64


def test_membership_criterion_sound_q3(instances):
    tower, f, setup, design = instances[3, "square"]
    res = spectrum_size(setup, f)
    for w in range(1, 3):
        for u in range(1, 3):
            for ch in ((u, 0, w), (0, u, w)):
                out = thm_membership_criterion(setup, *ch[:2], ch[2])
                if out["criterion_met"]:
                    assert res.member(*ch)
