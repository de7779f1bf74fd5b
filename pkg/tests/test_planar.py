"""Planar function specs, planarity witnesses, and coordinate components."""
import numpy as np
import pytest

from shiftunital import (DesignError, FieldError, PlanarSpec, components,
                         coulter_matthews_spec, do_spec, evaluate, is_normal,
                         is_planar, make_field, make_tower, parse_do_table,
                         planarity_witness, registry_list, square_spec)


def shifted_square_spec(ext):
    """f(x) = x^2 + x: planar but not normal, for fallback-path tests."""
    xs = np.arange(ext.n)
    tbl = ext.vadd(ext.vpow(xs, 2), xs)
    return PlanarSpec(name="square-shifted", family="custom", field=ext,
                      table=tbl, param=None)


def cube_spec(ext):
    """f(x) = x^3 is additive in characteristic 3, hence never planar."""
    return PlanarSpec(name="cube", family="custom", field=ext,
                      table=ext.vpow(np.arange(ext.n), 3), param=None)


def test_square_spec_planar_and_normal(tower3, tower5, tower9):
    for tower in (tower3, tower5, tower9):
        f = square_spec(tower.ext)
        assert f.family == "square"
        assert is_planar(f)
        assert is_normal(f)
        xs = np.arange(tower.ext.n)
        assert np.array_equal(f.table, tower.ext.vmul(xs, xs))
        assert evaluate(f, 5) == tower.ext.mul(5, 5)


def test_coulter_matthews_gf81(tower9):
    f = coulter_matthews_spec(tower9.ext, 3)
    assert f.name == "cm3"
    assert f.param == 3
    assert is_planar(f)
    assert is_normal(f)
    # exponent (3^3 + 1) / 2 = 14
    xs = np.arange(tower9.ext.n)
    assert np.array_equal(f.table, tower9.ext.vpow(xs, 14))
    # the function differs from every scaled square, so the plane is new
    sq = square_spec(tower9.ext)
    assert not np.array_equal(f.table, sq.table)


def test_coulter_matthews_rejects_bad_k(tower9):
    with pytest.raises(FieldError):
        coulter_matthews_spec(tower9.ext, 2)


def test_cm_requires_char3(tower5):
    with pytest.raises(FieldError):
        coulter_matthews_spec(tower5.ext, 3)


def test_shifted_square_planar_not_normal(tower3):
    f = shifted_square_spec(tower3.ext)
    assert is_planar(f)
    assert not is_normal(f)


def test_cube_not_planar(tower3):
    f = cube_spec(tower3.ext)
    assert not is_planar(f)
    assert planarity_witness(f) == 1


def test_planarity_witness_none_for_planar(tower3):
    assert planarity_witness(square_spec(tower3.ext)) is None


def test_planarity_witness_sampled(tower9):
    f = cube_spec(tower9.ext)
    assert planarity_witness(f, sample=5, seed=0) is not None


def test_do_spec_square(tower3):
    ext = tower3.ext
    f = do_spec(ext, [(0, 0, 1)], name="do-square")
    assert np.array_equal(f.table, square_spec(ext).table)
    assert f.name == "do-square"


def test_do_spec_rejects_nonplanar(tower3):
    ext = tower3.ext
    # x^(3+3) = (x^2)^3 is a permuted square and stays planar, but
    # x^(1+3) + x^(3+1) = 2*x^4 has difference kernels; over GF(9) the
    # additive x^3 shape below is never planar
    with pytest.raises(DesignError):
        do_spec(ext, [(0, 1, 1), (0, 1, 1)])


def test_parse_do_table():
    entries = parse_do_table("# comment\n0 0 1\n\n1 0 2  # trailing\n")
    assert entries == [(0, 0, 1), (1, 0, 2)]
    with pytest.raises(FieldError):
        parse_do_table("0 0\n")
    with pytest.raises(FieldError):
        parse_do_table("a b c\n")


def test_do_spec_name_is_stable(tower3):
    ext = tower3.ext
    f1 = do_spec(ext, [(0, 0, 1)])
    f2 = do_spec(ext, [(0, 0, 1)])
    assert f1.name == f2.name
    assert f1.name.startswith("do-")


def test_components_split(tower9):
    f = square_spec(tower9.ext)
    comps = components(f, tower9)
    ext = tower9.ext
    for x in range(0, ext.n, 7):
        v = evaluate(f, x)
        assert (comps.f0[x], comps.f1[x]) == tower9.decompose(v)
    # for f = x^2: f0 = x0^2 + alpha*x1^2 and f1 = 2*x0*x1
    base = tower9.base
    x0 = tower9.dec0.astype(np.int64)
    x1 = tower9.dec1.astype(np.int64)
    want0 = base.vadd(base.vmul(x0, x0),
                      base.vmul(np.full(x0.shape, tower9.alpha), base.vmul(x1, x1)))
    two = base.element_from_int(2)
    want1 = base.vmul(np.full(x0.shape, two), base.vmul(x0, x1))
    assert np.array_equal(comps.f0, want0)
    assert np.array_equal(comps.f1, want1)


def test_components_wrong_tower(tower3, tower9):
    f = square_spec(tower9.ext)
    with pytest.raises(FieldError):
        components(f, tower3)


def test_registry_list(tower3, tower5, tower9):
    names3 = [f.name for f in registry_list(tower3.ext)]
    assert names3 == ["square"]
    names5 = [f.name for f in registry_list(tower5.ext)]
    assert names5 == ["square"]
    names9 = [f.name for f in registry_list(tower9.ext)]
    assert names9 == ["square", "cm3"]
    for f in registry_list(tower9.ext):
        assert is_planar(f)


def test_registry_list_gf729():
    tower = make_tower(make_field(3, 3))
    names = [f.name for f in registry_list(tower.ext)]
    assert names == ["square", "cm5"]
