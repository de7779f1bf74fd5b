"""Field towers, traces, characters, and quadratic form counts."""
import numpy as np
import pytest

from shiftunital import (FieldError, VerificationError, chi, chi_table,
                         construct_theta, default_modulus, make_char_field,
                         make_field, make_tower, quadratic_character,
                         quadratic_form_count, square_table, theta_setup, trace,
                         trace_table)


@pytest.mark.parametrize("p,m", [(3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (7, 1),
                                 (11, 1), (3, 4)])
def test_field_axioms_sampled(p, m):
    fld = make_field(p, m)
    assert fld.n == p**m
    rng = np.random.default_rng(0)
    a = rng.integers(0, fld.n, 200)
    b = rng.integers(0, fld.n, 200)
    c = rng.integers(0, fld.n, 200)
    assert np.array_equal(fld.vadd(a, b), fld.vadd(b, a))
    assert np.array_equal(fld.vmul(a, b), fld.vmul(b, a))
    left = fld.vmul(a, fld.vadd(b, c))
    right = fld.vadd(fld.vmul(a, b), fld.vmul(a, c))
    assert np.array_equal(left, right)
    assert np.array_equal(fld.vadd(a, fld.vneg(a)), np.zeros(200, dtype=a.dtype))
    # Frobenius is additive
    assert np.array_equal(fld.vpow(fld.vadd(a, b), p),
                          fld.vadd(fld.vpow(a, p), fld.vpow(b, p)))


def test_prime_field_is_integers_mod_p():
    fld = make_field(5, 1)
    i2e = [fld.element_from_int(c) for c in range(5)]
    e2i = {e: c for c, e in enumerate(i2e)}
    for a in range(5):
        for b in range(5):
            assert e2i[fld.add(i2e[a], i2e[b])] == (a + b) % 5
            assert e2i[fld.mul(i2e[a], i2e[b])] == (a * b) % 5


def test_default_modulus_is_primitive():
    for p, m in [(3, 1), (3, 2), (3, 3), (5, 1), (7, 1), (11, 1)]:
        mod = default_modulus(p, m)
        assert len(mod) == m + 1 and mod[-1] == 1
        fld = make_field(p, m, mod)
        g = int(fld.exp[1])
        seen = {1}
        cur = 1
        for _ in range(fld.n - 2):
            cur = fld.mul(cur, g)
            seen.add(cur)
        assert len(seen) == fld.n - 1


def test_exp_log_roundtrip():
    fld = make_field(3, 2)
    for x in range(1, fld.n):
        assert fld.exp[fld.log[x]] == x


def test_trace_balanced_and_frobenius_invariant():
    fld = make_field(3, 2)
    tt = trace_table(fld)
    assert np.array_equal(np.bincount(tt, minlength=3), [3, 3, 3])
    for x in range(fld.n):
        assert trace(fld, fld.pow(x, 3)) == trace(fld, x)
        assert tt[x] == trace(fld, x)


def test_trace_additive():
    fld = make_field(3, 3)
    rng = np.random.default_rng(1)
    # trace lands in the prime field and respects addition there
    for _ in range(200):
        a, b = (int(v) for v in rng.integers(0, fld.n, 2))
        s = trace(fld, fld.add(a, b))
        assert s == (trace(fld, a) + trace(fld, b)) % 3


def test_quadratic_character():
    for p, m in [(3, 1), (3, 2), (5, 1), (7, 1)]:
        fld = make_field(p, m)
        sq = square_table(fld)
        total = 0
        for x in range(1, fld.n):
            eta = quadratic_character(fld, x)
            assert eta in (-1, 1)
            assert (eta == 1) == bool(sq[x])
            total += eta
        assert total == 0
        assert quadratic_character(fld, 0) == 0
        for x in range(1, fld.n):
            assert quadratic_character(fld, fld.mul(x, x)) == 1


def test_quadratic_character_multiplicative():
    fld = make_field(3, 2)
    for a in range(1, fld.n):
        for b in range(1, fld.n):
            assert quadratic_character(fld, fld.mul(a, b)) == \
                quadratic_character(fld, a) * quadratic_character(fld, b)


def test_tower_structure():
    for p, m in [(3, 1), (3, 2), (5, 1), (7, 1)]:
        base = make_field(p, m)
        tower = make_tower(base)
        q = base.n
        ext = tower.ext
        assert ext.n == q * q
        # xi^q = -xi and alpha = xi^2 is a nonsquare of the base field
        assert ext.pow(tower.xi, q) == ext.neg(tower.xi)
        assert ext.mul(tower.xi, tower.xi) == tower.embed[tower.alpha]
        assert quadratic_character(base, tower.alpha) == -1
        for x in range(ext.n):
            x0, x1 = tower.decompose(x)
            assert tower.recompose(x0, x1) == x
        for a in range(q):
            assert tower.unembed[tower.embed[a]] == a
            assert tower.decompose(int(tower.embed[a])) == (a, 0)


def test_tower_decompose_additive():
    tower = make_tower(make_field(3, 2))
    ext = tower.ext
    rng = np.random.default_rng(2)
    for _ in range(200):
        x, y = (int(v) for v in rng.integers(0, ext.n, 2))
        s = ext.add(x, y)
        base = tower.base
        assert tower.decompose(s)[0] == base.add(*[tower.decompose(z)[0]
                                                   for z in (x, y)])
        assert tower.decompose(s)[1] == base.add(*[tower.decompose(z)[1]
                                                   for z in (x, y)])


def test_construct_theta_recipe():
    for p, m in [(3, 1), (3, 2), (3, 3), (5, 1), (7, 1), (11, 1)]:
        base = make_field(p, m)
        tower = make_tower(base)
        q = base.n
        setup = construct_theta(tower)
        ext = tower.ext
        if q % 4 == 1:
            assert setup.theta == tower.xi
            assert (setup.theta0, setup.theta1) == (0, 1)
        else:
            assert setup.theta1 == 1
            assert setup.theta == ext.add(tower.embed[setup.theta0], tower.xi)
            diff = base.sub(base.mul(setup.theta0, setup.theta0), tower.alpha)
            assert quadratic_character(base, diff) == -1
        # the norm theta^(q+1) must be a nonsquare of the base field
        norm = ext.pow(setup.theta, q + 1)
        assert quadratic_character(base, int(tower.unembed[norm])) == -1


def test_theta_setup_rejects_zero():
    tower = make_tower(make_field(3, 1))
    with pytest.raises(FieldError):
        theta_setup(tower, 0)


def test_char_field_gf4():
    cf = make_char_field(3)
    assert cf.e == 2
    # the cube roots of unity sum to 0 under xor, and eps has exact order 3
    eps = cf.eps
    assert eps != 1 and cf.pow(eps, 3) == 1
    assert 1 ^ eps ^ cf.mul(eps, eps) == 0
    assert cf.eps_pows == (1, eps, cf.mul(eps, eps))
    with pytest.raises(FieldError):
        make_char_field(2)


def test_chi_is_multiplicative_character_of_addition():
    cf = make_char_field(3)
    fld = make_field(3, 2)
    tab = chi_table(cf, fld)
    for x in range(fld.n):
        assert tab[x] == chi(cf, fld, x)
    rng = np.random.default_rng(3)
    for _ in range(200):
        a, b = (int(v) for v in rng.integers(0, fld.n, 2))
        assert chi(cf, fld, fld.add(a, b)) == cf.mul(tab[a], tab[b])
    assert tab[0] == 1


def test_quadratic_form_count_small():
    fld = make_field(3, 1)
    one = 1
    # x^2 = b: 1 solution for b = 0, 1 + eta(b) otherwise
    assert quadratic_form_count(fld, [[one]], 0) == 1
    # hyperbolic plane x*y via symmetric matrix [[0, h], [h, 0]]
    half = fld.inv(fld.element_from_int(2))
    n0 = quadratic_form_count(fld, [[0, half], [half, 0]], 0)
    assert n0 == 2 * 3 - 1


def test_quadratic_form_count_random():
    rng = np.random.default_rng(4)
    for q, p, m in [(3, 3, 1), (5, 5, 1)]:
        fld = make_field(p, m)
        for n in (1, 2, 3):
            done = 0
            while done < 20:
                mat = rng.integers(0, q, (n, n))
                form = [[int(mat[min(i, j), max(i, j)]) for j in range(n)]
                        for i in range(n)]
                try:
                    quadratic_form_count(fld, form, int(rng.integers(0, q)))
                except FieldError:
                    continue
                done += 1


def test_quadratic_form_count_rejects_bad_forms():
    fld = make_field(3, 1)
    with pytest.raises(FieldError):
        quadratic_form_count(fld, [[0, 1], [2, 0]], 0)
    with pytest.raises(FieldError):
        quadratic_form_count(fld, [[0, 0], [0, 0]], 0)


def test_make_field_rejects_reducible_modulus():
    with pytest.raises(FieldError):
        make_field(3, 2, (1, 2, 1))


def test_vpow_matches_pow():
    fld = make_field(3, 2)
    xs = np.arange(fld.n)
    for e in (0, 1, 2, 3, 7):
        want = np.array([fld.pow(int(x), e) for x in xs])
        assert np.array_equal(fld.vpow(xs, e), want)
