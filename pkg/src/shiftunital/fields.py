"""Arithmetic contexts for GF(p^m), quadratic extension towers, and the GF(2^e) character codomain.

Elements of GF(p^m) are integers in range(p**m): the index encodes the coefficient
vector of the element in base p, least significant digit = constant coefficient.
All contexts are immutable after construction and safe to share across threads.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import FieldError, VerificationError

# Dense n x n add/mul tables are built lazily up to this field size; larger
# fields fall back to Zech logarithms for addition and log/antilog for products.
_TABLE_LIMIT = 3**8


def _factorize(n: int) -> list[int]:
    """Distinct prime factors of n by trial division."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


# ---------------------------------------------------------------------------
# Polynomial helpers over GF(p).  Coefficient lists, index 0 = constant term.
# ---------------------------------------------------------------------------

def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mul(a: list[int], b: list[int], p: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _poly_trim(out)


def _poly_mod(a: list[int], mod: list[int], p: int) -> list[int]:
    """Remainder of a by monic mod."""
    a = list(a)
    dm = len(mod) - 1
    while len(a) - 1 >= dm and a:
        lead = a[-1]
        if lead:
            shift = len(a) - 1 - dm
            for i, c in enumerate(mod):
                a[shift + i] = (a[shift + i] - lead * c) % p
        a.pop()
    return _poly_trim(a)


def _poly_mulmod(a: list[int], b: list[int], mod: list[int], p: int) -> list[int]:
    return _poly_mod(_poly_mul(a, b, p), mod, p)


def _poly_powmod(a: list[int], e: int, mod: list[int], p: int) -> list[int]:
    result = [1]
    base = _poly_mod(list(a), mod, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, mod, p)
        base = _poly_mulmod(base, base, mod, p)
        e >>= 1
    return result


def _is_irreducible(poly: list[int], p: int) -> bool:
    """Exhaustive trial division by every monic polynomial of degree <= deg/2."""
    deg = len(poly) - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for tail in itertools.product(range(p), repeat=d):
            div = list(tail) + [1]
            if not _poly_mod(poly, div, p):
                return False
    return True


def _root_is_primitive(poly: list[int], p: int) -> bool:
    """Whether the class of y generates the multiplicative group of GF(p)[y]/(poly)."""
    m = len(poly) - 1
    order = p**m - 1
    y = [0, 1]
    if _poly_powmod(y, order, poly, p) != [1]:
        return False
    for r in _factorize(order):
        if _poly_powmod(y, order // r, poly, p) == [1]:
            return False
    return True


def default_modulus(p: int, m: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree m over GF(p) whose root is primitive.

    Coefficients are compared low-degree-first; falls back to the smallest
    irreducible if no candidate has a primitive root (cannot happen for prime p).
    """
    fallback = None
    for tail in itertools.product(range(p), repeat=m):
        poly = list(tail) + [1]
        if not _is_irreducible(poly, p):
            continue
        if fallback is None:
            fallback = poly
        if _root_is_primitive(poly, p):
            return tuple(poly)
    if fallback is None:
        raise FieldError(f"no irreducible polynomial of degree {m} over GF({p})")
    return tuple(fallback)


# ---------------------------------------------------------------------------
# GF(p^m) context
# ---------------------------------------------------------------------------

class FieldCtx:
    """Tables and scalar/vector arithmetic for GF(p^m) on integer element indices."""

    def __init__(self, p: int, m: int, modulus: tuple[int, ...]):
        if not _is_prime(p) or p == 2:
            raise FieldError(f"p must be an odd prime, got {p}")
        if m < 1:
            raise FieldError(f"extension degree must be positive, got {m}")
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != m + 1 or modulus[-1] != 1:
            raise FieldError(f"modulus must be monic of degree {m}, got {modulus}")
        if not _is_irreducible(list(modulus), p):
            raise FieldError(f"modulus {modulus} is reducible over GF({p})")
        self.p = p
        self.m = m
        self.n = p**m
        self.modulus = modulus

        n = self.n
        self._pows = np.array([p**i for i in range(m)], dtype=np.int64)
        digits = np.empty((n, m), dtype=np.int16)
        idx = np.arange(n)
        for i in range(m):
            digits[:, i] = (idx // int(self._pows[i])) % p
        self._digits = digits

        self.omega = self._find_primitive()
        self.exp, self.log = self._build_logs()
        # exp doubled so products of two logs index without a modulo
        self._exp2 = np.concatenate([self.exp, self.exp])
        self.neg_table = self._encode((p - digits) % p)
        self._add_tbl: np.ndarray | None = None
        self._mul_tbl: np.ndarray | None = None
        self._zech: np.ndarray | None = None
        if n > _TABLE_LIMIT:
            self._zech = self._build_zech()
        self._add_rows: list[list[int]] | None = None
        self._mul_rows: list[list[int]] | None = None

    # -- construction internals -------------------------------------------

    def _encode(self, digit_rows: np.ndarray) -> np.ndarray:
        return (digit_rows.astype(np.int64) @ self._pows).astype(np.int32)

    def coeffs(self, a: int) -> tuple[int, ...]:
        """Coefficient vector of element a, constant term first."""
        return tuple(int(c) for c in self._digits[a])

    def _mul_bootstrap(self, a: int, b: int) -> int:
        pa = _poly_trim([int(c) for c in self._digits[a]])
        pb = _poly_trim([int(c) for c in self._digits[b]])
        prod = _poly_mulmod(pa, pb, list(self.modulus), self.p)
        idx = 0
        for i, c in enumerate(prod):
            idx += c * int(self._pows[i])
        return idx

    def _pow_bootstrap(self, a: int, e: int) -> int:
        result = 1
        while e:
            if e & 1:
                result = self._mul_bootstrap(result, a)
            a = self._mul_bootstrap(a, a)
            e >>= 1
        return result

    def _find_primitive(self) -> int:
        order = self.n - 1
        primes = _factorize(order)
        for g in range(2, self.n):
            if all(self._pow_bootstrap(g, order // r) != 1 for r in primes):
                return g
        raise FieldError("no primitive element found")  # pragma: no cover

    def _build_logs(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.n
        exp = np.empty(n - 1, dtype=np.int32)
        log = np.full(n, -1, dtype=np.int64)
        x = 1
        for k in range(n - 1):
            exp[k] = x
            log[x] = k
            x = self._mul_bootstrap(x, self.omega)
        if x != 1:
            raise FieldError("primitive element has wrong order")  # pragma: no cover
        return exp, log

    def _build_zech(self) -> np.ndarray:
        """zech[k] = log(1 + omega^k), or -1 when 1 + omega^k = 0."""
        succ = self._encode((self._digits[self.exp] + self._digits[1]) % self.p)
        return self.log[succ].astype(np.int64)

    def _ensure_add_table(self) -> np.ndarray:
        if self._add_tbl is None:
            if self.n > _TABLE_LIMIT:
                raise FieldError(f"dense tables disabled for field size {self.n}")
            n = self.n
            d = self._digits
            dtype = np.int16 if n < 2**15 else np.int32
            tbl = np.empty((n, n), dtype=dtype)
            step = max(1, 2**22 // n)
            for lo in range(0, n, step):
                hi = min(lo + step, n)
                tbl[lo:hi] = ((d[lo:hi, None, :] + d[None, :, :]) % self.p @ self._pows).astype(dtype)
            self._add_tbl = tbl
        return self._add_tbl

    def _ensure_mul_table(self) -> np.ndarray:
        if self._mul_tbl is None:
            if self.n > _TABLE_LIMIT:
                raise FieldError(f"dense tables disabled for field size {self.n}")
            n = self.n
            dtype = np.int16 if n < 2**15 else np.int32
            tbl = np.zeros((n, n), dtype=dtype)
            step = max(1, 2**22 // n)
            for lo in range(1, n, step):
                hi = min(lo + step, n)
                tbl[lo:hi, 1:] = self._exp2[self.log[lo:hi, None] + self.log[None, 1:]].astype(dtype)
            self._mul_tbl = tbl
        return self._mul_tbl

    # -- scalar arithmetic --------------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.n <= _TABLE_LIMIT:
            return int(self._ensure_add_table()[a, b])
        if a == 0:
            return int(b)
        if b == 0:
            return int(a)
        la, lb = int(self.log[a]), int(self.log[b])
        z = int(self._zech[(lb - la) % (self.n - 1)])
        if z < 0:
            return 0
        return int(self.exp[(la + z) % (self.n - 1)])

    def neg(self, a: int) -> int:
        return int(self.neg_table[a])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, int(self.neg_table[b]))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self._exp2[int(self.log[a]) + int(self.log[b])])

    def inv(self, a: int) -> int:
        if a == 0:
            raise FieldError("division by zero")
        return int(self.exp[(-int(self.log[a])) % (self.n - 1)])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            if e == 0:
                return 1
            if e < 0:
                raise FieldError("zero to a negative power")
            return 0
        return int(self.exp[(int(self.log[a]) * e) % (self.n - 1)])

    def element_from_int(self, c: int) -> int:
        """Image of the rational integer c in the prime subfield."""
        return c % self.p

    # -- vector arithmetic on numpy index arrays -----------------------------

    def vadd(self, a, b):
        if self.n <= _TABLE_LIMIT:
            return self._ensure_add_table()[a, b].astype(np.int32)
        s = (self._digits[a].astype(np.int32) + self._digits[b]) % self.p
        return self._encode(s)

    def vneg(self, a):
        return self.neg_table[a].astype(np.int32)

    def vsub(self, a, b):
        return self.vadd(a, self.neg_table[b])

    def vmul(self, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        out = self._exp2[self.log[a] + self.log[b]].astype(np.int32)
        if a.ndim == 0 and b.ndim == 0:
            if a == 0 or b == 0:
                return np.int32(0)
            return out

        zero = (a == 0) | (b == 0)
        return np.where(zero, 0, out)

    def vpow(self, a, e: int):
        a = np.asarray(a)
        out = self.exp[(self.log[a] * e) % (self.n - 1)].astype(np.int32)
        return np.where(a == 0, 0 if e else 1, out)

    # -- cached python-list tables for tight scalar loops --------------------

    def add_rows(self) -> list[list[int]]:
        if self._add_rows is None:
            self._add_rows = [[int(v) for v in row] for row in self._ensure_add_table()]
        return self._add_rows

    def mul_rows(self) -> list[list[int]]:
        if self._mul_rows is None:
            self._mul_rows = [[int(v) for v in row] for row in self._ensure_mul_table()]
        return self._mul_rows

    def __repr__(self) -> str:
        return f"FieldCtx(GF({self.p}^{self.m}), modulus={self.modulus})"


_FIELD_CACHE: dict[tuple, FieldCtx] = {}


def make_field(p: int, m: int, modulus: tuple[int, ...] | None = None) -> FieldCtx:
    """Shared immutable context for GF(p^m); default modulus per default_modulus."""
    if modulus is None:
        key = (p, m, None)
        ctx = _FIELD_CACHE.get(key)
        if ctx is None:
            ctx = make_field(p, m, default_modulus(p, m))
            _FIELD_CACHE[key] = ctx
        return ctx
    modulus = tuple(int(c) for c in modulus)
    key = (p, m, modulus)
    ctx = _FIELD_CACHE.get(key)
    if ctx is None:
        ctx = FieldCtx(p, m, modulus)
        _FIELD_CACHE[key] = ctx
    return ctx


def trace(ctx: FieldCtx, x: int, sub_degree: int = 1) -> int:
    """Trace of x from GF(p^m) onto GF(p^sub_degree), returned as an element index."""
    if ctx.m % sub_degree:
        raise FieldError(f"subfield degree {sub_degree} does not divide {ctx.m}")
    step = ctx.p**sub_degree
    acc = 0
    y = x
    for _ in range(ctx.m // sub_degree):
        acc = ctx.add(acc, y)
        y = ctx.pow(y, step)
    return acc


def trace_table(ctx: FieldCtx, sub_degree: int = 1) -> np.ndarray:
    """Vectorized trace of every element onto GF(p^sub_degree)."""
    if ctx.m % sub_degree:
        raise FieldError(f"subfield degree {sub_degree} does not divide {ctx.m}")
    step = ctx.p**sub_degree
    idx = np.arange(ctx.n)
    acc = np.zeros(ctx.n, dtype=np.int32)
    y = idx
    for _ in range(ctx.m // sub_degree):
        acc = ctx.vadd(acc, y)
        y = ctx.vpow(y, step)
    return acc


def quadratic_character(ctx: FieldCtx, x: int) -> int:
    """eta(x): 1 for nonzero squares, -1 for nonsquares, 0 for x = 0, via x^((n-1)/2)."""
    if x == 0:
        return 0
    t = ctx.pow(x, (ctx.n - 1) // 2)
    if t == 1:
        return 1
    if t != ctx.neg(1):
        raise FieldError("quadratic character power was not +-1")  # pragma: no cover
    return -1


def square_table(ctx: FieldCtx) -> np.ndarray:
    """Boolean table: square_table[x] iff x is a square (0 counts as a square)."""
    out = np.zeros(ctx.n, dtype=bool)
    out[0] = True
    sq = ctx.vpow(np.arange(1, ctx.n), 2)
    out[sq] = True
    return out


# ---------------------------------------------------------------------------
# Quadratic tower GF(q^2) = GF(q)(xi), xi = omega^((q+1)/2)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TowerCtx:
    """GF(q) together with GF(q^2) and the coordinate split x = x0 + x1*xi."""

    base: FieldCtx
    ext: FieldCtx
    xi: int                       # ext index, xi = omega_ext^((q+1)/2); xi^q = -xi
    alpha: int                    # base index of xi^2, a nonsquare generator of GF(q)*
    embed: np.ndarray = field(repr=False)    # base index -> ext index
    unembed: np.ndarray = field(repr=False)  # ext index -> base index or -1
    dec0: np.ndarray = field(repr=False)     # ext index -> base index of x0
    dec1: np.ndarray = field(repr=False)     # ext index -> base index of x1

    def decompose(self, x: int) -> tuple[int, int]:
        return int(self.dec0[x]), int(self.dec1[x])

    def recompose(self, x0: int, x1: int) -> int:
        return self.ext.add(int(self.embed[x0]), self.ext.mul(int(self.embed[x1]), self.xi))


def _minimal_poly(base: FieldCtx, x: int) -> list[int]:
    """Minimal polynomial of x over the prime field, coefficients as small ints."""
    conjugates = []
    y = x
    while y not in conjugates:
        conjugates.append(y)
        y = base.pow(y, base.p)
    poly = [1]
    for c in conjugates:
        nxt = [0] * (len(poly) + 1)
        negc = base.neg(c)
        for i, a in enumerate(poly):
            nxt[i + 1] = base.add(nxt[i + 1], a)
            nxt[i] = base.add(nxt[i], base.mul(a, negc))
        poly = nxt
    if any(c >= base.p for c in poly):
        raise FieldError("minimal polynomial has non-prime-field coefficients")  # pragma: no cover
    return poly


def make_tower(base: FieldCtx, ext_modulus: tuple[int, ...] | None = None) -> TowerCtx:
    """Build GF(q^2) over base = GF(q) with the pinned xi = omega^((q+1)/2)."""
    q = base.n
    ext = make_field(base.p, 2 * base.m, ext_modulus)

    mu = _minimal_poly(base, base.omega)
    roots = [x for x in range(ext.n) if _eval_prime_poly(ext, mu, x) == 0]
    if len(roots) != base.m:
        raise FieldError("embedding root count mismatch")  # pragma: no cover
    r = min(roots)
    j = int(ext.log[r])
    embed = np.zeros(q, dtype=np.int32)
    ks = np.arange(q - 1, dtype=np.int64)
    embed[base.exp] = ext.exp[(j * ks) % (ext.n - 1)]

    unembed = np.full(ext.n, -1, dtype=np.int32)
    unembed[embed] = np.arange(q)

    xi = int(ext.exp[(q + 1) // 2])
    alpha = int(unembed[ext.mul(xi, xi)])
    if alpha < 0:
        raise FieldError("xi^2 did not land in the base field")  # pragma: no cover

    grid0, grid1 = np.meshgrid(np.arange(q), np.arange(q), indexing="ij")
    idx = ext.vadd(embed[grid0.ravel()], ext.vmul(embed[grid1.ravel()], xi))
    dec0 = np.full(ext.n, -1, dtype=np.int32)
    dec1 = np.full(ext.n, -1, dtype=np.int32)
    dec0[idx] = grid0.ravel()
    dec1[idx] = grid1.ravel()
    if len(np.unique(idx)) != ext.n:
        raise FieldError("coordinate split is not a bijection")  # pragma: no cover

    return TowerCtx(base=base, ext=ext, xi=xi, alpha=alpha,
                    embed=embed, unembed=unembed, dec0=dec0, dec1=dec1)


def _eval_prime_poly(ctx: FieldCtx, poly: list[int], x: int) -> int:
    acc = 0
    for c in reversed(poly):
        acc = ctx.add(ctx.mul(acc, x), c)
    return acc


def decompose(tower: TowerCtx, x: int) -> tuple[int, int]:
    """Coordinates (x0, x1) of x = x0 + x1*xi as base field indices."""
    return tower.decompose(x)


@dataclass(frozen=True)
class ThetaSetup:
    """A direction theta = theta0 + theta1*xi defining the unital's t-axis."""

    tower: TowerCtx
    theta: int    # ext index
    theta0: int   # base index
    theta1: int   # base index
    xi: int       # ext index
    alpha: int    # base index


def theta_setup(tower: TowerCtx, theta: int) -> ThetaSetup:
    """Wrap an arbitrary nonzero ext element as a ThetaSetup (no admissibility check)."""
    if theta == 0:
        raise FieldError("theta must be nonzero")
    t0, t1 = tower.decompose(theta)
    return ThetaSetup(tower=tower, theta=theta, theta0=t0, theta1=t1,
                      xi=tower.xi, alpha=tower.alpha)


def construct_theta(tower: TowerCtx) -> ThetaSetup:
    """The recipe direction: theta = xi for q = 1 mod 4, theta = theta0 + xi otherwise.

    Asserts the norm theta^(q+1) is a nonsquare of GF(q) (and alpha too, in the
    q = 1 mod 4 case), which is exactly the admissibility condition for f = x^2.
    """
    base, ext = tower.base, tower.ext
    q = base.n
    if q % 4 == 1:
        theta = tower.xi
        if quadratic_character(base, tower.alpha) != -1:
            raise FieldError("alpha = xi^2 is unexpectedly a square")
    else:
        theta0 = next((t for t in range(1, q)
                       if quadratic_character(base, base.sub(base.mul(t, t), tower.alpha)) == -1),
                      None)
        if theta0 is None:
            raise FieldError("no theta0 with theta0^2 - alpha a nonsquare")
        theta = ext.add(int(tower.embed[theta0]), tower.xi)
    setup = theta_setup(tower, theta)
    norm = int(tower.unembed[ext.pow(theta, q + 1)])
    if norm < 0 or quadratic_character(base, norm) != -1:
        raise FieldError("theta^(q+1) is not a nonsquare of the base field")
    return setup


# ---------------------------------------------------------------------------
# Quadratic form point counts
# ---------------------------------------------------------------------------

def _det(ctx: FieldCtx, mat: list[list[int]]) -> int:
    """Determinant over GF(q) by Gaussian elimination on a copy."""
    n = len(mat)
    a = [row[:] for row in mat]
    det = 1
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return 0
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = ctx.neg(det)
        det = ctx.mul(det, a[col][col])
        inv = ctx.inv(a[col][col])
        for r in range(col + 1, n):
            if a[r][col]:
                factor = ctx.mul(a[r][col], inv)
                for c in range(col, n):
                    a[r][c] = ctx.sub(a[r][c], ctx.mul(factor, a[col][c]))
    return det


def quadratic_form_values(ctx: FieldCtx, form: list[list[int]]) -> np.ndarray:
    """Values x^T F x over all of GF(q)^n in odometer order (last coordinate fastest)."""
    n = len(form)
    q = ctx.n
    grids = np.meshgrid(*([np.arange(q)] * n), indexing="ij")
    coords = [g.ravel() for g in grids]
    vals = np.zeros(q**n, dtype=np.int32)
    for i in range(n):
        for j in range(n):
            fij = form[i][j]
            if fij:
                term = ctx.vmul(np.full(1, fij, dtype=np.int32),
                                ctx.vmul(coords[i], coords[j]))
                vals = ctx.vadd(vals, term)
    return vals


def quadratic_form_count(ctx: FieldCtx, form: list[list[int]], b: int) -> int:
    """Number of solutions of x^T F x = b over GF(q)^n, enumeration checked against the closed form.

    F must be symmetric and nondegenerate.  The closed forms are
    q^(n-1) + v(b) q^(n/2-1) eta((-1)^(n/2) det F)          for even n,
    q^(n-1) + q^((n-1)/2) eta((-1)^((n-1)/2) b det F)       for odd n,
    with v(0) = q-1 and v(b) = -1 otherwise.
    """
    n = len(form)
    q = ctx.n
    for i in range(n):
        if len(form[i]) != n:
            raise FieldError("form matrix must be square")
        for j in range(n):
            if form[i][j] != form[j][i]:
                raise FieldError("form matrix must be symmetric")
    delta = _det(ctx, form)
    if delta == 0:
        raise FieldError("degenerate quadratic form")

    vals = quadratic_form_values(ctx, form)
    count = int(np.count_nonzero(vals == b))

    minus1 = ctx.neg(1)
    if n % 2 == 0:
        v_b = q - 1 if b == 0 else -1
        sign = ctx.pow(minus1, n // 2)
        closed = q ** (n - 1) + v_b * q ** (n // 2 - 1) * quadratic_character(ctx, ctx.mul(sign, delta))
    else:
        sign = ctx.pow(minus1, (n - 1) // 2)
        arg = ctx.mul(ctx.mul(sign, b), delta)
        closed = q ** (n - 1) + q ** ((n - 1) // 2) * quadratic_character(ctx, arg)
    if count != closed:
        raise VerificationError(
            f"quadratic form count mismatch: enumerated {count}, closed form {closed}")
    return count


# ---------------------------------------------------------------------------
# GF(2^e) character codomain
# ---------------------------------------------------------------------------

def _gf2_polymod(a: int, b: int) -> int:
    db = b.bit_length() - 1
    while a.bit_length() - 1 >= db:
        a ^= b << (a.bit_length() - 1 - db)
    return a


def _gf2_irreducible(poly: int) -> bool:
    deg = poly.bit_length() - 1
    for d in range(1, deg // 2 + 1):
        for low in range(1 << d):
            if _gf2_polymod(poly, (1 << d) | low) == 0:
                return False
    return True


@dataclass(frozen=True)
class CharFieldCtx:
    """GF(2^e), e = ord_2 mod p, holding a fixed primitive p-th root of unity eps."""

    p: int
    e: int
    poly: int                 # bitmask of the degree-e modulus, bit e set
    eps: int
    eps_pows: tuple[int, ...]

    def mul(self, a: int, b: int) -> int:
        r = 0
        e = self.e
        poly = self.poly
        while b:
            if b & 1:
                r ^= a
            b >>= 1
            a <<= 1
            if (a >> e) & 1:
                a ^= poly
        return r

    def pow(self, a: int, k: int) -> int:
        r = 1
        while k:
            if k & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            k >>= 1
        return r


_CHAR_CACHE: dict[int, CharFieldCtx] = {}


def make_char_field(p: int) -> CharFieldCtx:
    """GF(2^e) with the smallest-bitmask modulus and smallest eps of order p."""
    if not _is_prime(p) or p == 2:
        raise FieldError(f"p must be an odd prime, got {p}")
    ctx = _CHAR_CACHE.get(p)
    if ctx is not None:
        return ctx
    e, t = 1, 2 % p
    while t != 1:
        t = (2 * t) % p
        e += 1
    poly = next((1 << e) | low for low in range(1 << e) if _gf2_irreducible((1 << e) | low))
    tmp = CharFieldCtx(p=p, e=e, poly=poly, eps=0, eps_pows=())
    eps = next(z for z in range(2, 1 << e) if tmp.pow(z, p) == 1)
    pows = []
    acc = 1
    for _ in range(p):
        pows.append(acc)
        acc = tmp.mul(acc, eps)
    ctx = CharFieldCtx(p=p, e=e, poly=poly, eps=eps, eps_pows=tuple(pows))
    _CHAR_CACHE[p] = ctx
    return ctx


def chi(cf: CharFieldCtx, fld: FieldCtx, t: int) -> int:
    """Additive character eps^Tr(t) of GF(q) with values in GF(2^e)."""
    return cf.eps_pows[trace(fld, t) % fld.p]


def chi_table(cf: CharFieldCtx, fld: FieldCtx) -> list[int]:
    """chi over all of GF(q) as a plain list for tight loops."""
    tr = trace_table(fld)
    return [cf.eps_pows[int(v)] for v in tr]
