"""Planar functions on GF(q^2): registry, planarity/normality checks, component maps."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DesignError, FieldError
from .fields import FieldCtx, TowerCtx

@dataclass(frozen=True, eq=False)
class PlanarSpec:
    """A candidate planar function, tabulated densely over its field."""

    name: str
    family: str                  # "square" | "coulter_matthews" | "dembowski_ostrom"
    field: FieldCtx
    table: np.ndarray = field(repr=False, default=None)
    param: int | None = None     # k for Coulter-Matthews


@dataclass(frozen=True, eq=False)
class ComponentPair:
    """Coordinate maps f(x) = f0(x) + f1(x)*xi, tabulated over GF(q^2)."""

    f0: np.ndarray
    f1: np.ndarray


def evaluate(spec: PlanarSpec, x: int) -> int:
    return int(spec.table[x])


def square_spec(ext: FieldCtx) -> PlanarSpec:
    tbl = ext.vpow(np.arange(ext.n), 2)
    return PlanarSpec(name="square", family="square", field=ext, table=tbl)


def coulter_matthews_spec(ext: FieldCtx, k: int) -> PlanarSpec:
    """x^((3^k+1)/2) on GF(3^e); planar exactly when gcd(k, 2e) = 1."""
    if ext.p != 3:
        raise FieldError("Coulter-Matthews functions require characteristic 3")
    if k < 1 or math.gcd(k, 2 * ext.m) != 1:
        raise FieldError(f"x^((3^{k}+1)/2) is not planar on GF(3^{ext.m})")
    d = (3**k + 1) // 2
    tbl = ext.vpow(np.arange(ext.n), d)
    return PlanarSpec(name=f"cm{k}", family="coulter_matthews", field=ext,
                      table=tbl, param=k)


def do_spec(ext: FieldCtx, entries: list[tuple[int, int, int]], name: str | None = None) -> PlanarSpec:
    """Dembowski-Ostrom polynomial sum of a_ij x^(p^i + p^j); rejected unless planar."""
    idx = np.arange(ext.n)
    tbl = np.zeros(ext.n, dtype=np.int32)
    for i, j, a in entries:
        if not (0 <= i < ext.m and 0 <= j < ext.m):
            raise FieldError(f"exponent indices ({i},{j}) out of range for degree {ext.m}")
        if not (0 <= a < ext.n):
            raise FieldError(f"coefficient index {a} out of range")
        if a:
            term = ext.vmul(np.full(ext.n, a, dtype=np.int32), ext.vpow(idx, ext.p**i + ext.p**j))
            tbl = ext.vadd(tbl, term)
    if name is None:
        digest = hashlib.sha1(
            ",".join(f"{i}:{j}:{a}" for i, j, a in sorted(entries)).encode()).hexdigest()[:8]
        name = f"do-{digest}"
    spec = PlanarSpec(name=name, family="dembowski_ostrom", field=ext, table=tbl)
    w = planarity_witness(spec)
    if w is not None:
        raise DesignError(
            f"table is not planar: x -> f(x+a)-f(x) is not a bijection for a = {w}")
    return spec


def parse_do_table(text: str) -> list[tuple[int, int, int]]:
    """Parse lines 'i j a_ij_index'; blank lines and # comments are skipped."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise FieldError(f"line {lineno}: expected 'i j a_ij_index', got {raw!r}")
        try:
            i, j, a = (int(v) for v in parts)
        except ValueError:
            raise FieldError(f"line {lineno}: non-integer entry in {raw!r}") from None
        entries.append((i, j, a))
    if not entries:
        raise FieldError("empty coefficient table")
    return entries


def planarity_witness(spec: PlanarSpec, sample: int | None = None, seed: int = 0) -> int | None:
    """Smallest a for which the difference map fails to be a bijection, or None."""
    ctx = spec.field
    n = ctx.n
    tbl = spec.table
    idx = np.arange(n)
    if sample is None or sample >= n - 1:
        a_values = range(1, n)
    else:
        rng = np.random.default_rng(seed)
        a_values = sorted(int(a) for a in rng.choice(np.arange(1, n), size=sample, replace=False))
    for a in a_values:
        diffs = ctx.vsub(tbl[ctx.vadd(idx, a)], tbl)
        if len(np.unique(diffs)) != n:
            return int(a)
    return None


def is_planar(spec: PlanarSpec, sample: int | None = None, seed: int = 0) -> bool:
    """Whether x -> f(x+a) - f(x) is a bijection for every a != 0 (exhaustive by default)."""
    return planarity_witness(spec, sample=sample, seed=seed) is None


def is_normal(spec: PlanarSpec) -> bool:
    """Whether f(0) = 0 and f(a) = f(b) exactly when a = +-b."""
    ctx = spec.field
    tbl = spec.table
    if int(tbl[0]) != 0:
        return False
    if not np.array_equal(tbl[ctx.neg_table], tbl):
        return False
    counts = np.bincount(tbl, minlength=ctx.n)
    # even + 2-bounded fibers force each nonzero fiber to be exactly {a, -a}
    return int(counts[0]) == 1 and int(counts.max()) <= 2


def components(spec: PlanarSpec, tower: TowerCtx) -> ComponentPair:
    """Split f pointwise as f0 + f1*xi using the tower's coordinate tables."""
    if spec.field is not tower.ext:
        raise FieldError("spec is tabulated over a different field than the tower's extension")
    return ComponentPair(f0=tower.dec0[spec.table].astype(np.int32),
                         f1=tower.dec1[spec.table].astype(np.int32))


def registry_list(ext: FieldCtx) -> list[PlanarSpec]:
    """Built-in planar families on the given field, each re-verified before return."""
    specs = [square_spec(ext)]
    if ext.p == 3:
        e = ext.m
        for k in range(2, e):
            if math.gcd(k, 2 * e) == 1:
                specs.append(coulter_matthews_spec(ext, k))
    for spec in specs:
        w = planarity_witness(spec, sample=100 if ext.n > 3**6 else None)
        if w is not None:
            raise DesignError(f"registry spec {spec.name} failed planarity at a = {w}")
    return specs
