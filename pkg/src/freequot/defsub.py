"""Enumeration of PSL(2,p)-quotient classes of rank-n free groups.

A class is an orbit of generating n-tuples under simultaneous PGL(2,p)
conjugation (= composing the quotient epimorphism with an automorphism of
the target); each orbit is stored by its minimal member in the element-index
order, so the sorted list of canonical tuples is a deterministic table.
Automorphisms of the free group permute the classes; those permutations are
the finite quotient actions everything downstream consumes.

PGL(2,p) conjugation is realized as inner conjugation by the group itself
plus one coset twisted by a fixed determinant-nonresidue diagonal matrix;
for prime p this is the full automorphism group of PSL(2,p) (classical, and
spot-validated in the test suite at p = 5 by counting the induced
automorphisms of the multiplication table).
"""

from __future__ import annotations

import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import freegrp, psl2
from .errors import (
    InvalidPrime,
    NotGenerating,
    NotInTable,
    RankMismatch,
    ResourceLimit,
)
from .freegrp import FreeAutomorphism, GroupTuple
from .permgrp import Permutation
from .psl2 import GroupTable

DEFAULT_BUDGET = 500_000_000

_FULL = -1  # sentinel subgroup id for "the whole group"
_CACHE_MAGIC = 0x46515031  # "FQP1"
_CACHE_VERSION = 1


def _check_pipeline_prime(p: int) -> int:
    psl2.check_prime(p)
    if p < 5:
        raise InvalidPrime(f"enumeration needs p >= 5, got {p}")
    return p


class _SubgroupLattice:
    """Memoized closure of subgroups of PSL(2,p) under adding one generator.

    Subgroups are interned by their element-index frozenset; extending a
    subgroup by a generator is a breadth-first closure over the generating
    words recorded for the subgroup, cached per (subgroup, generator) pair.
    """

    def __init__(self, table: GroupTable):
        self.table = table
        self.full_size = table.size
        self._intern: dict[frozenset, int] = {}
        self._members: list[frozenset] = []
        self._gens: list[tuple[int, ...]] = []
        self._extend_cache: dict[tuple[int, int], int] = {}
        trivial = frozenset([table.identity_index])
        self._intern[trivial] = 0
        self._members.append(trivial)
        self._gens.append(())
        self.trivial = 0

    def extend(self, sub: int, g: int) -> int:
        if sub == _FULL:
            return _FULL
        key = (sub, g)
        cached = self._extend_cache.get(key)
        if cached is not None:
            return cached
        gens = self._gens[sub] + (g,)
        members = self._close(gens)
        if members is None:
            result = _FULL
        else:
            result = self._intern.get(members)
            if result is None:
                result = len(self._members)
                self._intern[members] = result
                self._members.append(members)
                self._gens.append(gens)
        self._extend_cache[key] = result
        return result

    def is_full(self, sub: int) -> bool:
        return sub == _FULL

    def _close(self, gens: tuple[int, ...]):
        """Element set of the generated subgroup, or None if it is everything."""
        table = self.table
        mul = table.mul_table
        e = table.identity_index
        seen = {e}
        frontier = [e]
        full = self.full_size
        if mul is not None:
            while frontier:
                nxt = []
                for x in frontier:
                    row = mul[x]
                    for g in gens:
                        y = int(row[g])
                        if y not in seen:
                            seen.add(y)
                            nxt.append(y)
                if len(seen) == full:
                    return None
                frontier = nxt
        else:
            while frontier:
                nxt = []
                for x in frontier:
                    for g in gens:
                        y = table.mul_idx(x, g)
                        if y not in seen:
                            seen.add(y)
                            nxt.append(y)
                if len(seen) == full:
                    return None
                frontier = nxt
        return frozenset(seen)


@dataclass(frozen=True)
class DefiningClass:
    p: int
    rank: int
    canon: tuple[int, ...]  # element indices of the canonical tuple
    class_index: int

    def group_tuple(self) -> GroupTuple:
        table = psl2.table_for(self.p)
        return GroupTuple(self.p, tuple(table.element(i) for i in self.canon))


class ClassTable:
    """All quotient classes for fixed (n, p), sorted by canonical tuple."""

    def __init__(self, n: int, p: int, canon_tuples: list[tuple[int, ...]]):
        self.n = n
        self.p = p
        self.classes = [DefiningClass(p, n, t, k) for k, t in enumerate(canon_tuples)]
        self.lookup = {t: k for k, t in enumerate(canon_tuples)}
        self.table = psl2.table_for(p)

    def __len__(self) -> int:
        return len(self.classes)

    def canon_tuples(self) -> list[tuple[int, ...]]:
        return [c.canon for c in self.classes]


def _orbit_of(table: GroupTable, idx_tuple: tuple[int, ...]):
    """All images of a tuple under simultaneous PGL(2,p) conjugation."""
    mul = table.mul_table
    inverse = table.inverse
    outer = table.outer
    size = table.size
    twisted = tuple(int(outer[i]) for i in idx_tuple)
    out = []
    if mul is not None:
        for g in range(size):
            gi = int(inverse[g])
            row = mul[g]
            out.append(tuple(int(mul[row[x], gi]) for x in idx_tuple))
            out.append(tuple(int(mul[row[x], gi]) for x in twisted))
    else:
        for g in range(size):
            out.append(tuple(table.conj_idx(g, x) for x in idx_tuple))
            out.append(tuple(table.conj_idx(g, x) for x in twisted))
    return out


def _canonical_of(table: GroupTable, idx_tuple: tuple[int, ...]) -> tuple[int, ...]:
    return min(_orbit_of(table, idx_tuple))


def _generates_indices(table: GroupTable, idx_tuple) -> bool:
    lattice = _SubgroupLattice(table)
    sub = lattice.trivial
    for g in idx_tuple:
        sub = lattice.extend(sub, g)
    return lattice.is_full(sub)


def aut_orbit_canonical(t: GroupTuple) -> GroupTuple:
    """Minimal tuple in the PGL(2,p)-conjugation orbit; requires a generating tuple."""
    if not psl2.generates(t.p, t.entries):
        raise NotGenerating("canonical form is only defined for generating tuples")
    table = psl2.table_for(t.p)
    idx = tuple(table.index_of(m) for m in t.entries)
    best = _canonical_of(table, idx)
    return GroupTuple(t.p, tuple(table.element(i) for i in best))


def _conjugacy_representatives(table: GroupTable) -> list[int]:
    """Minimal element index of every PGL(2,p)-conjugacy class of the group."""
    size = table.size
    seen = [False] * size
    reps = []
    for x in range(size):
        if seen[x]:
            continue
        reps.append(x)
        for y in _orbit_of(table, (x,)):
            seen[y[0]] = True
    return reps


def _fixed_lines(table: GroupTable) -> list[frozenset[int]]:
    """Per element, the projective lines it fixes; line (x:1) is x, (1:0) is p."""
    p = table.p
    out = []
    for i in range(table.size):
        m = table.element(i)
        lines = []
        for x in range(p):
            if (m.c * x * x + (m.d - m.a) * x - m.b) % p == 0:
                lines.append(x)
        if m.c == 0:
            lines.append(p)
        out.append(frozenset(lines))
    return out


def in_common_borel(p: int, mats) -> bool:
    """Whether all elements fix one common projective line.

    Such a tuple lies in a point stabilizer (a Borel subgroup up to
    conjugacy), so it cannot generate; used as a scan pre-filter that must
    never change enumeration results.
    """
    table = psl2.table_for(p)
    lines = _fixed_lines(table)
    common = None
    for m in mats:
        fl = lines[table.index_of(m)]
        common = fl if common is None else common & fl
        if not common:
            return False
    return common is not None and bool(common)


def _scan_chunk(n: int, p: int, first_coords) -> set[tuple[int, ...]]:
    """Canonical forms of every generating tuple whose first index is in the chunk."""
    table = psl2.table_for(p)
    size = table.size
    lattice = _SubgroupLattice(table)
    lines = _fixed_lines(table)
    seen: set[int] = set()
    found: set[tuple[int, ...]] = set()

    def pack(t):
        code = 0
        for x in t:
            code = code * size + x
        return code

    def rec(prefix, sub, common, depth):
        # `common` carries the shared fixed lines of the prefix; a tuple whose
        # entries keep a common line sits inside a Borel and is rejected
        # before the closure lookup (pure optimization, never changes results).
        if depth == n:
            if common:
                return
            if not lattice.is_full(sub):
                return
            code = pack(prefix)
            if code in seen:
                return
            orbit = _orbit_of(table, tuple(prefix))
            found.add(min(orbit))
            seen.update(pack(t) for t in orbit)
            return
        for g in range(size):
            rec(prefix + [g], lattice.extend(sub, g), common & lines[g], depth + 1)

    for first in first_coords:
        rec([first], lattice.extend(lattice.trivial, first), lines[first], 1)
    return found


_WORKER_ARGS = None


def _worker_scan(args):
    n, p, chunk = args
    return _scan_chunk(n, p, chunk)


def enumerate_classes(
    n: int,
    p: int,
    strategy: str = "full",
    workers: int = 1,
    budget: int = DEFAULT_BUDGET,
    cache_dir=None,
) -> ClassTable:
    """Build the table of quotient classes for F_n onto PSL(2,p).

    `full` scans every |G|^n tuple; `pruned` restricts the first coordinate
    to conjugacy-class representatives and completes orbits, which must give
    the identical table.  The scan is deterministic for any worker count.
    """
    if n < 1:
        raise RankMismatch(f"rank must be >= 1, got {n}")
    _check_pipeline_prime(p)
    if strategy not in ("full", "pruned"):
        raise ValueError(f"unknown strategy {strategy!r}")

    if cache_dir is not None:
        cached = _try_load(cache_dir, n, p)
        if cached is not None:
            return cached

    table = psl2.table_for(p)
    size = table.size
    if strategy == "full":
        first_coords = list(range(size))
    else:
        first_coords = _conjugacy_representatives(table)
    estimated = len(first_coords) * size ** (n - 1)
    if estimated > budget:
        raise ResourceLimit(
            f"scan of about {estimated} tuples exceeds the budget of {budget}; "
            f"pick a smaller prime or raise the budget"
        )

    if workers <= 1 or len(first_coords) == 1:
        found = _scan_chunk(n, p, first_coords)
    else:
        chunks = [first_coords[i::workers] for i in range(workers)]
        chunks = [c for c in chunks if c]
        found = set()
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            for part in pool.map(_worker_scan, [(n, p, c) for c in chunks]):
                found |= part

    result = ClassTable(n, p, sorted(found))
    if cache_dir is not None:
        save_table(result, _cache_path(cache_dir, n, p))
    return result


def count_generating_tuples(n: int, p: int, budget: int = DEFAULT_BUDGET) -> int:
    """Direct scan counting generating n-tuples; independent of the orbit logic."""
    if n < 1:
        raise RankMismatch(f"rank must be >= 1, got {n}")
    _check_pipeline_prime(p)
    table = psl2.table_for(p)
    size = table.size
    if size**n > budget:
        raise ResourceLimit(f"scan of {size ** n} tuples exceeds the budget of {budget}")
    mul = table.mul_table
    e = table.identity_index
    count = 0

    def closure_is_full(gens) -> bool:
        seen = {e}
        frontier = [e]
        while frontier:
            nxt = []
            for x in frontier:
                row = mul[x]
                for g in gens:
                    y = int(row[g])
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            if len(seen) == size:
                return True
            frontier = nxt
        return False

    def rec(gens, depth):
        nonlocal count
        if depth == n:
            if closure_is_full(gens):
                count += 1
            return
        for g in range(size):
            rec(gens + (g,), depth + 1)

    rec((), 0)
    return count


def class_of(table: ClassTable, t: GroupTuple) -> int:
    """Index of the class of a generating tuple."""
    if t.rank != table.n:
        raise RankMismatch(f"tuple rank {t.rank} vs table rank {table.n}")
    if t.p != table.p:
        raise InvalidPrime(f"tuple over p={t.p} vs table over p={table.p}")
    gt = table.table
    idx = tuple(gt.index_of(m) for m in t.entries)
    if not _generates_indices(gt, idx):
        raise NotGenerating("tuple does not generate, so it has no class")
    canon = _canonical_of(gt, idx)
    k = table.lookup.get(canon)
    if k is None:
        raise NotInTable("canonical form of a generating tuple missing from the table")
    return k


def out_action(table: ClassTable, sigma: FreeAutomorphism) -> Permutation:
    """The permutation of class indices induced by a free-group automorphism."""
    if sigma.rank != table.n:
        raise RankMismatch(f"automorphism rank {sigma.rank} vs table rank {table.n}")
    images = []
    for cls in table.classes:
        moved = freegrp.apply_automorphism(sigma, cls.group_tuple())
        images.append(class_of(table, moved))
    if sorted(images) != list(range(len(table))):
        raise NotInTable("induced class map is not a bijection")
    return Permutation(tuple(images))


# -- cache files --------------------------------------------------------------
#
# Little-endian u32 header (magic, version, n, p, class count) followed by
# count*n u32 element indices in table order.


def _cache_path(cache_dir, n: int, p: int):
    import pathlib

    d = pathlib.Path(cache_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d / f"classes_n{n}_p{p}.bin"


def serialize_table(table: ClassTable) -> bytes:
    head = struct.pack("<5I", _CACHE_MAGIC, _CACHE_VERSION, table.n, table.p, len(table))
    body = b"".join(struct.pack(f"<{table.n}I", *c.canon) for c in table.classes)
    return head + body


def deserialize_table(data: bytes) -> ClassTable:
    magic, version, n, p, count = struct.unpack_from("<5I", data, 0)
    if magic != _CACHE_MAGIC or version != _CACHE_VERSION:
        raise ValueError("not a class table cache (bad magic or version)")
    need = 20 + 4 * n * count
    if len(data) != need:
        raise ValueError(f"cache length {len(data)} != expected {need}")
    tuples = []
    off = 20
    for _ in range(count):
        tuples.append(struct.unpack_from(f"<{n}I", data, off))
        off += 4 * n
    return ClassTable(n, p, tuples)


def save_table(table: ClassTable, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_table(table))


def load_table(path) -> ClassTable:
    with open(path, "rb") as fh:
        return deserialize_table(fh.read())


def _try_load(cache_dir, n: int, p: int):
    path = _cache_path(cache_dir, n, p)
    if path.exists():
        return load_table(path)
    return None
