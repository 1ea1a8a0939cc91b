"""Exact arithmetic in PSL(2,p) for odd primes p.

Elements are stored as sign-canonical 2x2 matrices over GF(p): of the two
integer lifts M and -M, the one whose first nonzero entry (row-major) lies
in [1, (p-1)/2] is kept.  A dense, lexicographically ordered element table
gives every element a stable integer index; multiplication tables are
precomputed for small groups to speed up enumeration loops.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from sympy import isprime

from .errors import InvalidPrime, NonUnitDeterminant, PrimeMismatch

# Dense |G| x |G| multiplication tables are only built up to this group order
# (p <= 17); larger groups multiply matrices directly.
TABLE_ORDER_LIMIT = 2500


def check_prime(p: int) -> int:
    if not isinstance(p, int) or p < 3 or not isprime(p):
        raise InvalidPrime(f"need an odd prime >= 3, got {p!r}")
    return p


def group_size(p: int) -> int:
    """|PSL(2,p)| = p(p^2-1)/2."""
    check_prime(p)
    return p * (p * p - 1) // 2


@dataclass(frozen=True)
class ProjectiveMatrix:
    """Sign-canonical representative of an element of PSL(2,p)."""

    p: int
    a: int
    b: int
    c: int
    d: int

    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def is_identity(self) -> bool:
        return self.a == 1 and self.b == 0 and self.c == 0 and self.d == 1

    def __repr__(self):
        return f"ProjectiveMatrix(p={self.p}, [{self.a},{self.b};{self.c},{self.d}])"


def _canon(p: int, a: int, b: int, c: int, d: int) -> tuple[int, int, int, int]:
    # flip the sign if the first nonzero row-major entry exceeds (p-1)/2
    half = (p - 1) // 2
    for e in (a, b, c, d):
        if e:
            if e > half:
                return ((p - a) % p, (p - b) % p, (p - c) % p, (p - d) % p)
            return (a, b, c, d)
    raise NonUnitDeterminant("zero matrix cannot lie in PSL(2,p)")


def make(p: int, a: int, b: int, c: int, d: int) -> ProjectiveMatrix:
    """Build the canonical representative of a determinant-1 matrix mod p."""
    check_prime(p)
    a, b, c, d = a % p, b % p, c % p, d % p
    if (a * d - b * c) % p != 1:
        raise NonUnitDeterminant(
            f"determinant {(a * d - b * c) % p} != 1 (mod {p}) for [{a},{b};{c},{d}]"
        )
    return ProjectiveMatrix(p, *_canon(p, a, b, c, d))


def identity(p: int) -> ProjectiveMatrix:
    return make(p, 1, 0, 0, 1)


def _check_same_prime(x: ProjectiveMatrix, y: ProjectiveMatrix) -> None:
    if x.p != y.p:
        raise PrimeMismatch(f"cannot combine elements over p={x.p} and p={y.p}")


def mul(x: ProjectiveMatrix, y: ProjectiveMatrix) -> ProjectiveMatrix:
    _check_same_prime(x, y)
    p = x.p
    a = (x.a * y.a + x.b * y.c) % p
    b = (x.a * y.b + x.b * y.d) % p
    c = (x.c * y.a + x.d * y.c) % p
    d = (x.c * y.b + x.d * y.d) % p
    return ProjectiveMatrix(p, *_canon(p, a, b, c, d))


def inv(x: ProjectiveMatrix) -> ProjectiveMatrix:
    # adjugate of a determinant-1 matrix
    p = x.p
    return ProjectiveMatrix(p, *_canon(p, x.d, (-x.b) % p, (-x.c) % p, x.a))


def order(x: ProjectiveMatrix) -> int:
    n = 1
    acc = x
    while not acc.is_identity():
        acc = mul(acc, x)
        n += 1
    return n


def _canonical_codes(p: int) -> np.ndarray:
    """Sorted integer codes ((a*p+b)*p+c)*p+d of all canonical elements."""
    half = (p - 1) // 2
    rng = np.arange(p, dtype=np.int64)
    inv_mod = np.zeros(p, dtype=np.int64)
    inv_mod[1:] = np.array([pow(int(i), -1, p) for i in range(1, p)], dtype=np.int64)

    chunks = []
    # a in [1, half]: b, c free, d = (1 + b c) / a; first nonzero entry is a.
    bb, cc = np.meshgrid(rng, rng, indexing="ij")
    bb = bb.ravel()
    cc = cc.ravel()
    bc1 = (1 + bb * cc) % p
    for a in range(1, half + 1):
        dd = (bc1 * inv_mod[a]) % p
        chunks.append(((a * p + bb) * p + cc) * p + dd)
    # a = 0: need -bc = 1, so b != 0 and c = -1/b; canonical iff b <= half.
    for b in range(1, half + 1):
        c = (-inv_mod[b]) % p
        chunks.append((b * p + c) * p + rng)

    codes = np.concatenate(chunks)
    codes.sort()
    return codes


def _decode(codes: np.ndarray, p: int):
    d = codes % p
    r = codes // p
    c = r % p
    r = r // p
    b = r % p
    a = r // p
    return a, b, c, d


def _canon_encode(p: int, a, b, c, d) -> np.ndarray:
    """Vectorized sign canonicalization + code packing for entry arrays."""
    half = (p - 1) // 2
    stacked = np.stack([a, b, c, d])
    nz = stacked != 0
    first = np.argmax(nz, axis=0)
    lead = np.take_along_axis(stacked, first[None, ...], axis=0)[0]
    flip = lead > half
    stacked = np.where(flip[None, ...], (p - stacked) % p, stacked)
    a, b, c, d = stacked
    return ((a * p + b) * p + c) * p + d


class GroupTable:
    """Dense element table for one PSL(2,p): indices, inverses, conjugation.

    Immutable after construction; safe for concurrent read.
    """

    def __init__(self, p: int):
        check_prime(p)
        self.p = p
        self.codes = _canonical_codes(p)
        self.size = len(self.codes)
        assert self.size == group_size(p)
        self.identity_index = int(np.searchsorted(self.codes, self._encode_one(1, 0, 0, 1)))

        a, b, c, d = _decode(self.codes, p)
        self.inverse = self._lookup(_canon_encode(p, d, (-b) % p, (-c) % p, a))

        # conjugation by the fixed determinant-nonresidue diag(nu, 1):
        # M -> (a, nu*b; c/nu, d).  Together with inner conjugation this
        # realizes the full PGL(2,p) action.
        nu = _smallest_nonresidue(p)
        nu_inv = pow(nu, -1, p)
        self.nonresidue = nu
        self.outer = self._lookup(_canon_encode(p, a, (nu * b) % p, (nu_inv * c) % p, d))

        self._mul_table = None

    @property
    def mul_table(self):
        """Dense index-level multiplication table, built on first use."""
        if self._mul_table is None and self.size <= TABLE_ORDER_LIMIT:
            self._mul_table = self._build_mul_table(*_decode(self.codes, self.p))
        return self._mul_table

    def _encode_one(self, a: int, b: int, c: int, d: int) -> int:
        p = self.p
        return ((a * p + b) * p + c) * p + d

    def _lookup(self, codes: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.codes, codes)
        assert np.array_equal(self.codes[idx], codes), "lookup of a non-element"
        return idx.astype(np.int32)

    def _build_mul_table(self, a, b, c, d) -> np.ndarray:
        p, n = self.p, self.size
        table = np.empty((n, n), dtype=np.int32)
        step = max(1, (1 << 22) // n)
        for lo in range(0, n, step):
            hi = min(lo + step, n)
            a1, b1, c1, d1 = (x[lo:hi, None] for x in (a, b, c, d))
            na = (a1 * a + b1 * c) % p
            nb = (a1 * b + b1 * d) % p
            nc = (c1 * a + d1 * c) % p
            nd = (c1 * b + d1 * d) % p
            table[lo:hi] = self._lookup(_canon_encode(p, na, nb, nc, nd)).reshape(hi - lo, n)
        return table

    def index_of(self, x: ProjectiveMatrix) -> int:
        if x.p != self.p:
            raise PrimeMismatch(f"element over p={x.p} vs table over p={self.p}")
        code = self._encode_one(x.a, x.b, x.c, x.d)
        i = int(np.searchsorted(self.codes, code))
        assert self.codes[i] == code
        return i

    def element(self, i: int) -> ProjectiveMatrix:
        code = int(self.codes[i])
        p = self.p
        d = code % p
        code //= p
        c = code % p
        code //= p
        return ProjectiveMatrix(self.p, code // p, code % p, c, d)

    def mul_idx(self, i: int, j: int) -> int:
        if self.mul_table is not None:
            return int(self.mul_table[i, j])
        return self.index_of(mul(self.element(i), self.element(j)))

    def conj_idx(self, g: int, x: int) -> int:
        """Index of g * x * g^{-1}."""
        return self.mul_idx(self.mul_idx(g, x), int(self.inverse[g]))


@lru_cache(maxsize=None)
def _smallest_nonresidue(p: int) -> int:
    squares = {(i * i) % p for i in range(1, p)}
    for nu in range(2, p):
        if nu not in squares:
            return nu
    raise AssertionError("no quadratic nonresidue found")


_TABLE_CACHE: dict[int, GroupTable] = {}


def table_for(p: int) -> GroupTable:
    t = _TABLE_CACHE.get(p)
    if t is None:
        t = GroupTable(p)
        _TABLE_CACHE[p] = t
    return t


def enumerate_group(p: int) -> list[ProjectiveMatrix]:
    """All of PSL(2,p), exactly once, in the index order of the table."""
    t = table_for(p)
    return [t.element(i) for i in range(t.size)]


def element_index(x: ProjectiveMatrix) -> int:
    return table_for(x.p).index_of(x)


def element_at(p: int, i: int) -> ProjectiveMatrix:
    return table_for(p).element(i)


def generates(p: int, mats) -> bool:
    """Whether the given elements generate all of PSL(2,p).

    Decided by breadth-first closure under multiplication, never by
    subgroup classification.
    """
    check_prime(p)
    gens = list(mats)
    for x in gens:
        if x.p != p:
            raise PrimeMismatch(f"generator over p={x.p} in a p={p} test")
    if not gens:
        return False
    target = group_size(p)
    e = identity(p)
    seen = {e.entries()}
    frontier = [e]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = mul(x, g)
                key = y.entries()
                if key not in seen:
                    seen.add(key)
                    if len(seen) == target:
                        return True
                    nxt.append(y)
        frontier = nxt
    return len(seen) == target
