"""Residual finiteness witnesses through congruence quotients.

The rank-2 free group embeds in the integer projective matrices via the
unipotent generators with off-diagonal entry 2; higher-rank free groups sit
inside it as the finite-index kernel of exponent-sum reduction on the first
generator.  Reducing mod a prime p turns any nontrivial word into a
nontrivial element of PSL(2,p) once p avoids a finite excluded set, and for
almost all p the embedded generators map onto the whole group.  The witness
search below makes that pipeline concrete and emits replayable certificates.
"""

from __future__ import annotations

from dataclasses import dataclass

from sympy import nextprime, primefactors

from . import defsub, freegrp, psl2
from .errors import (
    InvalidRank,
    MatrixIsIdentity,
    PrimeCeilingExceeded,
    RankMismatch,
    TrivialWord,
)
from .freegrp import FreeAutomorphism, FreeWord, GroupTuple

DEFAULT_PRIME_CEILING = 1000

# images of the rank-2 generators in the integer matrix group
_GEN_A = (1, 2, 0, 1)
_GEN_B = (1, 0, 2, 1)


@dataclass(frozen=True)
class IntegerMatrix:
    """A 2x2 integer matrix of determinant 1, exact entries."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError("determinant must be 1")

    def is_projective_identity(self) -> bool:
        return (self.a, self.b, self.c, self.d) in ((1, 0, 0, 1), (-1, 0, 0, -1))

    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)


def _mat_mul(x: IntegerMatrix, y: IntegerMatrix) -> IntegerMatrix:
    return IntegerMatrix(
        x.a * y.a + x.b * y.c,
        x.a * y.b + x.b * y.d,
        x.c * y.a + x.d * y.c,
        x.c * y.b + x.d * y.d,
    )


def _mat_inv(x: IntegerMatrix) -> IntegerMatrix:
    return IntegerMatrix(x.d, -x.b, -x.c, x.a)


def matrix_of_word(w: FreeWord) -> IntegerMatrix:
    """Exact integer matrix of a rank-2 word under a -> [[1,2],[0,1]], b -> [[1,0],[2,1]]."""
    if w.rank != 2:
        raise RankMismatch(f"matrix evaluation needs a rank-2 word, got rank {w.rank}")
    gens = {
        1: IntegerMatrix(*_GEN_A),
        -1: _mat_inv(IntegerMatrix(*_GEN_A)),
        2: IntegerMatrix(*_GEN_B),
        -2: _mat_inv(IntegerMatrix(*_GEN_B)),
    }
    acc = IntegerMatrix(1, 0, 0, 1)
    for x in w.letters:
        acc = _mat_mul(acc, gens[x])
    return acc


def reduce_mod(m: IntegerMatrix, p: int) -> psl2.ProjectiveMatrix:
    return psl2.make(p, m.a, m.b, m.c, m.d)


def reduces_trivially(m: IntegerMatrix, p: int) -> bool:
    """Direct per-prime test: does the matrix become +-identity mod p?"""
    psl2.check_prime(p)
    return reduce_mod(m, p).is_identity()


@dataclass(frozen=True)
class SchreierEmbedding:
    """F_n as a finite-index subgroup of the rank-2 free group.

    For n >= 3 the subgroup is the kernel of reducing the a-exponent mod
    n-1; its Schreier generators for the transversal 1, a, ..., a^{n-2}
    are a^{n-1} and the conjugates a^i b a^{-i}.
    """

    rank: int
    generator_words: tuple[FreeWord, ...]

    def rewrite(self, w: FreeWord) -> FreeWord:
        """Image of a rank-n word as a rank-2 word."""
        if w.rank != self.rank:
            raise RankMismatch(f"word rank {w.rank} vs embedding rank {self.rank}")
        return freegrp.substitute(w, self.generator_words)


def schreier_embedding(n: int) -> SchreierEmbedding:
    if n < 2:
        raise InvalidRank(f"embedding needs rank >= 2, got {n}")
    if n == 2:
        return SchreierEmbedding(2, (freegrp.word(2, [1]), freegrp.word(2, [2])))
    m = n - 1
    words = tuple(_schreier_generators(m))
    # construction check: the rewriting over Z/m must give exactly n kernel words
    assert len(words) == n, "Schreier rewriting must give exactly n generators"
    for w in words:
        assert sum(1 if x == 1 else -1 if x == -1 else 0 for x in w.letters) % m == 0
    return SchreierEmbedding(n, words)


def _schreier_generators(m: int) -> list[FreeWord]:
    """Schreier generators of the kernel of a-exponent mod m, transversal a^i.

    Runs the generic transversal rewriting over the finite quotient Z/m and
    keeps the nontrivial words, which come out as a^m and a^i b a^-i.
    """
    transversal = {i: [1] * i for i in range(m)}  # coset i -> word a^i
    gens = []
    seen = set()
    for i in range(m):
        for g in (1, 2):  # letters a, b
            target = (i + 1) % m if g == 1 else i
            w = freegrp.word(2, transversal[i] + [g] + [-x for x in reversed(transversal[target])])
            if w.letters and w.letters not in seen:
                seen.add(w.letters)
                gens.append(w)
    # order them with the a-power generator first to match generator x1
    gens.sort(key=lambda w: (0 if all(x == 1 for x in w.letters) else 1, len(w), w.letters))
    return gens


def embedding_matrices(emb: SchreierEmbedding) -> list[IntegerMatrix]:
    return [matrix_of_word(w) for w in emb.generator_words]


def excluded_primes(m: IntegerMatrix) -> tuple[str, int, list[int]]:
    """Finite prime set outside of which the matrix stays nontrivial mod p.

    Returns (case, chosen entry, primes): for a nonzero off-diagonal entry d
    the excluded primes divide d; otherwise a diagonal entry d with |d| > 1
    is chosen and the excluded primes divide (d-1)(d+1).
    """
    case, entry = _nontriviality_entry(m.entries())
    if case == "off-diagonal":
        return case, entry, sorted(primefactors(entry))
    return case, entry, sorted(set(primefactors(entry - 1)) | set(primefactors(entry + 1)))


def _nontriviality_entry(entries: tuple[int, int, int, int]):
    a, b, c, d = entries
    if (a, b, c, d) in ((1, 0, 0, 1), (-1, 0, 0, -1)):
        raise MatrixIsIdentity("the matrix is +-identity; the word was trivial")
    if b != 0:
        return "off-diagonal", b
    if c != 0:
        return "off-diagonal", c
    for e in (a, d):
        if abs(e) > 1:
            return "diagonal", abs(e)
    raise MatrixIsIdentity("no usable entry; matrix is +-identity")


@dataclass(frozen=True)
class RFCertificate:
    """A verified quotient separating a word from the trivial element."""

    n: int
    alpha: FreeWord
    p: int
    tuple: GroupTuple
    alpha_image: psl2.ProjectiveMatrix
    surjective: bool

    def to_json(self) -> dict:
        table = psl2.table_for(self.p)
        return {
            "schema": "rf_witness.v1",
            "n": self.n,
            "alpha": freegrp.word_text(self.alpha),
            "p": self.p,
            "tuple": [table.index_of(m) for m in self.tuple.entries],
            "alphaImage": list(self.alpha_image.entries()),
            "surjective": self.surjective,
        }


def rf_witness(
    n: int,
    alpha: FreeWord,
    prime_ceiling: int = DEFAULT_PRIME_CEILING,
) -> RFCertificate:
    """Smallest prime p >= 5 whose quotient tuple both surjects and moves alpha.

    Surjectivity is established by closure for each candidate prime, never
    assumed; the returned certificate replays independently of this search.
    """
    if alpha.rank != n:
        raise RankMismatch(f"word rank {alpha.rank} vs requested rank {n}")
    if alpha.is_empty():
        raise TrivialWord("the trivial word lies in every finite-index subgroup")
    emb = schreier_embedding(n)
    rewritten = emb.rewrite(alpha)
    mats = embedding_matrices(emb)

    p = 5
    while p <= prime_ceiling:
        entries = [psl2.make(p, *m.entries()) for m in mats]
        t = GroupTuple(p, tuple(entries))
        image = freegrp.word_evaluate(alpha, t)
        if not image.is_identity() and psl2.generates(p, entries):
            assert image == reduce_mod(matrix_of_word(rewritten), p)
            return RFCertificate(n, alpha, p, t, image, True)
        p = int(nextprime(p))
    raise PrimeCeilingExceeded(
        f"no witness prime <= {prime_ceiling} for {freegrp.word_text(alpha)!r}; "
        f"this contradicts the expected finiteness of excluded primes"
    )


def replay_certificate(cert: RFCertificate) -> bool:
    """Re-run every certificate check from its own data."""
    if cert.alpha.rank != cert.n or cert.tuple.rank != cert.n:
        return False
    if cert.alpha.is_empty():
        return False
    image = freegrp.word_evaluate(cert.alpha, cert.tuple)
    if image != cert.alpha_image or image.is_identity():
        return False
    return psl2.generates(cert.p, cert.tuple.entries)


@dataclass(frozen=True)
class OutActionWitness:
    n: int
    p: int
    moved_class: int
    image_class: int
    class_count: int


def out_rf_witness(
    n: int,
    sigma: FreeAutomorphism,
    pmax: int,
    workers: int = 1,
    budget: int = defsub.DEFAULT_BUDGET,
):
    """Smallest prime p <= pmax where sigma permutes the class table nontrivially.

    Returns an OutActionWitness, or None when every tested action is trivial
    (which is what inner automorphisms produce for every prime).
    """
    if n < 3:
        raise InvalidRank(f"the outer-action witness needs rank >= 3, got {n}")
    if sigma.rank != n:
        raise RankMismatch(f"automorphism rank {sigma.rank} vs {n}")
    p = 5
    while p <= pmax:
        table = defsub.enumerate_classes(n, p, workers=workers, budget=budget)
        perm = defsub.out_action(table, sigma)
        for k, image in enumerate(perm.images):
            if image != k:
                return OutActionWitness(n, p, k, image, len(table))
        p = int(nextprime(p))
    return None


def primes_up_to(limit: int) -> list[int]:
    """Candidate witness primes: 5, 7, 11, ... up to the limit."""
    out = []
    p = 5
    while p <= limit:
        out.append(p)
        p = int(nextprime(p))
    return out
