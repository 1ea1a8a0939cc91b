"""Reduced words in free groups, automorphisms, and tuple homomorphisms.

Words are flat sequences of signed 1-based generator indices (i for x_i,
-i for its inverse), kept freely reduced.  A rank-n tuple of PSL(2,p)
elements represents the homomorphism sending x_i to the i-th entry;
automorphisms act on tuples by precomposition with their inverse, so the
induced map on kernels is N -> sigma(N) and the action is a left action.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import psl2
from .errors import IndexOutOfRange, InvalidRank, PrimeMismatch, RankMismatch
from .psl2 import ProjectiveMatrix


@dataclass(frozen=True)
class FreeWord:
    rank: int
    letters: tuple[int, ...]

    def __len__(self):
        return len(self.letters)

    def is_empty(self) -> bool:
        return not self.letters


def reduce_letters(letters) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def word(rank: int, letters=()) -> FreeWord:
    """Freely reduced word of the given rank; validates letter indices."""
    if rank < 1:
        raise InvalidRank(f"rank must be >= 1, got {rank}")
    letters = tuple(int(x) for x in letters)
    for x in letters:
        if x == 0 or abs(x) > rank:
            raise IndexOutOfRange(f"letter {x} invalid for rank {rank}")
    return FreeWord(rank, reduce_letters(letters))


def word_mul(u: FreeWord, v: FreeWord) -> FreeWord:
    if u.rank != v.rank:
        raise RankMismatch(f"rank {u.rank} vs {v.rank}")
    return FreeWord(u.rank, reduce_letters(u.letters + v.letters))


def word_inv(u: FreeWord) -> FreeWord:
    return FreeWord(u.rank, tuple(-x for x in reversed(u.letters)))


def word_conj(u: FreeWord, by: FreeWord) -> FreeWord:
    """by * u * by^{-1}."""
    return word_mul(word_mul(by, u), word_inv(by))


_TOKEN = re.compile(r"([xX])(\d+)|\.|\s+")


def parse_word(rank: int, text: str) -> FreeWord:
    """Parse the text encoding: x3 is a generator, X3 its inverse, '.' optional.

    The empty string (or "1") is the empty word.
    """
    if text in ("", "1"):
        return word(rank)
    letters = []
    pos = 0
    for m in _TOKEN.finditer(text):
        if m.start() != pos:
            break
        pos = m.end()
        if m.group(1):
            i = int(m.group(2))
            letters.append(i if m.group(1) == "x" else -i)
    if pos != len(text):
        raise IndexOutOfRange(f"cannot parse word text {text!r} at offset {pos}")
    return word(rank, letters)


def word_text(w: FreeWord) -> str:
    return ".".join(f"x{x}" if x > 0 else f"X{-x}" for x in w.letters)


@dataclass(frozen=True)
class GroupTuple:
    """A homomorphism F_n -> PSL(2,p), as the images of the generators."""

    p: int
    entries: tuple[ProjectiveMatrix, ...]

    def __post_init__(self):
        for m in self.entries:
            if m.p != self.p:
                raise PrimeMismatch(f"entry over p={m.p} in a p={self.p} tuple")

    @property
    def rank(self) -> int:
        return len(self.entries)


def word_evaluate(w: FreeWord, t: GroupTuple) -> ProjectiveMatrix:
    if w.rank != t.rank:
        raise RankMismatch(f"word rank {w.rank} vs tuple rank {t.rank}")
    acc = psl2.identity(t.p)
    for x in w.letters:
        m = t.entries[abs(x) - 1]
        acc = psl2.mul(acc, m if x > 0 else psl2.inv(m))
    return acc


def substitute(w: FreeWord, images: tuple[FreeWord, ...]) -> FreeWord:
    """Image of w under the endomorphism x_i -> images[i-1]."""
    target_rank = images[0].rank
    letters: list[int] = []
    for x in w.letters:
        img = images[abs(x) - 1]
        letters.extend(img.letters if x > 0 else word_inv(img).letters)
    return FreeWord(target_rank, reduce_letters(letters))


@dataclass(frozen=True)
class FreeAutomorphism:
    """An automorphism of F_n given by generator images plus a verified inverse table."""

    rank: int
    images: tuple[FreeWord, ...]
    inverse_images: tuple[FreeWord, ...]
    label: str = field(default="", compare=False)

    def __post_init__(self):
        n = self.rank
        if len(self.images) != n or len(self.inverse_images) != n:
            raise RankMismatch("image table length does not match rank")
        gens = [word(n, [i + 1]) for i in range(n)]
        for i in range(n):
            if substitute(self.inverse_images[i], self.images) != gens[i]:
                raise InvalidRank(f"inverse table fails on x{i + 1} (forward after inverse)")
            if substitute(self.images[i], self.inverse_images) != gens[i]:
                raise InvalidRank(f"inverse table fails on x{i + 1} (inverse after forward)")

    def apply_to_word(self, w: FreeWord) -> FreeWord:
        return substitute(w, self.images)

    def is_identity(self) -> bool:
        return all(img.letters == (i + 1,) for i, img in enumerate(self.images))


def automorphism(rank: int, images, inverse_images, label: str = "") -> FreeAutomorphism:
    return FreeAutomorphism(
        rank,
        tuple(w if isinstance(w, FreeWord) else word(rank, w) for w in images),
        tuple(w if isinstance(w, FreeWord) else word(rank, w) for w in inverse_images),
        label,
    )


def identity_automorphism(n: int) -> FreeAutomorphism:
    gens = [[i + 1] for i in range(n)]
    return automorphism(n, gens, gens)


def compose(sigma: FreeAutomorphism, tau: FreeAutomorphism) -> FreeAutomorphism:
    """sigma after tau: x -> sigma(tau(x))."""
    if sigma.rank != tau.rank:
        raise RankMismatch(f"rank {sigma.rank} vs {tau.rank}")
    images = tuple(substitute(w, sigma.images) for w in tau.images)
    inverse = tuple(substitute(w, tau.inverse_images) for w in sigma.inverse_images)
    return FreeAutomorphism(sigma.rank, images, inverse)


def inverse_automorphism(sigma: FreeAutomorphism) -> FreeAutomorphism:
    return FreeAutomorphism(sigma.rank, sigma.inverse_images, sigma.images)


def inner_automorphism(n: int, w: FreeWord) -> FreeAutomorphism:
    """Conjugation x -> w x w^{-1}."""
    if w.rank != n:
        raise RankMismatch(f"conjugator rank {w.rank} vs {n}")
    gens = [word(n, [i + 1]) for i in range(n)]
    return FreeAutomorphism(
        n,
        tuple(word_conj(g, w) for g in gens),
        tuple(word_conj(g, word_inv(w)) for g in gens),
    )


def nielsen_generators(n: int) -> list[FreeAutomorphism]:
    """The standard Nielsen generating set of Aut(F_n).

    Cyclic generator permutation, the transposition x1 <-> x2, the inversion
    x1 -> x1^{-1}, and the transvection x1 -> x1 x2; duplicates collapse at
    n = 2 where the cycle and the transposition coincide.
    """
    if n < 2:
        raise InvalidRank(f"Nielsen generators need rank >= 2, got {n}")
    ident = [[i + 1] for i in range(n)]

    cycle = automorphism(
        n,
        [[i % n + 1] for i in range(1, n + 1)],
        [[(i - 2) % n + 1] for i in range(1, n + 1)],
        "cycle",
    )
    swap_tbl = [[2], [1]] + ident[2:]
    swap = automorphism(n, swap_tbl, swap_tbl, "transposition")
    inv_tbl = [[-1]] + ident[1:]
    inversion = automorphism(n, inv_tbl, inv_tbl, "inversion")
    transvection = automorphism(n, [[1, 2]] + ident[1:], [[1, -2]] + ident[1:], "transvection")

    gens = [cycle, swap, inversion, transvection]
    out: list[FreeAutomorphism] = []
    for g in gens:
        if all(g.images != h.images for h in out):
            out.append(g)
    return out


def apply_automorphism(sigma: FreeAutomorphism, t: GroupTuple) -> GroupTuple:
    """Left action on tuples: entry i becomes the value of sigma^{-1}(x_i).

    The induced map on kernels of the represented homomorphisms is
    N -> sigma(N).
    """
    if sigma.rank != t.rank:
        raise RankMismatch(f"automorphism rank {sigma.rank} vs tuple rank {t.rank}")
    return GroupTuple(t.p, tuple(word_evaluate(w, t) for w in sigma.inverse_images))
