"""Truncated non-commutative power series and the Magnus model of a free pro-p group.

The algebra A = (Z/p^k)<X_1..X_r> / (words longer than D) carries exact
arithmetic; the group of units with constant term 1 models the free pro-p
group of rank r at truncation, with x_i = 1 + X_i.  Words are interned as
indices into a fixed length-then-lex ordered list, and multiplication runs
over a precomputed concatenation table.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterable

import numpy as np

from .params import TruncParams

Word = tuple[int, ...]


@lru_cache(maxsize=None)
def get_algebra(params: TruncParams, rank: int = 2) -> "MagnusAlgebra":
    return MagnusAlgebra(params, rank)


class MagnusAlgebra:
    """Shared word tables for one (TruncParams, rank) pair."""

    def __init__(self, params: TruncParams, rank: int = 2):
        if rank < 1:
            raise ValueError("rank must be >= 1")
        self.params = params
        self.rank = rank
        self.words: list[Word] = []
        for length in range(params.D + 1):
            self.words.extend(itertools.product(range(rank), repeat=length))
        self.index: dict[Word, int] = {w: i for i, w in enumerate(self.words)}
        self.nwords = len(self.words)
        self._build_mul_table()
        self._subst_cache: dict[tuple[int, ...], np.ndarray] = {}

    def _build_mul_table(self):
        D = self.params.D
        left, right, dst = [], [], []
        by_len: dict[int, list[int]] = {}
        for i, w in enumerate(self.words):
            by_len.setdefault(len(w), []).append(i)
        for lu in range(D + 1):
            for lv in range(D + 1 - lu):
                for iu in by_len[lu]:
                    wu = self.words[iu]
                    for iv in by_len[lv]:
                        left.append(iu)
                        right.append(iv)
                        dst.append(self.index[wu + self.words[iv]])
        self._mul_left = np.asarray(left, dtype=np.int64)
        self._mul_right = np.asarray(right, dtype=np.int64)
        self._mul_dst = np.asarray(dst, dtype=np.int64)

    # -- series constructors -------------------------------------------------
    def zero(self) -> "NCSeries":
        return NCSeries(self, np.zeros(self.nwords, dtype=np.int64))

    def one(self) -> "NCSeries":
        v = np.zeros(self.nwords, dtype=np.int64)
        v[0] = 1
        return NCSeries(self, v)

    def letter(self, i: int) -> "NCSeries":
        """The degree-1 series X_i."""
        if not 0 <= i < self.rank:
            raise ValueError(f"letter index {i} out of range for rank {self.rank}")
        v = np.zeros(self.nwords, dtype=np.int64)
        v[self.index[(i,)]] = 1
        return NCSeries(self, v)

    def from_coeffs(self, coeffs: dict[Word, int]) -> "NCSeries":
        v = np.zeros(self.nwords, dtype=np.int64)
        m = self.params.modulus
        for w, c in coeffs.items():
            if len(w) > self.params.D:
                raise ValueError(f"word longer than truncation: {w}")
            v[self.index[tuple(w)]] = c % m
        return NCSeries(self, v)

    def generator(self, i: int) -> "GroupElement":
        """The group generator x_{i+1} = 1 + X_i."""
        return GroupElement(self.one().add(self.letter(i)))

    def generators(self) -> list["GroupElement"]:
        return [self.generator(i) for i in range(self.rank)]

    def identity(self) -> "GroupElement":
        return GroupElement(self.one())

    def word_degree(self, idx: int) -> int:
        return len(self.words[idx])

    def multidegree(self, w: Word) -> tuple[int, ...]:
        return tuple(w.count(i) for i in range(self.rank))

    def scale_table(self, multipliers: tuple[int, ...]) -> np.ndarray:
        """Per-word factor for the substitution X_i -> multipliers[i] * X_i."""
        key = multipliers
        tab = self._subst_cache.get(key)
        if tab is None:
            m = self.params.modulus
            tab = np.ones(self.nwords, dtype=np.int64)
            for idx, w in enumerate(self.words):
                f = 1
                for letter in w:
                    f = f * multipliers[letter] % m
                tab[idx] = f
            self._subst_cache[key] = tab
        return tab

    def __repr__(self):
        return f"MagnusAlgebra({self.params}, rank={self.rank})"


class NCSeries:
    """Element of the truncated algebra; immutable by convention."""

    __slots__ = ("algebra", "_v")

    def __init__(self, algebra: MagnusAlgebra, v: np.ndarray):
        self.algebra = algebra
        self._v = v

    def _check(self, other: "NCSeries"):
        if other.algebra is not self.algebra:
            raise ValueError("mixed TruncParams or rank")

    def copy_vec(self) -> np.ndarray:
        return self._v.copy()

    def coeff(self, w: Word) -> int:
        return int(self._v[self.algebra.index[tuple(w)]])

    def coeffs(self) -> dict[Word, int]:
        alg = self.algebra
        return {alg.words[i]: int(c) for i, c in enumerate(self._v) if c}

    def is_zero(self) -> bool:
        return not self._v.any()

    def constant_term(self) -> int:
        return int(self._v[0])

    def add(self, other: "NCSeries") -> "NCSeries":
        self._check(other)
        return NCSeries(self.algebra, (self._v + other._v) % self.algebra.params.modulus)

    def sub(self, other: "NCSeries") -> "NCSeries":
        self._check(other)
        return NCSeries(self.algebra, (self._v - other._v) % self.algebra.params.modulus)

    def scale(self, c: int) -> "NCSeries":
        return NCSeries(self.algebra, (self._v * (c % self.algebra.params.modulus))
                        % self.algebra.params.modulus)

    def mul(self, other: "NCSeries") -> "NCSeries":
        self._check(other)
        alg = self.algebra
        prods = self._v[alg._mul_left] * other._v[alg._mul_right]
        # bincount sums stay far below 2^53, so float64 accumulation is exact
        out = np.bincount(alg._mul_dst, weights=prods, minlength=alg.nwords)
        return NCSeries(alg, out.astype(np.int64) % alg.params.modulus)

    def min_degree(self) -> int | None:
        """Total degree of the lowest nonzero component, None if zero."""
        alg = self.algebra
        nz = np.nonzero(self._v)[0]
        if len(nz) == 0:
            return None
        return min(len(alg.words[i]) for i in nz)

    def homogeneous_part(self, degree: int) -> dict[Word, int]:
        alg = self.algebra
        return {alg.words[i]: int(c) for i, c in enumerate(self._v)
                if c and len(alg.words[i]) == degree}

    def truncate_to(self, new_D: int) -> "NCSeries":
        """Image in the algebra with truncation degree new_D <= D."""
        alg = self.algebra
        if new_D > alg.params.D:
            raise ValueError("can only reduce the truncation degree")
        tgt = get_algebra(TruncParams(alg.params.p, alg.params.k, new_D), alg.rank)
        v = np.zeros(tgt.nwords, dtype=np.int64)
        for i, c in enumerate(self._v):
            if c and len(alg.words[i]) <= new_D:
                v[tgt.index[alg.words[i]]] = c
        return NCSeries(tgt, v)

    def __eq__(self, other):
        return (isinstance(other, NCSeries) and other.algebra is self.algebra
                and np.array_equal(self._v, other._v))

    def __hash__(self):
        return hash((id(self.algebra), self._v.tobytes()))

    def to_json_dict(self) -> dict[str, int]:
        """Serialize as {word: coeff} with words as 1-based letter strings."""
        return {"".join(str(l + 1) for l in w): c for w, c in sorted(self.coeffs().items(),
                key=lambda t: (len(t[0]), t[0]))}

    def __repr__(self):
        items = sorted(self.coeffs().items(), key=lambda t: (len(t[0]), t[0]))[:8]
        body = " + ".join(f"{c}*{'X' + ''.join(str(l + 1) for l in w) if w else '1'}"
                          for w, c in items) or "0"
        return f"<NCSeries {body}{' + ...' if len(self.coeffs()) > 8 else ''}>"


class GroupElement:
    """Unit 1 + (augmentation part); the truncated free pro-p group."""

    __slots__ = ("series",)

    def __init__(self, series: NCSeries):
        if series.constant_term() != 1 % series.algebra.params.modulus:
            raise ValueError("group elements need constant term 1")
        self.series = series

    @property
    def algebra(self) -> MagnusAlgebra:
        return self.series.algebra

    def aug(self) -> NCSeries:
        """The augmentation part g - 1."""
        return self.series.sub(self.algebra.one())

    def mul(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.series.mul(other.series))

    def inv(self) -> "GroupElement":
        alg = self.algebra
        u = self.aug()
        acc = alg.one()
        term = alg.one()
        for _ in range(alg.params.D):
            term = term.mul(u).scale(-1)
            acc = acc.add(term)
        return GroupElement(acc)

    def pow(self, e: int) -> "GroupElement":
        """Binomial power sum C(e, j) (g-1)^j; depends on e mod p^k only."""
        alg = self.algebra
        p = alg.params
        u = self.aug()
        acc = alg.one()
        term = alg.one()
        for j in range(1, p.D + 1):
            term = term.mul(u)
            if term.is_zero():
                break
            acc = acc.add(term.scale(p.binomial(e, j)))
        return GroupElement(acc)

    def commutator(self, other: "GroupElement") -> "GroupElement":
        """[self, other] = self other self^-1 other^-1."""
        return self.mul(other).mul(self.inv()).mul(other.inv())

    def conj(self, by: "GroupElement") -> "GroupElement":
        """by * self * by^-1."""
        return by.mul(self).mul(by.inv())

    def log(self) -> NCSeries:
        alg = self.algebra
        u = self.aug()
        acc = alg.zero()
        term = alg.one()
        for n in range(1, alg.params.D + 1):
            term = term.mul(u)
            if term.is_zero():
                break
            sign = 1 if n % 2 == 1 else -1
            acc = acc.add(term.scale(sign * alg.params.inv(n)))
        return acc

    def is_identity(self) -> bool:
        return self.aug().is_zero()

    def truncate_to(self, new_D: int) -> "GroupElement":
        return GroupElement(self.series.truncate_to(new_D))

    def __eq__(self, other):
        return isinstance(other, GroupElement) and self.series == other.series

    def __hash__(self):
        return hash(self.series)

    def __repr__(self):
        return f"<GroupElement {self.series!r}>"


def exp_series(s: NCSeries) -> GroupElement:
    """exp of a series with zero constant term; inverse of GroupElement.log."""
    alg = s.algebra
    if s.constant_term() != 0:
        raise ValueError("exp needs zero constant term")
    acc = alg.one()
    term = alg.one()
    from math import factorial
    for n in range(1, alg.params.D + 1):
        term = term.mul(s)
        if term.is_zero():
            break
        acc = acc.add(term.scale(alg.params.inv(factorial(n) % alg.params.modulus)))
    return GroupElement(acc)


def bracket(a: NCSeries, b: NCSeries) -> NCSeries:
    """Associative Lie bracket ab - ba."""
    return a.mul(b).sub(b.mul(a))


def product(elements: Iterable[GroupElement], algebra: MagnusAlgebra) -> GroupElement:
    acc = algebra.identity()
    for g in elements:
        acc = acc.mul(g)
    return acc
