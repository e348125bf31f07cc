"""Bigraded free Lie algebras in Lyndon-basis coordinates over Z/p^k.

Lyndon words (with respect to a fixed letter priority that puts x2 before
x1, so [x2, x1] is a basis element) index a Z-basis of the free Lie
algebra; the standard bracketing of a Lyndon word expands associatively
as the word itself plus lexicographically larger words of the same
multidegree, which makes conversion from associative Lie polynomials an
exact unitriangular solve.  On top of this sit Witt rank oracles, the
two-variable graded filtration ideals with stored group-word lifts, the
subalgebra rank check, and the graded model of the fastest central
filtration on a weighted alphabet.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb, gcd

from .howell import HowellBasis
from .magnus import GroupElement, MagnusAlgebra, get_algebra
from .params import TruncParams

Word = tuple[int, ...]
Coords = dict[Word, int]
MDeg = tuple[int, ...]


class NotLieError(ValueError):
    """The associative polynomial is not a Lie element."""


# -- counting oracles ----------------------------------------------------------

def _mobius(n: int) -> int:
    if n == 1:
        return 1
    out, f = 1, 2
    while f * f <= n:
        if n % f == 0:
            n //= f
            if n % f == 0:
                return 0
            out = -out
        f += 1
    if n > 1:
        out = -out
    return out


def bidegree_witt(a: int, b: int) -> int:
    """Rank of the (a, b) component of the free Lie algebra on two letters."""
    n = a + b
    if n == 0:
        return 0
    if n == 1:
        return 1
    total = 0
    for d in range(1, gcd(a, b) + 1):
        if a % d == 0 and b % d == 0:
            total += _mobius(d) * comb(n // d, a // d)
    return total // n


def witt_ranks(weight_counts: dict[int, int], maxdeg: int) -> dict[int, int]:
    """Graded ranks d_n of the free Lie algebra on a weighted alphabet.

    Solves prod_n (1 - t^n)^{d_n} = 1 - f(t) over the integers by
    extracting one degree at a time, where f counts generators by weight.
    """
    for w in weight_counts:
        if w < 1:
            raise ValueError("generator weights must be >= 1")
    f = [0] * (maxdeg + 1)
    for w, c in weight_counts.items():
        if w <= maxdeg:
            f[w] += c
    series = [-x for x in f]
    series[0] = 1  # 1 - f(t)
    dims: dict[int, int] = {}
    for n in range(1, maxdeg + 1):
        d = -series[n]
        dims[n] = d
        if d:
            # divide by (1 - t^n)^d, i.e. multiply by sum C(d+j-1, j) t^{nj}
            out = [0] * (maxdeg + 1)
            j = 0
            while n * j <= maxdeg:
                c = comb(d + j - 1, j)
                for i in range(0, maxdeg + 1 - n * j):
                    out[i + n * j] += series[i] * c
                j += 1
            series = out
    return dims


# -- the Lyndon machinery --------------------------------------------------------

class FreeLieAlgebra:
    """Free Lie algebra on weighted letters, truncated at a weighted degree."""

    def __init__(self, params: TruncParams, rank: int, maxdeg: int,
                 weights: tuple[int, ...] | None = None):
        self.params = params
        self.rank = rank
        self.maxdeg = maxdeg
        self.weights = weights if weights is not None else (1,) * rank
        if len(self.weights) != rank or any(w < 1 for w in self.weights):
            raise ValueError("need one positive weight per letter")
        # letter priority: descending index, so that (x2, x1) is Lyndon
        self._rank_of = {letter: pos for pos, letter in enumerate(reversed(range(rank)))}
        self.basis_by_mdeg: dict[MDeg, list[Word]] = {}
        self.basis_by_deg: dict[int, list[Word]] = {}
        self._gen_words()
        self._expn: dict[Word, Coords] = {}
        self._pair: dict[tuple[Word, Word], Coords] = {}

    # degree bookkeeping
    def wdeg(self, w: Word) -> int:
        return sum(self.weights[l] for l in w)

    def mdeg(self, w: Word) -> MDeg:
        return tuple(w.count(i) for i in range(self.rank))

    def mdeg_wdeg(self, md: MDeg) -> int:
        return sum(c * self.weights[i] for i, c in enumerate(md))

    def _key(self, w: Word) -> tuple[int, ...]:
        return tuple(self._rank_of[l] for l in w)

    def _is_lyndon(self, w: Word) -> bool:
        if len(w) == 0:
            return False
        k = self._key(w)
        return all(k < k[i:] for i in range(1, len(w)))

    def _gen_words(self):
        words: list[Word] = [()]
        all_words: list[Word] = []
        while words:
            nxt: list[Word] = []
            for w in words:
                for l in range(self.rank):
                    w2 = w + (l,)
                    if self.wdeg(w2) <= self.maxdeg:
                        nxt.append(w2)
                        all_words.append(w2)
            words = nxt
        for w in all_words:
            if self._is_lyndon(w):
                self.basis_by_mdeg.setdefault(self.mdeg(w), []).append(w)
                self.basis_by_deg.setdefault(self.wdeg(w), []).append(w)
        for lst in self.basis_by_mdeg.values():
            lst.sort(key=self._key)
        for lst in self.basis_by_deg.values():
            lst.sort(key=lambda w: (len(w), self._key(w)))

    def std_factor(self, w: Word) -> tuple[Word, Word]:
        """Standard factorization w = uv, v the lex-least proper suffix."""
        best = 1
        for i in range(2, len(w)):
            if self._key(w[i:]) < self._key(w[best:]):
                best = i
        return w[:best], w[best:]

    def expansion(self, w: Word) -> Coords:
        """Associative polynomial of the standard bracketing of w."""
        e = self._expn.get(w)
        if e is None:
            if len(w) == 1:
                e = {w: 1}
            else:
                u, v = self.std_factor(w)
                e = self._poly_bracket(self.expansion(u), self.expansion(v))
            self._expn[w] = e
        return e

    def _poly_mul(self, a: Coords, b: Coords) -> Coords:
        m = self.params.modulus
        out: Coords = {}
        for wu, cu in a.items():
            for wv, cv in b.items():
                w = wu + wv
                if self.wdeg(w) <= self.maxdeg:
                    out[w] = (out.get(w, 0) + cu * cv) % m
        return {w: c for w, c in out.items() if c}

    def _poly_bracket(self, a: Coords, b: Coords) -> Coords:
        m = self.params.modulus
        out = dict(self._poly_mul(a, b))
        for w, c in self._poly_mul(b, a).items():
            out[w] = (out.get(w, 0) - c) % m
        return {w: c for w, c in out.items() if c}

    def to_coords(self, poly: Coords) -> Coords:
        """Lyndon coordinates of an associative Lie polynomial.

        Unitriangular back-substitution per multidegree; raises NotLieError
        if a residue with a non-Lyndon leading word remains.
        """
        m = self.params.modulus
        buckets: dict[MDeg, Coords] = {}
        for w, c in poly.items():
            c %= m
            if c:
                buckets.setdefault(self.mdeg(w), {})[w] = c
        coords: Coords = {}
        for md, part in buckets.items():
            while part:
                wmin = min(part, key=self._key)
                if not self._is_lyndon(wmin):
                    raise NotLieError(f"leading word {wmin} is not Lyndon")
                c = part[wmin]
                coords[wmin] = (coords.get(wmin, 0) + c) % m
                for w2, c2 in self.expansion(wmin).items():
                    part[w2] = (part.get(w2, 0) - c * c2) % m
                part = {w: v for w, v in part.items() if v}
        return {w: c for w, c in coords.items() if c}

    def pair_coords(self, wu: Word, wv: Word) -> Coords:
        """Structure constants: Lyndon coordinates of [b(wu), b(wv)]."""
        key = (wu, wv)
        sc = self._pair.get(key)
        if sc is None:
            if self.wdeg(wu) + self.wdeg(wv) > self.maxdeg:
                sc = {}
            else:
                sc = self.to_coords(self._poly_bracket(self.expansion(wu),
                                                       self.expansion(wv)))
            self._pair[key] = sc
        return sc

    def bracket(self, a: Coords, b: Coords) -> Coords:
        m = self.params.modulus
        out: Coords = {}
        for wu, cu in a.items():
            for wv, cv in b.items():
                c = cu * cv % m
                if not c:
                    continue
                for w, s in self.pair_coords(wu, wv).items():
                    out[w] = (out.get(w, 0) + c * s) % m
        return {w: c for w, c in out.items() if c}

    def coords_degree(self, coords: Coords) -> int | None:
        degs = {self.wdeg(w) for w in coords}
        if not degs:
            return None
        if len(degs) > 1:
            raise ValueError("inhomogeneous coordinates")
        return degs.pop()

    def vector(self, md: MDeg, coords: Coords) -> list[int]:
        basis = self.basis_by_mdeg.get(md, [])
        idx = {w: i for i, w in enumerate(basis)}
        v = [0] * len(basis)
        for w, c in coords.items():
            v[idx[w]] = c % self.params.modulus
        return v

    def unvector(self, md: MDeg, vec: list[int]) -> Coords:
        basis = self.basis_by_mdeg.get(md, [])
        return {basis[i]: c for i, c in enumerate(vec) if c}


# -- rank-two context bound to a Magnus algebra -----------------------------------

@lru_cache(maxsize=None)
def get_context(params: TruncParams, rank: int = 2) -> "LieContext":
    return LieContext(get_algebra(params, rank))


class LieContext:
    """Couples the free Lie algebra with its Magnus group model."""

    def __init__(self, algebra: MagnusAlgebra):
        self.algebra = algebra
        self.lie = FreeLieAlgebra(algebra.params, algebra.rank, algebra.params.D)
        self._lifts: dict[Word, GroupElement] = {}
        self._ideals: dict[MDeg, GradedIdeal] = {}

    @property
    def params(self) -> TruncParams:
        return self.algebra.params

    def group_lift(self, w: Word) -> GroupElement:
        """Group word whose log has leading Lie term the basis element of w."""
        g = self._lifts.get(w)
        if g is None:
            if len(w) == 1:
                g = self.algebra.generator(w[0])
            else:
                u, v = self.lie.std_factor(w)
                g = self.group_lift(u).commutator(self.group_lift(v))
            self._lifts[w] = g
        return g

    def leading_parts(self, g: GroupElement) -> tuple[int, dict[MDeg, Coords]] | None:
        """Minimal degree of log g with its per-multidegree Lie coordinates.

        Returns None for the identity; raises NotLieError when the leading
        homogeneous component is not a Lie element (the element is then
        outside the Magnus image of the free group).
        """
        s = g.log()
        d = s.min_degree()
        if d is None:
            return None
        parts: dict[MDeg, Coords] = {}
        for w, c in s.homogeneous_part(d).items():
            parts.setdefault(self.algebra.multidegree(w), {})[w] = c
        out = {md: self.lie.to_coords(poly) for md, poly in parts.items()}
        return d, {md: co for md, co in out.items() if co}

    # -- two-variable graded filtration ideals ---------------------------------
    def filtration_ideal(self, m: tuple[int, int]) -> "GradedIdeal":
        m = tuple(m)
        if len(m) != self.algebra.rank:
            raise ValueError("index arity must match the rank")
        if any(x < 0 for x in m) or all(x == 0 for x in m):
            raise ValueError(f"bad filtration index {m}")
        ideal = self._ideals.get(m)
        if ideal is None:
            ideal = self._build_ideal(m)
            self._ideals[m] = ideal
        return ideal

    def _build_ideal(self, m: MDeg) -> "GradedIdeal":
        D = self.params.D
        if sum(m) == 1:
            letter = m.index(1)
            gens: dict[MDeg, list[tuple[list[int], GroupElement]]] = {}
            for md, basis in self.lie.basis_by_mdeg.items():
                if md[letter] >= 1:
                    for i, w in enumerate(basis):
                        vec = [0] * len(basis)
                        vec[i] = 1
                        gens.setdefault(md, []).append((vec, self.group_lift(w)))
            comps = {md: IdealComponent(self, md, lst) for md, lst in gens.items()}
            return GradedIdeal(self, m, comps)
        comps: dict[MDeg, IdealComponent] = {}
        for m1 in self._decompositions(m):
            m2 = tuple(a - b for a, b in zip(m, m1))
            A = self.filtration_ideal(m1)
            B = self.filtration_ideal(m2)
            for mdA, compA in A.components.items():
                for mdB, compB in B.components.items():
                    target = tuple(a + b for a, b in zip(mdA, mdB))
                    if sum(target) > D:
                        continue
                    self._bracket_into(comps, target, compA, compB)
        return GradedIdeal(self, m, comps)

    def _decompositions(self, m: MDeg) -> list[MDeg]:
        """First halves of unordered decompositions m = m1 + m2, both nonzero."""
        out = []
        seen = set()
        for a in range(m[0] + 1):
            for b in range(m[1] + 1):
                m1 = (a, b)
                m2 = (m[0] - a, m[1] - b)
                if m1 == (0, 0) or m2 == (0, 0):
                    continue
                if (m2, m1) in seen:
                    continue
                seen.add((m1, m2))
                out.append(m1)
        return out

    def _bracket_into(self, comps: dict[MDeg, "IdealComponent"], target: MDeg,
                      compA: "IdealComponent", compB: "IdealComponent"):
        basis = self.lie.basis_by_mdeg.get(target, [])
        if not basis:
            return
        comp = comps.get(target)
        if comp is None:
            comp = IdealComponent(self, target, [])
            comps[target] = comp
        if comp.is_full():
            return
        for vecA, liftA in compA.spanning():
            coordsA = self.lie.unvector(compA.md, vecA)
            for vecB, liftB in compB.spanning():
                if comp.is_full():
                    return
                coordsB = self.lie.unvector(compB.md, vecB)
                br = self.lie.bracket(coordsA, coordsB)
                if not br:
                    continue
                comp.add(self.lie.vector(target, br), liftA.commutator(liftB))

    def lower_central_ideal(self, n: int) -> "GradedIdeal":
        """Full Lie components in degrees >= n, with Lyndon lifts."""
        key = ("lc", n)
        ideal = self._ideals.get(key)  # type: ignore[arg-type]
        if ideal is None:
            comps = {}
            for md, basis in self.lie.basis_by_mdeg.items():
                if sum(md) >= n:
                    lst = []
                    for i, w in enumerate(basis):
                        vec = [0] * len(basis)
                        vec[i] = 1
                        lst.append((vec, self.group_lift(w)))
                    comps[md] = IdealComponent(self, md, lst)
            ideal = GradedIdeal(self, ("lc", n), comps)  # type: ignore[arg-type]
            self._ideals[key] = ideal  # type: ignore[index]
        return ideal


class IdealComponent:
    """One multidegree slice of a graded ideal: canonical basis plus lifts."""

    def __init__(self, ctx: LieContext, md: MDeg, gens: list[tuple[list[int], GroupElement]]):
        self.ctx = ctx
        self.md = md
        self.dim = len(ctx.lie.basis_by_mdeg.get(md, []))
        self._gen_lifts: list[GroupElement] = []
        self.basis = HowellBasis(ctx.params, self.dim, track=True)
        for vec, lift in gens:
            self.add(vec, lift)

    def add(self, vec: list[int], lift: GroupElement):
        tag = len(self._gen_lifts)
        self._gen_lifts.append(lift)
        self.basis.insert(vec, gen_index=tag)

    def is_full(self) -> bool:
        return self.basis.unit_rank == self.dim

    def rank(self) -> int:
        return len(self.basis)

    def spanning(self) -> list[tuple[list[int], GroupElement]]:
        """Canonical rows with group lifts matching their leading terms."""
        out = []
        for pos in range(len(self.basis.rows)):
            lift = self._row_lift(pos)
            out.append((list(self.basis.rows[pos]), lift))
        return out

    def _row_lift(self, pos: int) -> GroupElement:
        combo = self.basis.combos[pos]
        g = self.ctx.algebra.identity()
        for tag, c in combo.items():
            if c:
                g = g.mul(self._gen_lifts[tag].pow(c))
        return g

    def reduce_with_lift(self, vec: list[int]) -> tuple[list[int], GroupElement]:
        rem, used = self.basis.reduce(vec)
        g = self.ctx.algebra.identity()
        for tag, c in used.items():
            if c:
                g = g.mul(self._gen_lifts[tag].pow(c))
        return rem, g

    def contains(self, vec: list[int]) -> bool:
        return self.basis.contains(vec)


class GradedIdeal:
    def __init__(self, ctx: LieContext, m, components: dict[MDeg, IdealComponent]):
        self.ctx = ctx
        self.m = m
        self.components = {md: c for md, c in components.items() if c.rank() > 0}

    def component(self, md: MDeg) -> IdealComponent | None:
        return self.components.get(md)

    def contains_coords(self, md: MDeg, coords: Coords) -> bool:
        comp = self.components.get(md)
        vec = self.ctx.lie.vector(md, coords)
        if comp is None:
            return not any(vec)
        return comp.contains(vec)

    def contains_ideal(self, other: "GradedIdeal") -> bool:
        """Per-multidegree span containment of other inside self."""
        for md, comp in other.components.items():
            mine = self.components.get(md)
            if mine is None:
                if comp.rank() > 0:
                    return False
            elif not all(mine.contains(r) for r in comp.basis.rows):
                return False
        return True

    def equals(self, other: "GradedIdeal") -> bool:
        if set(self.components) != set(other.components):
            return False
        return all(self.components[md].basis == other.components[md].basis
                   for md in self.components)


# -- spec-level operations ---------------------------------------------------------

def hall_basis(params: TruncParams, maxdeg: int, rank: int = 2) -> list[tuple[Word, MDeg]]:
    """Hall family (Lyndon) up to total degree maxdeg with multidegrees."""
    if maxdeg > params.D:
        raise ValueError(f"maxdeg {maxdeg} exceeds truncation {params.D}")
    ctx = get_context(params, rank)
    out = []
    for d in range(1, maxdeg + 1):
        for w in ctx.lie.basis_by_deg.get(d, []):
            out.append((w, ctx.lie.mdeg(w)))
    return out


def subalgebra_rank_check(lie: FreeLieAlgebra, generators: list[Coords],
                          maxdeg: int) -> dict:
    """Ranks of the bracket closure per degree, compared against Witt dims.

    Generators must be homogeneous; the induced alphabet assigns each one
    its degree as weight.  Free through maxdeg iff the ranks match.
    """
    weights: dict[int, int] = {}
    gens_by_deg: dict[int, list[Coords]] = {}
    for g in generators:
        d = lie.coords_degree(g)
        if d is None:
            raise ValueError("zero generator")
        weights[d] = weights.get(d, 0) + 1
        gens_by_deg.setdefault(d, []).append(g)
    expected = witt_ranks(weights, maxdeg)
    span: dict[int, tuple[HowellBasis, list[Coords]]] = {}
    ranks: dict[int, int] = {}
    for d in range(1, maxdeg + 1):
        cands: list[Coords] = list(gens_by_deg.get(d, []))
        for d1 in range(1, d):
            d2 = d - d1
            if d1 > d2:
                break
            b1 = span.get(d1)
            b2 = span.get(d2)
            if not b1 or not b2:
                continue
            lst1, lst2 = b1[1], b2[1]
            for i, u in enumerate(lst1):
                start = i + 1 if d1 == d2 else 0
                for v in (lst2[start:] if d1 == d2 else lst2):
                    br = lie.bracket(u, v)
                    if br:
                        cands.append(br)
        basis_words = lie.basis_by_deg.get(d, [])
        idx = {w: i for i, w in enumerate(basis_words)}
        h = HowellBasis(lie.params, len(basis_words))
        for c in cands:
            vec = [0] * len(basis_words)
            for w, cc in c.items():
                vec[idx[w]] = cc
            h.insert(vec)
        # canonical rows double as the spanning list for brackets upward
        kept = [{basis_words[i]: c for i, c in enumerate(row) if c} for row in h.rows]
        span[d] = (h, kept)
        ranks[d] = h.unit_rank
    free = all(ranks.get(d, 0) == expected.get(d, 0) for d in range(1, maxdeg + 1))
    witness = None
    if not free:
        witness = next(d for d in range(1, maxdeg + 1)
                       if ranks.get(d, 0) != expected.get(d, 0))
    return {"ranks": ranks, "expected": expected, "free": free,
            "first_mismatch_degree": witness}


def fastest_filtration_ranks(weights: list[int], n: int, maxdeg: int,
                             params: TruncParams) -> dict:
    """Graded model of the fastest central filtration over a weighted alphabet.

    The alphabet is truncated to letters of weight <= n; the filtration
    F^m is generated by the surviving letters of weight >= m together with
    brackets [F^{m'}, F^{m''}] (m', m'' < m <= m' + m''), closed into an
    ideal degreewise.  For each m the degree-m piece is tested against the
    bracket-length layer r_m = floor(m/n) + 1; letters of weight in [m, n]
    are layer-1 seeds and are reported separately (they occur only for
    m <= n, where the bound's content is trivial).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    kept = [w for w in weights if w <= n]
    lie = FreeLieAlgebra(params, len(kept), maxdeg, tuple(kept))
    letters = {i: kept[i] for i in range(len(kept))}

    def close_ideal(vecs_by_deg: dict[int, list[Coords]]) -> dict[int, list[Coords]]:
        out: dict[int, list[Coords]] = {}
        for d in sorted(set(vecs_by_deg) | set(range(1, maxdeg + 1))):
            cands = list(vecs_by_deg.get(d, []))
            for i, w in letters.items():
                dl = d - w
                if dl >= 1:
                    for v in out.get(dl, []):
                        br = lie.bracket(v, {(i,): 1})
                        if br:
                            cands.append(br)
            out[d] = _reduce_span(lie, d, cands)
        return out

    filt: dict[int, dict[int, list[Coords]]] = {}
    full = {d: [{w: 1} for w in lie.basis_by_deg.get(d, [])] for d in range(1, maxdeg + 1)}
    filt[1] = full
    for m in range(2, maxdeg + 1):
        vecs: dict[int, list[Coords]] = {}
        for i, w in letters.items():
            if w >= m:
                vecs.setdefault(w, []).append({(i,): 1})
        for m1 in range(1, m):
            for m2 in range(max(1, m - m1), m):
                if m2 < m1:
                    continue
                for d1, lst1 in filt[m1].items():
                    for d2, lst2 in filt[m2].items():
                        if d1 + d2 > maxdeg:
                            continue
                        for a in lst1:
                            for b in lst2:
                                br = lie.bracket(a, b)
                                if br:
                                    vecs.setdefault(d1 + d2, []).append(br)
        filt[m] = close_ideal(vecs)
    table = []
    ok_all = True
    for m in range(2, maxdeg + 1):
        r_m = m // n + 1
        piece = filt[m].get(m, [])
        seeds = sum(1 for w in kept if m <= w)
        bad = []
        for v in piece:
            short = {w: c for w, c in v.items() if len(w) < r_m}
            if short:
                if len(short) == 1 and len(next(iter(short))) == 1 and m <= n:
                    continue  # surviving seed letter, trivial layer-1 bound
                bad.append(short)
        verdict = not bad
        ok_all = ok_all and verdict
        table.append({"m": m, "r_m": r_m, "contained": verdict,
                      "seed_survivors": seeds if m <= n else 0})
    return {"n": n, "maxdeg": maxdeg, "table": table, "all_contained": ok_all}


def _reduce_span(lie: FreeLieAlgebra, d: int, cands: list[Coords]) -> list[Coords]:
    basis_words = lie.basis_by_deg.get(d, [])
    if not basis_words:
        return []
    idx = {w: i for i, w in enumerate(basis_words)}
    h = HowellBasis(lie.params, len(basis_words))
    for c in cands:
        vec = [0] * len(basis_words)
        for w, cc in c.items():
            vec[idx[w]] = cc
        h.insert(vec)
    return [{basis_words[i]: c for i, c in enumerate(row) if c} for row in h.rows]
