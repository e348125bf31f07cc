"""Two-variable filtration membership and the automorphism-side filtration.

Group-level membership in the bigraded subgroups is decided by leading-term
reduction: the minimal-degree Lie component of log g is tested against the
graded ideal, the stored group-word lift of the matching combination is
divided off, and the loop repeats on the strictly deeper residual.  On the
automorphism side the defect characterization (f(x)x^-1 and f(y)y^-1 land
one step deeper in each variable) drives membership, comparison maps into
graded quotients, and the equivariance checks; torus lifts construct
concrete automorphisms with prescribed diagonal characters and an exact
twist on the inertia generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random

from .howell import nullspace, solve
from .lie import GradedIdeal, LieContext, NotLieError, get_context
from .magnus import GroupElement, MagnusAlgebra, exp_series
from .params import TruncParams

BiDeg = tuple[int, int]

IN = "in"
OUT = "out"
UNDECIDED = "undecidable_at_truncation"


class NotDiagonalError(ValueError):
    """Automorphism does not act diagonally on the abelianization."""


@dataclass
class MembershipVerdict:
    status: str
    witness_bidegree: BiDeg | None = None
    witness_component: dict | None = None

    @property
    def is_in(self) -> bool:
        return self.status == IN

    def witness_str(self) -> str | None:
        if self.witness_bidegree is None:
            return None
        return f"({self.witness_bidegree[0]},{self.witness_bidegree[1]})"


def _ideal_membership(g: GroupElement, ideal: GradedIdeal, ctx: LieContext) -> MembershipVerdict:
    cur = g
    for _ in range(ctx.params.D + 2):
        if cur.is_identity():
            return MembershipVerdict(IN)
        try:
            led = ctx.leading_parts(cur)
        except NotLieError:
            s = cur.log()
            d = s.min_degree()
            mds = sorted(ctx.algebra.multidegree(w) for w in s.homogeneous_part(d))
            return MembershipVerdict(OUT, mds[0], {"reason": "leading term is not a Lie element"})
        d, parts = led
        correction = ctx.algebra.identity()
        for md in sorted(parts):
            comp = ideal.components.get(md)
            vec = ctx.lie.vector(md, parts[md])
            if comp is None:
                return MembershipVerdict(OUT, md, _display(ctx, parts[md]))
            rem, lift = comp.reduce_with_lift(vec)
            if any(rem):
                return MembershipVerdict(OUT, md, _display(ctx, ctx.lie.unvector(md, rem)))
            correction = correction.mul(lift)
        nxt = correction.inv().mul(cur)
        nd = nxt.log().min_degree()
        if nd is not None and nd <= d:
            raise RuntimeError("reduction failed to make progress")
        cur = nxt
    raise RuntimeError("reduction exceeded the degree bound")


def _display(ctx: LieContext, coords) -> dict:
    return {"".join(str(l + 1) for l in w): c for w, c in sorted(coords.items())}


def pi_membership(g: GroupElement, m: BiDeg, ctx: LieContext | None = None) -> MembershipVerdict:
    """Membership of g in the two-variable subgroup indexed by m, at truncation."""
    ctx = ctx or get_context(g.algebra.params, g.algebra.rank)
    m = (int(m[0]), int(m[1]))
    if min(m) < 0 or m == (0, 0):
        raise ValueError(f"bad filtration index {m}")
    if sum(m) > ctx.params.D + 1:
        raise ValueError(f"index {m} exceeds visible degrees (D={ctx.params.D})")
    return _ideal_membership(g, ctx.filtration_ideal(m), ctx)


def lc_membership(g: GroupElement, n: int, ctx: LieContext | None = None) -> MembershipVerdict:
    """Lower-central-series membership at truncation (total degree >= n)."""
    ctx = ctx or get_context(g.algebra.params, g.algebra.rank)
    if not 1 <= n <= ctx.params.D + 1:
        raise ValueError(f"level {n} out of range")
    return _ideal_membership(g, ctx.lower_central_ideal(n), ctx)


# -- automorphisms ------------------------------------------------------------------

class Automorphism:
    """Automorphism of the truncated free group, given by generator images."""

    def __init__(self, images: list[GroupElement]):
        if not images:
            raise ValueError("no images")
        self.algebra = images[0].algebra
        if any(im.algebra is not self.algebra for im in images):
            raise ValueError("mixed algebras")
        if len(images) != self.algebra.rank:
            raise ValueError("need one image per generator")
        self.images = list(images)
        self._linear = [[im.aug().coeff((j,)) for j in range(self.algebra.rank)]
                        for im in images]
        if not self.algebra.params.is_unit(_det2(self._linear, self.algebra.params)):
            raise ValueError("images do not generate: abelianization not invertible")

    def linear_part(self) -> list[list[int]]:
        return [row[:] for row in self._linear]

    def is_diagonal(self) -> bool:
        return all(not self._linear[i][j]
                   for i in range(len(self.images)) for j in range(len(self.images))
                   if i != j)

    def characters(self) -> tuple[int, int]:
        """Diagonal abelianization characters (chi_1, chi_2)."""
        if not self.is_diagonal():
            raise NotDiagonalError("abelianization is not diagonal")
        return self._linear[0][0], self._linear[1][1]

    def apply_series(self, s):
        alg = self.algebra
        needed = [i for i in range(alg.nwords) if s._v[i]]
        img_cache = {(): alg.one()}
        acc = alg.zero()
        for i in needed:
            w = alg.words[i]
            acc = acc.add(self._word_image(w, img_cache).scale(int(s._v[i])))
        return acc

    def _word_image(self, w, cache):
        got = cache.get(w)
        if got is None:
            head = self._word_image(w[:-1], cache)
            got = head.mul(self.images[w[-1]].aug())
            cache[w] = got
        return got

    def apply(self, g: GroupElement) -> GroupElement:
        return GroupElement(self.apply_series(g.series))

    def defect(self, i: int) -> GroupElement:
        """f(x_i) x_i^{-1}."""
        return self.images[i].mul(self.algebra.generator(i).inv())

    def compose(self, other: "Automorphism") -> "Automorphism":
        """self after other: (self*other)(g) = self(other(g))."""
        return Automorphism([self.apply(im) for im in other.images])

    def inverse(self) -> "Automorphism":
        alg = self.algebra
        P = alg.params
        B = _invert2(self._linear, P)
        guess = []
        for i in range(alg.rank):
            g = alg.identity()
            for j in range(alg.rank):
                if B[i][j]:
                    g = g.mul(alg.generator(j).pow(B[i][j]))
            guess.append(g)
        h = Automorphism(guess)
        for _ in range(2 * P.D + 4):
            u = h.compose(self)
            if all(u.images[i] == alg.generator(i) for i in range(alg.rank)):
                return h
            corr = []
            for i in range(alg.rank):
                eps = alg.generator(i).inv().mul(u.images[i])
                corr.append(alg.generator(i).mul(eps.inv()))
            h = Automorphism(corr).compose(h)
        raise RuntimeError("automorphism inversion did not converge")

    def is_identity(self) -> bool:
        return all(im == self.algebra.generator(i) for i, im in enumerate(self.images))

    def __eq__(self, other):
        return isinstance(other, Automorphism) and self.images == other.images

    @staticmethod
    def identity(algebra: MagnusAlgebra) -> "Automorphism":
        return Automorphism(algebra.generators())

    @staticmethod
    def inner(w: GroupElement) -> "Automorphism":
        alg = w.algebra
        return Automorphism([w.mul(g).mul(w.inv()) for g in alg.generators()])


def _det2(mat, params: TruncParams) -> int:
    if len(mat) == 1:
        return mat[0][0] % params.modulus
    if len(mat) == 2:
        return (mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]) % params.modulus
    # larger ranks appear only with triangular-by-construction images
    prod = 1
    for i in range(len(mat)):
        prod = prod * mat[i][i] % params.modulus
    return prod


def _invert2(mat, params: TruncParams):
    m = params.modulus
    if len(mat) == 1:
        return [[params.inv(mat[0][0])]]
    if len(mat) == 2:
        d = params.inv(_det2(mat, params))
        return [[mat[1][1] * d % m, -mat[0][1] * d % m],
                [-mat[1][0] * d % m, mat[0][0] * d % m]]
    raise ValueError("inverse only implemented for rank <= 2")


def aut_filtration_membership(f: Automorphism, m: BiDeg,
                              ctx: LieContext | None = None) -> MembershipVerdict:
    """Weight-filtration membership via the two defect conditions."""
    ctx = ctx or get_context(f.algebra.params, f.algebra.rank)
    if not f.is_diagonal():
        raise NotDiagonalError("abelianization is not diagonal")
    m = (int(m[0]), int(m[1]))
    D = ctx.params.D
    if sum(m) > D + 1:
        raise ValueError(f"index {m} exceeds visible degrees (D={D})")
    r1 = pi_membership(f.defect(0), (m[0] + 1, m[1]), ctx)
    if r1.status == OUT:
        return r1
    r2 = pi_membership(f.defect(1), (m[0], m[1] + 1), ctx)
    if r2.status == OUT:
        return r2
    if sum(m) > D:
        # both tests passed only vacuously: the discriminating degrees exceed D
        return MembershipVerdict(UNDECIDED)
    return MembershipVerdict(IN)


@dataclass
class GradedClass:
    """Class of an element of Pi(n) in the quotient one step deeper in direction e."""

    ctx: LieContext
    n: BiDeg
    e: BiDeg
    rep: GroupElement

    def _step(self) -> BiDeg:
        return (self.n[0] + self.e[0], self.n[1] + self.e[1])

    def is_zero(self) -> bool:
        return pi_membership(self.rep, self._step(), self.ctx).is_in

    def add(self, other: "GradedClass") -> "GradedClass":
        return GradedClass(self.ctx, self.n, self.e, self.rep.mul(other.rep))

    def scaled(self, c: int) -> "GradedClass":
        return GradedClass(self.ctx, self.n, self.e, self.rep.pow(c))

    def equals(self, other: "GradedClass") -> bool:
        diff = self.rep.mul(other.rep.inv())
        return pi_membership(diff, self._step(), self.ctx).is_in


def comparison_map(f: Automorphism, m: BiDeg, side: int,
                   ctx: LieContext | None = None) -> tuple[GradedClass, GradedClass]:
    """The injective map on graded automorphism classes, f |-> (f(x)x^-1, f(y)y^-1).

    side selects the direction of the graded quotients ((1,0) or (0,1)).
    """
    ctx = ctx or get_context(f.algebra.params, f.algebra.rank)
    if side not in (1, 2):
        raise ValueError("side must be 1 or 2")
    verdict = aut_filtration_membership(f, m, ctx)
    if not verdict.is_in:
        raise ValueError(f"automorphism is not in the level-{m} filtration: {verdict.status}")
    e = (1, 0) if side == 1 else (0, 1)
    c1 = GradedClass(ctx, (m[0] + 1, m[1]), e, f.defect(0))
    c2 = GradedClass(ctx, (m[0], m[1] + 1), e, f.defect(1))
    return c1, c2


def torus_lift(c1: int, c2: int, ctx: LieContext) -> Automorphism:
    """Automorphism with diagonal characters (c1, c2) and exact inertia twist.

    Starting from x1 -> x1^c1, x2 -> x2^c2 the defect of the image of
    z = [x2, x1] against z^{c1 c2} is removed degree by degree; at degree d
    the correction solves c1 [V, X1] + c2 [X2, U] = -defect over Lie
    elements of degree d-1 containing both letters, preferring corrections
    to the x2 image (V-columns come first in the deterministic solve).
    Corrections multiply into the images, so both defects stay inside the
    commutator model; for c2 = 1 the x1-defect lands in the (2,0)-subgroup.
    """
    P = ctx.params
    if not (P.is_unit(c1) and P.is_unit(c2)):
        raise ValueError("characters must be units")
    alg = ctx.algebra
    x1, x2 = alg.generator(0), alg.generator(1)
    a = x1.pow(c1)
    b = x2.pow(c2)
    target = x2.commutator(x1).pow(c1 * c2)
    for _ in range(P.D):
        defect = b.commutator(a).mul(target.inv())
        if defect.is_identity():
            return Automorphism([a, b])
        d, parts = ctx.leading_parts(defect)
        if d < 3:
            raise RuntimeError("unexpected low-degree twist defect")
        mds = sorted(md for md in ctx.lie.basis_by_mdeg
                     if sum(md) == d and ctx.lie.basis_by_mdeg[md])
        offsets, width = {}, 0
        for md in mds:
            offsets[md] = width
            width += len(ctx.lie.basis_by_mdeg[md])
        rhs = [0] * width
        for md, coords in parts.items():
            vec = ctx.lie.vector(md, coords)
            for i, c in enumerate(vec):
                rhs[offsets[md] + i] = -c % P.modulus
        corr_words = [w for md, basis in ctx.lie.basis_by_mdeg.items()
                      if sum(md) == d - 1 and md[0] >= 1 and md[1] >= 1
                      for w in basis]
        columns, tags = [], []
        for which, scale, left in (("V", c1, False), ("U", c2, True)):
            for w in corr_words:
                br = (ctx.lie.bracket({(1,): 1}, {w: 1}) if left
                      else ctx.lie.bracket({w: 1}, {(0,): 1}))
                col = [0] * width
                for bw, c in br.items():
                    md = ctx.lie.mdeg(bw)
                    base = offsets[md]
                    idx = ctx.lie.basis_by_mdeg[md].index(bw)
                    col[base + idx] = c * scale % P.modulus
                columns.append(col)
                tags.append((which, w))
        sol = solve(columns, rhs, P)
        if sol is None:
            raise RuntimeError("torus lift correction unsolvable; invariant violated")
        V = {}
        U = {}
        for idx, c in sol.items():
            which, w = tags[idx]
            (V if which == "V" else U)[w] = c
        if V:
            b = b.mul(exp_series(_coords_series(ctx, V)))
        if U:
            a = a.mul(exp_series(_coords_series(ctx, U)))
    defect = b.commutator(a).mul(target.inv())
    if not defect.is_identity():
        raise RuntimeError("torus lift failed to converge")
    return Automorphism([a, b])


def _coords_series(ctx: LieContext, coords):
    acc = ctx.algebra.zero()
    for w, c in coords.items():
        acc = acc.add(ctx.algebra.from_coeffs(ctx.lie.expansion(w)).scale(c))
    return acc


# -- the invariant computation in the w-basis ---------------------------------------

def x2_invariants(window: int, params: TruncParams, guard: int = 1) -> dict:
    """Kernel of (conjugation-by-x2 minus identity) on the span of [w_i, w_j].

    Basis pairs run over 0 <= i < j <= window; conjugation shifts indices by
    the four-term rule, pairs beyond the window truncate away.  The report
    includes the full kernel and the sub-kernel supported on j <= window -
    guard, which must vanish.
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    if window > 16:
        raise ValueError("window exceeds the configured bound")
    pairs = [(i, j) for i in range(window + 1) for j in range(i + 1, window + 1)]
    index = {pr: t for t, pr in enumerate(pairs)}
    m = params.modulus

    def norm(i, j):
        if i == j:
            return None, 0
        if i < j:
            return (i, j), 1
        return (j, i), -1

    def conj_column(i, j):
        col = [0] * len(pairs)
        for (a, b) in ((i + 1, j + 1), (i + 1, j), (i, j + 1), (i, j)):
            if a > window or b > window:
                continue
            pr, sign = norm(a, b)
            if pr is not None:
                col[index[pr]] = (col[index[pr]] + sign) % m
        return col

    conj = {pr: conj_column(*pr) for pr in pairs}
    mat = [[0] * len(pairs) for _ in range(len(pairs))]
    for c, pr in enumerate(pairs):
        col = conj[pr]
        for r in range(len(pairs)):
            mat[r][c] = col[r]
        mat[index[pr]][c] = (mat[index[pr]][c] - 1) % m  # minus identity
    kernel = [v for v in nullspace(mat, params) if any(v)]
    interior = [t for t, (i, j) in enumerate(pairs) if j <= window - guard]
    sub_mat = [[mat[r][c] for c in interior] for r in range(len(pairs))]
    sub_kernel = [v for v in nullspace(sub_mat, params) if any(v)]

    def pretty(col):
        return {pairs[t]: c for t, c in enumerate(col) if c}

    return {
        "window": window,
        "pairs": pairs,
        "conjugation": {pr: pretty(col) for pr, col in conj.items()},
        "kernel": [pretty(v) for v in kernel],
        "interior_kernel": [
            { pairs[interior[t]]: c for t, c in enumerate(v) if c } for v in sub_kernel
        ],
        "interior_kernel_zero": not sub_kernel,
    }


# -- random constructions for suites and cross-tests --------------------------------

def random_filtration_member(ctx: LieContext, m: BiDeg, rng: Random,
                             breadth: int = 2) -> GroupElement:
    """Random element built constructively by the defining recursion for m."""
    alg = ctx.algebra
    if sum(m) > ctx.params.D:
        return alg.identity()

    def rand_conjugator():
        g = alg.identity()
        for _ in range(rng.randrange(0, 3)):
            g = g.mul(alg.generator(rng.randrange(alg.rank)).pow(rng.randrange(1, ctx.params.p)))
        return g

    def build(mm) -> GroupElement:
        if sum(mm) == 1:
            base = alg.generator(mm.index(1)).pow(rng.randrange(1, ctx.params.modulus))
            return base.conj(rand_conjugator())
        decs = [(a, b) for a in range(mm[0] + 1) for b in range(mm[1] + 1)
                if (a, b) != (0, 0) and (a, b) != mm]
        a, b = decs[rng.randrange(len(decs))]
        left = build((a, b))
        right = build((mm[0] - a, mm[1] - b))
        return left.commutator(right).conj(rand_conjugator())

    g = alg.identity()
    for _ in range(rng.randrange(1, breadth + 1)):
        g = g.mul(build(m))
    return g


def random_weight_automorphism(ctx: LieContext, m: BiDeg, rng: Random) -> Automorphism:
    """Random member of the level-m automorphism filtration (defect model)."""
    alg = ctx.algebra
    w1 = random_filtration_member(ctx, (m[0] + 1, m[1]), rng, breadth=1)
    w2 = random_filtration_member(ctx, (m[0], m[1] + 1), rng, breadth=1)
    return Automorphism([alg.generator(0).mul(w1), alg.generator(1).mul(w2)])
