"""Howell canonical form over Z/p^k.

Z/p^k is not a field, so plain Gaussian elimination does not give unique
bases or decide span membership.  The Howell form does: pivots are p^v,
each pivot row's p^{k-v} multiple is re-inserted (capturing the part of
the span visible past annihilated pivots), entries above a pivot are
reduced mod the pivot, and rows are ordered by pivot column.  Greedy
reduction against such a basis decides membership, and equal spans have
identical canonical rows.
"""

from __future__ import annotations

from .params import TruncParams

Combo = dict[int, int]  # original generator index -> coefficient


class HowellBasis:
    def __init__(self, params: TruncParams, width: int, track: bool = False):
        self.params = params
        self.width = width
        self.track = track
        self.rows: list[list[int]] = []
        self.pivot_cols: list[int] = []
        self.pivot_vals: list[int] = []  # p^v
        self.combos: list[Combo] = []
        self._ngen = 0

    # -- construction ---------------------------------------------------------
    def insert(self, vec: list[int], gen_index: int | None = None):
        """Add a generator row; gen_index tags it for combination tracking."""
        m = self.params.modulus
        v = [x % m for x in vec]
        if len(v) != self.width:
            raise ValueError("row width mismatch")
        if gen_index is None:
            gen_index = self._ngen
        self._ngen = max(self._ngen, gen_index + 1)
        combo: Combo = {gen_index: 1} if self.track else {}
        self._insert_reduced(v, combo)
        self._normalize()

    def insert_many(self, vecs: list[list[int]]):
        for v in vecs:
            self.insert(v)

    def _insert_reduced(self, v: list[int], combo: Combo):
        p, k, m = self.params.p, self.params.k, self.params.modulus
        queue = [(v, combo)]
        while queue:
            v, combo = queue.pop()
            pos = 0  # index into self.rows, ordered by pivot column
            col = self._first_nonzero(v)
            while col is not None:
                while pos < len(self.rows) and self.pivot_cols[pos] < col:
                    pos += 1
                if pos < len(self.rows) and self.pivot_cols[pos] == col:
                    pv = self.pivot_vals[pos]
                    c = v[col]
                    vc = self.params.valuation(c)
                    if pv <= p ** vc:
                        q = c // pv
                        self._row_sub(v, combo, pos, q)
                    else:
                        # incoming row has the better pivot: swap roles
                        unit_inv = self.params.inv(c // (p ** vc))
                        v = [x * unit_inv % m for x in v]
                        combo = _combo_scale(combo, unit_inv, m)
                        old_v, old_c = self.rows[pos], self.combos[pos] if self.track else {}
                        self.rows[pos] = v
                        self.pivot_vals[pos] = p ** vc
                        if self.track:
                            self.combos[pos] = combo
                        shadow = (p ** (k - vc))
                        sv = [x * shadow % m for x in v]
                        if any(sv):
                            queue.append((sv, _combo_scale(combo, shadow, m)))
                        queue.append((old_v, old_c))
                        v = None
                        break
                    col = self._first_nonzero(v, col)
                else:
                    vc = self.params.valuation(v[col])
                    unit_inv = self.params.inv(v[col] // (p ** vc))
                    v = [x * unit_inv % m for x in v]
                    combo = _combo_scale(combo, unit_inv, m)
                    self.rows.insert(pos, v)
                    self.pivot_cols.insert(pos, col)
                    self.pivot_vals.insert(pos, p ** vc)
                    if self.track:
                        self.combos.insert(pos, combo)
                    else:
                        self.combos.insert(pos, {})
                    if vc > 0:
                        shadow = p ** (k - vc)
                        sv = [x * shadow % m for x in v]
                        if any(sv):
                            queue.append((sv, _combo_scale(combo, shadow, m)))
                    v = None
                    break
            # fully reduced to zero: drop

    def _row_sub(self, v: list[int], combo: Combo, pos: int, q: int):
        m = self.params.modulus
        row = self.rows[pos]
        for i in range(self.width):
            if row[i]:
                v[i] = (v[i] - q * row[i]) % m
        if self.track:
            for g, c in self.combos[pos].items():
                combo[g] = (combo.get(g, 0) - q * c) % m

    @staticmethod
    def _first_nonzero(v: list[int] | None, start: int = 0) -> int | None:
        if v is None:
            return None
        for i in range(start, len(v)):
            if v[i]:
                return i
        return None

    def _normalize(self):
        """Reduce entries above each pivot mod the pivot value."""
        m = self.params.modulus
        for i in range(len(self.rows)):
            col, pv = self.pivot_cols[i], self.pivot_vals[i]
            for j in range(i):
                c = self.rows[j][col] % pv
                q = (self.rows[j][col] - c) // pv
                if q % m:
                    row_i = self.rows[i]
                    row_j = self.rows[j]
                    for t in range(self.width):
                        if row_i[t]:
                            row_j[t] = (row_j[t] - q * row_i[t]) % m
                    if self.track:
                        for g, cc in self.combos[i].items():
                            self.combos[j][g] = (self.combos[j].get(g, 0) - q * cc) % m

    # -- queries ----------------------------------------------------------------
    def reduce(self, vec: list[int]) -> tuple[list[int], Combo]:
        """Greedy reduction; returns (remainder, combination used).

        remainder == 0 iff vec is in the span (Howell property).  The
        combination expresses the subtracted part over the original
        generator tags when tracking is on.
        """
        m = self.params.modulus
        v = [x % m for x in vec]
        used: Combo = {}
        for pos in range(len(self.rows)):
            col, pv = self.pivot_cols[pos], self.pivot_vals[pos]
            c = v[col]
            if c and c % pv == 0:
                q = c // pv
                row = self.rows[pos]
                for i in range(self.width):
                    if row[i]:
                        v[i] = (v[i] - q * row[i]) % m
                if self.track:
                    for g, cc in self.combos[pos].items():
                        used[g] = (used.get(g, 0) + q * cc) % m
        return v, used

    def contains(self, vec: list[int]) -> bool:
        rem, _ = self.reduce(vec)
        return not any(rem)

    def contains_basis(self, other: "HowellBasis") -> bool:
        return all(self.contains(r) for r in other.rows)

    def canonical_rows(self) -> list[tuple[int, ...]]:
        return [tuple(r) for r in self.rows]

    def __eq__(self, other):
        return (isinstance(other, HowellBasis) and self.width == other.width
                and self.canonical_rows() == other.canonical_rows())

    def __len__(self):
        return len(self.rows)

    @property
    def unit_rank(self) -> int:
        """Number of unit pivots (free rank of the span)."""
        return sum(1 for v in self.pivot_vals if v == 1)

    def __repr__(self):
        return f"<HowellBasis {len(self.rows)}x{self.width} pivots={self.pivot_vals}>"


def _combo_scale(combo: Combo, c: int, m: int) -> Combo:
    return {g: v * c % m for g, v in combo.items()}


def solve(columns: list[list[int]], target: list[int],
          params: TruncParams) -> dict[int, int] | None:
    """Solve sum_i x_i * columns[i] = target over Z/p^k.

    Columns earlier in the list are preferred by the Howell pivoting, which
    makes the returned solution deterministic.  Returns None when no
    solution exists.
    """
    if not columns:
        return None if any(t % params.modulus for t in target) else {}
    h = HowellBasis(params, len(target), track=True)
    for i, col in enumerate(columns):
        h.insert(col, gen_index=i)
    rem, combo = h.reduce(target)
    if any(rem):
        return None
    return {g: c for g, c in combo.items() if c}


def nullspace(matrix: list[list[int]], params: TruncParams) -> list[list[int]]:
    """Generators of {v : M v = 0} over Z/p^k.

    Rows (col_j(M) | e_j) are Howell-reduced; canonical rows whose pivot
    falls in the identity block read off kernel generators exactly.
    """
    if not matrix:
        return []
    nrows, ncols = len(matrix), len(matrix[0])
    h = HowellBasis(params, nrows + ncols)
    for j in range(ncols):
        row = [matrix[i][j] for i in range(nrows)] + [0] * ncols
        row[nrows + j] = 1
        h.insert(row)
    out = []
    for pos in range(len(h.rows)):
        if h.pivot_cols[pos] >= nrows:
            out.append(h.rows[pos][nrows:])
    return out
