"""Exact rational sparse linear algebra.

The substrate for every quotient, intersection and dimension computation in
this package.  All arithmetic is exact (see :mod:`zhualg.rational`); pivoting
is always on the lowest-index nonzero column, so reduced bases, coset
representatives and therefore every downstream structure constant are
bit-identical across runs.

Vectors are sparse maps ``index -> nonzero rational`` over a declared ambient
dimension.  A :class:`Subspace` stores a fully reduced row-echelon basis
(RREF): pivot columns are strictly increasing, each pivot entry is 1 and is
the only nonzero entry in its column.

All operations are pure functions of immutable inputs; nothing here keeps
global state.
"""

from __future__ import annotations

from typing import Iterable, Optional

from .rational import Rat, ZERO, ONE


class DimensionMismatch(ValueError):
    """Raised when operands live in different ambient spaces."""


class SparseVec:
    """Sparse vector over the rationals with a fixed ambient dimension.

    Zero entries are never stored; indices must lie in ``range(dim)``.
    Instances are treated as immutable: operations return new vectors.
    """

    __slots__ = ("dim", "entries")

    def __init__(self, dim: int, entries=None):
        if dim < 0:
            raise ValueError("dimension must be nonnegative")
        self.dim = dim
        clean = {}
        if entries:
            items = entries.items() if isinstance(entries, dict) else entries
            for i, c in items:
                if not 0 <= i < dim:
                    raise DimensionMismatch(f"index {i} outside ambient dimension {dim}")
                c = Rat(c)
                if c:
                    clean[i] = c
        self.entries = clean

    @classmethod
    def from_dense(cls, values) -> "SparseVec":
        vals = list(values)
        return cls(len(vals), {i: Rat(v) for i, v in enumerate(vals) if v})

    def to_dense(self) -> list:
        out = [ZERO] * self.dim
        for i, c in self.entries.items():
            out[i] = c
        return out

    def get(self, i: int):
        return self.entries.get(i, ZERO)

    def items(self):
        """Entries in increasing index order (deterministic iteration)."""
        return sorted(self.entries.items())

    def is_zero(self) -> bool:
        return not self.entries

    def support(self):
        return sorted(self.entries)

    def _check(self, other: "SparseVec"):
        if self.dim != other.dim:
            raise DimensionMismatch(f"{self.dim} != {other.dim}")

    def __add__(self, other: "SparseVec") -> "SparseVec":
        self._check(other)
        out = dict(self.entries)
        for i, c in other.entries.items():
            s = out.get(i, ZERO) + c
            if s:
                out[i] = s
            else:
                out.pop(i, None)
        v = SparseVec.__new__(SparseVec)
        v.dim, v.entries = self.dim, out
        return v

    def __sub__(self, other: "SparseVec") -> "SparseVec":
        return self + other.scale(-ONE)

    def scale(self, c) -> "SparseVec":
        c = Rat(c)
        v = SparseVec.__new__(SparseVec)
        v.dim = self.dim
        v.entries = {} if not c else {i: c * x for i, x in self.entries.items()}
        return v

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparseVec)
            and self.dim == other.dim
            and self.entries == other.entries
        )

    def __repr__(self) -> str:
        body = ", ".join(f"{i}: {c}" for i, c in self.items())
        return f"SparseVec({self.dim}, {{{body}}})"


def _reduce_dict(entries: dict, rows: dict) -> dict:
    """Reduce a raw entry dict against RREF ``rows`` (pivot -> row dict).

    Returns a new dict with all pivot coordinates eliminated.
    """
    out = dict(entries)
    for p in sorted(set(out) & set(rows)):
        f = out.get(p)
        if not f:
            continue
        for i, c in rows[p].items():
            s = out.get(i, ZERO) - f * c
            if s:
                out[i] = s
            else:
                out.pop(i, None)
    # eliminating one pivot can reintroduce a later pivot coordinate
    again = set(out) & set(rows)
    while again:
        p = min(again)
        f = out[p]
        for i, c in rows[p].items():
            s = out.get(i, ZERO) - f * c
            if s:
                out[i] = s
            else:
                out.pop(i, None)
        again = set(out) & set(rows)
    return out


class Subspace:
    """A subspace given by its canonical reduced row-echelon basis.

    ``rows`` maps each pivot column to its (normalized) basis row.  The
    membership test and the induced coset coordinates are deterministic.
    """

    __slots__ = ("dim", "rows")

    def __init__(self, dim: int, rows: Optional[dict] = None):
        self.dim = dim
        self.rows = rows if rows is not None else {}

    @property
    def rank(self) -> int:
        return len(self.rows)

    @property
    def pivots(self) -> list:
        return sorted(self.rows)

    def basis(self) -> list:
        """Basis as SparseVec rows, ordered by pivot column."""
        out = []
        for p in sorted(self.rows):
            v = SparseVec.__new__(SparseVec)
            v.dim, v.entries = self.dim, dict(self.rows[p])
            out.append(v)
        return out

    def reduce(self, v: SparseVec) -> SparseVec:
        if v.dim != self.dim:
            raise DimensionMismatch(f"{v.dim} != {self.dim}")
        out = SparseVec.__new__(SparseVec)
        out.dim = self.dim
        out.entries = _reduce_dict(v.entries, self.rows)
        return out

    def contains(self, v: SparseVec) -> bool:
        return self.reduce(v).is_zero()

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(r) for r in other.basis())

    def insert(self, v: SparseVec) -> bool:
        """Add a vector to the basis, rereducing; True if the rank grew.

        Mutates self; used by :func:`rref` and friends.
        """
        red = _reduce_dict(v.entries if isinstance(v, SparseVec) else v, self.rows)
        if not red:
            return False
        p = min(red)
        inv = ONE / red[p]
        new_row = {i: inv * c for i, c in red.items()}
        # back-eliminate the new pivot from existing rows
        for q, row in self.rows.items():
            f = row.get(p)
            if f:
                for i, c in new_row.items():
                    s = row.get(i, ZERO) - f * c
                    if s:
                        row[i] = s
                    else:
                        row.pop(i, None)
        self.rows[p] = new_row
        return True

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subspace)
            and self.dim == other.dim
            and self.rows == other.rows
        )

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, rank={self.rank})"


def rref(vectors: Iterable[SparseVec], dim: Optional[int] = None) -> Subspace:
    """Canonical RREF basis of the span of ``vectors``.

    ``dim`` must be given when the iterable may be empty.  Rows that share no
    ambient dimension raise :class:`DimensionMismatch`.
    """
    vectors = list(vectors)
    if dim is None:
        if not vectors:
            raise ValueError("dim is required for an empty vector list")
        dim = vectors[0].dim
    sub = Subspace(dim)
    for v in vectors:
        if v.dim != dim:
            raise DimensionMismatch(f"{v.dim} != {dim}")
        sub.insert(v)
    return sub


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    if a.dim != b.dim:
        raise DimensionMismatch(f"{a.dim} != {b.dim}")
    out = Subspace(a.dim, {p: dict(r) for p, r in a.rows.items()})
    for v in b.basis():
        out.insert(v)
    return out


def kernel_of_columns(vectors: list) -> list:
    """Kernel of the map (c_1..c_k) -> sum c_i * vectors[i].

    Returns SparseVec coefficient vectors of dimension ``len(vectors)``;
    the defining relations of the span, in a canonical order.
    """
    k = len(vectors)
    echelon = {}  # pivot -> (row_dict, coeff_dict)
    kernel = []
    for j, v in enumerate(vectors):
        row = dict(v.entries)
        coeff = {j: ONE}
        while row:
            p = min(row)
            hit = echelon.get(p)
            if hit is None:
                break
            erow, ecoeff = hit
            f = row[p] / erow[p]
            for i, c in erow.items():
                s = row.get(i, ZERO) - f * c
                if s:
                    row[i] = s
                else:
                    row.pop(i, None)
            for i, c in ecoeff.items():
                s = coeff.get(i, ZERO) - f * c
                if s:
                    coeff[i] = s
                else:
                    coeff.pop(i, None)
        if row:
            echelon[min(row)] = (row, coeff)
        else:
            kernel.append(SparseVec(k, coeff))
    return kernel


def intersect(a: Subspace, b: Subspace) -> Subspace:
    """span(result) = span(a) & span(b), via the kernel of the stacked bases."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"{a.dim} != {b.dim}")
    abasis = a.basis()
    stacked = abasis + b.basis()
    out = Subspace(a.dim)
    for combo in kernel_of_columns(stacked):
        acc: dict = {}
        for i, c in combo.entries.items():
            if i >= len(abasis):
                continue
            for j, x in abasis[i].entries.items():
                s = acc.get(j, ZERO) + c * x
                if s:
                    acc[j] = s
                else:
                    acc.pop(j, None)
        if acc:
            out.insert(SparseVec(a.dim, acc))
    return out


def solve_in_span(vectors: list, target: SparseVec) -> Optional[list]:
    """Coefficients c with sum c_i * vectors[i] == target, or None.

    The coefficient choice is the deterministic one produced by elimination
    in the given vector order.
    """
    echelon = {}
    reps = []  # parallel: pivot order -> coeff dicts
    for j, v in enumerate(vectors):
        if v.dim != target.dim:
            raise DimensionMismatch(f"{v.dim} != {target.dim}")
        row = dict(v.entries)
        coeff = {j: ONE}
        while row:
            p = min(row)
            hit = echelon.get(p)
            if hit is None:
                echelon[p] = (row, coeff)
                break
            erow, ecoeff = hit
            f = row[p] / erow[p]
            for i, c in erow.items():
                s = row.get(i, ZERO) - f * c
                if s:
                    row[i] = s
                else:
                    row.pop(i, None)
            for i, c in ecoeff.items():
                s = coeff.get(i, ZERO) - f * c
                if s:
                    coeff[i] = s
                else:
                    coeff.pop(i, None)
    # reduce the target, tracking the combination used
    row = dict(target.entries)
    used: dict = {}
    while row:
        p = min(row)
        hit = echelon.get(p)
        if hit is None:
            return None
        erow, ecoeff = hit
        f = row[p] / erow[p]
        for i, c in erow.items():
            s = row.get(i, ZERO) - f * c
            if s:
                row[i] = s
            else:
                row.pop(i, None)
        for i, c in ecoeff.items():
            s = used.get(i, ZERO) + f * c
            if s:
                used[i] = s
            else:
                used.pop(i, None)
    out = [ZERO] * len(vectors)
    for i, c in used.items():
        out[i] = c
    return out


def quotient_coords(ambient_dim: int, relations: Subspace, v: SparseVec) -> SparseVec:
    """Coordinates of ``v + relations`` in the canonical complement.

    The complement is spanned by the non-pivot coordinates of the relation
    RREF; the output is indexed by those coordinates in increasing order.
    Two vectors map to equal output iff their difference lies in
    ``relations``.
    """
    if relations.dim != ambient_dim:
        raise DimensionMismatch(f"{relations.dim} != {ambient_dim}")
    if v.dim != ambient_dim:
        raise DimensionMismatch(f"{v.dim} != {ambient_dim}")
    residual = relations.reduce(v)
    positions = complement_positions(relations)
    out = {}
    for i, c in residual.entries.items():
        out[positions[i]] = c
    return SparseVec(ambient_dim - relations.rank, out)


def complement_positions(relations: Subspace) -> dict:
    """Map ambient index -> position among non-pivot coordinates."""
    pivots = set(relations.rows)
    positions = {}
    pos = 0
    for i in range(relations.dim):
        if i not in pivots:
            positions[i] = pos
            pos += 1
    return positions


def lift_from_complement(relations: Subspace, coords: SparseVec) -> SparseVec:
    """Canonical lift: place coset coordinates at the non-pivot positions."""
    positions = complement_positions(relations)
    inverse = {pos: i for i, pos in positions.items()}
    return SparseVec(relations.dim, {inverse[p]: c for p, c in coords.entries.items()})


class Echelon:
    """Forward-only echelon basis used by the big truncation computations.

    Rows are raw dicts; each stored row is keyed by its pivot (lowest index);
    rows are not back-reduced, so this is cheaper than :class:`Subspace` for
    rank growth over thousands of insertions.  Deterministic like the rest.
    """

    __slots__ = ("rows",)

    def __init__(self):
        self.rows: dict = {}

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, entries: dict) -> dict:
        row = dict(entries)
        rows = self.rows
        while row:
            p = min(row)
            hit = rows.get(p)
            if hit is None:
                break
            f = row[p] / hit[p]
            for i, c in hit.items():
                s = row.get(i, ZERO) - f * c
                if s:
                    row[i] = s
                else:
                    row.pop(i, None)
        return row

    def insert(self, entries: dict) -> bool:
        row = self.reduce(entries)
        if not row:
            return False
        self.rows[min(row)] = row
        return True

    def contains(self, entries: dict) -> bool:
        return not self.reduce(entries)
