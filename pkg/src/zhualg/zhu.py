"""Truncations of O(V), the algebra A(V) = V/O(V), and its graded shadow.

The relation space O(V) is spanned by the circle products a o b; these mix
weights, so its intersection with a truncation V_{<=n} is computed inside a
larger ambient V_{<=N'} and certified by dimension stabilization: the dims
for two consecutive generator-weight bounds N', N'+1 must agree (the bound
starts at n+2 and the search width is the ``margin``).  Every downstream
result carries the certification flag.

Internally the spanning vectors are split into charge sectors (eigenvalues
of the optional generator grading) and eliminated per sector; the answer is
the direct sum, which cuts the row-reduction cost roughly by the number of
sectors for the affine families and is a no-op for Heisenberg/Virasoro.

Levels of the filtration A(V)_n are represented by their relation subspaces
inside V_{<=n}; coset representatives are the non-pivot basis monomials of
the canonical RREF, so all structure constants are reproducible.
"""

from __future__ import annotations

from typing import Optional

from .exactlin import Echelon, SparseVec, Subspace, quotient_coords, rref
from .rational import ONE, ZERO, binomial
from .voa import Space, State, mode_act


class EngineInvariantError(RuntimeError):
    """A structural identity that must hold by construction failed."""


# ---------------------------------------------------------------- products


def _per_component(a: State):
    """Weight components of a (the binomial weights depend on wt a)."""
    for w in sorted(a.weights()):
        yield w, a.component(w)


def circ(a: State, b: State) -> State:
    """a o b = sum_j C(wt a, j) a_{j-2} b; the spanning elements of O(V).

    Extended bilinearly over the weight components of a.
    """
    out = b.space.zero()
    for wa, ac in _per_component(a):
        for j in range(0, wa + 1):
            cb = binomial(wa, j)
            if cb:
                out = out + mode_act(ac, j - 2, b).scale(cb)
    return out


def star(a: State, b: State) -> State:
    """The associative product a * b = sum_j C(wt a, j) a_{j-1} b."""
    out = b.space.zero()
    for wa, ac in _per_component(a):
        for j in range(0, wa + 1):
            cb = binomial(wa, j)
            if cb:
                out = out + mode_act(ac, j - 1, b).scale(cb)
    return out


def higher_o_element(a: State, b: State, m: int, n: int) -> State:
    """The residue with kernel (1+z)^(wt a + n) / z^(2+m), for m >= n >= 0.

    These all lie in O(V); membership in the certified truncation is the
    regression test of the defining relation family.
    """
    if not (m >= n >= 0):
        raise ValueError("need m >= n >= 0")
    out = b.space.zero()
    for wa, ac in _per_component(a):
        for j in range(0, wa + n + 1):
            cb = binomial(wa + n, j)
            if cb:
                out = out + mode_act(ac, j - 2 - m, b).scale(cb)
    return out


# ---------------------------------------------------------------- sectors


def _dict_kernel(rows: list) -> list:
    """Kernel combos of raw index->Rat dicts: {row_idx: coeff} with
    sum coeff * rows[row_idx] == 0."""
    echelon: dict = {}
    kernel = []
    for j, entries in enumerate(rows):
        row = dict(entries)
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
        else:
            kernel.append(coeff)
    return kernel


class _Sector:
    """Ascending-indexed echelon for one charge sector of a PBW space."""

    __slots__ = ("monos", "index", "count_upto", "ech")

    def __init__(self):
        self.monos: list = []
        self.index: dict = {}
        self.count_upto: dict = {}
        self.ech = Echelon()

    def intersection_rows(self, cut: int) -> list:
        """Rows spanning (span of echelon) intersected with indices < cut.

        Rows with pivot >= cut live entirely beyond the cut (the pivot is the
        minimal index); rows with pivot < cut split into a light part and a
        tail, the tails are reduced against the beyond-cut echelon rows and a
        kernel of the residuals assembles the intersection.
        """
        light = []
        head = []
        tail_ech = Echelon()
        for p in sorted(self.ech.rows):
            row = self.ech.rows[p]
            if p >= cut:
                tail_ech.rows[p] = row
            elif max(row) < cut:
                light.append(row)
            else:
                head.append(row)
        out = [dict(r) for r in light]
        if head:
            residuals = [
                tail_ech.reduce({i: c for i, c in row.items() if i >= cut})
                for row in head
            ]
            for combo in _dict_kernel(residuals):
                acc: dict = {}
                for r_idx, c in combo.items():
                    for i, x in head[r_idx].items():
                        if i >= cut:
                            continue
                        s = acc.get(i, ZERO) + c * x
                        if s:
                            acc[i] = s
                        else:
                            acc.pop(i, None)
                if acc:
                    out.append(acc)
        return out


class OSpaceTruncation:
    """Certified truncation O(V) cap V_{<=n} (or O(M) cap M_{<=n}).

    ``subspace`` lives in the weight-ascending coordinates of the <=n basis;
    ``certified`` is True only when the dimensions for two consecutive
    generator-weight bounds agreed, and ``stabilized_at`` records the first
    bound of that pair.
    """

    def __init__(self, n, nprime, subspace, certified, stabilized_at, history):
        self.n = n
        self.nprime = nprime
        self.subspace = subspace
        self.certified = certified
        self.stabilized_at = stabilized_at
        self.history = history

    @property
    def rank(self) -> int:
        return self.subspace.rank


class RelationComputation:
    """Incremental, sector-split span of the O-relation vectors.

    Works for V itself (rows a o b, a and b over V bases) and for a module
    (rows are the module analogues a o v).  Rows are added shell by shell in
    s = wt a + wt (b or v); the span inside each truncation level is read off
    per sector.
    """

    def __init__(self, space: Space, n_max: int, margin: int = 3, start: Optional[int] = None):
        self.space = space
        self.vspace = space.voa_space
        self.n_max = n_max
        self.margin = margin
        self.start = max(start if start is not None else n_max + 2, n_max)
        need = self.start + margin
        if space.cutoff < need:
            raise ValueError(
                f"session cutoff {space.cutoff} too small; need >= {need} "
                f"for n_max={n_max}, margin={margin}"
            )
        self._sectors: dict = {}
        self._ambient_weight = -1
        self._next_shell = 1  # next s = wt a + wt target-side to insert
        self._level_cache: dict = {}
        self.certified = False
        self.stabilized_at: Optional[int] = None
        self.nprime: Optional[int] = None
        self.history: list = []
        self._certify()

    # -- ambient bookkeeping ------------------------------------------------

    def _sector(self, charge: int) -> _Sector:
        sec = self._sectors.get(charge)
        if sec is None:
            sec = _Sector()
            # a sector appearing first at a higher weight is empty below it
            for w in range(0, self._ambient_weight + 1):
                sec.count_upto[w] = 0
            self._sectors[charge] = sec
        return sec

    def _extend_ambient(self, up_to_weight: int):
        for w in range(self._ambient_weight + 1, up_to_weight + 1):
            for mono in self.space.weight_basis(w):
                sec = self._sector(self.space.mono_charge(mono))
                sec.index[mono] = len(sec.monos)
                sec.monos.append(mono)
            self._ambient_weight = w
            for sec in self._sectors.values():
                sec.count_upto[w] = len(sec.monos)

    # -- row generation -------------------------------------------------------

    def _rows_for_shell(self, s: int):
        """All a o b with wt a + wt b == s, as monomial-keyed dicts."""
        sp = self.space
        vsp = self.vspace
        for wa in range(1, s + 1):
            wb = s - wa
            for amono in vsp.weight_basis(wa):
                for bmono in sp.weight_basis(wb):
                    acc: dict = {}
                    for j in range(0, wa + 1):
                        cb = binomial(wa, j)
                        if not cb:
                            continue
                        for mono, c in sp.iterate_mode(amono, j - 2, bmono).items():
                            s2 = acc.get(mono, ZERO) + cb * c
                            if s2:
                                acc[mono] = s2
                            else:
                                acc.pop(mono, None)
                    if acc:
                        yield acc

    def _insert_shells(self, nprime: int):
        """Insert every row with wt a + wt b + 1 <= nprime."""
        self._extend_ambient(nprime)
        while self._next_shell <= nprime - 1:
            s = self._next_shell
            for acc in self._rows_for_shell(s):
                charge = self.space.mono_charge(next(iter(acc)))
                sec = self._sector(charge)
                sec.ech.insert({sec.index[m]: c for m, c in acc.items()})
            self._next_shell += 1

    # -- dimensions and certification ----------------------------------------

    def _dims_now(self) -> tuple:
        return tuple(self._dim_level(i) for i in range(self.n_max + 1))

    def _dim_level(self, i: int) -> int:
        total = 0
        for sec in self._sectors.values():
            cut = sec.count_upto.get(i, len(sec.monos))
            if cut:
                total += len(sec.intersection_rows(cut))
        return total

    def _certify(self):
        n0 = self.start
        self._insert_shells(n0)
        prev = self._dims_now()
        self.history.append((n0, prev))
        for step in range(1, self.margin + 1):
            np_ = n0 + step
            self._insert_shells(np_)
            cur = self._dims_now()
            self.history.append((np_, cur))
            if cur == prev:
                self.certified = True
                self.stabilized_at = np_ - 1
                self.nprime = np_
                return
            prev = cur
        self.nprime = n0 + self.margin

    # -- extraction -------------------------------------------------------------

    def level_relations(self, i: int) -> Subspace:
        """O cap (<=i truncation) as a canonical Subspace in <=i coordinates."""
        if i > self.n_max:
            raise ValueError(f"level {i} beyond computed n_max {self.n_max}")
        hit = self._level_cache.get(i)
        if hit is not None:
            return hit
        gindex = self.space.index_map(i)
        dim = len(gindex)
        sub = Subspace(dim)
        for charge in sorted(self._sectors):
            sec = self._sectors[charge]
            cut = sec.count_upto.get(i, len(sec.monos))
            if not cut:
                continue
            for row in sec.intersection_rows(cut):
                sub.insert(SparseVec(dim, {gindex[sec.monos[j]]: c for j, c in row.items()}))
        self._level_cache[i] = sub
        return sub

    def truncation(self, n: int) -> OSpaceTruncation:
        return OSpaceTruncation(
            n,
            self.nprime,
            self.level_relations(n),
            self.certified,
            self.stabilized_at,
            list(self.history),
        )


# ---------------------------------------------------------------- A(V) data


class ZhuTruncation:
    """The filtration A(V)_0 <= A(V)_1 <= ... at a certified truncation.

    Level i is V_{<=i} modulo O(V) cap V_{<=i}; coset representatives are the
    non-pivot basis monomials under the canonical RREF of the relations.
    """

    def __init__(self, space_or_pres, n_max: int, margin: int = 3, space: Optional[Space] = None):
        if isinstance(space_or_pres, Space):
            self.space = space_or_pres
        else:
            self.space = Space(space_or_pres, n_max + 2 + margin)
        if self.space.is_module:
            raise ValueError("ZhuTruncation is for the vacuum space; see bimod for modules")
        self.n_max = n_max
        self.relations = RelationComputation(self.space, n_max, margin)
        self._reps: dict = {}
        self._gr: Optional[GradedAlgebraSlice] = None

    @property
    def certified(self) -> bool:
        return self.relations.certified

    def level_dim(self, i: int) -> int:
        return self.space.dim_upto(i) - self.relations.level_relations(i).rank

    def filtration_dims(self) -> list:
        return [self.level_dim(i) for i in range(self.n_max + 1)]

    def level_reps(self, i: int) -> list:
        """Representative basis monomials of A(V)_i (non-pivot columns)."""
        hit = self._reps.get(i)
        if hit is None:
            rel = self.relations.level_relations(i)
            basis = self.space.basis_upto(i)
            pivots = set(rel.rows)
            hit = [m for j, m in enumerate(basis) if j not in pivots]
            self._reps[i] = hit
        return hit

    def state_to_vec(self, x: State, i: int) -> SparseVec:
        gindex = self.space.index_map(i)
        entries = {}
        for mono, c in x.terms.items():
            j = gindex.get(mono)
            if j is None:
                raise ValueError(f"state leaves the <= {i} truncation")
            entries[j] = c
        return SparseVec(len(gindex), entries)

    def coset(self, x: State, i: int) -> SparseVec:
        """Coordinates of x + O(V) inside A(V)_i (x must live in V_{<=i})."""
        rel = self.relations.level_relations(i)
        return quotient_coords(rel.dim, rel, self.state_to_vec(x, i))

    def identity_coset(self, i: int) -> SparseVec:
        return self.coset(self.space.vacuum_like(), i)

    def star_coset(self, a: State, b: State, i: int, j: int) -> SparseVec:
        """Class of a*b in A(V)_{i+j} for a in level i, b in level j."""
        if i + j > self.n_max:
            raise ValueError("product level exceeds the computed range")
        return self.coset(star(a, b), i + j)

    def gr(self) -> "GradedAlgebraSlice":
        if self._gr is None:
            self._gr = GradedAlgebraSlice(self)
        return self._gr


class GradedAlgebraSlice:
    """Degreewise bases and products of gr A(V) = sum A(V)_n / A(V)_{n-1}.

    Degree n is modelled as V_n / K_n with K_n the weight-n projection of
    the certified O-truncation at level n.  The product of classes is the
    class of a_{-1} b (the top-weight part of a * b); commutativity and
    agreement with the star product are asserted on every computed pair.
    """

    def __init__(self, zt: ZhuTruncation):
        self.zt = zt
        self.space = zt.space
        self.n_max = zt.n_max
        self.kernels: list = []
        self.reps: list = []
        for n in range(self.n_max + 1):
            K = self._kernel(n)
            self.kernels.append(K)
            basis = self.space.weight_basis(n)
            pivots = set(K.rows)
            self.reps.append([m for j, m in enumerate(basis) if j not in pivots])
            # internal consistency: dim S_n must match the filtration jumps
            jump = zt.level_dim(n) - (zt.level_dim(n - 1) if n else 0)
            if len(self.reps[n]) != jump:
                raise EngineInvariantError(
                    f"graded dimension mismatch in degree {n}: {len(self.reps[n])} vs {jump}"
                )
        self._tables: dict = {}

    def _kernel(self, n: int) -> Subspace:
        rel = self.zt.relations.level_relations(n)
        lower = self.space.dim_upto(n - 1) if n else 0
        dim_n = len(self.space.weight_basis(n))
        rows = []
        for v in rel.basis():
            entries = {i - lower: c for i, c in v.entries.items() if i >= lower}
            if entries:
                rows.append(SparseVec(dim_n, entries))
        return rref(rows, dim=dim_n)

    def dims(self) -> list:
        return [len(r) for r in self.reps]

    def class_of(self, x: State) -> SparseVec:
        """Class of a homogeneous state in its graded degree."""
        n = x.weight()
        K = self.kernels[n]
        gindex = {m: j for j, m in enumerate(self.space.weight_basis(n))}
        vec = SparseVec(K.dim, {gindex[m]: c for m, c in x.terms.items()})
        return quotient_coords(K.dim, K, vec)

    def product_table(self, m: int, n: int) -> dict:
        """(i, j) -> class vector of rep_i * rep_j in degree m+n.

        Raises EngineInvariantError when commutativity or the agreement of
        the graded star product with the class of a_{-1} b fails.
        """
        if m + n > self.n_max:
            raise ValueError("degree sum beyond computed range")
        key = (m, n)
        hit = self._tables.get(key)
        if hit is not None:
            return hit
        table = {}
        for i, am in enumerate(self.reps[m]):
            a = self.space.basis_state(am)
            for j, bm in enumerate(self.reps[n]):
                b = self.space.basis_state(bm)
                top = mode_act(a, -1, b)
                cls = self.class_of(top) if not top.is_zero() else SparseVec(len(self.reps[m + n]))
                full = star(a, b).component(m + n)
                cls2 = (
                    self.class_of(full)
                    if not full.is_zero()
                    else SparseVec(len(self.reps[m + n]))
                )
                if cls != cls2:
                    raise EngineInvariantError(
                        "graded star differs from the class of a_{-1} b"
                    )
                table[(i, j)] = cls
        self._tables[key] = table
        if (n, m) in self._tables or m == n:
            other = self._tables.get((n, m), table)
            for i in range(len(self.reps[m])):
                for j in range(len(self.reps[n])):
                    if table[(i, j)] != other[(j, i)]:
                        raise EngineInvariantError(
                            f"gr product not commutative in degrees ({m},{n})"
                        )
        return table

    def check_commutative(self) -> bool:
        for m in range(self.n_max + 1):
            for n in range(m, self.n_max + 1 - m):
                self.product_table(m, n)
                self.product_table(n, m)
        return True


class C2Slice:
    """C2(V) cap V_{<=n}, the quotient algebra V/C2(V), and its product."""

    def __init__(self, space: Space, n_max: int):
        if space.is_module:
            raise ValueError("C2Slice of the vacuum space; modules are in bimod")
        self.space = space
        self.n_max = n_max
        self.kernels: list = []
        self.reps: list = []
        for w in range(n_max + 1):
            rows = []
            dim_w = len(space.weight_basis(w))
            gindex = {m: j for j, m in enumerate(space.weight_basis(w))}
            for wa in range(1, w):
                wb = w - wa - 1
                if wb < 0:
                    continue
                for amono in space.weight_basis(wa):
                    for bmono in space.weight_basis(wb):
                        res = space.iterate_mode(amono, -2, bmono)
                        if res:
                            rows.append(
                                SparseVec(dim_w, {gindex[m]: c for m, c in res.items()})
                            )
            K = rref(rows, dim=dim_w)
            self.kernels.append(K)
            pivots = set(K.rows)
            self.reps.append(
                [m for j, m in enumerate(space.weight_basis(w)) if j not in pivots]
            )

    def dims(self) -> list:
        return [len(r) for r in self.reps]

    def class_of(self, x: State) -> SparseVec:
        w = x.weight()
        K = self.kernels[w]
        gindex = {m: j for j, m in enumerate(self.space.weight_basis(w))}
        vec = SparseVec(K.dim, {gindex[m]: c for m, c in x.terms.items()})
        return quotient_coords(K.dim, K, vec)

    def product_class(self, a: State, b: State) -> SparseVec:
        """Class of a_{-1} b in the quotient (degree wt a + wt b)."""
        return self.class_of(mode_act(a, -1, b))

    def contains(self, x: State) -> bool:
        w = x.weight()
        return self.class_of(x).is_zero() if not x.is_zero() else True


# ---------------------------------------------------------------- operations


def o_space(space_or_pres, n: int, nprime: Optional[int] = None, margin: int = 3) -> OSpaceTruncation:
    """Certified truncation O(V) cap V_{<=n}.

    With ``nprime`` the generator-weight bound starts there (one comparison
    against nprime+1); otherwise the bound starts at n+2 and grows until the
    dimensions stabilize or ``margin`` increments are exhausted.
    """
    if nprime is not None and nprime < n:
        raise ValueError("generator bound must be >= n")
    eff_margin = 1 if nprime is not None else margin
    start = nprime if nprime is not None else n + 2
    if isinstance(space_or_pres, Space):
        space = space_or_pres
    else:
        space = Space(space_or_pres, start + eff_margin)
    comp = RelationComputation(space, n, margin=eff_margin, start=start)
    return comp.truncation(n)


def zhu_filtration_dims(zt: ZhuTruncation, n_max: Optional[int] = None) -> dict:
    """Dims of A(V)_0..A(V)_{n_max} with the certification flag."""
    n_max = zt.n_max if n_max is None else n_max
    dims = [zt.level_dim(i) for i in range(n_max + 1)]
    return {
        "dims": dims,
        "certified": zt.certified,
        "stabilized_at": zt.relations.stabilized_at,
        "provisional": not zt.certified,
    }


def gr_algebra(zt: ZhuTruncation) -> GradedAlgebraSlice:
    return zt.gr()


def c2_quotient(space_or_pres, n_max: int) -> C2Slice:
    if isinstance(space_or_pres, Space):
        return C2Slice(space_or_pres, n_max)
    return C2Slice(Space(space_or_pres, n_max + 1), n_max)


def phi_map(gr: GradedAlgebraSlice, x: State) -> SparseVec:
    """The graded class of a homogeneous x: V/C2(V) -> gr A(V) pointwise."""
    return gr.class_of(x)


def check_voa_strong_generation(space: Space, gens: list, n_max: int) -> dict:
    """Degreewise strong-generation criterion V_n = (gens cap V_n) + C1(V)_n.

    Here C1(V) is spanned by u_{-1}v for positive-weight u, v together with
    the translation images L(-1)V_+ (the form under which the criterion is
    equivalent to strong generation for CFT-type presentations).  Degree 0 is
    the empty generator product (the vacuum) and always passes.
    """
    from .voa import translate

    degrees = [True]
    first_failure = None
    for n in range(1, n_max + 1):
        dim_n = len(space.weight_basis(n))
        gindex = {m: j for j, m in enumerate(space.weight_basis(n))}
        rows = []
        for g in gens:
            if g.is_zero():
                continue
            if g.weight() == n:
                rows.append(SparseVec(dim_n, {gindex[m]: c for m, c in g.terms.items()}))
        for wa in range(1, n):
            wb = n - wa
            for amono in space.weight_basis(wa):
                for bmono in space.weight_basis(wb):
                    res = space.iterate_mode(amono, -1, bmono)
                    if res:
                        rows.append(
                            SparseVec(dim_n, {gindex[m]: c for m, c in res.items()})
                        )
        for bmono in space.weight_basis(n - 1):
            res = translate(space.basis_state(bmono))
            if not res.is_zero():
                rows.append(
                    SparseVec(dim_n, {gindex[m]: c for m, c in res.terms.items()})
                )
        ok = rref(rows, dim=dim_n).rank == dim_n
        degrees.append(ok)
        if not ok and first_failure is None:
            first_failure = n
    return {
        "passed": first_failure is None,
        "first_failure": first_failure,
        "degrees": degrees,
    }


def gr_finite_generation_witness(gr: GradedAlgebraSlice) -> dict:
    """Greedy degreewise generator extraction from gr A(V).

    Products of previously chosen generators are spanned degree by degree;
    the complement of that span yields new generators.  The report lists the
    new-generator count per degree; the withness flag holds when the last two
    computed degrees needed none (a heuristic, not a proof).
    """
    n_max = gr.n_max
    new_counts = []
    # chosen generator states per degree (lifted representatives)
    gens_by_degree: dict = {}
    for n in range(n_max + 1):
        dim_sn = len(gr.reps[n])
        spanned = Subspace(dim_sn)
        if n == 0:
            unit = gr.class_of(gr.space.vacuum_like())
            spanned.insert(unit)
        for i in range(1, n):
            for a in gens_by_degree.get(i, []):
                # multiply a into everything generated in degree n - i:
                for bm in gr.reps[n - i]:
                    b = gr.space.basis_state(bm)
                    prod = mode_act(a, -1, b)
                    if not prod.is_zero():
                        spanned.insert(gr.class_of(prod))
        new_here = dim_sn - spanned.rank
        new_counts.append(new_here)
        if new_here:
            # choose complement representatives as the new generators
            chosen = []
            for m in gr.reps[n]:
                st = gr.space.basis_state(m)
                if spanned.insert(gr.class_of(st)):
                    chosen.append(st)
            gens_by_degree[n] = chosen
    witness = n_max >= 1 and new_counts[-1] == 0 and new_counts[-2] == 0
    return {
        "new_generators_per_degree": new_counts,
        "witness": witness,
        "generator_degrees": sorted(d for d, c in enumerate(new_counts) if c),
    }
