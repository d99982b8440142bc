"""Truncated vertex-algebra engine.

PBW bases, Lie-mode actions, general vertex-operator modes, and the
translation operator for three universal families and their highest-weight
modules:

- Heisenberg (rank d, level k): ``[a_m, b_n] = m k (a|b) delta_{m+n,0}``
  with the standard pairing between the d oscillators;
- Virasoro (central charge c): ``[L_m, L_n] = (m-n) L_{m+n}
  + delta_{m+n,0} (m^3-m)/12 c``;
- universal affine (Lie algebra by structure constants, level k):
  ``[x_m, y_n] = [x,y]_{m+n} + m (x|y) k delta_{m+n,0}``.

States live in one weight-truncated session (:class:`Space`): anything that
would leave the truncation raises :class:`CutoffExceeded` instead of being
dropped.  Monomials are kept in a canonical PBW order (mode depth descending,
ties by generator id), so equality of states is equality of dictionaries.

Normal ordering is a worklist straightening: the rightmost violation is
either resolved against the vacuum / bottom level or swapped with its
neighbour at the cost of one bracket term.  Each step lowers the pair
(word length, inversion count) lexicographically, so it terminates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .rational import ONE, Rat, ZERO, binomial, rat


class PresentationError(ValueError):
    """Invalid family data: weights, brackets, form, or bottom level."""


class CutoffExceeded(RuntimeError):
    """An operation produced weight components beyond the session cutoff."""


@dataclass(frozen=True)
class GeneratorSpec:
    """One strong generator: id, display name, conformal weight, and an
    optional internal charge used to split computations into sectors."""

    gid: int
    name: str
    weight: int
    charge: int = 0


# A monomial is ((modes...), target): modes are (gid, m) with m < 0 applied
# left to right to the target (vacuum: target 0; module: bottom-basis index).
Mode = tuple
Monomial = tuple


def mono_weight(mono: Monomial) -> int:
    return -sum(m for _, m in mono[0])


class VOAPresentation:
    """Family data defining mode brackets and the PBW vacuum space."""

    def __init__(
        self,
        family: str,
        generators: Sequence[GeneratorSpec],
        *,
        level=None,
        central_charge=None,
        struct=None,
        form=None,
        name: Optional[str] = None,
    ):
        if family not in ("heisenberg", "virasoro", "affine"):
            raise PresentationError(f"unknown family {family!r}")
        self.family = family
        self.generators = tuple(generators)
        self.name = name or family
        for i, g in enumerate(self.generators):
            if g.gid != i:
                raise PresentationError("generator ids must be 0..d-1 in order")
            if g.weight < 1:
                raise PresentationError(
                    f"generator {g.name} has weight {g.weight}; "
                    "only CFT-type presentations (all weights >= 1) are accepted"
                )
        if family == "heisenberg":
            if level is None:
                raise PresentationError("heisenberg needs a level")
            if any(g.weight != 1 for g in self.generators):
                raise PresentationError("heisenberg generators must have weight 1")
            self.level = rat(level)
            self.central_charge = None
        elif family == "virasoro":
            if central_charge is None:
                raise PresentationError("virasoro needs a central charge")
            if len(self.generators) != 1 or self.generators[0].weight != 2:
                raise PresentationError("virasoro has one generator of weight 2")
            self.central_charge = rat(central_charge)
            self.level = None
        else:
            if level is None or struct is None or form is None:
                raise PresentationError("affine needs level, struct and form")
            if any(g.weight != 1 for g in self.generators):
                raise PresentationError("affine generators must have weight 1")
            self.level = rat(level)
            self.central_charge = None
            self.struct = {k: {c: rat(x) for c, x in v.items() if rat(x)} for k, v in struct.items()}
            self.form = {k: rat(v) for k, v in form.items() if rat(v)}
            problems = self.check_lie_data()
            if problems:
                raise PresentationError("; ".join(problems))

    # -- affine Lie-algebra data ------------------------------------------

    def bracket_coeffs(self, a: int, b: int) -> dict:
        """Structure constants of [x_a, x_b] as {c: coefficient}."""
        if (a, b) in self.struct:
            return self.struct[(a, b)]
        if (b, a) in self.struct:
            return {c: -x for c, x in self.struct[(b, a)].items()}
        return {}

    def form_value(self, a: int, b: int):
        return self.form.get((a, b), self.form.get((b, a), ZERO))

    def check_lie_data(self) -> list:
        """Antisymmetry, Jacobi, form symmetry and invariance; [] if clean."""
        problems = []
        d = len(self.generators)
        names = [g.name for g in self.generators]

        def ad(a, b):
            return self.bracket_coeffs(a, b)

        for a in range(d):
            if ad(a, a):
                problems.append(f"[{names[a]},{names[a]}] != 0")
            for b in range(a + 1, d):
                ab, ba = ad(a, b), ad(b, a)
                keys = set(ab) | set(ba)
                if any(ab.get(c, ZERO) + ba.get(c, ZERO) for c in keys):
                    problems.append(f"antisymmetry fails on ({names[a]},{names[b]})")
        for a in range(d):
            for b in range(d):
                for c in range(d):
                    acc: dict = {}
                    for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
                        for e, v in ad(y, z).items():
                            for f_, w in ad(x, e).items():
                                s = acc.get(f_, ZERO) + v * w
                                if s:
                                    acc[f_] = s
                                else:
                                    acc.pop(f_, None)
                    if acc:
                        problems.append(
                            f"Jacobi fails on ({names[a]},{names[b]},{names[c]})"
                        )
        for a in range(d):
            for b in range(d):
                for c in range(d):
                    # ([a,b]|c) == (a|[b,c])
                    lhs = sum(
                        (v * self.form_value(e, c) for e, v in ad(a, b).items()),
                        ZERO,
                    )
                    rhs = sum(
                        (v * self.form_value(a, e) for e, v in ad(b, c).items()),
                        ZERO,
                    )
                    if lhs != rhs:
                        problems.append(
                            f"form invariance fails on ({names[a]},{names[b]},{names[c]})"
                        )
        # charges: structure constants must add charges, form must pair
        # opposite charges (charges are optional bookkeeping; 0 is always fine)
        ch = [g.charge for g in self.generators]
        for (a, b), terms in self.struct.items():
            for c in terms:
                if ch[c] != ch[a] + ch[b]:
                    problems.append(f"charge grading fails on [{names[a]},{names[b]}]")
        for (a, b) in self.form:
            if ch[a] + ch[b] != 0:
                problems.append(f"form pairs equal charges on ({names[a]},{names[b]})")
        return problems

    # -- mode brackets -----------------------------------------------------

    def mode_bracket(self, ga: int, m: int, gb: int, n: int):
        """[ga_m, gb_n] as (central scalar, [(gid, coeff)] at mode m+n)."""
        if self.family == "heisenberg":
            central = ZERO
            if m + n == 0 and ga == gb:
                central = Rat(m) * self.level
            return central, []
        if self.family == "virasoro":
            central = ZERO
            if m + n == 0:
                central = Rat((m * m * m - m)) * self.central_charge / 12
            return central, ([(0, Rat(m - n))] if m != n else [])
        central = ZERO
        if m + n == 0:
            central = Rat(m) * self.form_value(ga, gb) * self.level
        linear = [(c, x) for c, x in sorted(self.bracket_coeffs(ga, gb).items())]
        return central, linear

    def parameters(self) -> dict:
        if self.family == "virasoro":
            return {"central_charge": str(self.central_charge)}
        return {"level": str(self.level)}

    def __repr__(self):
        return f"VOAPresentation({self.name})"


class ModulePresentation:
    """Highest-weight module data over a :class:`VOAPresentation`.

    Kinds: ``fock`` (Heisenberg momenta), ``verma`` (Virasoro h), ``weyl``
    (affine; explicit bottom-level matrices, one per generator).  The bottom
    level is M(0); gradation starts at 0.
    """

    def __init__(
        self,
        voa: VOAPresentation,
        kind: str,
        *,
        momenta=None,
        h=None,
        matrices=None,
        bottom_charges=None,
        name: Optional[str] = None,
    ):
        self.voa = voa
        self.kind = kind
        self.name = name or kind
        if kind == "fock":
            if voa.family != "heisenberg":
                raise PresentationError("fock modules require a heisenberg parent")
            if momenta is None:
                raise PresentationError("fock needs momenta")
            self.momenta = tuple(rat(x) for x in momenta)
            if len(self.momenta) != len(voa.generators):
                raise PresentationError("one momentum per oscillator")
            self.bottom_dim = 1
            self.bottom_charges = (0,)
        elif kind == "verma":
            if voa.family != "virasoro":
                raise PresentationError("verma modules require a virasoro parent")
            if h is None:
                raise PresentationError("verma needs a conformal weight h")
            self.h = rat(h)
            self.bottom_dim = 1
            self.bottom_charges = (0,)
        elif kind == "weyl":
            if voa.family != "affine":
                raise PresentationError("weyl modules require an affine parent")
            if matrices is None:
                raise PresentationError("weyl needs bottom-level matrices")
            self.matrices = [
                [[rat(x) for x in row] for row in mat] for mat in matrices
            ]
            if len(self.matrices) != len(voa.generators):
                raise PresentationError("one matrix per generator")
            self.bottom_dim = len(self.matrices[0])
            for mat in self.matrices:
                if len(mat) != self.bottom_dim or any(
                    len(row) != self.bottom_dim for row in mat
                ):
                    raise PresentationError("bottom matrices must be square, equal size")
            self.bottom_charges = tuple(
                bottom_charges if bottom_charges is not None else [0] * self.bottom_dim
            )
            problems = self._check_weyl()
            if problems:
                raise PresentationError("; ".join(problems))
        else:
            raise PresentationError(f"unknown module kind {kind!r}")

    def _check_weyl(self) -> list:
        """Bottom matrices must represent the Lie algebra: [ra, rb] = r[a,b]."""
        problems = []
        d = len(self.voa.generators)
        n = self.bottom_dim

        def matmul(A, B):
            return [
                [sum((A[i][k] * B[k][j] for k in range(n)), ZERO) for j in range(n)]
                for i in range(n)
            ]

        for a in range(d):
            for b in range(a + 1, d):
                comm = matmul(self.matrices[a], self.matrices[b])
                other = matmul(self.matrices[b], self.matrices[a])
                want = [[ZERO] * n for _ in range(n)]
                for c, x in self.voa.bracket_coeffs(a, b).items():
                    for i in range(n):
                        for j in range(n):
                            want[i][j] += x * self.matrices[c][i][j]
                for i in range(n):
                    for j in range(n):
                        if comm[i][j] - other[i][j] != want[i][j]:
                            problems.append(
                                f"bottom level violates [{self.voa.generators[a].name},"
                                f"{self.voa.generators[b].name}] at ({i},{j})"
                            )
        return problems

    def zero_mode_entry(self, gid: int, i: int, j: int):
        """<w_i | x_{gid,0} w_j> of the bottom-level action."""
        if self.kind == "fock":
            return self.momenta[gid] if i == j else ZERO
        if self.kind == "verma":
            # L_0 on the bottom level (gid 0 mode 0)
            return self.h if i == j else ZERO
        return self.matrices[gid][i][j]

    def __repr__(self):
        return f"ModulePresentation({self.name} over {self.voa.name})"


class State:
    """Exact linear combination of canonical PBW monomials in one Space."""

    __slots__ = ("space", "terms")

    def __init__(self, space: "Space", terms: dict):
        self.space = space
        self.terms = terms

    def is_zero(self) -> bool:
        return not self.terms

    def weights(self) -> set:
        return {mono_weight(m) for m in self.terms}

    def weight(self) -> int:
        """Weight of a homogeneous state (0 for the zero state)."""
        ws = self.weights()
        if len(ws) > 1:
            raise ValueError(f"state is not homogeneous: weights {sorted(ws)}")
        return ws.pop() if ws else 0

    def is_homogeneous(self) -> bool:
        return len(self.weights()) <= 1

    def component(self, n: int) -> "State":
        return State(
            self.space, {m: c for m, c in self.terms.items() if mono_weight(m) == n}
        )

    def __add__(self, other: "State") -> "State":
        if other.space is not self.space:
            raise ValueError("states live in different spaces")
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, ZERO) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return State(self.space, out)

    def __sub__(self, other: "State") -> "State":
        return self + other.scale(-ONE)

    def scale(self, c) -> "State":
        c = Rat(c)
        if not c:
            return State(self.space, {})
        return State(self.space, {m: c * x for m, x in self.terms.items()})

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, State)
            and other.space is self.space
            and other.terms == self.terms
        )

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for mono in sorted(self.terms):
            c = self.terms[mono]
            bits.append(f"({c})*{self.space.mono_str(mono)}")
        return " + ".join(bits)


class Space:
    """One weight-truncated computation session for a VOA or a module.

    Bases, mode actions and caches are owned here; presentations stay
    immutable.  A module space keeps a reference to its parent vacuum space
    so vertex-operator modes of V-states can act on module states.
    """

    def __init__(self, pres, cutoff: int, voa_space: Optional["Space"] = None):
        if cutoff < 0:
            raise ValueError("cutoff must be >= 0")
        self.pres = pres
        self.cutoff = cutoff
        self.is_module = isinstance(pres, ModulePresentation)
        self.voa_pres = pres.voa if self.is_module else pres
        if self.is_module:
            if voa_space is None:
                voa_space = Space(self.voa_pres, cutoff)
            if voa_space.pres is not self.voa_pres:
                raise ValueError("voa_space presentation mismatch")
            self.voa_space = voa_space
        else:
            self.voa_space = self
        self.bottom_dim = pres.bottom_dim if self.is_module else 1
        gens = self.voa_pres.generators
        self._weights = [g.weight for g in gens]
        self._charges = [g.charge for g in gens]
        self._min_depth = [1 if self.is_module else g.weight for g in gens]
        self._basis_cache: dict = {}
        self._lie_cache: dict = {}
        self._iter_cache: dict = {}
        self._index_maps: dict = {}

    # -- bookkeeping -------------------------------------------------------

    def mono_charge(self, mono: Monomial) -> int:
        ch = sum(self._charges[g] for g, _ in mono[0])
        if self.is_module:
            ch += self.pres.bottom_charges[mono[1]]
        return ch

    def mono_str(self, mono: Monomial) -> str:
        gens = self.voa_pres.generators
        parts = [f"{gens[g].name}({m})" for g, m in mono[0]]
        tail = f"w{mono[1]}" if self.is_module else "1"
        return ".".join(parts + [tail])

    def zero(self) -> State:
        return State(self, {})

    def state(self, terms: dict) -> State:
        """Public state constructor; enforces the weight cutoff."""
        for m, c in terms.items():
            if mono_weight(m) > self.cutoff:
                raise CutoffExceeded(
                    f"weight {mono_weight(m)} exceeds session cutoff {self.cutoff}"
                )
        return State(self, {m: Rat(c) for m, c in terms.items() if Rat(c)})

    def vacuum_like(self, target: int = 0) -> State:
        if not 0 <= target < self.bottom_dim:
            raise ValueError("bottom index out of range")
        return State(self, {((), target): ONE})

    def basis_state(self, mono: Monomial) -> State:
        return self.state({mono: ONE})

    def generator_state(self, gid: int) -> State:
        """The state g_{-wt(g)} . vacuum in the parent vacuum space."""
        sp = self.voa_space
        g = sp.pres.generators[gid]
        return sp.basis_state((((gid, -g.weight),), 0))

    # -- bases ---------------------------------------------------------------

    def weight_basis(self, n: int) -> tuple:
        """Canonical ordered basis monomials of the weight-n subspace."""
        if n < 0:
            return ()
        if n > self.cutoff:
            raise CutoffExceeded(f"weight {n} exceeds session cutoff {self.cutoff}")
        hit = self._basis_cache.get(n)
        if hit is not None:
            return hit
        seqs = sorted(self._mode_seqs(n, None))
        out = []
        for seq in seqs:
            for t in range(self.bottom_dim):
                out.append((seq, t))
        out = tuple(out)
        self._basis_cache[n] = out
        return out

    def _mode_seqs(self, n: int, head_key):
        """Mode tuples of total depth n, keys weakly decreasing from head_key."""
        if n == 0:
            yield ()
            return
        gens = self.voa_pres.generators
        kmax = n if head_key is None else min(n, head_key[0])
        for k in range(kmax, 0, -1):
            for g in gens:
                if self._min_depth[g.gid] > k:
                    continue
                key = (k, g.gid)
                if head_key is not None and key > head_key:
                    continue
                for tail in self._mode_seqs(n - k, key):
                    yield ((g.gid, -k),) + tail

    def basis_upto(self, n: int) -> list:
        out = []
        for w in range(n + 1):
            out.extend(self.weight_basis(w))
        return out

    def index_map(self, n: int) -> dict:
        """mono -> index over the weight-ascending basis of the <=n truncation."""
        hit = self._index_maps.get(n)
        if hit is None:
            hit = {m: i for i, m in enumerate(self.basis_upto(n))}
            self._index_maps[n] = hit
        return hit

    def dim_upto(self, n: int) -> int:
        return sum(len(self.weight_basis(w)) for w in range(n + 1))

    # -- normal ordering ----------------------------------------------------

    def _base_mode(self, gid: int, m: int, target: int):
        """g_m applied directly to the vacuum / a bottom-level vector.

        Returns None when m is a valid creation depth (caller prepends),
        else a dict of terms (possibly empty).
        """
        if not self.is_module:
            if m <= -self._weights[gid]:
                return None
            return {}
        if m <= -1:
            return None
        if m >= 1:
            return {}
        out = {}
        pres = self.pres
        for i in range(self.bottom_dim):
            c = pres.zero_mode_entry(gid, i, target)
            if c:
                out[((), i)] = c
        return out

    def straighten(self, word, target: int, coeff=ONE) -> dict:
        """Normal order a mode word (applied left to right) against target."""
        out: dict = {}
        stack = [(coeff, tuple(word), target)]
        bracket = self.voa_pres.mode_bracket
        while stack:
            c0, w, tgt = stack.pop()
            if not w:
                key = ((), tgt)
                s = out.get(key, ZERO) + c0
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
                continue
            g, m = w[-1]
            base = self._base_mode(g, m, tgt)
            if base is not None:
                head = w[:-1]
                for mono, c in base.items():
                    stack.append((c0 * c, head + mono[0], mono[1]))
                continue
            # rightmost adjacent inversion; a swap lowers (len, inversions)
            swapped = False
            for i in range(len(w) - 2, -1, -1):
                g1, m1 = w[i]
                g2, m2 = w[i + 1]
                if (-m1, g1) < (-m2, g2):
                    stack.append((c0, w[:i] + (w[i + 1], w[i]) + w[i + 2 :], tgt))
                    central, linear = bracket(g1, m1, g2, m2)
                    rest = w[:i] + w[i + 2 :]
                    if central:
                        stack.append((c0 * central, rest, tgt))
                    for gc, x in linear:
                        stack.append(
                            (c0 * x, w[:i] + ((gc, m1 + m2),) + w[i + 2 :], tgt)
                        )
                    swapped = True
                    break
            if swapped:
                continue
            key = (w, tgt)
            s = out.get(key, ZERO) + c0
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return out

    def apply_lie_mode(self, gid: int, m: int, mono: Monomial) -> dict:
        """g_m . mono as a dict of canonical monomials (cached)."""
        key = (gid, m, mono)
        hit = self._lie_cache.get(key)
        if hit is None:
            hit = self.straighten(((gid, m),) + mono[0], mono[1])
            self._lie_cache[key] = hit
        return hit

    def _apply_lie_to_dict(self, gid: int, m: int, terms: dict) -> dict:
        out: dict = {}
        for mono, c in terms.items():
            for m2, c2 in self.apply_lie_mode(gid, m, mono).items():
                s = out.get(m2, ZERO) + c * c2
                if s:
                    out[m2] = s
                else:
                    out.pop(m2, None)
        return out

    # -- the general vertex-operator mode ------------------------------------

    def iterate_mode(self, amono: Monomial, n: int, vmono: Monomial) -> dict:
        """(a)_n v for a basis monomial a of V and basis monomial v here.

        The monomial a = u_{-k} b is expanded recursively:
        (u_{-k} b)_n v = sum_j (-1)^j C(-k', j) [ u_{-k'-j} (b_{n+j} v)
        - (-1)^{-k'} b_{n-k'-j} (u_j v) ] in vertex-operator mode indices,
        where -k' = -k + wt(u) - 1 translates the Lie depth to the operator
        mode.  Both sums truncate by weight positivity.
        """
        key = (amono, n, vmono)
        hit = self._iter_cache.get(key)
        if hit is not None:
            return hit
        modes = amono[0]
        if not modes:
            out = {vmono: ONE} if n == -1 else {}
            self._iter_cache[key] = out
            return out
        g, m0 = modes[0]
        rest = (modes[1:], amono[1])
        w = self.voa_space._weights[g]
        p = m0 + w - 1  # operator-mode index of the leading generator factor
        wt_rest = mono_weight(rest)
        wt_v = mono_weight(vmono)
        bound1 = wt_rest + wt_v - n - 1  # weight of b_{n+i} v must stay >= 0
        bound2 = w + wt_v - 1  # weight of u_i v must stay >= 0
        if p >= 0:
            bound1 = min(bound1, p)
            bound2 = min(bound2, p)
        out: dict = {}
        for i in range(0, max(bound1, bound2) + 1):
            cb = binomial(p, i)
            if not cb:
                continue
            sign = -1 if i % 2 else 1
            if i <= bound1:
                inner = self.iterate_mode(rest, n + i, vmono)
                if inner:
                    c1 = Rat(sign * cb)
                    term = self._apply_lie_to_dict(g, m0 - i, inner)
                    for mo, c in term.items():
                        s = out.get(mo, ZERO) + c1 * c
                        if s:
                            out[mo] = s
                        else:
                            out.pop(mo, None)
            if i <= bound2:
                sign2 = -1 if (p + i) % 2 else 1
                c2 = Rat(-sign2 * cb)
                uv = self.apply_lie_mode(g, i - w + 1, vmono)
                for mid, c in uv.items():
                    inner2 = self.iterate_mode(rest, n + p - i, mid)
                    for mo, c3 in inner2.items():
                        s = out.get(mo, ZERO) + c2 * c * c3
                        if s:
                            out[mo] = s
                        else:
                            out.pop(mo, None)
        self._iter_cache[key] = out
        return out


# ---------------------------------------------------------------- operations


def weight_basis(space: Space, n: int) -> list:
    """Canonical basis monomials of the weight-n subspace of the session."""
    return list(space.weight_basis(n))


def generator_mode_act(gen, m: int, v: State) -> State:
    """Apply the Lie mode g_m of a generator (spec or id) to the state v."""
    gid = gen.gid if isinstance(gen, GeneratorSpec) else int(gen)
    space = v.space
    out = space._apply_lie_to_dict(gid, m, v.terms)
    return space.state(out)


def mode_act(a: State, n: int, v: State) -> State:
    """The vertex-operator mode (a)_n applied to v.

    ``a`` must be a homogeneous state of the parent vacuum space; the result
    satisfies wt(a_n v) = wt a + wt v - n - 1 and is bilinear in (a, v).
    """
    space = v.space
    if a.space is not space.voa_space:
        raise ValueError("first argument must live in the parent vacuum space")
    if not a.is_homogeneous():
        raise ValueError("mode_act requires a homogeneous first argument")
    out: dict = {}
    for amono, ca in a.terms.items():
        for vmono, cv in v.terms.items():
            for mo, c in space.iterate_mode(amono, n, vmono).items():
                s = out.get(mo, ZERO) + ca * cv * c
                if s:
                    out[mo] = s
                else:
                    out.pop(mo, None)
    return space.state(out)


def translate(a: State) -> State:
    """L(-1) a, via the derivation property on PBW monomials (V only)."""
    space = a.space
    if space.is_module:
        raise ValueError("translate is defined on the vacuum space")
    out: dict = {}
    weights = space._weights
    for mono, c in a.terms.items():
        modes = mono[0]
        for i, (g, m) in enumerate(modes):
            # [L(-1), g_m] = -(m + wt g - 1) g_{m-1}
            factor = Rat(-(m + weights[g] - 1))
            if not factor:
                continue
            word = modes[:i] + ((g, m - 1),) + modes[i + 1 :]
            for mo, c2 in space.straighten(word, mono[1]).items():
                s = out.get(mo, ZERO) + c * factor * c2
                if s:
                    out[mo] = s
                else:
                    out.pop(mo, None)
    return space.state(out)


def verify_presentation(pres, cutoff: int = 4) -> list:
    """Consistency report: bracket axioms, vacuum axioms, grading, engine
    commutators on a sample of low-weight states.

    Returns a list of {check, passed, detail} dicts; failures never raise.
    """
    checks = []

    def record(name, passed, detail=""):
        checks.append({"check": name, "passed": bool(passed), "detail": detail})

    if isinstance(pres, ModulePresentation):
        vpres = pres.voa
        space = Space(pres, cutoff)
    else:
        vpres = pres
        space = Space(pres, cutoff)

    if vpres.family == "affine":
        problems = vpres.check_lie_data()
        record("lie-data (antisymmetry, Jacobi, invariant form)", not problems, "; ".join(problems))

    # vacuum / bottom axioms: g_m kills the target for shallow m
    ok = True
    detail = ""
    for g in vpres.generators:
        start = 1 if space.is_module else 1 - g.weight
        for m in range(start, 3):
            for t in range(space.bottom_dim):
                if space.straighten(((g.gid, m),), t):
                    ok = False
                    detail = f"{g.name}_{m} does not annihilate target {t}"
    record("vacuum/bottom annihilation", ok, detail)

    # grading: wt(g_m x) = wt(x) - m on sampled basis monomials
    ok = True
    detail = ""
    for w in range(0, min(cutoff, 3) + 1):
        for mono in space.weight_basis(w):
            for g in vpres.generators:
                for m in range(-2, 3):
                    if w - m > cutoff or w - m < 0:
                        continue
                    res = space.apply_lie_mode(g.gid, m, mono)
                    if any(mono_weight(mo) != w - m for mo in res):
                        ok = False
                        detail = f"grading fails on {space.mono_str(mono)} under {g.name}_{m}"
    record("weight grading", ok, detail)

    # engine commutators agree with the declared brackets on samples
    ok = True
    detail = ""
    for w in range(0, min(cutoff - 2, 2) + 1):
        for mono in space.weight_basis(w):
            for ga in vpres.generators:
                for gb in vpres.generators:
                    for m in range(-2, 3):
                        for n in range(-2, 3):
                            if w - m - n > cutoff or w - m - n < 0:
                                continue
                            ab = space._apply_lie_to_dict(
                                ga.gid, m, space.apply_lie_mode(gb.gid, n, mono)
                            )
                            ba = space._apply_lie_to_dict(
                                gb.gid, n, space.apply_lie_mode(ga.gid, m, mono)
                            )
                            for mo, c in ba.items():
                                s = ab.get(mo, ZERO) - c
                                if s:
                                    ab[mo] = s
                                else:
                                    ab.pop(mo, None)
                            central, linear = vpres.mode_bracket(ga.gid, m, gb.gid, n)
                            want: dict = {}
                            if central:
                                want[mono] = central
                            for gc, x in linear:
                                for mo, c in space.apply_lie_mode(
                                    gc, m + n, mono
                                ).items():
                                    s = want.get(mo, ZERO) + x * c
                                    if s:
                                        want[mo] = s
                                    else:
                                        want.pop(mo, None)
                            if ab != want:
                                ok = False
                                detail = (
                                    f"[{ga.name}_{m},{gb.name}_{n}] mismatch on "
                                    f"{space.mono_str(mono)}"
                                )
    record("mode commutators", ok, detail)
    return checks
