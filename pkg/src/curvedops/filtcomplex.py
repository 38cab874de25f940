"""Complete filtered graded modules with predifferentials, over exact rationals.

Conventions used throughout the package:

* Homological degree is an integer.  A (pre)differential lowers degree by
  exactly 1.
* Weight is a natural number recording the filtration stage.  F_q is the span
  of all basis atoms of weight >= q, so the filtration is decreasing and every
  structure map must be weight-non-decreasing.
* A module with predifferential d is "gr-dg" when d^2 strictly raises weight;
  then each weight layer of the associated graded is an honest chain complex
  and per-layer homology ("gr-homology") makes sense.
* All arithmetic is exact, over ``fractions.Fraction``.  No floats anywhere.

Truncation windows: computations happen on finite windows of an ideally
infinite object.  A ``Window`` records which degrees are unreliable because
atoms below (or above) the cut were dropped; weight layers <= wt_max are kept
in full, so weight truncation introduces no boundary effects of its own.
Homology ranks are only asserted on *interior* cells.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import itertools

__all__ = [
    "Scalar", "koszul_sign", "Element", "BasisAtom", "Window", "FGModule",
    "ModuleMap", "make_standard_complex", "phi_map", "is_gr_dg",
    "gr_homology", "GrHomology", "is_graded_quasi_iso", "is_strict_surjection",
    "tensor", "mapping_cone",
    "echelonize", "reduce_vector", "span_rank", "in_span", "express_in_span",
    "kernel_basis",
]

Scalar = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def _ordkey(k):
    """Deterministic total order on heterogeneous hashable keys."""
    return repr(k)


# ---------------------------------------------------------------------------
# Koszul signs
# ---------------------------------------------------------------------------

def koszul_sign(permutation, degrees):
    """Sign acquired when reordering graded factors.

    ``permutation`` lists the target position (1-based) of each source slot,
    ``degrees`` the degree of the object in each source slot.  Each inverted
    pair (i < j with permutation[i] > permutation[j]) contributes
    (-1)^(degrees[i] * degrees[j]); the result is the product, as +1 or -1.
    """
    perm = list(permutation)
    degs = list(degrees)
    assert len(perm) == len(degs), "permutation and degrees must align"
    assert sorted(perm) == list(range(1, len(perm) + 1)), \
        "not a permutation of 1..n: %r" % (perm,)
    exponent = 0
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                exponent += degs[i] * degs[j]
    return -1 if exponent % 2 else 1


# ---------------------------------------------------------------------------
# Sparse elements
# ---------------------------------------------------------------------------

class Element:
    """Finite rational linear combination of basis keys (sparse vector).

    Keys may be any hashable structural token (atom ids, trees, tuples).
    Zero coefficients are never stored.  Treated as immutable.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for k, c in terms.items():
                c = Fraction(c)
                if c:
                    clean[k] = c
        self.terms = clean

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def basis(cls, key, coeff=ONE):
        return cls({key: coeff})

    def items(self):
        """Deterministically ordered (key, coeff) pairs."""
        return sorted(self.terms.items(), key=lambda kv: _ordkey(kv[0]))

    def support(self):
        return sorted(self.terms, key=_ordkey)

    def coeff(self, key):
        return self.terms.get(key, ZERO)

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        return isinstance(other, Element) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        out = dict(self.terms)
        accumulate(out, other.terms)
        return Element(out)

    def __sub__(self, other):
        out = dict(self.terms)
        accumulate(out, other.terms, -ONE)
        return Element(out)

    def __neg__(self):
        return Element({k: -c for k, c in self.terms.items()})

    def scale(self, scalar):
        scalar = Fraction(scalar)
        if not scalar:
            return Element()
        return Element({k: scalar * c for k, c in self.terms.items()})

    def __rmul__(self, scalar):
        return self.scale(scalar)

    def map_keys(self, fn):
        """Relabel basis keys through ``fn`` (must stay injective on support)."""
        out = {}
        for k, c in self.terms.items():
            accumulate(out, {fn(k): c})
        return Element(out)

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for k, c in self.items():
            bits.append("%s*%r" % (c, k))
        return " + ".join(bits)


def accumulate(dst, src, factor=ONE):
    """In-place sparse accumulation dst += factor * src (both raw dicts)."""
    if not factor:
        return dst
    for k, c in src.items():
        v = dst.get(k, ZERO) + factor * c
        if v:
            dst[k] = v
        else:
            dst.pop(k, None)
    return dst


# ---------------------------------------------------------------------------
# Exact sparse Gaussian elimination
# ---------------------------------------------------------------------------

def echelonize(vectors):
    """Reduced echelon basis of the span of ``vectors`` (raw dicts or Elements).

    Returns (rows, pivots): rows are raw dicts, each with coefficient 1 at its
    pivot key, mutually reduced; pivots[i] is the pivot key of rows[i].
    Deterministic for a fixed input order.
    """
    rows, pivots = [], []
    for vec in vectors:
        add_to_echelon(rows, pivots, vec)
    return rows, pivots


def add_to_echelon(rows, pivots, vec):
    """Reduce ``vec`` against the echelon and insert the residual if nonzero.

    Returns the inserted row (raw dict) or None if vec was already in the span.
    """
    res = reduce_vector(vec, rows, pivots)
    if not res:
        return None
    pivot = min(res, key=_ordkey)
    inv = ONE / res[pivot]
    row = {k: inv * c for k, c in res.items()}
    # back-substitute into existing rows so the basis stays fully reduced
    for i, existing in enumerate(rows):
        c = existing.get(pivot)
        if c:
            accumulate(existing, row, -c)
    rows.append(row)
    pivots.append(pivot)
    return row


def reduce_vector(vec, rows, pivots):
    """Residual of ``vec`` after reduction against an echelon basis (raw dict)."""
    res = dict(vec.terms) if isinstance(vec, Element) else dict(vec)
    for row, pivot in zip(rows, pivots):
        c = res.get(pivot)
        if c:
            accumulate(res, row, -c)
    return res


def span_rank(vectors):
    rows, _ = echelonize(vectors)
    return len(rows)


def in_span(vec, rows, pivots):
    return not reduce_vector(vec, rows, pivots)


def express_in_span(vec, vectors):
    """Coefficients writing ``vec`` as a combination of ``vectors``, or None.

    ``vectors`` is a list of Elements/dicts; the returned list aligns with it.
    Coordinates are tracked separately so pivoting only ever happens on real
    basis keys.
    """
    rows = []  # (pivot_key, normalized vector dict, coordinate dict)
    for i, v in enumerate(vectors):
        work = dict(v.terms) if isinstance(v, Element) else dict(v)
        coords = {i: ONE}
        for pivot, rvec, rcoords in rows:
            c = work.get(pivot)
            if c:
                accumulate(work, rvec, -c)
                accumulate(coords, rcoords, -c)
        if not work:
            continue
        pivot = min(work, key=_ordkey)
        inv = ONE / work[pivot]
        rows.append((pivot,
                     {k: inv * c for k, c in work.items()},
                     {k: inv * c for k, c in coords.items()}))
    target = dict(vec.terms) if isinstance(vec, Element) else dict(vec)
    out = {}
    for pivot, rvec, rcoords in rows:
        c = target.get(pivot)
        if c:
            accumulate(target, rvec, -c)
            accumulate(out, rcoords, c)
    if target:
        return None  # genuine residual outside the span
    coords_list = [ZERO] * len(vectors)
    for i, c in out.items():
        coords_list[i] = c
    return coords_list


def kernel_basis(rows, variables):
    """Null space of the homogeneous system {row . x = 0 for row in rows}.

    ``rows`` are raw dicts over keys from ``variables``; ``variables`` fixes
    the elimination and output order.  Returns a list of raw-dict solutions in
    reduced form, one per free variable, deterministic.
    """
    var_index = {v: i for i, v in enumerate(variables)}
    for row in rows:
        for k in row:
            assert k in var_index, "row mentions unknown variable %r" % (k,)
    # forward elimination with pivot = earliest variable present
    echelon = []  # (pivot_index, row dict keyed by variable index)
    for row in rows:
        work = {var_index[k]: Fraction(c) for k, c in row.items() if c}
        for pidx, prow in echelon:
            c = work.get(pidx)
            if c:
                accumulate(work, prow, -c)
        if not work:
            continue
        pidx = min(work)
        inv = ONE / work[pidx]
        work = {k: inv * c for k, c in work.items()}
        for _, prow in echelon:
            c = prow.get(pidx)
            if c:
                accumulate(prow, work, -c)
        echelon.append((pidx, work))
    pivot_set = {p for p, _ in echelon}
    basis = []
    for fidx in range(len(variables)):
        if fidx in pivot_set:
            continue
        sol = {variables[fidx]: ONE}
        for pidx, prow in echelon:
            c = prow.get(fidx)
            if c:
                sol[variables[pidx]] = -c
        basis.append(sol)
    return basis


# ---------------------------------------------------------------------------
# Modules, windows, maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BasisAtom:
    """One basis slot: structural id plus homological degree and weight."""
    id: object
    degree: int
    weight: int

    def __post_init__(self):
        assert self.weight >= 0, "weights are natural numbers"


@dataclass(frozen=True)
class Window:
    """Reliability window for homology reads.

    ``deg_lo`` / ``deg_hi``: degrees <= deg_lo (resp. >= deg_hi) are boundary
    cells where truncation may distort homology; None means nothing was
    dropped in that direction.  ``wt_max``: weight layers kept (None = all).
    Weight layers within wt_max are exact because no construction here ever
    lowers weight.
    """
    deg_lo: int | None = None
    deg_hi: int | None = None
    wt_max: int | None = None

    def is_interior(self, degree):
        if self.deg_lo is not None and degree <= self.deg_lo:
            return False
        if self.deg_hi is not None and degree >= self.deg_hi:
            return False
        return True

    def merged(self, other):
        """Most conservative combination (for sums / unions of atom sets)."""
        def opt(a, b, pick):
            if a is None:
                return b
            if b is None:
                return a
            return pick(a, b)
        return Window(
            deg_lo=opt(self.deg_lo, other.deg_lo, max),
            deg_hi=opt(self.deg_hi, other.deg_hi, min),
            wt_max=opt(self.wt_max, other.wt_max, min),
        )


class FGModule:
    """Finite window of a filtered graded module with predifferential."""

    def __init__(self, atoms, d=None, window=None, warnings=()):
        atoms = tuple(atoms)
        ids = [a.id for a in atoms]
        assert len(set(ids)) == len(ids), "duplicate atom ids"
        self.atoms = atoms
        self.by_id = {a.id: a for a in atoms}
        self.window = window if window is not None else Window()
        self.warnings = tuple(warnings)
        self.d = {}
        if d:
            for src, val in d.items():
                assert src in self.by_id, "d on unknown atom %r" % (src,)
                val = val if isinstance(val, Element) else Element(val)
                if not val:
                    continue
                a = self.by_id[src]
                for tgt, _ in val.items():
                    b = self.by_id.get(tgt)
                    assert b is not None, "d hits unknown atom %r" % (tgt,)
                    assert b.degree == a.degree - 1, \
                        "d must lower degree by exactly 1 (%r -> %r)" % (src, tgt)
                    assert b.weight >= a.weight, \
                        "d must not lower weight (%r -> %r)" % (src, tgt)
                self.d[src] = val
        cells = {}
        for a in atoms:
            cells.setdefault((a.degree, a.weight), []).append(a.id)
        self.cells = {cell: sorted(ids_, key=_ordkey)
                      for cell, ids_ in cells.items()}

    # -- basic queries ------------------------------------------------------

    def ids(self):
        return [a.id for a in self.atoms]

    def degree_of(self, key):
        return self.by_id[key].degree

    def weight_of(self, key):
        return self.by_id[key].weight

    def d_of(self, key):
        return self.d.get(key, Element())

    def apply_d(self, elt):
        out = {}
        for k, c in elt.terms.items():
            accumulate(out, self.d_of(k).terms, c)
        return Element(out)

    def atoms_at(self, degree=None, weight=None, min_weight=None):
        picked = []
        for a in self.atoms:
            if degree is not None and a.degree != degree:
                continue
            if weight is not None and a.weight != weight:
                continue
            if min_weight is not None and a.weight < min_weight:
                continue
            picked.append(a)
        return sorted(picked, key=lambda a: _ordkey(a.id))

    def element_degree(self, elt):
        """Common degree of a homogeneous element (None for zero)."""
        degs = {self.degree_of(k) for k in elt.terms}
        assert len(degs) <= 1, "element is not degree-homogeneous"
        return degs.pop() if degs else None


class ModuleMap:
    """Weight-non-decreasing linear map between FGModule windows."""

    def __init__(self, source, target, entries, degree=0):
        self.source = source
        self.target = target
        self.degree = degree
        self.entries = {}
        for src, val in (entries or {}).items():
            assert src in source.by_id, "map on unknown atom %r" % (src,)
            val = val if isinstance(val, Element) else Element(val)
            if not val:
                continue
            a = source.by_id[src]
            for tgt, _ in val.items():
                b = target.by_id.get(tgt)
                assert b is not None, "map hits unknown atom %r" % (tgt,)
                assert b.degree == a.degree + degree, \
                    "map is not homogeneous of degree %d (%r -> %r)" % (degree, src, tgt)
                assert b.weight >= a.weight, \
                    "map must not lower weight (%r -> %r)" % (src, tgt)
            self.entries[src] = val

    def apply(self, elt):
        out = {}
        for k, c in elt.terms.items():
            accumulate(out, self.entries.get(k, Element()).terms, c)
        return Element(out)

    def of(self, key):
        return self.entries.get(key, Element())

    def is_chain_map(self):
        """Does the map intertwine the predifferentials (with Koszul sign)?"""
        sign = -1 if self.degree % 2 else 1
        for a in self.source.atoms:
            lhs = self.apply(self.source.d_of(a.id))
            rhs = self.target.apply_d(self.of(a.id))
            if sign == -1:
                rhs = -rhs
            if lhs != rhs:
                return False
        return True


# ---------------------------------------------------------------------------
# Standard complexes and the connecting map between them
# ---------------------------------------------------------------------------

def make_standard_complex(kind, q, n, P):
    """Weight-truncated window of one of the standard contractible/cell
    complexes used to probe fibrations.

    kind "Z0": atoms k = 0, 1, 2, ... of degree n-k and weight q + floor(k/2);
    kind "Z1": same degrees but weight q + ceil(k/2);
    kind "B1": disjoint union of Z0(q, n+1) and Z0(q+1, n).
    Differential sends atom k to atom k+1 with coefficient 1 (a chain of 1s).
    The window keeps weights <= P; if P < q nothing survives and the module is
    returned empty with a warning flag.
    """
    assert kind in ("Z0", "Z1", "B1"), "unknown standard complex %r" % (kind,)
    assert q >= 0, "filtration start must be a natural number"
    if kind == "B1":
        m1 = make_standard_complex("Z0", q, n + 1, P)
        m2 = make_standard_complex("Z0", q + 1, n, P)
        d = dict(m1.d)
        d.update(m2.d)
        return FGModule(m1.atoms + m2.atoms, d,
                        window=m1.window.merged(m2.window),
                        warnings=m1.warnings + m2.warnings)
    if P < q:
        return FGModule(
            (), {},
            window=Window(deg_lo=n, deg_hi=None, wt_max=P),
            warnings=("truncation below filtration start: P=%d < q=%d" % (P, q),),
        )
    if kind == "Z0":
        kmax = 2 * (P - q) + 1
        wt = lambda k: q + k // 2
    else:
        kmax = 2 * (P - q)
        wt = lambda k: q + (k + 1) // 2
    atoms, d = [], {}
    for k in range(kmax + 1):
        atoms.append(BasisAtom((kind, q, n, k), n - k, wt(k)))
        if k > 0:
            d[(kind, q, n, k - 1)] = Element.basis((kind, q, n, k))
    window = Window(deg_lo=n - kmax, deg_hi=None, wt_max=P)
    return FGModule(atoms, d, window=window)


def phi_map(q, n, P):
    """The comparison chain map from Z1(q, n) into B1(q, n).

    Sends the degree n-k source atom to the sum of the two target atoms of the
    same degree (one from each Z0 piece), when they survive the truncation;
    every matrix entry is 1.
    """
    src = make_standard_complex("Z1", q, n, P)
    tgt = make_standard_complex("B1", q, n, P)
    entries = {}
    for a in src.atoms:
        k = a.id[3]
        val = {}
        for tid in (("Z0", q, n + 1, k + 1), ("Z0", q + 1, n, k)):
            if tid in tgt.by_id:
                val[tid] = ONE
        entries[a.id] = Element(val)
    return ModuleMap(src, tgt, entries)


# ---------------------------------------------------------------------------
# gr-structure: predicates and homology
# ---------------------------------------------------------------------------

def is_gr_dg(M):
    """Does d^2 strictly raise weight everywhere on the window?"""
    for a in M.atoms:
        dd = M.apply_d(M.d_of(a.id))
        for key, _ in dd.items():
            if M.weight_of(key) <= a.weight:
                return False
    return True


def _gr_d_layer(M, q):
    """Columns of the weight-q layer of the associated-graded differential."""
    cols = {}
    for a in M.atoms:
        if a.weight != q:
            continue
        col = {}
        for key, c in M.d_of(a.id).terms.items():
            if M.weight_of(key) == q:
                col[key] = c
        cols[a.id] = col
    return cols


@dataclass
class GrHomology:
    """Per-(degree, weight) ranks of the associated-graded homology.

    ``dims`` has an entry for every cell of the window where atoms exist
    (possibly 0).  Only interior degrees (per ``window``) are trustworthy;
    ``boundary`` lists the computed-but-unreliable cells.
    """
    dims: dict
    window: Window

    def interior_dims(self):
        return {cell: v for cell, v in sorted(self.dims.items())
                if self.window.is_interior(cell[0])}

    def boundary_cells(self):
        return sorted(cell for cell in self.dims
                      if not self.window.is_interior(cell[0]))

    def is_acyclic_interior(self):
        return all(v == 0 for v in self.interior_dims().values())


def gr_homology(M):
    """Homology ranks of each weight layer of the associated graded.

    Requires the window to be gr-dg (checked).  Returns a GrHomology table
    covering every (degree, weight) cell where the window has atoms.
    """
    assert is_gr_dg(M), "window is not gr-dg: d^2 does not raise weight"
    dims = {}
    weights = sorted({a.weight for a in M.atoms})
    for q in weights:
        layer_atoms = [a for a in M.atoms if a.weight == q]
        cols = _gr_d_layer(M, q)
        degrees = sorted({a.degree for a in layer_atoms})
        # rank of the layer differential leaving each degree
        rank_from = {}
        for ndeg in degrees:
            vecs = [Element(cols[a.id]) for a in layer_atoms if a.degree == ndeg]
            rank_from[ndeg] = span_rank(vecs)
        for ndeg in degrees:
            count = sum(1 for a in layer_atoms if a.degree == ndeg)
            dims[(ndeg, q)] = count - rank_from.get(ndeg, 0) - rank_from.get(ndeg + 1, 0)
    return GrHomology(dims=dims, window=M.window)


def _gr_homology_basis(M, ndeg, q):
    """(cycle-representative echelon, boundary echelon) for one gr cell."""
    cols = _gr_d_layer(M, q)
    here = [a.id for a in M.atoms if a.degree == ndeg and a.weight == q]
    above = [a.id for a in M.atoms if a.degree == ndeg + 1 and a.weight == q]
    # cycles: kernel of the layer map leaving degree ndeg
    rows = {}
    for src in here:
        for tgt, c in cols[src].items():
            rows.setdefault(tgt, {})[src] = c
    cycles = kernel_basis(list(rows.values()), sorted(here, key=_ordkey))
    boundaries = [Element(cols[src]) for src in above if cols[src]]
    b_rows, b_pivots = echelonize(boundaries)
    reps = []
    for z in cycles:
        res = reduce_vector(Element(z), b_rows, b_pivots)
        if res:
            reps.append(Element(res))
    rep_rows, rep_pivots = echelonize(reps)
    return (rep_rows, rep_pivots), (b_rows, b_pivots)


def is_graded_quasi_iso(f):
    """Does a degree-0 chain map induce isomorphisms on all interior gr cells?

    Compares every (degree, weight) cell that is interior for both windows and
    where either side has atoms.  Boundary cells are ignored (truncation noise).
    """
    assert f.degree == 0, "graded quasi-isomorphism is only defined for degree-0 maps"
    assert f.is_chain_map(), "not a chain map"
    S, T = f.source, f.target
    win = S.window.merged(T.window)
    cells = sorted({(a.degree, a.weight) for a in S.atoms} |
                   {(a.degree, a.weight) for a in T.atoms})
    for (ndeg, q) in cells:
        if not win.is_interior(ndeg):
            continue
        (s_reps, s_pivots), _ = _gr_homology_basis(S, ndeg, q)
        (t_reps, t_pivots), (t_b_rows, t_b_pivots) = _gr_homology_basis(T, ndeg, q)
        if len(s_reps) != len(t_reps):
            return False
        images = []
        for rep in s_reps:
            img = {}
            for key, c in rep.items():
                # weight-q part of the image (the rest dies in Gr)
                for tkey, tc in f.of(key).terms.items():
                    if T.weight_of(tkey) == q:
                        accumulate(img, {tkey: tc * c})
            res = reduce_vector(Element(img), t_b_rows, t_b_pivots)
            images.append(Element(res))
        # the induced map must be onto (hence bijective, dims being equal)
        if span_rank(images) != len(t_reps):
            return False
        for img in images:
            if not in_span(img, t_reps, t_pivots):
                return False
    return True


def is_strict_surjection(f):
    """Is f surjective on every filtration stage of the target window?

    For each weight q, the image of the weight >= q part of the source must
    span the whole weight >= q part of the target, degree by degree.
    """
    S, T = f.source, f.target
    weights = sorted({a.weight for a in T.atoms} | {0})
    for q in weights:
        degrees = sorted({a.degree for a in T.atoms if a.weight >= q})
        for ndeg in degrees:
            target_dim = sum(1 for a in T.atoms
                             if a.degree == ndeg and a.weight >= q)
            images = [f.of(a.id) for a in S.atoms
                      if a.weight >= q and a.degree + f.degree == ndeg]
            if span_rank(images) < target_dim:
                return False
    return True


# ---------------------------------------------------------------------------
# Tensor product and mapping cone
# ---------------------------------------------------------------------------

def _max_degree(M):
    return max((a.degree for a in M.atoms), default=None)


def tensor(M, N):
    """Tensor product window: degrees and weights add, Leibniz differential.

    d(a (x) b) = d(a) (x) b + (-1)^{deg a} a (x) d(b).  Atom ids are the pairs
    (a.id, b.id).  The window is combined conservatively: a degree cell is
    reliable only when every contributing pair of cells was kept on both sides.
    """
    atoms = []
    d = {}
    for a in M.atoms:
        sign = -ONE if a.degree % 2 else ONE
        for b in N.atoms:
            atoms.append(BasisAtom((a.id, b.id), a.degree + b.degree,
                                   a.weight + b.weight))
            col = {}
            for key, c in M.d_of(a.id).terms.items():
                col[(key, b.id)] = c
            for key, c in N.d_of(b.id).terms.items():
                accumulate(col, {(a.id, key): sign * c})
            if col:
                d[(a.id, b.id)] = Element(col)
    max_M, max_N = _max_degree(M), _max_degree(N)
    min_M = min((a.degree for a in M.atoms), default=None)
    min_N = min((a.degree for a in N.atoms), default=None)
    lo_candidates = []
    if M.window.deg_lo is not None and max_N is not None:
        lo_candidates.append(M.window.deg_lo + max_N)
    if N.window.deg_lo is not None and max_M is not None:
        lo_candidates.append(N.window.deg_lo + max_M)
    hi_candidates = []
    if M.window.deg_hi is not None and min_N is not None:
        hi_candidates.append(M.window.deg_hi + min_N)
    if N.window.deg_hi is not None and min_M is not None:
        hi_candidates.append(N.window.deg_hi + min_M)
    def opt_min(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return min(a, b)
    window = Window(
        deg_lo=max(lo_candidates) if lo_candidates else None,
        deg_hi=min(hi_candidates) if hi_candidates else None,
        wt_max=opt_min(M.window.wt_max, N.window.wt_max),
    )
    return FGModule(atoms, d, window=window,
                    warnings=M.warnings + N.warnings)


def mapping_cone(f):
    """Mapping cone of a degree-0 chain map f: S -> T.

    Cone degree n holds S_{n-1} (ids tagged "cone_s", degree shifted up by 1)
    and T_n (ids tagged "cone_t"); D(s, t) = (-d_S s, f(s) + d_T t).
    """
    assert f.degree == 0, "cone is implemented for degree-0 maps"
    S, T = f.source, f.target
    atoms = []
    d = {}
    for a in S.atoms:
        atoms.append(BasisAtom(("cone_s", a.id), a.degree + 1, a.weight))
    for b in T.atoms:
        atoms.append(BasisAtom(("cone_t", b.id), b.degree, b.weight))
    for a in S.atoms:
        col = {}
        for key, c in S.d_of(a.id).terms.items():
            col[("cone_s", key)] = -c
        for key, c in f.of(a.id).terms.items():
            accumulate(col, {("cone_t", key): c})
        if col:
            d[("cone_s", a.id)] = Element(col)
    for b in T.atoms:
        col = {("cone_t", key): c for key, c in T.d_of(b.id).terms.items()}
        if col:
            d[("cone_t", b.id)] = Element(col)
    def opt(a, b, pick):
        if a is None:
            return b
        if b is None:
            return a
        return pick(a, b)
    window = Window(
        deg_lo=opt(None if S.window.deg_lo is None else S.window.deg_lo + 1,
                   T.window.deg_lo, max),
        deg_hi=opt(None if S.window.deg_hi is None else S.window.deg_hi + 1,
                   T.window.deg_hi, min),
        wt_max=opt(S.window.wt_max, T.window.wt_max, min),
    )
    return FGModule(atoms, d, window=window, warnings=S.warnings + T.warnings)
