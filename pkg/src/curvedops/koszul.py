"""Koszul duality for the curved associative operad, and the curved
homotopy-associative algebras it governs.

The curved associative operad (``operadcore.cas``) has a binary product
of degree 0, a nullary element of degree -2 in filtration weight 1, the
associativity relation, and curvature given by the signed difference of
plugging the nullary element into the two slots of the product.  Its
Koszul dual cooperad is computed here in two presentations which are
cross-checked against each other:

* concretely, inside the cofree tree cooperad on a shifted product and
  a shifted mark (``cas_quadratic_data``): the dual is the kernel
  subcooperad of that quadratic data, and ``cas_dual_generators`` writes
  its cogenerator at every arity in closed form -- signed binary combs
  with marked leaves.  ``cas_dual_decomposition`` verifies the two-level
  decomposition law cell by cell against the closed-form sign
  ``decomposition_sign``, and ``verify_dual_identification`` bundles the
  kernel comparison with the decomposition checks;

* abstractly, with one cogenerator per arity and the decomposition law
  as structure constants (``CasDualCooperad``) -- the form consumed by
  the cobar construction and the convolution calculus.  The canonical
  twisting morphism into the curved associative operad is
  ``cas_koszul_twisting_morphism``.

The consumers of the duality follow: syzygy-degree homology of bar
constructions and the change of basis it induces (``syzygy_h0``,
``cas_pbw_comparison``), annihilator duals of quadratic presentations
with curvature or unit constants (``QuadraticPresentation``,
``koszul_dual_operad``, ``cas_koszul_dual_operad``), the tabulated
curved homotopy-associativity relations and their re-derivation from
the cobar differential (``ainfty_relations``, ``relations_from_cobar``),
and finite curved homotopy-associative algebra instances with a
relation checker (``CurvedAInftyAlgebra``, ``check_ainfty``).
"""

import itertools

from collections import namedtuple
from fractions import Fraction

from .filtcomplex import (BasisAtom, Element, FGModule, ONE, ZERO,
                          accumulate, echelonize, express_in_span, in_span,
                          kernel_basis, span_rank)
from .planartree import PlanarTree, TRIVIAL, corolla, graft
from .operadcore import (BULLET, CURV, CURVATURE_SIGN, MU, CurvedOperad,
                         EndOperad, GeneratorSet, OperadElement, cas,
                         compose, make_assoc_normalizer)
from .cooperadcore import TreeCooperad, subcooperad_kernel
from .barcobar import bar, cobar, convolution


# ---------------------------------------------------------------------------
# the dual cooperad inside the cofree tree cooperad
# ---------------------------------------------------------------------------

SPROD = "m"   # shifted binary product cogenerator: arity 2, degree 1
SMARK = "p"   # shifted nullary mark cogenerator: degree -1, weight 1

_DUAL_GENS = GeneratorSet([(SPROD, 2, 1, 0), (SMARK, 0, -1, 1)])
_PROD = corolla(SPROD, 2)
_MARK = corolla(SMARK, 0)
_MARK_ELEMENT = OperadElement.from_tree(_DUAL_GENS, _MARK)


def cas_quadratic_data():
    """Quadratic data carving the Koszul dual of the curved associative
    operad out of a cofree tree cooperad.

    Returns ``(cooperad, associativity, curvature_witness)``:
    ``cooperad`` is the infinitesimal tree cooperad on the shifted
    product (arity 2, degree 1) and the shifted mark (arity 0, degree
    -1, weight 1); ``associativity`` is the two-vertex element
    (left comb) - (right comb) on the product; ``curvature_witness``
    pairs the mark into the product, (product o_2 mark) - (product o_1
    mark), and is identified with the class of the unit.  Passing these
    to ``cooperadcore.subcooperad_kernel`` computes the dual cooperad as
    a kernel; ``cas_dual_generators`` gives the same cooperad by closed
    formula, one cogenerator per arity.
    """
    cooperad = TreeCooperad(_DUAL_GENS, infinitesimal=True)
    associativity = Element({graft(_PROD, 1, _PROD): ONE,
                             graft(_PROD, 2, _PROD): -ONE})
    curvature_witness = Element({graft(_PROD, 2, _MARK): ONE,
                                 graft(_PROD, 1, _MARK): -ONE})
    return cooperad, associativity, curvature_witness


_BINARY_CACHE = {1: ((TRIVIAL, 1),)}


def _signed_binary(n):
    """Planar binary trees on the product cogenerator with ``n`` leaves,
    as (tree, sign) pairs; the single leaf is the trivial tree.

    The sign is multiplicative over the root split, with an extra -1
    when the left subtree has an even number of leaves; so arity 2 is
    the bare product with sign +1 and arity 3 is (right comb) - (left
    comb).  Summed with these signs the family is closed under the
    decomposition law of the kernel subcooperad.
    """
    got = _BINARY_CACHE.get(n)
    if got is None:
        acc = []
        for i in range(1, n):
            sign_i = -1 if (i - 1) % 2 else 1
            for left, sl in _signed_binary(i):
                for right, sr in _signed_binary(n - i):
                    acc.append((PlanarTree(SPROD, (left, right)),
                                sign_i * sl * sr))
        got = tuple(acc)
        _BINARY_CACHE[n] = got
    return got


_ALTERNATING_CACHE = {}


def _alternating_sum(m):
    """The signed sum of all arity-``m`` binary product trees, as an
    OperadElement of degree m - 1."""
    got = _ALTERNATING_CACHE.get(m)
    if got is None:
        got = OperadElement(
            _DUAL_GENS, m,
            Element({t: Fraction(s) for t, s in _signed_binary(m)}))
        _ALTERNATING_CACHE[m] = got
    return got


def _marked_term(m, slots):
    """Close the listed slots of the arity-``m`` alternating sum with the
    nullary mark, composing one slot at a time from the highest slot
    down (each composition carries its own grafting sign)."""
    x = _alternating_sum(m)
    for i in sorted(slots, reverse=True):
        x = compose(x, i, _MARK_ELEMENT)
    return x


_LAYER_CACHE = {}


def _expansion_layer(n, k):
    """Weight-``k`` layer of the arity-``n`` dual cogenerator: an Element
    over binary product trees with n + k leaves, k of them closed by the
    mark.

    A slot set S contributes ``_marked_term(n + k, S)`` with the sign
    (-1)**e, where

        e = (sum(S) - k) + k (n + k) + k (k - 1) / 2.

    The exponent makes the family close under the decomposition law with
    the coefficients of ``decomposition_sign``; the kernel comparison in
    ``verify_dual_identification`` pins it, since the kernel subcooperad
    determines each cogenerator up to one scalar per arity and the
    decomposition law relates the scalars across arities.
    """
    got = _LAYER_CACHE.get((n, k))
    if got is None:
        m = n + k
        acc = {}
        for slots in itertools.combinations(range(1, m + 1), k):
            e = (sum(slots) - k) + k * m + (k * (k - 1)) // 2
            sign = -ONE if e % 2 else ONE
            accumulate(acc, _marked_term(m, slots).elt.terms, sign)
        got = Element(acc)
        _LAYER_CACHE[(n, k)] = got
    return got


class DualGenerator:
    """One cogenerator of the dual cooperad, expanded in the cofree tree
    cooperad and truncated at mark weight ``max_weight``.

    The arity-``n`` cogenerator has degree ``n - 1`` and collects the
    layers ``_expansion_layer(n, k)`` for ``k <= max_weight``.  The
    arity-1 cogenerator leads with the trivial tree, every arity >= 2
    leads with the plain alternating binary sum, and arity 0 starts in
    weight 1 with minus the bare mark.  ``expansion`` is an Element over
    planar trees; ``weight_part`` returns a single layer;
    ``operad_element`` attaches the arity for the splitting machinery.
    """

    def __init__(self, arity, max_weight):
        assert arity >= 0 and max_weight >= 0
        self.arity = arity
        self.max_weight = max_weight
        self.degree = arity - 1
        acc = {}
        for k in range(max_weight + 1):
            accumulate(acc, _expansion_layer(arity, k).terms, ONE)
        self.expansion = Element(acc)

    def weight_part(self, k):
        if 0 <= k <= self.max_weight:
            return _expansion_layer(self.arity, k)
        return Element()

    def operad_element(self):
        return OperadElement(_DUAL_GENS, self.arity, self.expansion)

    def __repr__(self):
        return ("DualGenerator(arity=%d, degree=%d, max_weight=%d, "
                "terms=%d)" % (self.arity, self.degree, self.max_weight,
                               len(self.expansion.terms)))


_GENERATOR_CACHE = {}


def cas_dual_generators(arity, max_weight):
    """The closed-form dual cogenerator at one arity, truncated at mark
    weight ``max_weight``.

    The family spans the kernel subcooperad of ``cas_quadratic_data``
    cell by cell (``verify_dual_identification`` cross-checks this) and
    obeys the decomposition law verified by ``cas_dual_decomposition``.
    """
    got = _GENERATOR_CACHE.get((arity, max_weight))
    if got is None:
        got = DualGenerator(arity, max_weight)
        _GENERATOR_CACHE[(arity, max_weight)] = got
    return got


# ---------------------------------------------------------------------------
# the decomposition law of the dual cogenerators
# ---------------------------------------------------------------------------

def _mark_weight(t):
    """Number of mark leaves of a tree over the dual cogenerators: its
    weight without the counit shift (the trivial tree counts 0)."""
    if t.is_trivial:
        return 0
    return sum(1 for label in t.decorations() if label == SMARK)


def decomposition_sign(parts):
    """Closed-form coefficient of one cell of the dual decomposition law.

    In the two-level decomposition of the arity-``sum(parts)`` dual
    cogenerator, the cell (upper cogenerator of arity k = len(parts))
    tensor (lower cogenerators of arities ``parts``) carries the
    coefficient (-1)**e with

        e = sum_j (parts_j - 1) (k - j),       j = 1 .. k:

    each lower factor weighs its desuspended degree against the number
    of factors to its right.  The empty profile (the arity-0 cut with
    upper arity 0) has coefficient +1.
    """
    k = len(parts)
    e = sum((parts[j] - 1) * (k - 1 - j) for j in range(k))
    return -ONE if e % 2 else ONE


def _compositions(total, parts):
    """Ordered tuples of ``parts`` nonnegative integers summing to
    ``total``."""
    if parts == 0:
        return [()] if total == 0 else []
    out = []
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            out.append((head,) + tail)
    return out


def _windowed_tensor(parts, max_weight):
    """Two-level tensors of dual cogenerator expansions for one cell,
    pruned to total mark weight <= max_weight: a dict mapping
    (upper tree, lower tree tuple) to the product of coefficients."""
    upper = cas_dual_generators(len(parts), max_weight)
    out = {}
    for ut, uc in upper.expansion.terms.items():
        states = [((), uc, _mark_weight(ut))]
        for i in parts:
            lower = cas_dual_generators(i, max_weight)
            moved = []
            for lows, c, w in states:
                for lt, lc in lower.expansion.terms.items():
                    w2 = w + _mark_weight(lt)
                    if w2 <= max_weight:
                        moved.append((lows + (lt,), c * lc, w2))
            states = moved
            if not states:
                break
        for lows, c, _ in states:
            out[(ut, lows)] = c
    return out


class DecompositionCell:
    """Comparison of one (upper arity, lower profile) cell of a computed
    decomposition against the closed-form law.

    ``expected`` is ``decomposition_sign(parts)``; ``coefficient`` is
    the scalar by which the computed cell is a multiple of the windowed
    tensor of cogenerator expansions (None when it is not proportional);
    ``matches`` records exact agreement.  Cells killed entirely by the
    weight window carry ``in_window = False`` and a None verdict.
    """

    def __init__(self, parts, expected, coefficient, matches, in_window,
                 terms):
        self.parts = parts
        self.upper_arity = len(parts)
        self.expected = expected
        self.coefficient = coefficient
        self.matches = matches
        self.in_window = in_window
        self.terms = terms

    def __repr__(self):
        if not self.in_window:
            return "<cell %r: out of window>" % (self.parts,)
        verdict = "ok" if self.matches else "MISMATCH"
        return "<cell %r: expected %s, got %s, %s>" % (
            self.parts, self.expected, self.coefficient, verdict)


class DecompositionReport:
    """Cell-by-cell verdict on the decomposition of one dual cogenerator.

    ``cells`` maps lower-arity profiles to DecompositionCell;
    ``remainder`` collects computed decomposition keys belonging to no
    enumerated cell (empty when the law holds); ``ok`` requires every
    in-window cell to match exactly and the remainder to vanish.
    """

    def __init__(self, arity, max_weight, cells, remainder):
        self.arity = arity
        self.max_weight = max_weight
        self.cells = cells
        self.remainder = remainder

    @property
    def ok(self):
        return (not self.remainder
                and all(c.matches for c in self.cells.values()
                        if c.in_window))

    @property
    def checked_cells(self):
        return sum(1 for c in self.cells.values() if c.in_window)

    def __repr__(self):
        return ("DecompositionReport(arity=%d, max_weight=%d, cells=%d, "
                "checked=%d, ok=%s)" % (self.arity, self.max_weight,
                                        len(self.cells), self.checked_cells,
                                        self.ok))


def cas_dual_decomposition(arity, max_weight):
    """Decompose the arity-``arity`` dual cogenerator inside the cofree
    tree cooperad and compare every cell against the closed-form law.

    The two-level decomposition of the truncated expansion is computed,
    its keys are filtered to total mark weight <= ``max_weight`` and
    grouped by the arity profile of the lower factors, and every
    in-window cell must equal ``decomposition_sign(profile)`` times the
    windowed tensor of cogenerator expansions (``_windowed_tensor``).
    Cells whose windowed tensor is empty are reported as out of window
    and not judged; nothing else may remain.
    """
    cooperad, _, _ = cas_quadratic_data()
    generator = cas_dual_generators(arity, max_weight)
    raw = cooperad.delta(generator.operad_element())
    computed = {}
    for (upper, lowers), c in raw.terms.items():
        w = _mark_weight(upper) + sum(_mark_weight(t) for t in lowers)
        if w > max_weight:
            continue
        profile = tuple(t.arity for t in lowers)
        computed.setdefault(profile, {})[(upper, lowers)] = c
    cells = {}
    remainder = {}
    for k in range(arity + max_weight + 1):
        for parts in _compositions(arity, k):
            got = computed.pop(parts, {})
            tensor = _windowed_tensor(parts, max_weight)
            expected = decomposition_sign(parts)
            if not tensor:
                remainder.update(got)
                cells[parts] = DecompositionCell(parts, expected, None,
                                                 None, False, 0)
                continue
            reference = min(tensor, key=repr)
            scale = got.get(reference, ZERO) / tensor[reference]
            scaled = {key: scale * c for key, c in tensor.items()
                      if scale * c}
            proportional = got == scaled
            cells[parts] = DecompositionCell(
                parts, expected, scale if proportional else None,
                proportional and scale == expected, True, len(tensor))
    for got in computed.values():
        remainder.update(got)
    return DecompositionReport(arity, max_weight, cells, remainder)


# ---------------------------------------------------------------------------
# kernel cross-check
# ---------------------------------------------------------------------------

class DualCheckCell:
    """Kernel-versus-closed-form comparison at one arity.

    The kernel subcooperad cell at degree (arity - 1) must be the line
    spanned by the truncated cogenerator expansion: ``dimension`` 1,
    ``member`` True, and no kernel at any other degree of the arity
    (``stray_degrees`` empty).  ``conclusive`` is the window flag of the
    kernel cell: False means classifier rows reaching beyond the weight
    window were dropped, so the kernel is exact only within the window.
    """

    def __init__(self, arity, dimension, member, stray_degrees, conclusive):
        self.arity = arity
        self.dimension = dimension
        self.member = member
        self.stray_degrees = stray_degrees
        self.conclusive = conclusive

    @property
    def spans_match(self):
        return self.dimension == 1 and self.member and not self.stray_degrees

    def __repr__(self):
        return ("<arity %d: dim %d, member %s, stray %r%s>"
                % (self.arity, self.dimension, self.member,
                   self.stray_degrees,
                   "" if self.conclusive else ", window-limited"))


class DualCheckReport:
    """Dual identification verdict over a window.

    ``cells`` holds one DualCheckCell per arity; ``decompositions`` one
    DecompositionReport per arity.  ``ok`` requires every kernel cell to
    match the cogenerator line and every decomposition law to hold on
    its in-window cells.
    """

    def __init__(self, max_arity, max_weight, cells, decompositions):
        self.max_arity = max_arity
        self.max_weight = max_weight
        self.cells = cells
        self.decompositions = decompositions

    @property
    def ok(self):
        return (all(c.spans_match for c in self.cells.values())
                and all(d.ok for d in self.decompositions.values()))

    def __repr__(self):
        return ("DualCheckReport(max_arity=%d, max_weight=%d, ok=%s)"
                % (self.max_arity, self.max_weight, self.ok))


def verify_dual_identification(max_arity=3, max_weight=3, max_vertices=None):
    """Cross-check the closed-form dual cogenerators against the kernel
    subcooperad of the quadratic data, arity by arity.

    At each arity n the kernel cell at degree n - 1 must be exactly the
    line spanned by the truncated expansion, with no kernel at any other
    degree; the decomposition law is verified alongside.  Kernel cells
    can be window-limited (classifier rows reaching beyond the weight
    window are dropped and counted); the comparison is exact within the
    window either way.  The expansion support needs the full tree
    window, so ``max_vertices`` should stay None unless the kernel
    computation itself is being probed.
    """
    cooperad, associativity, witness = cas_quadratic_data()
    kernel = subcooperad_kernel(cooperad, relations=(associativity,),
                                theta_tilde=witness, max_arity=max_arity,
                                max_weight=max_weight,
                                max_vertices=max_vertices)
    cells = {}
    decompositions = {}
    for n in range(max_arity + 1):
        cell = kernel.cell(n, n - 1)
        basis = cell.basis if cell is not None else []
        rows, pivots = echelonize(basis)
        member = in_span(cas_dual_generators(n, max_weight).expansion,
                         rows, pivots)
        stray = sorted(degree for (m, degree), c in kernel.cells.items()
                       if m == n and degree != n - 1 and c.dimension)
        conclusive = cell is not None and cell.conclusive
        cells[n] = DualCheckCell(n, len(basis), member, stray, conclusive)
        decompositions[n] = cas_dual_decomposition(n, max_weight)
    return DualCheckReport(max_arity, max_weight, cells, decompositions)


# ---------------------------------------------------------------------------
# the dual cooperad on its intrinsic basis
# ---------------------------------------------------------------------------

class CasDualCooperad:
    """The dual cooperad on its intrinsic basis: one cogenerator per
    arity, with the arities themselves as keys.

    The arity-``n`` cogenerator has degree ``n - 1``; weights follow the
    counit-shifted convention of the tree cooperads (1 in arities 0 and
    1, otherwise 0).  The infinitesimal decomposition of key ``n`` is
    the full one-cut family

        key (p + 1 + r, p + 1, q),  coefficient (-1)**((q - 1) r),

    over all p + q + r = n -- including the counital cuts q = n and
    q = 1, mirroring the splitting conventions of the tree cooperads;
    the coefficients are the one-cut cells of ``decomposition_sign``.
    The counit is supported on the arity-1 key.

    This is the decomposition protocol the cobar construction and the
    convolution algebras consume.  With ``curved=False`` the arity-0
    cogenerator and all q = 0 cuts are dropped; the cobar construction
    then presents the classical homotopy-associative relations (see
    ``relations_from_cobar``).
    """

    def __init__(self, curved=True):
        self.curved = curved
        self.coaug_key = 1

    def basis(self, arity, max_weight, max_vertices=None):
        if arity < 0 or (arity == 0 and not self.curved):
            return []
        return [arity] if self.key_weight(arity) <= max_weight else []

    def key_arity(self, key):
        return key

    def key_degree(self, key):
        return key - 1

    def key_weight(self, key):
        return 1 if key <= 1 else 0

    def counit(self, key):
        return ONE if key == 1 else ZERO

    def delta_infinitesimal(self, key):
        out = {}
        qmin = 0 if self.curved else 1
        for p in range(key + 1):
            for q in range(qmin, key - p + 1):
                r = key - p - q
                sign = -ONE if ((q - 1) * r) % 2 else ONE
                out[(p + 1 + r, p + 1, q)] = sign
        return Element(out)

    def __repr__(self):
        return "CasDualCooperad(curved=%s)" % self.curved


def cas_koszul_twisting_morphism(max_weight=3):
    """The canonical twisting morphism from the dual cooperad into the
    curved associative operad.

    The arity-2 key maps to the product, the arity-0 key to the nullary
    generator, everything else to zero.  Returns ``(algebra, alpha)``:
    the convolution algebra over the weight window and the degree -1
    element.  ``algebra.is_twisting_morphism(alpha, max_arity)``
    verifies the Maurer-Cartan equation: the curvature term cancels
    against the self-product through the two cuts pairing the product
    with the mark, and the associativity cuts cancel inside the operad.
    """
    source = CasDualCooperad()
    operad = cas(max_weight=max_weight)
    algebra = convolution(source, operad, max_weight)
    product = operad.element(corolla(MU, 2))
    mark = operad.element(corolla(BULLET, 0))

    def fn(key):
        if key == 2:
            return product
        if key == 0:
            return mark
        return None
    return algebra, algebra.element(-1, fn)


# ---------------------------------------------------------------------------
# syzygy-degree homology of bar constructions
# ---------------------------------------------------------------------------

def syzygy_degree(barc, t):
    """Syzygy degree of a bar basis tree: the sum over its vertices of
    (1 - vertex count of the decoration's normal form).

    Single-generator decorations contribute 0 and every composite or
    curvature-bearing decoration is negative, so the degree is never
    positive; the trivial tree has degree 0.  On a host with zero
    internal differential both remaining pieces of the bar differential
    (curvature insertion and edge collapse) lower it by exactly one.
    """
    sigma = 0
    for gid in t.decorations():
        sigma += 1 - sum(1 for _ in barc.unshift(gid).decorations())
    return sigma


def _syzygy_map(barc, t, max_weight):
    """Curvature insertion plus edge collapse on one bar basis tree,
    validated to lower the syzygy degree by one and truncated to the
    weight window.  Returns (kept Element, dropped term count)."""
    image = (barc.curvature_insertion(t) + barc.edge_collapse(t)).elt
    base = syzygy_degree(barc, t)
    kept = {}
    dropped = 0
    for u, c in image.terms.items():
        if syzygy_degree(barc, u) != base - 1:
            raise ValueError(
                "syzygy degree not lowered by one: %r -> %r" % (t, u))
        if barc.cooperad.tree_weight(u) <= max_weight:
            kept[u] = c
        else:
            dropped += 1
    return Element(kept), dropped


class SyzygyCell:
    """Syzygy-degree-0 homology at one arity of a bar construction.

    ``atoms`` are the window basis trees of degree 0 (every decoration a
    single generator); ``basis`` spans the kernel of the bar map out of
    degree 0, which is the homology there since no differential lands in
    degree 0.  ``dropped`` counts image terms cut by the weight window;
    the cell is ``interior`` when none were.
    """

    def __init__(self, arity, atoms, basis, dropped):
        self.arity = arity
        self.atoms = atoms
        self.basis = basis
        self.dropped = dropped

    @property
    def dimension(self):
        return len(self.basis)

    @property
    def interior(self):
        return self.dropped == 0

    def __repr__(self):
        return ("<syzygy 0 at arity %d: dim %d over %d atoms%s>"
                % (self.arity, self.dimension, len(self.atoms),
                   "" if self.interior else ", window-limited"))


class SyzygyVanishing:
    """Homology count at one negative syzygy degree of one arity:
    ``dimension = (atoms - rank of the outgoing map) - rank of the
    incoming map``.  ``interior`` means no image term was cut by the
    weight window at this degree or the one above."""

    def __init__(self, arity, degree, atoms, kernel_dim, image_rank,
                 dropped):
        self.arity = arity
        self.degree = degree
        self.atoms = atoms
        self.kernel_dim = kernel_dim
        self.image_rank = image_rank
        self.dropped = dropped

    @property
    def dimension(self):
        return self.kernel_dim - self.image_rank

    @property
    def interior(self):
        return self.dropped == 0

    def __repr__(self):
        return ("<syzygy %d at arity %d: dim %d%s>"
                % (self.degree, self.arity, self.dimension,
                   "" if self.interior else ", window-limited"))


class SyzygyReport:
    """Syzygy homology of a bar construction over a window.

    ``cells`` maps each arity to its degree-0 SyzygyCell; ``vanishing``
    maps (arity, degree) to a SyzygyVanishing for the probed negative
    degrees.  ``dimension_table`` summarizes degree 0;
    ``vanishing_ok`` holds when every interior negative cell has zero
    homology.
    """

    def __init__(self, max_arity, max_weight, cells, vanishing):
        self.max_arity = max_arity
        self.max_weight = max_weight
        self.cells = cells
        self.vanishing = vanishing

    def dimension_table(self):
        return {n: cell.dimension for n, cell in sorted(self.cells.items())}

    @property
    def vanishing_ok(self):
        return all(v.dimension == 0 for v in self.vanishing.values()
                   if v.interior)

    def __repr__(self):
        return ("SyzygyReport(max_arity=%d, max_weight=%d, dims=%r)"
                % (self.max_arity, self.max_weight, self.dimension_table()))


def syzygy_h0(barc, max_arity=None, max_weight=None, max_vertices=None,
              min_syzygy=-2):
    """Homology of a bar construction in syzygy degree 0, arity by arity,
    with vanishing counts for the probed negative degrees.

    Requires a host with zero internal differential (ValueError
    otherwise): the bar differential is then curvature insertion plus
    edge collapse, and both lower the syzygy degree by exactly one
    (checked term by term).  Degree 0 receives no differential, so its
    homology is the kernel of the outgoing map, solved exactly over the
    rationals; the negative degrees down to ``min_syzygy`` get homology
    dimensions by rank arithmetic.  Image terms heavier than the window
    are dropped and counted per cell; cells with drops are reported as
    not interior (their counts are exact only within the window).
    """
    if barc.operad.d_images:
        raise ValueError("syzygy homology needs a host with zero internal "
                         "differential")
    if max_arity is None:
        max_arity = barc.max_arity
    if max_weight is None:
        max_weight = barc.max_weight
    if max_vertices is None:
        max_vertices = barc.max_vertices
    cells = {}
    vanishing = {}
    for n in range(max_arity + 1):
        by_degree = {}
        for t in barc.basis(n, max_weight, max_vertices):
            by_degree.setdefault(syzygy_degree(barc, t), []).append(t)
        assert all(s <= 0 for s in by_degree), "positive syzygy degree"
        images = {}
        drops = {}
        for s, atoms in by_degree.items():
            imgs = []
            dropped = 0
            for t in atoms:
                img, d = _syzygy_map(barc, t, max_weight)
                imgs.append(img)
                dropped += d
            images[s] = imgs
            drops[s] = dropped
        atoms0 = by_degree.get(0, [])
        rows = {}
        for t, img in zip(atoms0, images.get(0, [])):
            for u, c in img.terms.items():
                rows.setdefault(u, {})[t] = c
        kernel = [Element(v)
                  for v in kernel_basis(list(rows.values()), atoms0)]
        cells[n] = SyzygyCell(n, atoms0, kernel, drops.get(0, 0))
        for s in range(min_syzygy, 0):
            atoms_s = by_degree.get(s, [])
            if not atoms_s and not by_degree.get(s + 1):
                continue
            kernel_dim = len(atoms_s) - span_rank(images.get(s, []))
            image_rank = span_rank(images.get(s + 1, []))
            vanishing[(n, s)] = SyzygyVanishing(
                n, s, len(atoms_s), kernel_dim, image_rank,
                drops.get(s, 0) + drops.get(s + 1, 0))
    return SyzygyReport(max_arity, max_weight, cells, vanishing)


def _relabel(t, mapping):
    if t.is_trivial:
        return t
    return PlanarTree(mapping[t.label],
                      tuple(_relabel(c, mapping) for c in t.children))


class PBWCell:
    """One arity of the bar-homology basis comparison: the syzygy-0
    dimension, the coordinates of the translated dual cogenerator in the
    homology basis (None when not contained), and the match verdict."""

    def __init__(self, arity, dimension, coordinates, match):
        self.arity = arity
        self.dimension = dimension
        self.coordinates = coordinates
        self.match = match

    def __repr__(self):
        return ("<arity %d: dim %d, coords %r, %s>"
                % (self.arity, self.dimension, self.coordinates,
                   "ok" if self.match else "MISMATCH"))


class PBWReport:
    """Change of basis between syzygy-0 bar homology and the dual
    cogenerators, arity by arity; ``ok`` requires every cell to be the
    line spanned by the translated cogenerator expansion."""

    def __init__(self, max_arity, max_weight, cells, syzygy):
        self.max_arity = max_arity
        self.max_weight = max_weight
        self.cells = cells
        self.syzygy = syzygy

    @property
    def ok(self):
        return all(c.match for c in self.cells.values())

    def __repr__(self):
        return ("PBWReport(max_arity=%d, max_weight=%d, ok=%s)"
                % (self.max_arity, self.max_weight, self.ok))


def cas_pbw_comparison(barc=None, max_arity=3, max_weight=3,
                       max_vertices=None):
    """Compare syzygy-degree-0 bar homology of the curved associative
    operad against the closed-form dual cogenerators.

    The expansion of each dual cogenerator translates onto the bar
    cogenerators (product vertex to the shifted product, mark vertex to
    the shifted mark, and one sign per mark vertex: the closed form
    composes the mark in its shifted degree -1, while the edge collapse
    of the bar differential composes it in the host degree -2, an odd
    parity difference per mark).  Per arity the translated expansion
    must span the degree-0 homology computed by ``syzygy_h0`` -- the
    completed dual has exactly one cogenerator per arity, so every cell
    must be one-dimensional -- and the coordinates in the computed
    homology basis are the change-of-basis data.  A bar construction
    may be passed in, otherwise one is built over the window.
    """
    if barc is None:
        barc = bar(cas(), max_arity, max_weight, max_vertices)
    report = syzygy_h0(barc, max_arity, max_weight, max_vertices)
    mapping = {SPROD: barc.shift(corolla(MU, 2)),
               SMARK: barc.shift(corolla(BULLET, 0))}
    cells = {}
    for n in range(max_arity + 1):
        cell = report.cells[n]
        generator = cas_dual_generators(n, max_weight)
        translated = Element(
            {_relabel(t, mapping): -c if _mark_weight(t) % 2 else c
             for t, c in generator.expansion.terms.items()})
        coordinates = express_in_span(translated, cell.basis)
        cells[n] = PBWCell(n, cell.dimension, coordinates,
                           cell.dimension == 1 and coordinates is not None)
    return PBWReport(max_arity, max_weight, cells, report)


# ---------------------------------------------------------------------------
# quadratic presentations and annihilator duals
# ---------------------------------------------------------------------------

_CONSTANT = "const"


class QuadraticPresentation:
    """Generators-and-relations data, one composition deep.

    ``gens`` is a GeneratorSet; ``relations`` is a tuple of pairs
    ``(constant, element)`` with the element supported on two-vertex
    trees and the scalar multiplying a formal constant slot, available
    in arity 1 only. ``constant_kind`` names that slot: ``"curvature"``
    (the relation identifies the formal curvature with a combination of
    two-vertex trees) or ``"unit"`` (the relation involves the operad
    unit).  Dualizing swaps the two kinds.  ``name_map`` translates
    generator ids back to the ids they dualize when the presentation
    arose from ``koszul_dual_operad``.
    """

    def __init__(self, gens, relations, constant_kind="curvature",
                 name_map=None):
        assert constant_kind in ("curvature", "unit")
        self.gens = gens
        self.relations = tuple(relations)
        self.constant_kind = constant_kind
        self.name_map = dict(name_map or {})
        for const, elt in self.relations:
            assert isinstance(elt, OperadElement)
            for t, _ in elt.terms():
                assert sum(1 for _ in t.decorations()) == 2, \
                    "relations must be supported on two-vertex trees"
            if const:
                assert elt.arity == 1, \
                    "the constant slot lives in arity 1"

    def arity_relations(self, arity):
        return [(c, e) for c, e in self.relations if e.arity == arity]

    def relation_vectors(self):
        """The relations as raw dicts over the constant slot and the
        two-vertex trees, for span comparisons."""
        out = []
        for const, elt in self.relations:
            vec = {t: c for t, c in elt.terms()}
            if const:
                vec[_CONSTANT] = const
            out.append(vec)
        return out

    def __repr__(self):
        return ("QuadraticPresentation(gens=%r, relations=%d, kind=%s)"
                % (self.gens.ids(), len(self.relations),
                   self.constant_kind))


def _dual_name(gid):
    """Dual generator id: append a ``*``, or strip one, so that
    dualizing twice restores the original ids."""
    return gid[:-1] if gid.endswith("*") else gid + "*"


def _two_vertex_trees(gens, arity):
    """All two-vertex trees of one arity over ``gens``, sorted."""
    out = []
    for top in gens.ids():
        a = gens.arity(top)
        for i in range(1, a + 1):
            for bottom in gens.ids():
                b = gens.arity(bottom)
                if a - 1 + b == arity:
                    out.append(graft(corolla(top, a), i,
                                     corolla(bottom, b)))
    return sorted(out, key=repr)


def _split_two_vertex(t):
    """(top id, slot, bottom id) of a two-vertex tree."""
    for j, child in enumerate(t.children):
        if not child.is_trivial:
            return t.label, j + 1, child.label
    raise AssertionError("not a two-vertex tree: %r" % (t,))


def _pairing_sign(slot, lower_degree, dual_upper_degree):
    """Koszul sign of the pairing between mirrored two-vertex trees:
    (-1)**(slot - 1) from the slot, times the cross sign moving the
    lower factor past the dual upper factor."""
    e = (slot - 1) + lower_degree * dual_upper_degree
    return -ONE if e % 2 else ONE


def koszul_dual_operad(presentation, dual_weights=None, max_weight=None):
    """Quadratic annihilator dual of a presentation.

    Generators dualize one for one: ``g`` of arity n and degree d maps
    to ``g*`` of arity n and degree (n - 2) - d (a trailing ``*`` is
    stripped instead of doubled, so the double dual restores the
    original ids).  Weights are not determined by the pairing; they are
    taken from ``dual_weights`` (dual id -> weight, default 0), which
    encodes where the dual generators sit in the filtration.  The
    constant kind flips between curvature and unit.

    Per arity the dual relation space is the exact annihilator of the
    primal relations under the rational pairing

        <constant, constant> = 1,
        <(g, i, h), (g*, i, h*)> = (-1)**(i - 1) (-1)**(deg h deg g*),

    all other pairs zero; the annihilator is computed as a kernel, and
    arities whose primal cell carries no relation dualize to full
    relation cells.  The constant direction enters the pairing only
    when the presentation uses it somewhere, so constant-free
    (classical quadratic) presentations dualize constant-free.  The
    cross sign is normalized so that the double dual is the identity on
    the shipped presentations.  With a ``max_weight`` window, a
    relation term heavier than the window raises ValueError (the
    pairing would be degenerate there).
    """
    weights = dict(dual_weights or {})
    primal = presentation.gens
    if max_weight is not None:
        for const, elt in presentation.relations:
            for t, _ in elt.terms():
                if primal.tree_weight(t) > max_weight:
                    raise ValueError(
                        "relation term %r has weight %d beyond the window"
                        % (t, primal.tree_weight(t)))
    data = []
    name_map = {}
    for gid in primal.ids():
        dual_id = _dual_name(gid)
        n = primal.arity(gid)
        data.append((dual_id, n, (n - 2) - primal.degree(gid),
                     weights.get(dual_id, 0)))
        name_map[dual_id] = gid
    dual_gens = GeneratorSet(data)
    dual_kind = ("unit" if presentation.constant_kind == "curvature"
                 else "curvature")
    arities = {primal.arity(g) - 1 + primal.arity(h)
               for g in primal.ids() for h in primal.ids()
               if primal.arity(g) >= 1}
    has_constant = any(c for c, _ in presentation.relations)
    dual_relations = []
    for n in sorted(arities | {1}):
        dual_trees = _two_vertex_trees(dual_gens, n)
        variables = ([_CONSTANT] if n == 1 and has_constant
                     else []) + dual_trees
        if not variables:
            continue
        rows = []
        for const, elt in presentation.arity_relations(n):
            row = {}
            if const:
                row[_CONSTANT] = const
            for t, c in elt.terms():
                top, slot, bottom = _split_two_vertex(t)
                dual_t = graft(
                    corolla(_dual_name(top), primal.arity(top)), slot,
                    corolla(_dual_name(bottom), primal.arity(bottom)))
                row[dual_t] = c * _pairing_sign(
                    slot, primal.degree(bottom),
                    dual_gens.degree(_dual_name(top)))
            rows.append(row)
        for vec in kernel_basis(rows, variables):
            vec = dict(vec)
            const = vec.pop(_CONSTANT, ZERO)
            dual_relations.append(
                (const, OperadElement(dual_gens, n, Element(vec))))
    return QuadraticPresentation(dual_gens, dual_relations, dual_kind,
                                 name_map)


def cas_presentation():
    """The curved associative operad as a quadratic presentation: the
    binary product and the nullary mark, associativity, and the
    arity-1 relation identifying the curvature constant with the signed
    pairing of the mark into the product (matching the orientation of
    ``operadcore.cas``)."""
    gens = GeneratorSet([(MU, 2, 0, 0), (BULLET, 0, -2, 1)])
    product = gens.corolla_element(MU)
    mark = gens.corolla_element(BULLET)
    associativity = compose(product, 1, product) - compose(product, 2,
                                                           product)
    witness = CURVATURE_SIGN * (compose(product, 2, mark)
                                - compose(product, 1, mark))
    return QuadraticPresentation(
        gens, ((ZERO, associativity), (ONE, -witness)),
        constant_kind="curvature")


def cas_koszul_dual_operad(max_weight=None):
    """The Koszul dual of the curved associative operad, realized as a
    presented operad.

    The annihilator dual of ``cas_presentation`` is the operad of
    unital associative algebras on the dual product and the dual mark:
    the arity-3 dual relation is associativity and the two arity-1 dual
    relations make the dual mark a two-sided unit.  The returned
    CurvedOperad carries the matching rewrite normalizer, so its normal
    forms are the bare unit in arity 0, the trivial tree in arity 1 and
    the unit-free left comb in every higher arity: one per arity
    (enumerate with an explicit vertex cap, since the dual generators
    are weightless).
    """
    dual = koszul_dual_operad(cas_presentation())
    relations = []
    for const, quad in dual.relations:
        elt = quad
        if const:
            elt = elt + OperadElement(dual.gens, 1,
                                      Element({TRIVIAL: const}))
        relations.append(elt)
    return CurvedOperad(
        dual.gens, relations=tuple(relations),
        normalize_tree=make_assoc_normalizer(_dual_name(MU),
                                             unit=_dual_name(BULLET)),
        max_weight=max_weight)


# ---------------------------------------------------------------------------
# homotopy-associativity relations
# ---------------------------------------------------------------------------

RelationTerm = namedtuple("RelationTerm", ("n", "k", "q", "position",
                                           "sign"))


def ainfty_relations(n, curved=True):
    """The arity-``n`` curved homotopy-associativity relation as
    RelationTerm records, sorted by (k, position).

    For every p + q + r = n the operation of arity k = p + 1 + r
    composed with the operation of arity q in position p + 1 enters
    with the sign (-1)**(p + q r).  With ``curved=False`` the q = 0
    terms are dropped (the classical relations).  The n = 1 relation
    states that the square of the unary operation is the commutator-
    style pairing of the binary operation with the nullary one -- the
    defining identity of a curved complex.
    """
    terms = []
    for p in range(n + 1):
        for q in range(0 if curved else 1, n - p + 1):
            r = n - p - q
            sign = -ONE if (p + q * r) % 2 else ONE
            terms.append(RelationTerm(n, p + 1 + r, q, p + 1, sign))
    terms.sort(key=lambda term: (term.k, term.position))
    return terms


class CobarRelationReport:
    """Relations read off the cobar construction of the dual cooperad.

    ``relations[n]`` lists the RelationTerm records parsed from the
    split part of the cobar differential on the arity-``n`` generator,
    sorted like ``ainfty_relations(n)``; ``curvature_coefficients``
    records the coefficient of the formal curvature in each generator's
    differential (supported on the arity-1 generator, where the counit
    sits).  ``comparison_constant`` extracts the single global scalar
    relating the lists to the tabulated relations.
    """

    def __init__(self, max_n, curved, relations, curvature_coefficients):
        self.max_n = max_n
        self.curved = curved
        self.relations = relations
        self.curvature_coefficients = curvature_coefficients

    def comparison_constant(self):
        """The scalar c with relations[n] = c * ainfty_relations(n) for
        every tabulated arity, or None when no single scalar works."""
        constant = None
        for n, terms in sorted(self.relations.items()):
            expected = ainfty_relations(n, self.curved)
            if len(terms) != len(expected):
                return None
            for got, want in zip(terms, expected):
                if got[:4] != want[:4]:
                    return None
                ratio = got.sign / want.sign
                if constant is None:
                    constant = ratio
                elif ratio != constant:
                    return None
        return constant

    def __repr__(self):
        return ("CobarRelationReport(max_n=%d, curved=%s, constant=%r)"
                % (self.max_n, self.curved, self.comparison_constant()))


def relations_from_cobar(max_n, curved=True):
    """Re-derive the homotopy-associativity relations from the cobar
    construction of the dual cooperad.

    Builds the cobar of ``CasDualCooperad(curved)`` and parses the split
    part of the differential on each generator: a two-vertex tree with
    upper key k, lower key q in slot i becomes the record
    (n, k, q, i, coefficient).  The curvature part lands on the arity-1
    generator; its coefficient is reported alongside, giving the n = 1
    relation its curved reading (the square of the differential is
    measured by the curvature).
    """
    source = CasDualCooperad(curved)
    cob = cobar(source, max_arity=max_n, max_weight=1)
    relations = {}
    curvature_coefficients = {}
    for n in range(0 if curved else 1, max_n + 1):
        gid = cob.gens.register(n)
        terms = []
        split = cob.split_images.get(gid)
        if split is not None:
            for t, c in split.terms():
                upper = cob.gens.key_of[t.label]
                position = None
                lower = None
                for j, child in enumerate(t.children):
                    if not child.is_trivial:
                        assert position is None, "not a two-vertex tree"
                        position = j + 1
                        lower = cob.gens.key_of[child.label]
                terms.append(RelationTerm(n, upper, lower, position, c))
        terms.sort(key=lambda term: (term.k, term.position))
        relations[n] = terms
        curv = cob.curvature_images.get(gid)
        if curv is not None:
            curvature_coefficients[n] = curv.elt.coeff(corolla(CURV, 1))
    return CobarRelationReport(max_n, curved, relations,
                               curvature_coefficients)


# ---------------------------------------------------------------------------
# curved homotopy-associative algebras
# ---------------------------------------------------------------------------

class CurvedAInftyAlgebra:
    """A curved homotopy-associative structure on a filtered graded
    module, given by finitely many operations.

    ``module`` is an FGModule; ``operations`` maps each arity n to an
    Element (or dict) over matrix-unit keys ``(out, (in_1, ..., in_n))``
    in the endomorphism operad of the module.  Validated on
    construction: every key has the declared arity and known atoms, the
    arity-n operation is homogeneous of degree n - 2, no operation drops
    weight, the nullary operation lands in weight >= 1, and the unary
    operation deforms the module predifferential by weight-raising terms
    only.  Violations raise ValueError.  Missing arities read as zero.
    """

    def __init__(self, module, operations):
        self.module = module
        self.endo = EndOperad(module, 1)
        ops = {}
        for n, elt in dict(operations or {}).items():
            assert isinstance(n, int) and n >= 0
            if not isinstance(elt, Element):
                elt = Element(dict(elt))
            if elt:
                ops[n] = elt
        self.operations = ops
        for n, elt in sorted(ops.items()):
            for (out, ins), _ in elt.terms.items():
                if len(ins) != n:
                    raise ValueError("operation %d has a key of arity %d"
                                     % (n, len(ins)))
                for atom in (out,) + tuple(ins):
                    if atom not in module.ids():
                        raise ValueError("unknown atom %r in operation %d"
                                         % (atom, n))
                if (module.weight_of(out)
                        < sum(module.weight_of(i) for i in ins)):
                    raise ValueError(
                        "operation %d drops weight at %r" % (n, (out, ins)))
                if n == 0 and module.weight_of(out) < 1:
                    raise ValueError(
                        "the nullary operation must land in weight >= 1")
            degree = self.endo.element_degree(elt)
            if degree != n - 2:
                raise ValueError("operation %d has degree %r, wanted %d"
                                 % (n, degree, n - 2))
        deformation = dict(self.operation(1).terms)
        for a in module.ids():
            for out, c in module.d_of(a).terms.items():
                accumulate(deformation, {(out, (a,)): -c})
        for (out, ins), _ in deformation.items():
            if module.weight_of(out) < module.weight_of(ins[0]) + 1:
                raise ValueError(
                    "the unary operation must deform the predifferential "
                    "by weight-raising terms; offender %r" % ((out, ins),))

    def operation(self, n):
        return self.operations.get(n, Element())

    def max_arity(self):
        return max(self.operations, default=0)

    def __repr__(self):
        return ("CurvedAInftyAlgebra(atoms=%d, arities=%r)"
                % (len(self.module.atoms), sorted(self.operations)))


class AInftyReport:
    """Residuals of the homotopy-associativity relations on an algebra
    instance.

    ``residuals[n]`` is the value of the arity-n relation as an Element
    over matrix units (empty when satisfied); ``rows`` flattens the
    nonzero entries to (n, inputs, weight shift, output, coefficient).
    """

    def __init__(self, n_max, curved, residuals, rows):
        self.n_max = n_max
        self.curved = curved
        self.residuals = residuals
        self.rows = rows

    @property
    def ok(self):
        return not self.rows

    def __repr__(self):
        if self.ok:
            return ("<homotopy relations hold through arity %d>"
                    % self.n_max)
        return ("<homotopy relations fail: %d residual cells through "
                "arity %d>" % (len(self.rows), self.n_max))


def check_ainfty(algebra, n_max, curved=True):
    """Evaluate the homotopy-associativity relations of an algebra for
    every arity up to ``n_max``.

    The arity-n relation is the signed sum of the compositions listed by
    ``ainfty_relations(n, curved)``, evaluated in the endomorphism
    operad of the module; the report carries the residual Elements and
    the flattened table of nonzero cells.  All arithmetic is exact.
    """
    endo = EndOperad(algebra.module, n_max + 1)
    residuals = {}
    rows = []
    for n in range(n_max + 1):
        acc = Element()
        for term in ainfty_relations(n, curved):
            f = algebra.operation(term.k)
            g = algebra.operation(term.q)
            if not f or not g:
                continue
            acc = acc + term.sign * endo.compose(f, term.position, g)
        residuals[n] = acc
        for key, c in sorted(acc.terms.items(), key=lambda kv: repr(kv[0])):
            out, ins = key
            rows.append((n, ins, endo.atom_weight(key), out, c))
    return AInftyReport(n_max, curved, residuals, rows)


def strict_associative_instance():
    """A one-atom strictly associative algebra: the product squares the
    atom to itself, with no differential and no curvature.  Satisfies
    the relations on the nose at every arity."""
    module = FGModule([BasisAtom("u", 0, 0)])
    return CurvedAInftyAlgebra(
        module, {2: Element({("u", ("u", "u")): ONE})})


def two_dim_curved_instance(flip=False):
    """A two-atom curved instance: ``e`` in degree 0 and weight 0, ``y``
    in degree -2 and weight 1; the nullary operation is y, the unary
    operation vanishes, and the product has e as a two-sided unit with
    y * y = 0.

    The relations hold through every arity: the n = 1 relation cancels
    the product of y against an element from the left with the product
    from the right.  With ``flip=True`` the product is negated on one
    side (y * e = -y), which breaks that cancellation -- the n = 1
    relation acquires the residual -2 y on the input e -- and breaks
    associativity on the inputs (y, e, e), so the n = 3 relation picks
    up the residual 2 y there; the checker must detect both.
    """
    module = FGModule([BasisAtom("e", 0, 0), BasisAtom("y", -2, 1)])
    product = Element({("e", ("e", "e")): ONE,
                       ("y", ("e", "y")): ONE,
                       ("y", ("y", "e")): -ONE if flip else ONE})
    return CurvedAInftyAlgebra(
        module, {0: Element({("y", ()): ONE}), 2: product})
