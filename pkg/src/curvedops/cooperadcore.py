"""Cofree tree cooperads over a set of cogenerators.

A basis element of the tree cooperad is a decorated planar tree, read as the
root-first preorder tensor of its vertex decorations (same convention as
``operadcore``).  The decomposition map ``delta`` cuts a tree along every
two-level splitting into an upper part and one lower part per upper slot;
``delta_infinitesimal`` keeps a single lower part.  All Koszul signs come
from reordering the preorder tensor into (upper decorations, then lower
decorations), computed with ``filtcomplex.koszul_sign``.

Counit-shifted variant
----------------------
With ``infinitesimal=True`` the counit takes values in the weight-shifted
unit (the trivial tree is forced to carry filtration weight 1, with degree
and arity unchanged).  Nothing else about the basis or the decomposition
changes; only weight bookkeeping is affected.  This is the convention under
which bar-type coderivations and curvature witnesses become weight
non-decreasing.

Extension algorithms
--------------------
* ``extend_to_cooperad_map`` turns a projection-to-cogenerators into the
  unique cooperad morphism into a tree cooperad, computed through a finite
  window by the coefficient recursion ``coeff(tree) = (phi on the root) *
  product of coefficients on the subtrees``, summed over decompositions of
  the source key.
* ``extend_coderivation`` turns corolla-level data (values on the trivial
  tree, on corollas, and on two-vertex trees) into the coderivation of the
  identity it determines, by summing over the regions of each tree where a
  pattern can act: unary insertions into every edge and slot, decoration
  replacements at every vertex, and collapses of every internal edge.
* ``subcooperad_kernel`` computes the largest subcooperad vanishing under a
  projection onto (unit + two-vertex part) / (relations + (unit - curvature
  witness)), cell by cell, as the kernel of the position-wise classifier
  built from ``delta_infinitesimal`` followed by ``delta`` on the middle.
"""

from fractions import Fraction

from .filtcomplex import (
    Element,
    ONE,
    ZERO,
    accumulate,
    add_to_echelon,
    echelonize,
    kernel_basis,
    koszul_sign,
    reduce_vector,
)
from .planartree import (
    TRIVIAL,
    PlanarTree,
    corolla,
    infinitesimal_splits,
    inf_split_reorder,
    node,
    render,
    replace_at,
    split_reorder,
    subtree_at,
    two_level_splits,
)
from .operadcore import GeneratorSet, OperadElement, free_operad_basis

# A cooperad element is the same kind of tree combination as an operad
# element; only the structure maps differ.
CooperadElement = OperadElement


# ---------------------------------------------------------------------------
# the tree cooperad
# ---------------------------------------------------------------------------

class TreeCooperad:
    """Cofree conilpotent cooperad on ``cogens``, one basis tree at a time.

    The counit projects onto the trivial tree; the coaugmentation is the
    inclusion of the trivial tree.  ``infinitesimal=True`` switches to the
    counit-shifted weight convention (trivial tree at weight 1).
    """

    def __init__(self, cogens, infinitesimal=False):
        assert isinstance(cogens, GeneratorSet)
        self.cogens = cogens
        self.infinitesimal = bool(infinitesimal)
        self._basis_cache = {}

    # -- weight / degree bookkeeping ------------------------------------

    def tree_degree(self, t):
        return self.cogens.tree_degree(t)

    def tree_weight(self, t):
        if t.is_trivial and self.infinitesimal:
            return 1
        return self.cogens.tree_weight(t)

    def tensor_weight(self, trees):
        return sum(self.tree_weight(t) for t in trees)

    def basis(self, arity, max_weight, max_vertices=None):
        """Basis trees of the given arity with (shifted) weight <= max_weight."""
        key = (arity, max_weight, max_vertices)
        if key not in self._basis_cache:
            raw = free_operad_basis(self.cogens, arity, max_weight, max_vertices)
            self._basis_cache[key] = tuple(
                t for t in raw if self.tree_weight(t) <= max_weight)
        return self._basis_cache[key]

    def element(self, tree, coeff=ONE):
        return OperadElement.from_tree(self.cogens, tree, coeff)

    def zero(self, arity):
        return OperadElement.zero(self.cogens, arity)

    # -- counit / coaugmentation ----------------------------------------

    def counit(self, t):
        return ONE if t.is_trivial else ZERO

    @property
    def coaug_key(self):
        return TRIVIAL

    def key_arity(self, t):
        return t.arity

    key_degree = tree_degree
    key_weight = tree_weight

    # -- decomposition maps ----------------------------------------------

    def delta(self, x):
        """Full decomposition as an Element over (upper, lowers) keys.

        ``x`` may be a basis tree or an OperadElement.  Each two-level split
        contributes the Koszul sign of the reordering that moves the tree's
        preorder decorations into (upper's preorder, then each lower's).
        """
        if isinstance(x, PlanarTree):
            return self._delta_tree(x)
        out = {}
        for t, c in x.terms():
            accumulate(out, self._delta_tree(t).terms, c)
        return Element(out)

    def _delta_tree(self, t):
        degs = [self.cogens.degree(lbl) for lbl in t.decorations()]
        out = {}
        for upper, lowers in two_level_splits(t):
            sgn = koszul_sign(split_reorder(t, upper, lowers), degs)
            accumulate(out, {(upper, lowers): Fraction(sgn)})
        return Element(out)

    def delta_infinitesimal(self, x):
        """One-cut decomposition as an Element over (upper, slot, lower) keys."""
        if isinstance(x, PlanarTree):
            return self._delta_inf_tree(x)
        out = {}
        for t, c in x.terms():
            accumulate(out, self._delta_inf_tree(t).terms, c)
        return Element(out)

    def _delta_inf_tree(self, t):
        degs = [self.cogens.degree(lbl) for lbl in t.decorations()]
        out = {}
        for upper, i, lower in infinitesimal_splits(t):
            sgn = koszul_sign(inf_split_reorder(t, upper, i, lower), degs)
            accumulate(out, {(upper, i, lower): Fraction(sgn)})
        return Element(out)


# ---------------------------------------------------------------------------
# cooperad morphisms into a tree cooperad
# ---------------------------------------------------------------------------

class CooperadMap:
    """The unique cooperad morphism into a tree cooperad with a given
    cogenerator projection, evaluated through a finite window.

    ``source`` must provide the decomposition protocol: attributes/methods
    ``coaug_key``, ``key_arity(k)``, ``key_degree(k)``, ``key_weight(k)``,
    ``counit(k) -> Fraction`` and ``delta(k) -> Element`` over
    ``(upper_key, lower_keys_tuple)`` pairs.  A ``TreeCooperad`` provides all
    of these with basis trees as keys.

    ``phi`` maps a source key to a dict ``{cogenerator id: coefficient}``
    (missing keys act as zero).  It must preserve degree and may not lower
    weight; its value on the coaugmentation key must land in weight >= 1,
    otherwise the morphism cannot respect the shifted counit and a
    ``ValueError`` is raised.
    """

    def __init__(self, source, target, phi, max_weight, max_vertices=None):
        assert isinstance(target, TreeCooperad)
        self.source = source
        self.target = target
        self.max_weight = max_weight
        self.max_vertices = max_vertices
        self._phi_raw = phi
        self._phi_cache = {}
        self._coeff_cache = {}
        coaug_image = phi(source.coaug_key)
        if isinstance(coaug_image, Element):
            coaug_image = coaug_image.terms
        bad = [g for g, c in (coaug_image or {}).items()
               if Fraction(c) and target.cogens.weight(g) < 1]
        if bad:
            raise ValueError(
                "projection of the coaugmentation hits weight-0 cogenerators "
                "%r; the source is not gr-coaugmented for this map" % (bad,))

    def _phi(self, key):
        if key not in self._phi_cache:
            raw = self._phi_raw(key)
            if isinstance(raw, Element):
                raw = dict(raw.terms)
            clean = {}
            for g, c in (raw or {}).items():
                c = Fraction(c)
                if not c:
                    continue
                cg = self.target.cogens
                assert cg.arity(g) == self.source.key_arity(key), \
                    "phi must preserve arity"
                assert cg.degree(g) == self.source.key_degree(key), \
                    "phi must preserve degree"
                assert cg.weight(g) >= self.source.key_weight(key), \
                    "phi may not lower weight"
                clean[g] = c
            self._phi_cache[key] = clean
        return self._phi_cache[key]

    def coefficient(self, tree, key):
        """Coefficient of the target basis ``tree`` in the image of ``key``."""
        memo = self._coeff_cache
        ck = (tree, key)
        if ck in memo:
            return memo[ck]
        if tree.is_trivial:
            val = self.source.counit(key)
        elif self.target.tree_degree(tree) != self.source.key_degree(key):
            # every constituent of the recursion preserves degree
            val = ZERO
        else:
            val = ZERO
            m = len(tree.children)
            for (upper, lowers), c in self.source.delta(key).terms.items():
                if len(lowers) != m:
                    continue
                p = self._phi(upper).get(tree.label)
                if not p:
                    continue
                prod = c * p
                for sub, low in zip(tree.children, lowers):
                    prod *= self.coefficient(sub, low)
                    if not prod:
                        break
                val += prod
        memo[ck] = val
        return val

    def value(self, key):
        """Image of ``key`` as an OperadElement over window basis trees."""
        arity = self.source.key_arity(key)
        out = {}
        for t in self.target.basis(arity, self.max_weight, self.max_vertices):
            c = self.coefficient(t, key)
            if c:
                out[t] = c
        return OperadElement(self.target.cogens, arity, Element(out))

    def check_delta_compatibility(self, keys, mod_weight=None, value_fn=None):
        """Compare delta(value(k)) with (value x value)(delta(k)) for each key.

        Returns a list of (key, difference Element) pairs, empty when the map
        commutes with the decompositions on the given keys.  ``mod_weight``
        restricts the comparison to tensor components of total (shifted)
        weight <= mod_weight, which is the correct notion when the source
        decomposition is itself truncated to a window.  ``value_fn``
        overrides the evaluated map (used to exhibit uniqueness failures).
        """
        value = value_fn or self.value
        tgt = self.target
        failures = []
        for key in keys:
            lhs = {}
            for t, c in value(key).terms():
                accumulate(lhs, tgt.delta(t).terms, c)
            rhs = {}
            for (upper, lowers), c in self.source.delta(key).terms.items():
                blocks = [value(upper)] + [value(low) for low in lowers]
                def expand(idx, chosen, coeff):
                    if not coeff:
                        return
                    if idx == len(blocks):
                        k = (chosen[0], tuple(chosen[1:]))
                        accumulate(rhs, {k: coeff})
                        return
                    for t, ct in blocks[idx].terms():
                        expand(idx + 1, chosen + [t], coeff * ct)
                expand(0, [], c)
            diff = {}
            accumulate(diff, lhs)
            accumulate(diff, rhs, -ONE)
            if mod_weight is not None:
                diff = {k: v for k, v in diff.items()
                        if tgt.tree_weight(k[0]) + tgt.tensor_weight(k[1])
                        <= mod_weight}
            if diff:
                failures.append((key, Element(diff)))
        return failures


def extend_to_cooperad_map(source, target, phi, max_weight, max_vertices=None):
    """Extend a cogenerator projection to the cooperad morphism it determines.

    See ``CooperadMap``.  Raises ``ValueError`` when ``phi`` sends the
    coaugmentation key to weight-0 cogenerators.
    """
    return CooperadMap(source, target, phi, max_weight, max_vertices)


def corolla_projection(cooperad):
    """The canonical projection of a tree cooperad onto its cogenerators.

    Sends a one-vertex tree to its decoration and every other tree to zero;
    extending it along ``extend_to_cooperad_map`` returns the identity.
    """
    def phi(t):
        if not t.is_trivial and all(c.is_trivial for c in t.children):
            return {t.label: ONE}
        return {}
    return phi


# ---------------------------------------------------------------------------
# coderivations
# ---------------------------------------------------------------------------

class CoderivationImage:
    """Corolla-level data determining a coderivation of the identity.

    * ``rho0``: Element over arity-1 cogenerator ids -- the value on the
      trivial tree (a unary insertion pattern);
    * ``rho1``: dict mapping a cogenerator id to an Element over cogenerator
      ids of the same arity -- decoration replacement patterns;
    * ``rho2``: dict mapping ``(upper id, slot, lower id)`` to an Element
      over cogenerator ids of arity ``arity(upper) + arity(lower) - 1`` --
      edge collapse patterns (slot is 1-based in the upper cogenerator);
    * ``degree``: the homological degree of the operator.

    Values on trees with three or more vertices are not supported; the
    differentials assembled in this package only ever need these three
    layers.
    """

    def __init__(self, degree, rho0=None, rho1=None, rho2=None):
        self.degree = degree
        self.rho0 = rho0 if rho0 is not None else Element()
        # dict subclasses pass through unchanged so that pattern tables may
        # compute their entries on demand (collapse data over a window that
        # cannot be enumerated up front)
        self.rho1 = rho1 if isinstance(rho1, dict) else dict(rho1 or {})
        self.rho2 = rho2 if isinstance(rho2, dict) else dict(rho2 or {})

    def validate(self, cooperad):
        cg = cooperad.cogens
        for g, c in self.rho0.terms.items():
            assert cg.arity(g) == 1, "unary insertion pattern must have arity 1"
            assert cg.degree(g) == self.degree, \
                "insertion pattern degree must equal the operator degree"
            if cooperad.infinitesimal:
                assert cg.weight(g) >= 1, \
                    "insertion pattern must have weight >= 1 under the " \
                    "shifted counit"
        for a, img in self.rho1.items():
            for g, c in img.terms.items():
                assert cg.arity(g) == cg.arity(a)
                assert cg.degree(g) == cg.degree(a) + self.degree
                assert cg.weight(g) >= cg.weight(a)
        for (a, slot, b), img in self.rho2.items():
            assert 1 <= slot <= cg.arity(a)
            for g, c in img.terms.items():
                assert cg.arity(g) == cg.arity(a) + cg.arity(b) - 1
                assert cg.degree(g) == cg.degree(a) + cg.degree(b) + self.degree
                assert cg.weight(g) >= cg.weight(a) + cg.weight(b)


class Coderivation:
    """Coderivation of the identity on a tree cooperad, determined by a
    ``CoderivationImage`` through the region expansion.

    The value on a tree is the signed sum over regions:

    * every edge and slot (including the root edge) receives each unary
      insertion pattern;
    * every vertex receives each matching decoration replacement;
    * every internal edge receives each matching collapse pattern.

    A pattern landing at a region whose preorder position is preceded by
    decorations of total degree p picks up ``(-1)^(degree(D) * p)``; a
    collapse of the edge into child ``j`` additionally moves the lower
    decoration past the subtrees hanging left of that child, contributing
    ``(-1)^(degree(lower) * degree(those subtrees))``.
    """

    def __init__(self, cooperad, image):
        assert isinstance(image, CoderivationImage)
        image.validate(cooperad)
        self.cooperad = cooperad
        self.image = image
        self.degree = image.degree

    def __call__(self, x):
        if isinstance(x, PlanarTree):
            x = self.cooperad.element(x)
        out = Element()
        for t, c in x.terms():
            out = out + c * self._on_tree(t)
        return OperadElement(self.cooperad.cogens, x.arity, out)

    def _sign(self, prefix_degree):
        return -ONE if (self.degree % 2) and (prefix_degree % 2) else ONE

    def _on_tree(self, t):
        cg = self.cooperad.cogens
        img = self.image
        out = {}

        def walk(path, sub, prefix):
            """Emit regions of the subtree ``sub`` sitting at ``path``;
            ``prefix`` is the total degree of decorations preceding it in
            preorder.  Returns the tree degree of ``sub``."""
            for g, c in img.rho0.terms.items():
                grown = replace_at(t, path, node(g, (sub,)))
                accumulate(out, {grown: c * self._sign(prefix)})
            if sub.is_trivial:
                return 0
            a = sub.label
            if a in img.rho1:
                for g, c in img.rho1[a].terms.items():
                    swapped = replace_at(t, path, PlanarTree(g, sub.children))
                    accumulate(out, {swapped: c * self._sign(prefix)})
            gather = 0
            child_prefix = prefix + cg.degree(a)
            for j, child in enumerate(sub.children):
                if not child.is_trivial:
                    key = (a, j + 1, child.label)
                    if key in img.rho2:
                        glue = (sub.children[:j] + child.children
                                + sub.children[j + 1:])
                        extra = -ONE if (cg.degree(child.label) % 2) \
                            and (gather % 2) else ONE
                        for g, c in img.rho2[key].terms.items():
                            merged = replace_at(t, path, PlanarTree(g, glue))
                            accumulate(
                                out,
                                {merged: c * extra * self._sign(prefix)})
                d = walk(path + (j,), child, child_prefix)
                child_prefix += d
                gather += d
            return child_prefix - prefix

        walk((), t, 0)
        return Element(out)


def extend_coderivation(target, image, f=None):
    """The coderivation of ``f`` with the given corolla-level image.

    Only coderivations of the identity are supported (``f=None``); the
    differentials built downstream never need a nontrivial comparison map.
    """
    if f is not None:
        raise ValueError("only coderivations of the identity are supported")
    return Coderivation(target, image)


# ---------------------------------------------------------------------------
# generated subcooperads (kernel of the position-wise classifier)
# ---------------------------------------------------------------------------

class KernelCell:
    """Kernel data for one (arity, degree) cell of the window.

    ``variables`` are the window basis trees of the cell; ``basis`` holds the
    kernel vectors (Elements over trees) adapted to the weight filtration:
    ``filtration_dims[w]`` counts basis vectors lying in weight >= w, and
    ``graded_dims[w]`` the vectors whose leading weight is exactly ``w``.
    ``conclusive`` is False when classifier components of weight beyond the
    window had to be dropped, in which case the kernel is exact only modulo
    weights above the window.
    """

    def __init__(self, arity, degree, variables, basis, filtration_dims,
                 dropped_rows):
        self.arity = arity
        self.degree = degree
        self.variables = variables
        self.basis = basis
        self.filtration_dims = filtration_dims
        self.dropped_rows = dropped_rows
        self.conclusive = dropped_rows == 0

    @property
    def dimension(self):
        return len(self.basis)

    def graded_dims(self):
        dims = self.filtration_dims
        ws = sorted(dims)
        out = {}
        for w in ws:
            nxt = dims.get(w + 1, 0)
            if dims[w] - nxt:
                out[w] = dims[w] - nxt
        return out

    def __repr__(self):
        return ("KernelCell(arity=%d, degree=%d, dim=%d, graded=%r, "
                "conclusive=%r)" % (self.arity, self.degree, self.dimension,
                                    self.graded_dims(), self.conclusive))


class KernelReport:
    """Per-cell kernels of the classifier, over a fixed window."""

    def __init__(self, cooperad, max_arity, max_weight):
        self.cooperad = cooperad
        self.max_arity = max_arity
        self.max_weight = max_weight
        self.cells = {}

    def cell(self, arity, degree):
        return self.cells.get((arity, degree))

    def basis(self, arity, degree):
        c = self.cell(arity, degree)
        return c.basis if c else []

    def arity_basis(self, arity):
        out = []
        for (n, _), cell in sorted(self.cells.items()):
            if n == arity:
                out.extend(cell.basis)
        return out

    def __repr__(self):
        lines = ["KernelReport(max_arity=%d, max_weight=%d)"
                 % (self.max_arity, self.max_weight)]
        for key in sorted(self.cells):
            lines.append("  %r" % (self.cells[key],))
        return "\n".join(lines)


def _echelon_by_arity(relations):
    """Echelonize two-vertex relation vectors, grouped by arity."""
    grouped = {}
    for rel in relations:
        if isinstance(rel, OperadElement):
            arity = rel.arity
            terms = rel.elt.terms
        else:
            terms = rel.terms
            arity = None
            for t in terms:
                assert arity is None or t.arity == arity
                arity = t.arity
        if not terms:
            continue
        for t in terms:
            assert t.weight == 2, "relations must be two-vertex combinations"
        grouped.setdefault(arity, []).append(dict(terms))
    return {n: echelonize(vs) for n, vs in grouped.items()}


def subcooperad_kernel(cooperad, relations=(), theta_tilde=None,
                       max_arity=3, max_weight=3, max_vertices=None):
    """Largest subcooperad of ``cooperad`` vanishing under the projection to

        S = (unit + two-vertex trees) / (relations + (unit - theta_tilde)).

    ``relations`` is an iterable of two-vertex tree combinations
    (OperadElements or Elements); ``theta_tilde`` is a degree-0 combination
    of two-vertex arity-1 trees identified with the class of the unit, or
    ``None`` when the unit class is simply zero.  With a nonzero
    ``theta_tilde`` the cooperad must use the shifted counit, otherwise the
    identification cannot respect weights.

    A tree combination x lies in the subcooperad exactly when the composite

        x  ->  delta_infinitesimal(x)  ->  (id (x) delta)  ->  project the
        middle factor onto S

    vanishes.  The composite is expanded into rows indexed by (upper tree,
    slot, lower trees, reduced middle).  A row is kept only when every tree
    that can contribute to it lies inside the weight window -- the
    contributing trees are the reconstructions (upper) o_i (middle o lowers),
    so their weights are determined by the row key and by which middles
    reduce onto the row's reduced middle.  Rows reaching beyond the window
    cannot be expressed there; they are dropped and counted, making the
    affected cells inconclusive (their kernels are exact only modulo the
    dropped constraints, which involve weights above the window).

    Returns a ``KernelReport`` with one ``KernelCell`` per (arity, degree).
    """
    C = cooperad
    if theta_tilde is not None and isinstance(theta_tilde, OperadElement):
        theta_tilde = theta_tilde.elt
    if theta_tilde is not None and theta_tilde:
        assert C.infinitesimal, \
            "a nonzero curvature witness needs the shifted counit"
        for t in theta_tilde.terms:
            assert t.arity == 1 and t.weight == 2, \
                "curvature witness must be a two-vertex arity-1 combination"
        assert all(C.tree_degree(t) == 0 for t in theta_tilde.terms), \
            "curvature witness must have degree 0"

    rel_ech = _echelon_by_arity(relations)

    def residue(vec_terms, arity):
        """Reduce a two-vertex combination modulo the relations."""
        rows, pivots = rel_ech.get(arity, ([], []))
        return reduce_vector(dict(vec_terms), rows, pivots)

    unit_residue = {}
    if theta_tilde is not None and theta_tilde:
        unit_residue = residue(theta_tilde.terms, 1)

    middle_weight = _max_middle_weight(C.cogens, residue, unit_residue)

    report = KernelReport(C, max_arity, max_weight)
    for arity in range(max_arity + 1):
        trees = C.basis(arity, max_weight, max_vertices)
        by_degree = {}
        for t in trees:
            by_degree.setdefault(C.tree_degree(t), []).append(t)
        for degree, variables in sorted(by_degree.items()):
            rows_kept, dropped = _classifier_rows(
                C, variables, residue, unit_residue, middle_weight,
                max_weight)
            report.cells[(arity, degree)] = _solve_cell(
                C, arity, degree, variables, rows_kept, dropped, max_weight)
    return report


def _max_middle_weight(cogens, residue, unit_residue):
    """For each reduced middle, the largest weight of a middle that can hit it.

    A row with reduced middle ``mtree`` receives contributions from the
    trivial middle (weight 0) when ``mtree`` appears in the unit residue, and
    from every two-vertex middle whose reduction hits ``mtree``.  The maximum
    over these route weights bounds, together with the weights read off the
    row key, the weight of any tree contributing to the row.
    """
    by_arity = {}
    ids = cogens.ids()
    for g1 in ids:
        for i in range(1, cogens.arity(g1) + 1):
            for g2 in ids:
                t2 = node(g1, tuple(
                    corolla(g2, cogens.arity(g2)) if j == i - 1 else TRIVIAL
                    for j in range(cogens.arity(g1))))
                by_arity.setdefault(t2.arity, []).append(t2)
    table = {m: 0 for m in unit_residue}
    for a, mids in by_arity.items():
        for mid in mids:
            w = cogens.tree_weight(mid)
            for mtree in residue({mid: ONE}, a):
                if mtree not in table or table[mtree] < w:
                    table[mtree] = w
    return table


def _classifier_rows(C, variables, residue, unit_residue, middle_weight,
                     max_weight):
    """Accumulate classifier rows for one cell; split by the weight window.

    A row is complete exactly when its heaviest possible contributing tree --
    (upper weight) + (lower weights) + (heaviest middle hitting the reduced
    middle) -- fits in the window; only complete rows are kept.
    """
    cg = C.cogens
    rows = {}
    for t in variables:
        degs = [cg.degree(lbl) for lbl in t.decorations()]
        for upper, i, w in infinitesimal_splits(t):
            s1 = koszul_sign(inf_split_reorder(t, upper, i, w), degs)
            wdegs = [cg.degree(lbl) for lbl in w.decorations()]
            for mid, lows in two_level_splits(w):
                if mid.is_trivial:
                    mres = unit_residue
                elif mid.weight == 2:
                    mres = residue({mid: ONE}, mid.arity)
                else:
                    continue
                if not mres:
                    continue
                s2 = koszul_sign(split_reorder(w, mid, lows), wdegs)
                base = cg.tree_weight(upper) + sum(
                    cg.tree_weight(low) for low in lows)
                coeff = Fraction(s1 * s2)
                for mtree, mc in mres.items():
                    rowkey = (upper, i, lows, mtree)
                    reach = base + middle_weight[mtree]
                    accumulate(
                        rows.setdefault(rowkey, {"__reach__": reach}),
                        {t: coeff * mc})
    kept, dropped = [], 0
    for rowkey, row in rows.items():
        reach = row.pop("__reach__")
        if not row:
            continue
        if reach > max_weight:
            dropped += 1
        else:
            kept.append(row)
    return kept, dropped


def _solve_cell(C, arity, degree, variables, rows, dropped, max_weight):
    """Kernel of the kept rows, with a basis adapted to the weight filtration."""
    weights = sorted({C.tree_weight(t) for t in variables}, reverse=True)
    ech_rows, ech_pivots = [], []
    basis = []
    filtration_dims = {}
    for w in weights:
        allowed = [t for t in variables if C.tree_weight(t) >= w]
        allowed_set = set(allowed)
        restricted = []
        for row in rows:
            r = {t: c for t, c in row.items() if t in allowed_set}
            if r:
                restricted.append(r)
        solutions = kernel_basis(restricted, allowed)
        for sol in solutions:
            if add_to_echelon(ech_rows, ech_pivots, dict(sol)):
                basis.append((w, Element(sol)))
        filtration_dims[w] = len(basis)
    dims = {}
    for w in range(0, (weights[0] if weights else 0) + 1):
        dims[w] = max((filtration_dims[v] for v in weights if v >= w),
                      default=0)
    return KernelCell(arity, degree, tuple(variables),
                      [vec for _, vec in basis], dims, dropped)


def kernel_delta_closure_failures(cooperad, report, mod_weight=None):
    """Check that each kernel vector decomposes through the kernel again.

    For every cell basis vector x, ``delta(x)`` (truncated to the window)
    must lie in the span of tensor products of kernel vectors.  The window
    truncation drops components of total weight above ``mod_weight``
    (defaulting to the report's weight bound) and components whose upper
    piece has arity beyond the report's arity bound -- the report carries no
    kernel data there, so closure is only checkable inside both bounds.
    Returns a list of (cell key, vector, residue Element) triples; empty
    means the computed kernels are closed under the decomposition within the
    window.
    """
    C = cooperad
    if mod_weight is None:
        mod_weight = report.max_weight
    by_arity = {}
    for (n, _), cell in report.cells.items():
        by_arity.setdefault(n, []).extend(cell.basis)

    def truncate(terms):
        return {k: v for k, v in terms.items()
                if k[0].arity <= report.max_arity
                and C.tree_weight(k[0]) + C.tensor_weight(k[1]) <= mod_weight}

    failures = []
    span_cache = {}
    for (n, degree), cell in sorted(report.cells.items()):
        if not cell.basis:
            continue
        if n not in span_cache:
            span = _kernel_product_span(by_arity, n, mod_weight, truncate)
            span_cache[n] = echelonize(span)
        rows, pivots = span_cache[n]
        for vec in cell.basis:
            dx = {}
            for t, c in vec.terms.items():
                accumulate(dx, C.delta(t).terms, c)
            dx = truncate(dx)
            res = reduce_vector(dx, rows, pivots)
            if res:
                failures.append(((n, degree), vec, Element(res)))
    return failures


def _kernel_product_span(by_arity, n, mod_weight, truncate):
    """Truncated tensor products of kernel vectors with total arity ``n``.

    No Koszul signs arise: each product is the image of a tensor of degree-0
    coefficient functionals.  Arity-0 legs carry weight >= 1, so the number
    of legs is capped by ``n + mod_weight``.
    """
    span = []
    for m in sorted(by_arity):
        if m > n + mod_weight or not by_arity[m]:
            continue
        for shape in _leg_arities(n, m, sorted(by_arity)):
            legs = [by_arity[a] for a in shape]
            if any(not leg for leg in legs):
                continue
            for upper in by_arity[m]:
                for choice in _product_choices(legs):
                    vec = _tensor_vector(upper, choice, truncate)
                    if vec:
                        span.append(vec)
    return span


def _leg_arities(total, parts, arities):
    """Tuples of ``parts`` arities (from ``arities``) summing to ``total``."""
    out = []

    def rec(remaining, chosen):
        if len(chosen) == parts:
            if remaining == 0:
                out.append(tuple(chosen))
            return
        for a in arities:
            if a <= remaining:
                rec(remaining - a, chosen + [a])
    rec(total, [])
    return out


def _product_choices(legs):
    if not legs:
        yield ()
        return
    for first in legs[0]:
        for rest in _product_choices(legs[1:]):
            yield (first,) + rest


def _tensor_vector(upper, lower_choice, truncate):
    """The vector over (upper tree, lower trees) keys for one choice of
    kernel vectors plugged under one upper kernel vector."""
    vec = {}
    for ut, uc in upper.terms.items():
        partial = [((), uc)]
        for leg in lower_choice:
            nxt = []
            for key, coeff in partial:
                for lt, lc in leg.terms.items():
                    nxt.append((key + (lt,), coeff * lc))
            partial = nxt
        for key, coeff in partial:
            accumulate(vec, {(ut, key): coeff})
    return truncate(vec)
