"""Free and presented curved operads on planar trees, and endomorphism operads.

An element of a free operad window is a rational combination of decorated
planar trees of a fixed arity.  A decorated tree stands for the ordered tensor
of its vertex decorations in preorder, so composition of elements is grafting
of trees together with the Koszul sign for moving the grafted block past the
decorations that follow the insertion slot.

A curved operad carries a weight-preserving predifferential d (degree -1) and
a curvature element of arity 1, degree -2, weight >= 1, subject to d(curv) = 0
and d^2 = [curv, -].  On presented operads the second axiom is imposed by the
rewrite that replaces d(d(x)) on a generator x by [curv, x].
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .filtcomplex import Element, accumulate, koszul_sign
from .planartree import (
    PlanarTree, TRIVIAL, corolla, graft, graft_all, leaf_paths, render,
    replace_at, subtree_at, vertex_paths,
)

__all__ = [
    "CURV", "MU", "BULLET", "GeneratorSet", "OperadElement", "compose",
    "prelie", "lie_bracket", "graft_sign", "free_operad_basis",
    "extend_derivation", "substitute_at_each_vertex", "CurvedOperad",
    "free_curved_operad", "cas", "cas_comb", "CURVATURE_SIGN",
    "curvature_check", "EndOperad", "end_operad", "evaluate_tree_in_end",
    "evaluate_element_in_end", "check_representation", "RepresentationReport",
    "make_assoc_normalizer",
]

ONE = Fraction(1)

#: generator id reserved for the formal curvature generator
CURV = "curv"

#: global orientation of the curved associative model's curvature element
CURVATURE_SIGN = 1


class GeneratorSet:
    """Finite family of operation generators with arity, degree and weight."""

    def __init__(self, gens):
        self.info = {}
        for (gid, arity, degree, weight) in gens:
            assert gid not in self.info, "duplicate generator %r" % (gid,)
            assert arity >= 0 and weight >= 0
            self.info[gid] = (arity, degree, weight)
        self._deg_cache = {}
        self._wt_cache = {}

    def ids(self):
        return sorted(self.info)

    def arity(self, gid):
        return self.info[gid][0]

    def degree(self, gid):
        return self.info[gid][1]

    def weight(self, gid):
        return self.info[gid][2]

    def with_curvature_slot(self):
        """Extend by the formal curvature generator (arity 1, deg -2, wt 1)."""
        assert CURV not in self.info
        return GeneratorSet(
            [(gid, *vals) for gid, vals in self.info.items()]
            + [(CURV, 1, -2, 1)])

    def corolla_element(self, gid):
        return OperadElement.from_tree(
            self, corolla(gid, self.arity(gid)))

    # -- derived gradings on decorated trees ---------------------------------

    def tree_degree(self, t):
        got = self._deg_cache.get(t)
        if got is None:
            got = sum(self.degree(lbl) for lbl in t.decorations())
            self._deg_cache[t] = got
        return got

    def tree_weight(self, t):
        got = self._wt_cache.get(t)
        if got is None:
            got = sum(self.weight(lbl) for lbl in t.decorations())
            self._wt_cache[t] = got
        return got

    def check_tree(self, t):
        """Every vertex must use a known generator with the right slot count."""
        if t.is_trivial:
            return True
        if t.label not in self.info or len(t.children) != self.arity(t.label):
            return False
        return all(self.check_tree(c) for c in t.children)


class OperadElement:
    """Degree-homogeneous combination of decorated trees of one arity."""

    __slots__ = ("gens", "arity", "elt")

    def __init__(self, gens, arity, elt):
        elt = elt if isinstance(elt, Element) else Element(elt)
        for t in elt.terms:
            assert isinstance(t, PlanarTree) and t.arity == arity, \
                "tree %r does not have arity %d" % (t, arity)
        self.gens = gens
        self.arity = arity
        self.elt = elt

    @classmethod
    def from_tree(cls, gens, tree, coeff=ONE):
        return cls(gens, tree.arity, Element.basis(tree, coeff))

    @classmethod
    def zero(cls, gens, arity):
        return cls(gens, arity, Element())

    def terms(self):
        return self.elt.items()

    def __bool__(self):
        return bool(self.elt)

    def __eq__(self, other):
        return (isinstance(other, OperadElement) and self.arity == other.arity
                and self.elt == other.elt)

    def __hash__(self):
        return hash((self.arity, self.elt))

    def __add__(self, other):
        assert self.arity == other.arity
        return OperadElement(self.gens, self.arity, self.elt + other.elt)

    def __sub__(self, other):
        assert self.arity == other.arity
        return OperadElement(self.gens, self.arity, self.elt - other.elt)

    def __neg__(self):
        return OperadElement(self.gens, self.arity, -self.elt)

    def scale(self, c):
        return OperadElement(self.gens, self.arity, self.elt.scale(c))

    def __rmul__(self, c):
        return self.scale(c)

    def degree(self):
        degs = {self.gens.tree_degree(t) for t in self.elt.terms}
        assert len(degs) <= 1, "element is not degree-homogeneous"
        return degs.pop() if degs else None

    def min_weight(self):
        return min((self.gens.tree_weight(t) for t in self.elt.terms),
                   default=None)

    def __repr__(self):
        if not self.elt:
            return "0"
        return " + ".join("%s*%s" % (c, render(t)) for t, c in self.terms())


# ---------------------------------------------------------------------------
# composition with Koszul signs
# ---------------------------------------------------------------------------

def _labels_after_slot(t, i):
    """Decorations strictly after the i-th open slot in preorder."""
    out = []
    state = {"seen": 0, "collect": False}

    def walk(node):
        if node.is_trivial:
            state["seen"] += 1
            if state["seen"] == i:
                state["collect"] = True
            return
        if state["collect"]:
            out.append(node.label)
        for c in node.children:
            walk(c)

    walk(t)
    assert state["seen"] >= i, "slot index out of range"
    return out


def graft_sign(gens, t, i, s):
    """Koszul sign for t o_i s: the block of s's decorations moves left past
    every decoration of t that follows slot i in preorder."""
    s_deg = gens.tree_degree(s)
    if s_deg % 2 == 0:
        return 1
    after = sum(gens.degree(lbl) for lbl in _labels_after_slot(t, i))
    return -1 if (after % 2) else 1


def compose(x, i, y):
    """Partial composition x o_i y of free-operad elements (no reduction)."""
    assert x.gens is y.gens, "elements must share a generator set"
    assert 1 <= i <= x.arity
    gens = x.gens
    out = {}
    for t, ct in x.elt.terms.items():
        for s, cs in y.elt.terms.items():
            sign = graft_sign(gens, t, i, s)
            accumulate(out, {graft(t, i, s): sign * ct * cs})
    return OperadElement(gens, x.arity + y.arity - 1, Element(out))


def prelie(x, y):
    """Sum of x o_i y over every slot of x."""
    total = OperadElement.zero(x.gens, x.arity + y.arity - 1)
    for i in range(1, x.arity + 1):
        total = total + compose(x, i, y)
    return total


def lie_bracket(x, y):
    """Antisymmetrized pre-Lie bracket {x,y} - (-1)^{|x||y|} {y,x}.

    For an arity-1 left argument this is x o_1 y minus the signed sum of the
    insertions of x into y, the form in which it is used for curvature
    brackets and for [d, f] in endomorphism operads.
    """
    sign = -1 if (x.degree() or 0) * (y.degree() or 0) % 2 else 1
    return prelie(x, y) - (ONE * sign) * prelie(y, x)


# ---------------------------------------------------------------------------
# free operad basis enumeration
# ---------------------------------------------------------------------------

def free_operad_basis(gens, arity, max_weight, max_vertices=None):
    """All decorated trees of the given arity, filtration weight <= max_weight,
    and at most max_vertices vertices.

    When every generator of arity <= 1 carries weight >= 1 the vertex count is
    automatically bounded and max_vertices may be omitted.
    """
    if max_vertices is None:
        assert all(self_wt >= 1 for (ar, _dg, self_wt) in gens.info.values()
                   if ar <= 1), \
            "unbounded enumeration: pass max_vertices explicitly"
        max_vertices = max(arity - 1, 0) + 3 * max_weight + 1

    pool = sorted(gens.info.items())

    def rec(target_arity, v_budget, w_budget):
        key = (target_arity, v_budget, w_budget)
        got = cache.get(key)
        if got is not None:
            return got
        found = []
        if target_arity == 1:
            found.append(TRIVIAL)
        for gid, (k, _dg, wt) in pool:
            if v_budget < 1 or wt > w_budget:
                continue
            for kids in child_tuples(k, target_arity, v_budget - 1, w_budget - wt):
                found.append(PlanarTree(gid, kids))
        cache[key] = found
        return found

    def child_tuples(slots, target_arity, v_budget, w_budget):
        if slots == 0:
            return [()] if target_arity == 0 else []
        out = []
        for first_arity in range(target_arity + 1):
            for first in rec(first_arity, v_budget, w_budget):
                v_left = v_budget - first.weight
                w_left = w_budget - gens.tree_weight(first)
                for rest in child_tuples(slots - 1, target_arity - first_arity,
                                         v_left, w_left):
                    out.append((first,) + rest)
        return out

    cache = {}
    trees = [t for t in rec(arity, max_vertices, max_weight)]
    trees.sort(key=render)
    return trees


# ---------------------------------------------------------------------------
# derivations
# ---------------------------------------------------------------------------

def _interleave_sign(gens, pattern, kid_degrees):
    """Koszul sign from merging a pattern's decorations with the child
    blocks of the vertex it replaces.

    When a multi-vertex pattern is substituted at a vertex, the retained
    child subtrees re-attach at the pattern's open slots; every pattern
    decoration then sits after the child blocks hanging left of it in the
    new preorder, and moving it past them costs the product of parities.
    Single-vertex patterns never cross a block (the sign is +1).
    """
    exp = 0
    passed = 0  # total degree of child blocks already passed, by slot order

    def walk(s):
        nonlocal exp, passed
        if s.is_trivial:
            passed += kid_degrees[walk.slot]
            walk.slot += 1
            return
        exp += gens.degree(s.label) * passed
        for c in s.children:
            walk(c)

    walk.slot = 0
    walk(pattern)
    return -1 if exp % 2 else 1


def extend_derivation(gens, images, operator_degree=-1):
    """Extend ``images`` (generator id -> OperadElement) to a derivation.

    Returns a function on OperadElements.  On a tree it substitutes the image
    at one vertex at a time; the Koszul sign moves the operator past the
    decorations preceding that vertex in preorder, and multi-vertex image
    patterns additionally pick up the interleaving sign against the child
    blocks they jump over.
    """
    def on_tree(t):
        out = {}
        paths = vertex_paths(t)
        decs = t.decorations()
        prefix = 0
        for path, label in zip(paths, decs):
            img = images.get(label)
            if img is not None and img:
                sign = 1
                if operator_degree % 2 and prefix % 2:
                    sign = -1
                kids = subtree_at(t, path).children
                kid_degrees = [gens.tree_degree(k) for k in kids]
                for u, cu in img.elt.terms.items():
                    isign = _interleave_sign(gens, u, kid_degrees)
                    newsub = graft_all(u, kids)
                    accumulate(out,
                               {replace_at(t, path, newsub): sign * isign * cu})
            prefix += gens.degree(label)
        return out

    def derivation(x):
        out = {}
        for t, c in x.elt.terms.items():
            accumulate(out, on_tree(t), c)
        return OperadElement(gens, x.arity, Element(out))

    return derivation


def substitute_at_each_vertex(gens, images, x):
    """Even-operator substitution: sum over vertices, no prefix signs (the
    interleaving sign against child blocks still applies to multi-vertex
    patterns).

    Used for the square of a predifferential, which has even degree.
    """
    out = {}
    for t, c in x.elt.terms.items():
        for path in vertex_paths(t):
            sub = subtree_at(t, path)
            img = images.get(sub.label)
            if img is None or not img:
                continue
            kids = sub.children
            kid_degrees = [gens.tree_degree(k) for k in kids]
            for u, cu in img.elt.terms.items():
                isign = _interleave_sign(gens, u, kid_degrees)
                accumulate(out, {replace_at(t, path, graft_all(u, kids)):
                                 isign * cu * c})
    return OperadElement(gens, x.arity, Element(out))


# ---------------------------------------------------------------------------
# curved operads
# ---------------------------------------------------------------------------

class CurvedOperad:
    """Presented curved operad with a terminating confluent tree rewrite.

    ``normalize_tree`` maps every decorated tree to its normal form tree (the
    shipped presentations only rewrite between trees whose decorations all
    have even degree, so single trees map to single trees and no signs arise).
    """

    def __init__(self, gens, relations=(), d_images=None, curvature=None,
                 normalize_tree=None, max_weight=None, unit_reduced=True):
        self.gens = gens
        self.relations = tuple(relations)
        self.d_images = dict(d_images or {})
        self.normalize_tree = normalize_tree or (lambda t: t)
        self.max_weight = max_weight
        if curvature is None:
            curvature = OperadElement.zero(gens, 1)
        assert curvature.arity == 1
        if curvature:
            assert curvature.degree() == -2, "curvature must have degree -2"
            assert curvature.min_weight() >= 1, "curvature must lie in F_1"
        self.curvature = curvature
        if normalize_tree is not None:
            for gid, (ar, dg, wt) in gens.info.items():
                assert dg % 2 == 0 or not relations, \
                    "tree rewriting is only shipped for even-degree generators"
        self._basis_cache = {}

    # -- normal forms ---------------------------------------------------------

    def reduce(self, x):
        out = {}
        for t, c in x.elt.terms.items():
            accumulate(out, {self.normalize_tree(t): c})
        return OperadElement(self.gens, x.arity, Element(out))

    def is_normal(self, t):
        return self.normalize_tree(t) == t

    def basis(self, arity, max_weight=None, max_vertices=None):
        """Normal-form basis trees of one arity within the weight window."""
        if max_weight is None:
            max_weight = self.max_weight
        assert max_weight is not None, "need a weight bound"
        key = (arity, max_weight, max_vertices)
        got = self._basis_cache.get(key)
        if got is None:
            got = [t for t in free_operad_basis(self.gens, arity, max_weight,
                                                max_vertices)
                   if self.is_normal(t)]
            self._basis_cache[key] = got
        return list(got)

    def reduced_basis(self, arity, max_weight=None, max_vertices=None):
        """Basis of the augmentation complement: normal forms minus the
        trivial tree."""
        return [t for t in self.basis(arity, max_weight, max_vertices)
                if not t.is_trivial]

    # -- structure maps -------------------------------------------------------

    def element(self, tree, coeff=ONE):
        return self.reduce(OperadElement.from_tree(self.gens, tree, coeff))

    def compose(self, x, i, y):
        return self.reduce(compose(x, i, y))

    def prelie(self, x, y):
        return self.reduce(prelie(x, y))

    def bracket(self, x, y):
        return self.reduce(lie_bracket(x, y))

    def d(self, x):
        return self.reduce(extend_derivation(self.gens, self.d_images)(x))

    def gen_square(self, gid):
        """d^2 on a generator, rewritten to [curv, generator]."""
        return self.bracket(self.curvature, self.gens.corolla_element(gid))

    def d_squared(self, x):
        """d^2 of an element, using the generator rewrite (even operator)."""
        squares = {gid: self.gen_square(gid) for gid in self.gens.info}
        return self.reduce(substitute_at_each_vertex(self.gens, squares, x))


def free_curved_operad(gen_data, d_images=None, max_weight=None):
    """Free curved operad on generator data (id, arity, degree, weight).

    Adjoins the formal curvature generator of arity 1, degree -2, weight 1;
    d vanishes on it.  ``d_images`` gives the predifferential on generators as
    elements over the extended generator set builder (called with the final
    GeneratorSet), i.e. a dict gen_id -> callable(gens) -> OperadElement, or
    plain OperadElements built by the caller afterwards via ``set_d``.
    """
    base = GeneratorSet([(gid, ar, dg, wt) for (gid, ar, dg, wt) in gen_data])
    gens = base.with_curvature_slot()
    curvature = gens.corolla_element(CURV)
    images = {}
    if d_images:
        for gid, img in d_images.items():
            images[gid] = img(gens) if callable(img) else img
    return CurvedOperad(gens, relations=(), d_images=images,
                        curvature=curvature, normalize_tree=None,
                        max_weight=max_weight)


def make_assoc_normalizer(mu, unit=None):
    """Left-comb normalizer for an associative binary generator ``mu``;
    optionally absorbs a two-sided unit generator of arity 0."""
    def normalize(t):
        if t.is_trivial:
            return t
        kids = tuple(normalize(c) for c in t.children)
        if t.label == mu:
            left, right = kids
            if unit is not None and left.label == unit:
                return right
            if unit is not None and right.label == unit:
                return left
            if right.label == mu:
                a, b = right.children
                return normalize(PlanarTree(mu, (PlanarTree(mu, (left, a)), b)))
        return PlanarTree(t.label, kids)
    return normalize


MU = "mu"
BULLET = "o"


def cas(max_weight=None):
    """The curved associative model: a binary product of degree 0 and an
    arity-0 element of degree -2 sitting in filtration weight 1.

    Relations: associativity of the product.  The curvature is the difference
    of attaching the arity-0 generator on the right and on the left of the
    product, oriented by CURVATURE_SIGN.  The filtration counts occurrences
    of the arity-0 generator; normal forms are left combs.
    """
    gens = GeneratorSet([(MU, 2, 0, 0), (BULLET, 0, -2, 1)])
    mu = gens.corolla_element(MU)
    bullet = gens.corolla_element(BULLET)
    assoc = compose(mu, 1, mu) - compose(mu, 2, mu)
    curvature = CURVATURE_SIGN * (compose(mu, 2, bullet) - compose(mu, 1, bullet))
    return CurvedOperad(
        gens,
        relations=(assoc,),
        d_images={},
        curvature=curvature,
        normalize_tree=make_assoc_normalizer(MU),
        max_weight=max_weight,
    )


def cas_comb(m, marks):
    """Normal-form basis tree of the curved associative model: the left comb
    with m + len(marks) slots, the ones listed in ``marks`` (1-based, sorted)
    filled with the arity-0 generator."""
    marks = set(marks)
    n = m + len(marks)
    assert n >= 1
    leafword = [corolla(BULLET, 0) if (j + 1) in marks else TRIVIAL
                for j in range(n)]
    if n == 1:
        return leafword[0]
    t = PlanarTree(MU, (leafword[0], leafword[1]))
    for entry in leafword[2:]:
        t = PlanarTree(MU, (t, entry))
    return t


def curvature_check(operad, arity, max_weight, max_vertices=None):
    """Verify the curved square axiom on a window: d(curv) = 0 and the
    substitution square d_squared agrees with [curv, -] on every basis tree
    (for the free operads this is the telescoping identity that makes the
    generator-level rewrite d(d(x)) -> [curv, x] globally consistent).

    Returns the list of offending items (empty = all good).
    """
    bad = []
    if operad.d(operad.curvature):
        bad.append(("d_curvature", None))
    for t in operad.basis(arity, max_weight, max_vertices):
        if t.is_trivial:
            continue
        x = OperadElement.from_tree(operad.gens, t)
        lhs = operad.d_squared(x)
        rhs = operad.bracket(operad.curvature, x)
        if lhs != rhs:
            bad.append(("square_mismatch", t))
    return bad


# ---------------------------------------------------------------------------
# endomorphism operads
# ---------------------------------------------------------------------------

class EndOperad:
    """Operations on a filtered graded module: component n is spanned by the
    matrix units (out_atom; in_atoms) of maps A^{(x) n} -> A.

    Degree of a matrix unit: deg(out) - sum deg(in).  Weight: the filtration
    shift max(0, wt(out) - sum wt(in)), the largest p with image in F_{q+p}
    for inputs in F_q.
    """

    def __init__(self, module, n_max):
        self.module = module
        self.n_max = n_max
        self._d_in = {}  # atom id -> list of (atom id with d hitting it, coeff)
        for a in module.atoms:
            for tgt, c in module.d_of(a.id).terms.items():
                self._d_in.setdefault(tgt, []).append((a.id, c))

    def atom_degree(self, key):
        out, ins = key
        return (self.module.degree_of(out)
                - sum(self.module.degree_of(i) for i in ins))

    def atom_weight(self, key):
        out, ins = key
        return max(0, self.module.weight_of(out)
                   - sum(self.module.weight_of(i) for i in ins))

    def element_degree(self, f):
        degs = {self.atom_degree(k) for k in f.terms}
        assert len(degs) <= 1, "endomorphism element is not degree-homogeneous"
        return degs.pop() if degs else None

    def identity(self):
        return Element({(a.id, (a.id,)): ONE for a in self.module.atoms})

    def compose(self, f, i, g):
        """(f o_i g), with the Koszul sign moving g past the first i-1 inputs."""
        g_deg = self.element_degree(g)
        if g_deg is None:
            return Element()
        out = {}
        for (fo, fins), cf in f.terms.items():
            if i > len(fins):
                continue
            front = fins[:i - 1]
            sign = 1
            if g_deg % 2:
                moved = sum(self.module.degree_of(k) for k in front)
                sign = -1 if moved % 2 else 1
            for (go, gins), cg in g.terms.items():
                if go != fins[i - 1]:
                    continue
                key = (fo, front + gins + fins[i:])
                accumulate(out, {key: sign * cf * cg})
        return Element(out)

    def prelie(self, f, nf, g):
        total = {}
        for i in range(1, nf + 1):
            accumulate(total, self.compose(f, i, g).terms)
        return Element(total)

    def bracket(self, f, nf, g, ng):
        fd = self.element_degree(f) or 0
        gd = self.element_degree(g) or 0
        sign = -1 if (fd * gd) % 2 else 1
        out = dict(self.prelie(f, nf, g).terms)
        accumulate(out, self.prelie(g, ng, f).terms, -ONE * sign)
        return Element(out)

    def del_(self, f):
        """del(f) = d o f - (-1)^{|f|} f o (sum of d on one input)."""
        f_deg = self.element_degree(f)
        if f_deg is None:
            return Element()
        out = {}
        for (fo, fins), c in f.terms.items():
            for tgt, cd in self.module.d_of(fo).terms.items():
                accumulate(out, {(tgt, fins): c * cd})
            outer = -ONE if f_deg % 2 else ONE
            for j in range(len(fins)):
                moved = sum(self.module.degree_of(k) for k in fins[:j])
                inner = -ONE if moved % 2 else ONE
                for src, cd in self._d_in.get(fins[j], ()):  # d(src) hits fins[j]
                    key = (fo, fins[:j] + (src,) + fins[j + 1:])
                    accumulate(out, {key: -outer * inner * c * cd})
        return Element(out)

    def curvature(self):
        """d^2 as an arity-1 operation (this is what makes End curved)."""
        out = {}
        for a in self.module.atoms:
            dd = self.module.apply_d(self.module.d_of(a.id))
            for tgt, c in dd.terms.items():
                accumulate(out, {(tgt, (a.id,)): c})
        return Element(out)

    def apply(self, f, inputs):
        """Apply an endomorphism element to a tuple of atom ids."""
        out = {}
        for (fo, fins), c in f.terms.items():
            if fins == tuple(inputs):
                accumulate(out, {fo: c})
        return Element(out)


def end_operad(module, n_max):
    return EndOperad(module, n_max)


class RepresentationReport:
    def __init__(self):
        self.failures = []

    def ok(self):
        return not self.failures

    def add(self, kind, detail):
        self.failures.append((kind, detail))

    def __repr__(self):
        return "RepresentationReport(ok=%s, failures=%r)" % (self.ok(), self.failures)


def evaluate_tree_in_end(endop, assignment, t):
    """Evaluate a decorated tree as an endomorphism-operad element.

    ``assignment`` maps generator ids to endomorphism elements.  The trivial
    tree evaluates to the identity.  Children are attached left to right: in
    that order each insertion slot is the first open one, nothing moves past
    anything in the preorder tensor, and no signs appear at the tree level.
    """
    if t.is_trivial:
        return endop.identity()
    val = assignment[t.label]
    offset = 0
    for child in t.children:
        if child.is_trivial:
            offset += 1
            continue
        sub = evaluate_tree_in_end(endop, assignment, child)
        val = endop.compose(val, offset + 1, sub)
        offset += child.arity
    return val


def evaluate_element_in_end(endop, assignment, x):
    out = {}
    for t, c in x.elt.terms.items():
        accumulate(out, evaluate_tree_in_end(endop, assignment, t).terms, c)
    return Element(out)


def check_representation(operad, endop, assignment):
    """Check that an assignment of endomorphism elements to generators defines
    a representation of the curved operad:

    * degrees match and filtration weights do not drop,
    * every relation evaluates to zero,
    * the predifferentials intertwine on generators,
    * the curvature element maps to d^2 of the module.
    """
    report = RepresentationReport()
    for gid, (ar, dg, wt) in sorted(operad.gens.info.items()):
        f = assignment.get(gid)
        if f is None:
            report.add("missing-generator", gid)
            continue
        fdeg = endop.element_degree(f)
        if f and fdeg != dg:
            report.add("degree-mismatch", (gid, fdeg, dg))
        for key in f.terms:
            if len(key[1]) != ar:
                report.add("arity-mismatch", (gid, key))
            if endop.atom_weight(key) < wt:
                report.add("weight-drop", (gid, key))
    if not report.ok():
        return report
    for rel in operad.relations:
        if evaluate_element_in_end(endop, assignment, rel):
            report.add("relation-not-satisfied", rel)
    for gid in sorted(operad.gens.info):
        img = operad.d_images.get(gid)
        lhs = (evaluate_element_in_end(endop, assignment, img)
               if img is not None else Element())
        rhs = endop.del_(assignment[gid])
        if lhs != rhs:
            report.add("predifferential-mismatch", gid)
    curv_val = evaluate_element_in_end(endop, assignment, operad.curvature)
    if curv_val != endop.curvature():
        report.add("curvature-mismatch", None)
    return report
