"""Bar and cobar constructions for curved operads, with the convolution
calculus that mediates between them.

The bar construction of a curved operad is the tree cooperad on the
degree-shifted normal forms (the augmentation complement, each basis tree
shifted up by one), carrying a predifferential assembled from three
coderivations: one inserts the shifted curvature at every edge, one applies
the shifted internal differential at every vertex, and one collapses internal
edges through operad composition.  The cobar construction of a conilpotent
cooperad is the free operad on the shifted-down decomposition keys together
with a formal curvature generator; its predifferential is the sum of a
derivation applying the cooperad differential inside generators, one
splitting a generator along the one-cut decomposition, and one projecting a
generator to the formal curvature through the counit.  Neither square is
required to vanish on the nose: the bar square vanishes exactly when the host
satisfies the curved square identity, and the cobar square equals the bracket
with the formal curvature; both defects raise weight, so every construction
here stays within the filtered-module framework.

Sign conventions are the uniform region signs of the coderivation and
derivation extensions in this package: a pattern acting at a region picks up
the parity of the decorations preceding the region in preorder, and nothing
else.  All remaining signs are pinned by the contracted identities (squares,
cross-terms, the Maurer-Cartan equation for the tautological corolla
projection) and are exercised term-by-term in the test suite.

Window policy: generator sets grow lazily while differentials are evaluated,
but every enumeration is served from a snapshot frozen at construction time.
A decoration of arity k in a tree of arity n and weight <= P forces at least
k - n subtrees of arity 0, each of weight >= 1 whenever arity <= 1 generators
sit in positive weight; so pre-registering generators of arity up to
max_arity + max_weight covers every tree the reporting window can contain,
and lazily registered transients (used only as targets beyond the window)
can never surface in a basis enumeration.
"""

from fractions import Fraction

from .filtcomplex import (BasisAtom, Element, FGModule, ModuleMap, Window,
                          accumulate, gr_homology, is_graded_quasi_iso,
                          is_strict_surjection)
from .planartree import TRIVIAL, PlanarTree, corolla, graft, render
from .operadcore import (CURV, CurvedOperad, GeneratorSet, OperadElement,
                         extend_derivation, free_operad_basis)
from .cooperadcore import (CoderivationImage, TreeCooperad,
                           extend_coderivation, extend_to_cooperad_map)

__all__ = [
    "SuspendedBasis", "BarCooperad", "bar",
    "DesuspendedKeys", "CobarOperad", "cobar",
    "bar_arity_module", "cobar_arity_module", "operad_arity_module",
    "ConvolutionElement", "ConvolutionAlgebra", "convolution",
    "TwistingReport", "bar_convolution", "universal_twisting_morphism",
    "OperadMorphism", "operad_morphism_from_twist",
    "twist_from_operad_morphism", "cooperad_morphism_from_twist",
    "twist_from_cooperad_morphism",
    "CounitArityVerdict", "CounitReport", "counit_map",
]

ONE = Fraction(1)


class _LazyTable(dict):
    """Pattern table whose entries are computed on first lookup.

    ``fn(key)`` returns the stored value or None for "no entry"; misses are
    remembered so each key is computed once.  Iteration only ever sees
    materialized entries, which is exactly what the image validators need.
    """

    def __init__(self, fn):
        dict.__init__(self)
        self._fn = fn
        self._absent = set()

    def _materialize(self, key):
        if key in self._absent or dict.__contains__(self, key):
            return
        val = self._fn(key)
        if val is None:
            self._absent.add(key)
        else:
            dict.__setitem__(self, key, val)

    def __contains__(self, key):
        self._materialize(key)
        return dict.__contains__(self, key)

    def __getitem__(self, key):
        self._materialize(key)
        return dict.__getitem__(self, key)

    def get(self, key, default=None):
        self._materialize(key)
        return dict.get(self, key, default)


# ---------------------------------------------------------------------------
# bar construction
# ---------------------------------------------------------------------------

class SuspendedBasis(GeneratorSet):
    """Cogenerators of a bar construction: normal forms of the host operad,
    shifted up by one homological degree.

    Ids are the rendered normal forms; registration is idempotent and checks
    that a returning id still names the same tree, so an (unexpected) render
    collision fails loudly instead of merging basis lines.
    """

    def __init__(self, operad):
        GeneratorSet.__init__(self, [])
        self.operad = operad
        self.tree_of = {}

    def register(self, nf):
        assert isinstance(nf, PlanarTree) and not nf.is_trivial, \
            "only non-trivial normal forms are shifted into the bar basis"
        gid = render(nf)
        known = self.tree_of.get(gid)
        if known is not None:
            assert known == nf, "render collision on %r" % (gid,)
            return gid
        gens = self.operad.gens
        self.info[gid] = (nf.arity, gens.tree_degree(nf) + 1,
                          gens.tree_weight(nf))
        self.tree_of[gid] = nf
        return gid

    def shift_element(self, x, sign=ONE):
        """Shift an OperadElement of the host up by one: an Element over
        cogenerator ids, dropping any component on the trivial tree."""
        out = {}
        for t, c in x.terms():
            if t.is_trivial:
                continue
            accumulate(out, {self.register(t): sign * c})
        return Element(out)


class BarCooperad:
    """Bar construction of a curved operad over a finite window.

    The underlying object is the tree cooperad (counit-shifted weights) on
    the shifted normal forms; ``differential`` is the sum of the three stored
    coderivations:

    * ``curvature_insertion`` grows every edge and slot by a shifted
      curvature term, negated;
    * ``vertex_differential`` replaces one decoration by the shift of its
      internal differential, negated (the operator moves past one shift);
    * ``edge_collapse`` composes the two decorations of an internal edge in
      the host and shifts the result, with the parity of the unshifted upper
      decoration (the lower shift moves past it).

    Generators are pre-registered for host arities up to
    ``max_arity + max_weight`` (see the module docstring); ``basis`` is
    served from a snapshot frozen at construction time and refuses arities
    beyond ``max_arity``, where pre-registration no longer guarantees
    completeness.  Hosts with arity <= 1 normal forms of weight zero have no
    intrinsic vertex bound; pass ``cogen_max_vertices`` (pre-registration)
    and ``max_vertices`` (enumeration) explicitly for those, and treat
    ``basis`` as the frozen window it is.
    """

    def __init__(self, operad, max_arity, max_weight, max_vertices=None,
                 cogen_max_vertices=None):
        assert max_weight is not None and max_weight >= 0
        self.operad = operad
        self.max_arity = max_arity
        self.max_weight = max_weight
        self.max_vertices = max_vertices
        self.cogens = SuspendedBasis(operad)
        for m in range(max_arity + max_weight + 1):
            for nf in operad.reduced_basis(m, max_weight, cogen_max_vertices):
                self.cogens.register(nf)
        self.cooperad = TreeCooperad(self.cogens, infinitesimal=True)
        snapshot = GeneratorSet(
            [(g,) + self.cogens.info[g] for g in self.cogens.ids()])
        self._window = TreeCooperad(snapshot, infinitesimal=True)
        rho0 = self.cogens.shift_element(operad.curvature, sign=-ONE)
        self.curvature_insertion = extend_coderivation(
            self.cooperad, CoderivationImage(-1, rho0=rho0))
        self.vertex_differential = extend_coderivation(
            self.cooperad,
            CoderivationImage(-1, rho1=_LazyTable(self._vertex_pattern)))
        self.edge_collapse = extend_coderivation(
            self.cooperad,
            CoderivationImage(-1, rho2=_LazyTable(self._collapse_pattern)))

    def _vertex_pattern(self, gid):
        dx = self.operad.d(self.operad.element(self.cogens.tree_of[gid]))
        img = self.cogens.shift_element(dx, sign=-ONE)
        return img if img else None

    def _collapse_pattern(self, key):
        up, slot, low = key
        comp = self.operad.compose(
            self.operad.element(self.cogens.tree_of[up]), slot,
            self.operad.element(self.cogens.tree_of[low]))
        sign = -ONE if (self.cogens.degree(up) - 1) % 2 else ONE
        img = self.cogens.shift_element(comp, sign=sign)
        return img if img else None

    # -- shift bookkeeping ------------------------------------------------

    def shift(self, nf):
        """Cogenerator id of a host normal form."""
        return self.cogens.register(nf)

    def unshift(self, gid):
        """Host normal form behind a cogenerator id."""
        return self.cogens.tree_of[gid]

    # -- structure ----------------------------------------------------------

    def basis(self, arity, max_weight=None, max_vertices=None):
        """Basis trees from the construction-time snapshot."""
        assert arity <= self.max_arity, \
            "arity %d beyond the pre-registered window (max_arity=%d)" % (
                arity, self.max_arity)
        if max_weight is None:
            max_weight = self.max_weight
        assert max_weight <= self.max_weight, \
            "weight window exceeds the pre-registered cogenerators"
        if max_vertices is None:
            max_vertices = self.max_vertices
        return list(self._window.basis(arity, max_weight, max_vertices))

    def differential(self, x):
        """Total predifferential (sum of the three coderivations)."""
        return (self.curvature_insertion(x) + self.vertex_differential(x)
                + self.edge_collapse(x))


def bar(operad, max_arity, max_weight, max_vertices=None,
        cogen_max_vertices=None):
    """Bar construction of a curved operad over a finite window."""
    return BarCooperad(operad, max_arity, max_weight, max_vertices,
                       cogen_max_vertices)


# ---------------------------------------------------------------------------
# cobar construction
# ---------------------------------------------------------------------------

class DesuspendedKeys(GeneratorSet):
    """Generators of a cobar construction: decomposition keys of the source
    cooperad shifted down by one degree, plus the formal curvature."""

    def __init__(self, source):
        GeneratorSet.__init__(self, [(CURV, 1, -2, 1)])
        self.source = source
        self.key_of = {}

    def register(self, key):
        gid = "w:" + repr(key)
        if gid in self.info:
            assert self.key_of[gid] == key, "render collision on %r" % (gid,)
            return gid
        arity = self.source.key_arity(key)
        weight = self.source.key_weight(key)
        assert arity >= 0 and weight >= 0
        self.info[gid] = (arity, self.source.key_degree(key) - 1, weight)
        self.key_of[gid] = key
        return gid


class CobarOperad(CurvedOperad):
    """Cobar construction of a conilpotent cooperad over a finite window.

    ``source`` provides the decomposition protocol: ``basis(arity,
    max_weight, max_vertices)``, ``key_arity`` / ``key_degree`` /
    ``key_weight``, ``counit(key)`` and ``delta_infinitesimal(key)`` (the
    counital one-cut decomposition, as an Element over (upper, slot, lower)
    keys); ``source_differential`` optionally maps a key to an Element over
    keys (the source predifferential, e.g. a bar differential).

    Underlying operad: free on the shifted-down keys and the formal
    curvature generator.  The predifferential is the sum of three
    derivations with generator images

    * ``internal_part``: minus the shift of the source differential;
    * ``split_part``: the one-cut decomposition, each term grafted as a
      two-vertex tree with the parity of the unshifted upper key;
    * ``curvature_part``: the counit times the formal curvature.

    The square of the total equals the bracket with the formal curvature,
    term-for-term; it raises weight, so the construction is a
    predifferential in the filtered sense.  ``basis`` is served from the
    construction-time snapshot of pre-registered generators (source arities
    up to ``max_arity + max_weight``).
    """

    def __init__(self, source, max_arity, max_weight, max_vertices=None,
                 source_differential=None, source_max_vertices=None):
        assert max_weight is not None and max_weight >= 0
        gens = DesuspendedKeys(source)
        for m in range(max_arity + max_weight + 1):
            for key in source.basis(m, max_weight, source_max_vertices):
                gens.register(key)
        CurvedOperad.__init__(self, gens, relations=(), d_images={},
                              curvature=gens.corolla_element(CURV),
                              normalize_tree=None, max_weight=max_weight)
        self.source = source
        self.source_differential = source_differential
        self.max_arity = max_arity
        self.max_vertices = max_vertices
        self._window_gens = GeneratorSet(
            [(g,) + gens.info[g] for g in gens.ids()])
        self._window_cache = {}
        self.internal_images = _LazyTable(self._internal_image)
        self.split_images = _LazyTable(self._split_image)
        self.curvature_images = _LazyTable(self._curvature_image)
        self.d_images = _LazyTable(self._total_image)

    # -- generator images ---------------------------------------------------

    def _shift_key(self, key):
        gid = self.gens.register(key)
        return corolla(gid, self.gens.arity(gid))

    def _internal_image(self, gid):
        if gid == CURV or self.source_differential is None:
            return None
        dk = self.source_differential(self.gens.key_of[gid])
        if isinstance(dk, OperadElement):
            dk = dk.elt
        if not dk:
            return None
        out = {}
        for y, c in dk.terms.items():
            accumulate(out, {self._shift_key(y): -c})
        out = Element(out)
        if not out:
            return None
        return OperadElement(self.gens, self.gens.arity(gid), out)

    def _split_image(self, gid):
        if gid == CURV:
            return None
        key = self.gens.key_of[gid]
        out = {}
        for (up, slot, low), c in \
                self.source.delta_infinitesimal(key).terms.items():
            sign = -ONE if self.source.key_degree(up) % 2 else ONE
            t = graft(self._shift_key(up), slot, self._shift_key(low))
            accumulate(out, {t: sign * c})
        out = Element(out)
        if not out:
            return None
        return OperadElement(self.gens, self.gens.arity(gid), out)

    def _curvature_image(self, gid):
        if gid == CURV:
            return None
        eps = self.source.counit(self.gens.key_of[gid])
        if not eps:
            return None
        assert self.gens.arity(gid) == 1, \
            "counit supported away from arity 1"
        return eps * self.curvature

    def _total_image(self, gid):
        parts = [tab.get(gid) for tab in (self.internal_images,
                                          self.split_images,
                                          self.curvature_images)]
        parts = [p for p in parts if p is not None]
        if not parts:
            return None
        total = parts[0]
        for p in parts[1:]:
            total = total + p
        return total

    # -- split applications ---------------------------------------------------

    def internal_part(self, x):
        return self.reduce(extend_derivation(self.gens, self.internal_images)(x))

    def split_part(self, x):
        return self.reduce(extend_derivation(self.gens, self.split_images)(x))

    def curvature_part(self, x):
        return self.reduce(extend_derivation(self.gens, self.curvature_images)(x))

    # -- enumeration ----------------------------------------------------------

    def basis(self, arity, max_weight=None, max_vertices=None):
        """Normal-form basis from the construction-time generator snapshot."""
        assert arity <= self.max_arity, \
            "arity %d beyond the pre-registered window (max_arity=%d)" % (
                arity, self.max_arity)
        if max_weight is None:
            max_weight = self.max_weight
        assert max_weight <= self.max_weight, \
            "weight window exceeds the pre-registered generators"
        if max_vertices is None:
            max_vertices = self.max_vertices
        key = (arity, max_weight, max_vertices)
        got = self._window_cache.get(key)
        if got is None:
            got = free_operad_basis(self._window_gens, arity, max_weight,
                                    max_vertices)
            self._window_cache[key] = got
        return list(got)


def cobar(source, max_arity, max_weight, max_vertices=None,
          source_differential=None, source_max_vertices=None):
    """Cobar construction of a conilpotent cooperad over a finite window."""
    return CobarOperad(source, max_arity, max_weight, max_vertices,
                       source_differential, source_max_vertices)


# ---------------------------------------------------------------------------
# arity components as filtered module windows
# ---------------------------------------------------------------------------

def _window_module(entries, apply_d, max_weight, tag):
    """Assemble one arity component as an FGModule.

    ``entries``: list of (id, degree, weight); ``apply_d``: id -> list of
    (target id, coefficient, target degree, target weight).  Targets beyond
    the weight cap are dropped silently (the window is exact per weight layer
    within the cap); any other dropped target is reported as a warning, which
    shrinks the trustworthy window.
    """
    atoms = [BasisAtom(i, dg, wt) for (i, dg, wt) in entries]
    known = {a.id for a in atoms}
    d = {}
    warnings = []
    for a in atoms:
        kept = {}
        for tid, c, tdg, twt in apply_d(a.id):
            if tid in known:
                accumulate(kept, {tid: c})
            elif twt > max_weight:
                continue
            else:
                warnings.append(
                    "%s: d of %r leaves the window at %r (degree %d, "
                    "weight %d)" % (tag, a.id, tid, tdg, twt))
        kept = Element(kept)
        if kept:
            d[a.id] = kept
    return FGModule(atoms, d, window=Window(wt_max=max_weight),
                    warnings=warnings)


def bar_arity_module(barc, arity, max_weight=None, max_vertices=None):
    """One arity component of a bar construction as an FGModule window."""
    if max_weight is None:
        max_weight = barc.max_weight
    C = barc.cooperad
    entries = [(t, C.tree_degree(t), C.tree_weight(t))
               for t in barc.basis(arity, max_weight, max_vertices)]

    def apply_d(t):
        return [(u, c, C.tree_degree(u), C.tree_weight(u))
                for u, c in barc.differential(t).terms()]

    return _window_module(entries, apply_d, max_weight,
                          "bar arity %d" % arity)


def cobar_arity_module(cob, arity, max_weight=None, max_vertices=None):
    """One arity component of a cobar construction as an FGModule window."""
    if max_weight is None:
        max_weight = cob.max_weight
    gens = cob.gens
    entries = [(t, gens.tree_degree(t), gens.tree_weight(t))
               for t in cob.basis(arity, max_weight, max_vertices)]

    def apply_d(t):
        img = cob.d(cob.element(t))
        return [(u, c, gens.tree_degree(u), gens.tree_weight(u))
                for u, c in img.terms()]

    return _window_module(entries, apply_d, max_weight,
                          "cobar arity %d" % arity)


def operad_arity_module(operad, arity, max_weight=None, max_vertices=None):
    """One arity component of a presented operad as an FGModule window."""
    if max_weight is None:
        max_weight = operad.max_weight
    assert max_weight is not None, "need a weight bound"
    gens = operad.gens
    entries = [(t, gens.tree_degree(t), gens.tree_weight(t))
               for t in operad.basis(arity, max_weight, max_vertices)]

    def apply_d(t):
        img = operad.d(operad.element(t))
        return [(u, c, gens.tree_degree(u), gens.tree_weight(u))
                for u, c in img.terms()]

    return _window_module(entries, apply_d, max_weight,
                          "operad arity %d" % arity)


# ---------------------------------------------------------------------------
# convolution calculus
# ---------------------------------------------------------------------------

class ConvolutionElement:
    """Arity-wise filtered map from a cooperad window into a curved operad.

    ``values`` is either a dict (key -> value; missing keys read as zero) or
    a callable; values may be OperadElements, Elements over normal forms, or
    None.  Evaluations are memoized and checked: a nonzero value must be
    degree-homogeneous of degree ``key degree + operator degree`` and must
    not lower weight (the counit-shifted weight on the cooperad side).
    """

    def __init__(self, algebra, degree, values):
        self.algebra = algebra
        self.degree = degree
        if callable(values):
            self._fn = values
        else:
            table = dict(values or {})
            self._fn = table.get
        self._memo = {}

    def value(self, key):
        got = self._memo.get(key)
        if got is not None:
            return got
        src, op = self.algebra.cooperad, self.algebra.operad
        raw = self._fn(key)
        arity = src.key_arity(key)
        if raw is None:
            val = OperadElement.zero(op.gens, arity)
        elif isinstance(raw, OperadElement):
            val = raw
        else:
            val = OperadElement(op.gens, arity, raw)
        assert val.arity == arity, \
            "value at %r has arity %d, key has %d" % (key, val.arity, arity)
        if val:
            assert val.degree() == src.key_degree(key) + self.degree, \
                "value at %r is not homogeneous of degree %d" % (
                    key, self.degree)
            assert val.min_weight() >= src.key_weight(key), \
                "value at %r lowers weight" % (key,)
        self._memo[key] = val
        return val

    def __add__(self, other):
        assert isinstance(other, ConvolutionElement)
        assert other.algebra is self.algebra and other.degree == self.degree
        return ConvolutionElement(
            self.algebra, self.degree,
            lambda k: self.value(k) + other.value(k))

    def __neg__(self):
        return ConvolutionElement(self.algebra, self.degree,
                                  lambda k: -self.value(k))

    def scale(self, c):
        return ConvolutionElement(self.algebra, self.degree,
                                  lambda k: c * self.value(k))


class TwistingReport:
    """Outcome of a Maurer-Cartan check over a window of keys.

    ``residual_cells`` maps (arity, degree, weight) cells to the keys (with
    values) where the residual curvature + partial + self-product does not
    vanish; ``unit_hits`` lists keys whose value meets the operad unit
    (forbidden: twisting morphisms land in the augmentation complement);
    ``coaugmentation_ok`` records whether the value on the coaugmentation
    key sits in positive weight.
    """

    def __init__(self, residual_cells, unit_hits, coaugmentation_ok,
                 keys_checked):
        self.residual_cells = residual_cells
        self.unit_hits = unit_hits
        self.coaugmentation_ok = coaugmentation_ok
        self.keys_checked = keys_checked

    @property
    def ok(self):
        return (not self.residual_cells and not self.unit_hits
                and self.coaugmentation_ok)

    def __repr__(self):
        if self.ok:
            return "<twisting morphism: %d keys clean>" % self.keys_checked
        return ("<not twisting: %d residual cells, %d unit hits, "
                "coaugmentation %s>" % (
                    len(self.residual_cells), len(self.unit_hits),
                    "ok" if self.coaugmentation_ok else "bad"))


class ConvolutionAlgebra:
    """Convolution of a cooperad window with a curved operad.

    Elements are arity-wise filtered maps; the star product routes a key
    through the one-cut decomposition, applies the two maps to the pieces
    and composes in the operad (the second map moves past the upper piece);
    ``partial`` is the commutator with the two differentials; the
    distinguished ``curvature_term`` is the counit followed by the operad
    curvature.  The square of ``partial`` is the bracket with the curvature
    term, and ``partial`` kills the curvature term itself; twisting
    morphisms are the degree -1 solutions of the Maurer-Cartan equation
    ``curvature_term + partial(a) + star(a, a) = 0`` supported away from the
    counit and coaugmentation.
    """

    def __init__(self, cooperad, operad, max_weight, max_vertices=None,
                 cooperad_differential=None):
        self.cooperad = cooperad
        self.operad = operad
        self.max_weight = max_weight
        self.max_vertices = max_vertices
        self.cooperad_differential = cooperad_differential

    # -- element constructors ----------------------------------------------

    def element(self, degree, values):
        return ConvolutionElement(self, degree, values)

    def zero(self, degree=0):
        return ConvolutionElement(self, degree, lambda k: None)

    def curvature_term(self):
        """Counit followed by the operad curvature (degree -2)."""
        def fn(key):
            eps = self.cooperad.counit(key)
            if not eps:
                return None
            return eps * self.operad.curvature
        return ConvolutionElement(self, -2, fn)

    # -- operations ----------------------------------------------------------

    def star(self, f, g):
        """Convolution product through the one-cut decomposition."""
        def fn(key):
            out = OperadElement.zero(self.operad.gens,
                                     self.cooperad.key_arity(key))
            splits = self.cooperad.delta_infinitesimal(key)
            for (up, slot, low), c in splits.terms.items():
                fu = f.value(up)
                if not fu:
                    continue
                gl = g.value(low)
                if not gl:
                    continue
                sign = -ONE if (g.degree % 2) \
                    and (self.cooperad.key_degree(up) % 2) else ONE
                out = out + (sign * c) * self.operad.compose(fu, slot, gl)
            return out
        return ConvolutionElement(self, f.degree + g.degree, fn)

    def bracket(self, f, g):
        sign = -ONE if (f.degree % 2) and (g.degree % 2) else ONE
        return self.star(f, g) + self.star(g, f).scale(-sign)

    def partial(self, f):
        """Differential: operad differential after f, minus (with the parity
        of f) f after the cooperad differential."""
        def fn(key):
            out = self.operad.d(f.value(key))
            if self.cooperad_differential is not None:
                dk = self.cooperad_differential(key)
                if isinstance(dk, OperadElement):
                    dk = dk.elt
                csign = ONE if f.degree % 2 else -ONE
                for y, c in dk.terms.items():
                    fy = f.value(y)
                    if fy:
                        out = out + (csign * c) * fy
            return out
        return ConvolutionElement(self, f.degree - 1, fn)

    def mc_residual(self, alpha):
        """curvature_term + partial(alpha) + star(alpha, alpha)."""
        if alpha.degree != -1:
            raise ValueError(
                "a twisting morphism must have degree -1, got %d"
                % alpha.degree)
        return (self.curvature_term() + self.partial(alpha)
                + self.star(alpha, alpha))

    def window_keys(self, max_arity, max_weight=None, max_vertices=None):
        if max_weight is None:
            max_weight = self.max_weight
        if max_vertices is None:
            max_vertices = self.max_vertices
        keys = []
        for m in range(max_arity + 1):
            keys.extend(self.cooperad.basis(m, max_weight, max_vertices))
        return keys

    def is_twisting_morphism(self, alpha, max_arity=None, keys=None):
        """Maurer-Cartan check over a window; returns a TwistingReport."""
        if alpha.degree != -1:
            raise ValueError(
                "a twisting morphism must have degree -1, got %d"
                % alpha.degree)
        if keys is None:
            assert max_arity is not None, "need max_arity or explicit keys"
            keys = self.window_keys(max_arity)
        residual = self.mc_residual(alpha)
        cells = {}
        unit_hits = []
        for k in keys:
            if alpha.value(k).elt.coeff(TRIVIAL):
                unit_hits.append(k)
            r = residual.value(k)
            if r:
                cell = (self.cooperad.key_arity(k),
                        self.cooperad.key_degree(k),
                        self.cooperad.key_weight(k))
                cells.setdefault(cell, []).append((k, r))
        co_val = alpha.value(self.cooperad.coaug_key)
        coaug_ok = (not co_val) or co_val.min_weight() >= 1
        return TwistingReport(cells, unit_hits, coaug_ok, len(keys))


def convolution(cooperad, operad, max_weight, max_vertices=None,
                cooperad_differential=None):
    """Convolution of a cooperad window with a curved operad."""
    return ConvolutionAlgebra(cooperad, operad, max_weight, max_vertices,
                              cooperad_differential)


def bar_convolution(barc, max_vertices=None):
    """Convolution of a bar construction with its host operad, wired with
    the bar differential on the cooperad side."""
    return ConvolutionAlgebra(
        barc.cooperad, barc.operad, barc.max_weight,
        max_vertices if max_vertices is not None else barc.max_vertices,
        cooperad_differential=lambda k: barc.differential(k).elt)


def universal_twisting_morphism(barc, algebra):
    """The tautological corolla projection of a bar convolution: a one-vertex
    tree maps to its unshifted decoration, everything else to zero."""
    assert algebra.cooperad is barc.cooperad, \
        "the twist lives on the bar construction's own convolution"

    def fn(t):
        if not t.is_trivial and all(c.is_trivial for c in t.children):
            return barc.operad.element(barc.unshift(t.label))
        return None
    return algebra.element(-1, fn)


# ---------------------------------------------------------------------------
# morphisms out of a cobar construction
# ---------------------------------------------------------------------------

class OperadMorphism:
    """Morphism from a free (curved) operad into a target operad, determined
    by generator images (``images``: generator id -> target OperadElement).
    Values on trees compose the images slot by slot, rightmost child first;
    the trivial tree maps to the target unit."""

    def __init__(self, source, target, images):
        self.source = source
        self.target = target
        self._images = images
        self._tree_memo = {}

    def on_generator(self, gid):
        return self._images(gid)

    def on_tree(self, t):
        got = self._tree_memo.get(t)
        if got is None:
            if t.is_trivial:
                got = self.target.element(TRIVIAL)
            else:
                got = self.on_generator(t.label)
                for j in range(len(t.children) - 1, -1, -1):
                    if not got:
                        break
                    kid = self.on_tree(t.children[j])
                    got = (self.target.compose(got, j + 1, kid)
                           if kid else None)
                if not got:
                    # zero images short-circuit; record the tree's arity
                    got = OperadElement.zero(self.target.gens, t.arity)
            self._tree_memo[t] = got
        return got

    def apply(self, x):
        out = OperadElement.zero(self.target.gens, x.arity)
        for t, c in x.terms():
            out = out + c * self.on_tree(t)
        return out

    def chain_defects(self, gids):
        """Per-generator failure of d-compatibility (empty list = chain map
        on the span of the given generators)."""
        bad = []
        for gid in gids:
            x = self.source.gens.corolla_element(gid)
            lhs = self.apply(self.source.d(x))
            rhs = self.target.d(self.on_generator(gid))
            if lhs != rhs:
                bad.append((gid, lhs - rhs))
        return bad


def operad_morphism_from_twist(cob, algebra, alpha):
    """Operad morphism out of a cobar construction attached to a twisting
    morphism: a shifted key maps to minus its value, the formal curvature to
    the target curvature.  It is a chain map exactly when the twist solves
    the Maurer-Cartan equation."""
    if alpha.degree != -1:
        raise ValueError("a twisting morphism must have degree -1, got %d"
                         % alpha.degree)
    target = algebra.operad

    def images(gid):
        if gid == CURV:
            return target.curvature
        return -ONE * alpha.value(cob.gens.key_of[gid])
    return OperadMorphism(cob, target, images)


def twist_from_operad_morphism(cob, algebra, morphism):
    """Recover the twisting morphism encoded by a morphism out of a cobar
    construction (inverse of operad_morphism_from_twist)."""
    def fn(key):
        gid = cob.gens.register(key)
        return -ONE * morphism.on_generator(gid)
    return algebra.element(-1, fn)


def cooperad_morphism_from_twist(barc, algebra, alpha, max_weight=None,
                                 max_vertices=None):
    """Cooperad morphism into a bar construction attached to a twisting
    morphism: the cogenerator projection shifts the twist's values up.
    Raises if a value meets the operad unit (no shift exists there)."""
    if alpha.degree != -1:
        raise ValueError("a twisting morphism must have degree -1, got %d"
                         % alpha.degree)

    def phi(key):
        val = alpha.value(key)
        out = {}
        for t, c in val.terms():
            assert not t.is_trivial, \
                "twist value at %r meets the operad unit" % (key,)
            out[barc.shift(t)] = c
        return out
    return extend_to_cooperad_map(
        algebra.cooperad, barc.cooperad, phi,
        max_weight if max_weight is not None else barc.max_weight,
        max_vertices)


def twist_from_cooperad_morphism(barc, algebra, fmap):
    """Recover the twisting morphism encoded by a cooperad morphism into a
    bar construction (inverse of cooperad_morphism_from_twist)."""
    def fn(key):
        out = OperadElement.zero(barc.operad.gens,
                                 algebra.cooperad.key_arity(key))
        for gid, c in fmap._phi(key).items():
            out = out + c * barc.operad.element(barc.unshift(gid))
        return out
    return algebra.element(-1, fn)


# ---------------------------------------------------------------------------
# the counit of the adjunction: cobar of bar onto the host
# ---------------------------------------------------------------------------

class CounitArityVerdict:
    """Verification record for one arity of the counit morphism."""

    def __init__(self, arity, chain_map, strict_surjection,
                 graded_quasi_iso, cells, warnings):
        self.arity = arity
        self.chain_map = chain_map
        self.strict_surjection = strict_surjection
        self.graded_quasi_iso = graded_quasi_iso
        #: (degree, weight) -> (source homology dim, target homology dim)
        self.cells = cells
        self.warnings = warnings

    @property
    def ok(self):
        return (self.chain_map and self.strict_surjection
                and self.graded_quasi_iso)

    def __repr__(self):
        flags = []
        for name in ("chain_map", "strict_surjection", "graded_quasi_iso"):
            flags.append("%s=%s" % (name, getattr(self, name)))
        return "<arity %d counit: %s>" % (self.arity, ", ".join(flags))


class CounitReport:
    """Per-arity verification of the counit morphism; never a single
    boolean.  ``ok`` aggregates the three per-arity verdicts but the cells
    stay available for inspection."""

    def __init__(self, operad, barc, cob, morphism, verdicts):
        self.operad = operad
        self.bar = barc
        self.cobar = cob
        self.morphism = morphism
        self.verdicts = verdicts

    @property
    def ok(self):
        return all(v.ok for v in self.verdicts.values())

    def __repr__(self):
        return "<counit report: %s>" % (
            "; ".join(repr(v) for v in self.verdicts.values()))


def counit_map(operad, max_arity, max_weight, max_vertices=None):
    """Counit of the adjunction: cobar of the bar construction onto the host
    operad, verified arity by arity over the window.

    The morphism is the one attached to the tautological corolla-projection
    twist.  For each arity up to ``max_arity`` the verdict records whether
    the map intertwines the predifferentials, surjects strictly stage by
    stage, and induces isomorphisms on interior layered homology cells, with
    the per-cell dimensions kept for inspection.
    """
    barc = BarCooperad(operad, max_arity + max_weight, max_weight,
                       max_vertices=max_vertices)
    cob = CobarOperad(barc.cooperad, max_arity, max_weight,
                      source_differential=lambda k: barc.differential(k).elt)
    conv = bar_convolution(barc)
    pi = universal_twisting_morphism(barc, conv)
    morphism = operad_morphism_from_twist(cob, conv, pi)
    verdicts = {}
    for n in range(max_arity + 1):
        src = cobar_arity_module(cob, n, max_weight, max_vertices)
        tgt = operad_arity_module(operad, n, max_weight, max_vertices)
        entries = {}
        warnings = list(src.warnings) + list(tgt.warnings)
        for a in src.atoms:
            img = morphism.on_tree(a.id)
            kept = {}
            for t, c in img.terms():
                if t in tgt.by_id:
                    kept[t] = c
                else:
                    assert operad.gens.tree_weight(t) > max_weight, \
                        "counit image leaves the window at %r" % (t,)
            if kept:
                entries[a.id] = Element(kept)
        f = ModuleMap(src, tgt, entries, degree=0)
        cm = f.is_chain_map()
        ss = is_strict_surjection(f)
        qi = is_graded_quasi_iso(f) if cm else False
        hs = gr_homology(src)
        ht = gr_homology(tgt)
        cells = {}
        for cell in sorted(set(hs.dims) | set(ht.dims)):
            cells[cell] = (hs.dims.get(cell, 0), ht.dims.get(cell, 0))
        verdicts[n] = CounitArityVerdict(n, cm, ss, qi, cells,
                                         tuple(warnings))
    return CounitReport(operad, barc, cob, morphism, verdicts)
