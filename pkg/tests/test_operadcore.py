"""Tests for free/presented curved operads and endomorphism operads."""

import itertools
import random
from fractions import Fraction
from math import comb

from curvedops.filtcomplex import Element, make_standard_complex
from curvedops.operadcore import (
    BULLET,
    MU,
    EndOperad,
    GeneratorSet,
    OperadElement,
    cas,
    cas_comb,
    check_representation,
    compose,
    curvature_check,
    extend_derivation,
    free_curved_operad,
    free_operad_basis,
    lie_bracket,
    substitute_at_each_vertex,
)
from curvedops.planartree import PlanarTree, TRIVIAL, corolla, graft, node, render

ONE = Fraction(1)


# ---------------------------------------------------------------------------
# helpers: independent tree enumeration and random decorated trees
# ---------------------------------------------------------------------------

def compositions(total, parts):
    if parts == 0:
        return [()] if total == 0 else []
    out = []
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            out.append((first,) + rest)
    return out


def brute_trees(arities, max_vertices):
    """All decorated trees with at most max_vertices vertices (any arity),
    built bottom-up by exact vertex count.  Includes the trivial tree."""
    by_count = {0: [TRIVIAL]}
    for n in range(1, max_vertices + 1):
        found = []
        for label in sorted(arities):
            k = arities[label]
            for split in compositions(n - 1, k):
                for kids in itertools.product(*(by_count[j] for j in split)):
                    found.append(PlanarTree(label, kids))
        by_count[n] = found
    return [t for lst in by_count.values() for t in lst]


SIGN_GENS = GeneratorSet([
    ("a", 2, -1, 0),
    ("b", 1, 1, 1),
    ("c", 3, 0, 0),
    ("e", 0, -2, 1),
])


def random_tree(rng, gens, extra=3):
    ids = sorted(gens.info)
    gid = rng.choice(ids)
    t = corolla(gid, gens.arity(gid))
    for _ in range(rng.randrange(extra + 1)):
        if t.arity == 0:
            break
        gid = rng.choice(ids)
        i = rng.randrange(1, t.arity + 1)
        t = graft(t, i, corolla(gid, gens.arity(gid)))
    return t


def elt(gens, tree):
    return OperadElement.from_tree(gens, tree)


# ---------------------------------------------------------------------------
# composition signs are pinned by the operad axioms
# ---------------------------------------------------------------------------

def test_compose_sequential_axiom():
    rng = random.Random(11)
    checked = 0
    while checked < 80:
        x = elt(SIGN_GENS, random_tree(rng, SIGN_GENS))
        y = elt(SIGN_GENS, random_tree(rng, SIGN_GENS))
        z = elt(SIGN_GENS, random_tree(rng, SIGN_GENS))
        if x.arity < 1 or y.arity < 1:
            continue
        i = rng.randrange(1, x.arity + 1)
        j = rng.randrange(1, y.arity + 1)
        lhs = compose(compose(x, i, y), i - 1 + j, z)
        rhs = compose(x, i, compose(y, j, z))
        assert lhs == rhs
        checked += 1


def test_compose_parallel_axiom():
    rng = random.Random(12)
    checked = 0
    while checked < 80:
        x = elt(SIGN_GENS, random_tree(rng, SIGN_GENS))
        y = elt(SIGN_GENS, random_tree(rng, SIGN_GENS))
        z = elt(SIGN_GENS, random_tree(rng, SIGN_GENS))
        if x.arity < 2:
            continue
        i = rng.randrange(1, x.arity)
        k = rng.randrange(i + 1, x.arity + 1)
        lhs = compose(compose(x, i, y), k + y.arity - 1, z)
        sign = -ONE if (y.degree() * z.degree()) % 2 else ONE
        rhs = sign * compose(compose(x, k, z), i, y)
        assert lhs == rhs
        checked += 1


def test_bracket_antisymmetry():
    rng = random.Random(13)
    for _ in range(40):
        x = elt(SIGN_GENS, random_tree(rng, SIGN_GENS, extra=2))
        y = elt(SIGN_GENS, random_tree(rng, SIGN_GENS, extra=2))
        sign = -ONE if (x.degree() * y.degree()) % 2 else ONE
        assert lie_bracket(x, y) == (-sign) * lie_bracket(y, x)


def test_bracket_with_arity_one_left_argument():
    # [f, g] = f o_1 g - (-1)^{|f||g|} sum_j g o_j f when f has one slot
    f = elt(SIGN_GENS, corolla("b", 1))
    g = elt(SIGN_GENS, corolla("a", 2))
    expected = compose(f, 1, g)
    for j in (1, 2):
        expected = expected - (-ONE) * compose(g, j, f)  # |f||g| = 1*(-1) odd
    assert lie_bracket(f, g) == expected


# ---------------------------------------------------------------------------
# free operad basis enumeration
# ---------------------------------------------------------------------------

def test_free_basis_frozen_windows():
    binary = GeneratorSet([("m", 2, 0, 0)])
    three = free_operad_basis(binary, 3, 2)
    m = corolla("m", 2)
    assert set(three) == {graft(m, 1, m), graft(m, 2, m)}
    assert free_operad_basis(binary, 1, 2) == [TRIVIAL]
    assert free_operad_basis(binary, 2, 0) == [m]

    O = cas()
    zero_ar = free_operad_basis(O.gens, 0, 2)
    bullet = corolla(BULLET, 0)
    mu = corolla(MU, 2)
    assert set(zero_ar) == {bullet, graft(graft(mu, 1, bullet), 1, bullet)}


def test_free_basis_matches_brute_enumeration():
    O = cas()
    pool = brute_trees({MU: 2, BULLET: 0}, 8)
    for arity in range(4):
        for max_wt in range(3):
            expected = sorted(
                (t for t in pool
                 if t.arity == arity and O.gens.tree_weight(t) <= max_wt),
                key=render)
            got = free_operad_basis(O.gens, arity, max_wt)
            assert got == expected, (arity, max_wt)


# ---------------------------------------------------------------------------
# derivations
# ---------------------------------------------------------------------------

DERIV_GENS = GeneratorSet([
    ("a", 2, -1, 0), ("z", 2, -2, 0), ("v", 2, -3, 0), ("w", 1, 0, 1)])


def test_derivation_frozen_two_vertex_case():
    a = elt(DERIV_GENS, corolla("a", 2))
    z = elt(DERIV_GENS, corolla("z", 2))
    D = extend_derivation(DERIV_GENS, {"a": z})
    got = D(compose(a, 1, a))
    assert got == compose(z, 1, a) - compose(a, 1, z)


def test_derivation_leibniz_rule():
    # images are homogeneous of degree (generator degree) - 1
    rng = random.Random(14)
    z = elt(DERIV_GENS, corolla("z", 2))
    v = elt(DERIV_GENS, corolla("v", 2))
    wz = elt(DERIV_GENS, node("w", (corolla("z", 2),)))
    images = {"a": z - wz.scale(2), "z": v}
    D = extend_derivation(DERIV_GENS, images)
    checked = 0
    while checked < 60:
        x = elt(DERIV_GENS, random_tree(rng, DERIV_GENS))
        y = elt(DERIV_GENS, random_tree(rng, DERIV_GENS))
        if x.arity < 1:
            continue
        i = rng.randrange(1, x.arity + 1)
        sign = -ONE if x.degree() % 2 else ONE
        lhs = D(compose(x, i, y))
        rhs = compose(D(x), i, y) + sign * compose(x, i, D(y))
        assert lhs == rhs
        checked += 1


# odd decorations make the interleaving sign against retained child blocks
# visible: the image of "a" places an odd unary vertex after the first slot
ODD_GENS = GeneratorSet([
    ("a", 2, 2, 0), ("b", 2, 1, 0), ("m", 2, 0, 0), ("k", 1, 1, 0),
    ("y", 1, 1, 0)])


def test_derivation_leibniz_with_odd_pattern_interleaving():
    pattern = elt(ODD_GENS, node("m", (TRIVIAL, corolla("k", 1))))
    D = extend_derivation(ODD_GENS, {"a": pattern})
    a = elt(ODD_GENS, corolla("a", 2))
    y = elt(ODD_GENS, corolla("y", 1))
    # frozen two-vertex case: the unary odd decoration of the pattern moves
    # past the odd subtree retained in the first slot
    got = D(compose(a, 1, y))
    want = elt(ODD_GENS, node("m", (corolla("y", 1), corolla("k", 1))))
    assert got == -ONE * want
    assert got == compose(D(a), 1, y)
    # and the rule holds across a window of composites
    rng = random.Random(15)
    checked = 0
    while checked < 60:
        x = elt(ODD_GENS, random_tree(rng, ODD_GENS))
        z = elt(ODD_GENS, random_tree(rng, ODD_GENS))
        if x.arity < 1:
            continue
        i = rng.randrange(1, x.arity + 1)
        sign = -ONE if x.degree() % 2 else ONE
        lhs = D(compose(x, i, z))
        rhs = compose(D(x), i, z) + sign * compose(x, i, D(z))
        assert lhs == rhs
        checked += 1


def test_even_substitution_leibniz_with_odd_pattern():
    # "b" -> pattern is an even operator (degree 0); the plain product rule
    # holds only because the interleaving sign tracks the odd decorations
    pattern = elt(ODD_GENS, node("m", (TRIVIAL, corolla("k", 1))))
    images = {"b": pattern.scale(3)}

    def S(x):
        return substitute_at_each_vertex(ODD_GENS, images, x)

    rng = random.Random(16)
    checked = 0
    while checked < 40:
        x = elt(ODD_GENS, random_tree(rng, ODD_GENS))
        z = elt(ODD_GENS, random_tree(rng, ODD_GENS))
        if x.arity < 1:
            continue
        i = rng.randrange(1, x.arity + 1)
        lhs = S(compose(x, i, z))
        rhs = compose(S(x), i, z) + compose(x, i, S(z))
        assert lhs == rhs
        checked += 1


# ---------------------------------------------------------------------------
# the curved associative model
# ---------------------------------------------------------------------------

def test_cas_layer_dimensions():
    O = cas()
    for m in range(5):
        for k in range(4):
            if m + k == 0:
                assert O.basis(0, 0) == []
                continue
            layer = [t for t in O.basis(m, k)
                     if O.gens.tree_weight(t) == k]
            assert len(layer) == comb(m + k, k), (m, k)
            combs = {cas_comb(m, S)
                     for S in itertools.combinations(range(1, m + k + 1), k)}
            assert set(layer) == combs, (m, k)


def is_left_comb(t):
    if t.is_trivial or not t.children:
        return True
    if t.label == MU and t.children[1].label == MU:
        return False
    return all(is_left_comb(c) for c in t.children)


def rotations(t):
    """Single associativity rewrites, both directions, at any position."""
    out = []
    if t.is_trivial:
        return out
    if t.label == MU:
        left, right = t.children
        if right.label == MU:
            b1, b2 = right.children
            out.append(PlanarTree(MU, (PlanarTree(MU, (left, b1)), b2)))
        if left.label == MU:
            a1, a2 = left.children
            out.append(PlanarTree(MU, (a1, PlanarTree(MU, (a2, right)))))
    for idx, c in enumerate(t.children):
        for rc in rotations(c):
            out.append(PlanarTree(
                t.label, t.children[:idx] + (rc,) + t.children[idx + 1:]))
    return out


def test_cas_rewrite_confluence_exhaustive():
    O = cas()
    pool = [t for t in brute_trees({MU: 2, BULLET: 0}, 5) if not t.is_trivial]
    for t in pool:
        nf = O.normalize_tree(t)
        assert is_left_comb(nf), t
        assert O.normalize_tree(nf) == nf, t
        for r in rotations(t):
            assert O.normalize_tree(r) == nf, (t, r)


def test_cas_curvature_commutes_with_combs():
    O = cas()
    theta = O.curvature
    assert theta.degree() == -2 and theta.min_weight() == 1
    for n in range(1, 7):
        mu_n = O.element(cas_comb(n, ()))
        assert not O.bracket(theta, mu_n), n


def test_cas_curved_axioms_window():
    O = cas()
    for arity in range(4):
        assert curvature_check(O, arity, 3) == []


# ---------------------------------------------------------------------------
# free curved operads
# ---------------------------------------------------------------------------

def test_free_curved_square_is_vertexwise_bracket():
    F = free_curved_operad([("x", 2, -1, 0)])
    x = F.gens.corolla_element("x")
    t = compose(x, 1, x)
    u = F.bracket(F.curvature, x)
    assert F.d_squared(t) == compose(u, 1, x) + compose(x, 1, u)


def test_free_curved_axioms_window():
    F = free_curved_operad([("x", 2, -1, 0)])
    for arity in (1, 2, 3):
        assert curvature_check(F, arity, 2) == []


def test_free_curved_with_predifferential():
    F = free_curved_operad(
        [("x", 2, -1, 0), ("z", 2, -2, 0)],
        d_images={"x": lambda g: g.corolla_element("z")})
    x = F.gens.corolla_element("x")
    z = F.gens.corolla_element("z")
    assert F.d(compose(x, 1, x)) == compose(z, 1, x) - compose(x, 1, z)
    assert curvature_check(F, 3, 2) == []


# ---------------------------------------------------------------------------
# endomorphism operads
# ---------------------------------------------------------------------------

def zmod():
    return make_standard_complex("Z0", 0, 0, 2)


def zatom(k):
    return ("Z0", 0, 0, k)


def test_end_curvature_frozen():
    E = EndOperad(zmod(), 3)
    expected = Element({(zatom(k + 2), (zatom(k),)): ONE for k in range(4)})
    assert E.curvature() == expected


def random_end_element(rng, E, nf, terms=3):
    ids = [a.id for a in E.module.atoms]
    buckets = {}
    for _ in range(120):
        key = (rng.choice(ids), tuple(rng.choice(ids) for _ in range(nf)))
        buckets.setdefault(E.atom_degree(key), set()).add(key)
    deg = rng.choice(sorted(buckets))
    keys = sorted(buckets[deg])[:terms]
    return Element({k: Fraction(rng.choice([1, 2, -1, 3, -2])) for k in keys})


def test_end_del_squared_is_curvature_bracket():
    E = EndOperad(zmod(), 3)
    theta = E.curvature()
    rng = random.Random(15)
    for _ in range(20):
        nf = rng.choice([1, 2, 3])
        f = random_end_element(rng, E, nf)
        assert E.del_(E.del_(f)) == E.bracket(theta, 1, f, nf)


def test_end_composition_axioms():
    E = EndOperad(zmod(), 3)
    ids = [a.id for a in E.module.atoms]
    rng = random.Random(16)
    for _ in range(60):
        nf = rng.choice([2, 3])
        ng = rng.choice([1, 2])
        nh = rng.choice([1, 2])
        f = Element({(rng.choice(ids), tuple(rng.choice(ids) for _ in range(nf))): ONE})
        g = Element({(rng.choice(ids), tuple(rng.choice(ids) for _ in range(ng))): ONE})
        h = Element({(rng.choice(ids), tuple(rng.choice(ids) for _ in range(nh))): ONE})
        # sequential
        i = rng.randrange(1, nf + 1)
        j = rng.randrange(1, ng + 1)
        assert (E.compose(E.compose(f, i, g), i - 1 + j, h)
                == E.compose(f, i, E.compose(g, j, h)))
        # parallel, slots i0 < k of f
        i0 = rng.randrange(1, nf)
        k = rng.randrange(i0 + 1, nf + 1)
        sign = (-ONE if (E.element_degree(g) * E.element_degree(h)) % 2
                else ONE)
        lhs = E.compose(E.compose(f, i0, g), k + ng - 1, h)
        rhs = sign * E.compose(E.compose(f, k, h), i0, g)
        assert lhs == rhs


def test_end_identity_is_a_unit():
    E = EndOperad(zmod(), 3)
    one = E.identity()
    rng = random.Random(17)
    for _ in range(10):
        nf = rng.choice([1, 2, 3])
        f = random_end_element(rng, E, nf)
        assert E.compose(one, 1, f) == f
        for i in range(1, nf + 1):
            assert E.compose(f, i, one) == f


# ---------------------------------------------------------------------------
# representations of the curved associative model
# ---------------------------------------------------------------------------

def two_dim_module():
    from curvedops.filtcomplex import BasisAtom, FGModule
    return FGModule([BasisAtom("e", 0, 0), BasisAtom("y", -2, 1)])


def product_assignment(flip_sign=False):
    c = -ONE if flip_sign else ONE
    mu_map = Element({
        ("e", ("e", "e")): ONE,
        ("y", ("e", "y")): ONE,
        ("y", ("y", "e")): c,
    })
    return {MU: mu_map, BULLET: Element({("y", ()): ONE})}


def test_representation_accepts_valid_assignment():
    O = cas()
    E = EndOperad(two_dim_module(), 3)
    report = check_representation(O, E, product_assignment())
    assert report.ok(), report


def test_representation_rejects_sign_flip():
    O = cas()
    E = EndOperad(two_dim_module(), 3)
    report = check_representation(O, E, product_assignment(flip_sign=True))
    assert not report.ok()
    kinds = {kind for kind, _ in report.failures}
    assert kinds & {"relation-not-satisfied", "curvature-mismatch"}


def test_representation_rejects_degree_and_weight_violations():
    O = cas()
    E = EndOperad(two_dim_module(), 3)
    bad = dict(product_assignment())
    bad[BULLET] = Element({("e", ()): ONE})
    report = check_representation(O, E, bad)
    kinds = {kind for kind, _ in report.failures}
    assert "degree-mismatch" in kinds and "weight-drop" in kinds


def test_representation_rejects_missing_generator():
    O = cas()
    E = EndOperad(two_dim_module(), 3)
    partial = {MU: product_assignment()[MU]}
    report = check_representation(O, E, partial)
    assert ("missing-generator", BULLET) in report.failures
