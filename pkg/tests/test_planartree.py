"""Tests for planar tree combinatorics: grafting, splits, reorderings."""

import itertools

from curvedops.planartree import (
    TRIVIAL, PlanarTree, corolla, graft, graft_all, inf_split_reorder,
    infinitesimal_splits, leaf_paths, node, render, replace_at, split_reorder,
    subtree_at, two_level_splits, vertex_paths,
)


def all_trees(alphabet, max_weight, max_arity=6):
    """Every decorated tree over ``alphabet`` = {label: arity} with at most
    ``max_weight`` vertices.  Brute-force enumeration used as a test oracle."""
    by_weight = {0: [TRIVIAL]}
    for w in range(1, max_weight + 1):
        found = []
        for label, ar in sorted(alphabet.items()):
            # distribute w - 1 vertices over ar child subtrees
            for split in compositions(w - 1, ar):
                for kids in itertools.product(
                        *[by_weight_upto(by_weight, wi) for wi in split]):
                    if sum(k.arity for k in kids) <= max_arity:
                        found.append(PlanarTree(label, kids))
        by_weight[w] = dedupe(found)
    out = []
    for w in range(max_weight + 1):
        out.extend(by_weight[w])
    return [t for t in out if t.arity <= max_arity]


def by_weight_upto(by_weight, w):
    return [t for t in by_weight.get(w, [])]


def compositions(total, parts):
    if parts == 0:
        return [()] if total == 0 else []
    out = []
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            out.append((first,) + rest)
    return out


def dedupe(trees):
    seen, out = set(), []
    for t in trees:
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


ALPHABET = {"a": 2, "b": 0}
POOL = all_trees(ALPHABET, 5)


def test_basic_shapes():
    assert TRIVIAL.arity == 1 and TRIVIAL.weight == 0
    c = corolla("a", 2)
    assert c.arity == 2 and c.weight == 1
    b = corolla("b", 0)
    assert b.arity == 0 and b.weight == 1
    comb = node("a", (c, TRIVIAL))
    assert comb.arity == 3 and comb.weight == 2
    assert comb.decorations() == ["a", "a"]


def test_render_matches_frozen_example():
    t = node("mu2", (node("mu2", (corolla("bullet", 0), TRIVIAL)), TRIVIAL))
    assert render(t) == "mu2(mu2(bullet, -), -)"
    assert render(TRIVIAL) == "-"


def test_graft_units():
    for t in POOL:
        for i in range(1, t.arity + 1):
            assert graft(t, i, TRIVIAL) == t
        assert graft(TRIVIAL, 1, t) == t


def test_graft_sequential_associativity():
    """(t o_i s) o_{i-1+j} r == t o_i (s o_j r)."""
    small = [t for t in POOL if t.weight <= 2]
    for t in small:
        for s in small:
            if s.weight + t.weight > 4:
                continue
            for r in [corolla("a", 2), corolla("b", 0), TRIVIAL]:
                for i in range(1, t.arity + 1):
                    for j in range(1, s.arity + 1):
                        lhs = graft(graft(t, i, s), i - 1 + j, r)
                        rhs = graft(t, i, graft(s, j, r))
                        assert lhs == rhs


def test_graft_parallel_commutativity():
    """For i < k: (t o_i s) o_{k + arity(s) - 1} r == (t o_k r) o_i s."""
    small = [t for t in POOL if t.weight <= 2 and t.arity >= 2]
    bits = [corolla("a", 2), corolla("b", 0), node("a", (corolla("b", 0), TRIVIAL))]
    for t in small:
        for s in bits:
            for r in bits:
                for i in range(1, t.arity + 1):
                    for k in range(i + 1, t.arity + 1):
                        lhs = graft(graft(t, i, s), k + s.arity - 1, r)
                        rhs = graft(graft(t, k, r), i, s)
                        assert lhs == rhs


# ---------------------------------------------------------------------------
# two-level splits
# ---------------------------------------------------------------------------

def parent_closed_subset_count(t):
    """Independent oracle: splits correspond to parent-closed vertex sets."""
    paths = vertex_paths(t)
    count = 0
    for bits in itertools.product([0, 1], repeat=len(paths)):
        chosen = {p for p, b in zip(paths, bits) if b}
        if all((not p) or p[:-1] in chosen or len(p) == 0 for p in chosen):
            # closed under taking the parent (root has no parent)
            if all(len(p) == 0 or p[:-1] in chosen for p in chosen):
                count += 1
    return count


def test_two_level_split_counts_on_frozen_examples():
    assert len(two_level_splits(TRIVIAL)) == 1
    assert len(two_level_splits(corolla("a", 2))) == 2
    comb = node("a", (corolla("a", 2), TRIVIAL))
    splits = two_level_splits(comb)
    assert len(splits) == 3
    shapes = sorted((u.weight, tuple(l.weight for l in ls)) for u, ls in splits)
    assert shapes == [(0, (2,)), (1, (1, 0)), (2, (0, 0, 0))]


def test_two_level_splits_reassemble_and_match_subset_oracle():
    for t in POOL:
        splits = two_level_splits(t)
        assert len(set((u, ls) for u, ls in splits)) == len(splits)
        for upper, lowers in splits:
            assert len(lowers) == upper.arity
            assert graft_all(upper, lowers) == t
        assert len(splits) == parent_closed_subset_count(t)


# ---------------------------------------------------------------------------
# infinitesimal splits
# ---------------------------------------------------------------------------

def test_infinitesimal_split_counts():
    assert infinitesimal_splits(TRIVIAL) == [(TRIVIAL, 1, TRIVIAL)]
    for n in range(0, 4):
        c = corolla("x" if n != 0 else "b", n)
        # one cut per vertex plus one per open slot
        assert len(infinitesimal_splits(c)) == n + 1
    comb = node("a", (corolla("a", 2), TRIVIAL))
    assert len(infinitesimal_splits(comb)) == 2 + 3  # vertices + slots


def test_infinitesimal_splits_reassemble_exhaustively():
    for t in POOL:
        triples = infinitesimal_splits(t)
        assert len(set(triples)) == len(triples)
        for upper, i, lower in triples:
            assert graft(upper, i, lower) == t
        assert len(triples) == t.weight + t.arity
        # non-degenerate cuts are in bijection with vertices
        vertex_cuts = [tr for tr in triples if not tr[2].is_trivial]
        if t.is_trivial:
            assert len(vertex_cuts) == 0
        else:
            assert len(vertex_cuts) == t.weight


# ---------------------------------------------------------------------------
# reorderings
# ---------------------------------------------------------------------------

def test_split_reorder_is_a_permutation_refining_the_cut():
    for t in POOL:
        if t.weight == 0:
            continue
        for upper, lowers in two_level_splits(t):
            perm = split_reorder(t, upper, lowers)
            assert sorted(perm) == list(range(1, t.weight + 1))
            # the upper part keeps its own preorder and comes first
            decs = t.decorations()
            target = [None] * t.weight
            for src, pos in enumerate(perm):
                target[pos - 1] = decs[src]
            expected = upper.decorations()
            for low in lowers:
                expected.extend(low.decorations())
            assert target == expected


def test_identity_style_splits_reorder_trivially():
    for t in POOL:
        if t.weight == 0:
            continue
        # root cut: everything lands in the single lower, order unchanged
        perm = split_reorder(t, TRIVIAL, (t,))
        assert perm == tuple(range(1, t.weight + 1))
        # full cut: everything stays upper
        perm = split_reorder(t, t, (TRIVIAL,) * t.arity)
        assert perm == tuple(range(1, t.weight + 1))


def test_inf_split_reorder_consistency():
    for t in POOL:
        if t.weight == 0:
            continue
        for upper, i, lower in infinitesimal_splits(t):
            perm = inf_split_reorder(t, upper, i, lower)
            assert sorted(perm) == list(range(1, t.weight + 1))
            decs = t.decorations()
            target = [None] * t.weight
            for src, pos in enumerate(perm):
                target[pos - 1] = decs[src]
            assert target == upper.decorations() + lower.decorations()


def test_paths_roundtrip():
    for t in POOL:
        for p in vertex_paths(t):
            sub = subtree_at(t, p)
            assert not sub.is_trivial
            assert replace_at(t, p, sub) == t
        for p in leaf_paths(t):
            assert subtree_at(t, p).is_trivial
