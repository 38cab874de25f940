"""Planar rooted trees with labeled vertices, grafting, and splittings.

A tree is either the trivial tree (a bare edge, no vertices) or a vertex with
an ordered, possibly empty, tuple of child subtrees.  Vertices may have arity
0, so "leaves" always means the open slots (trivial-tree positions), numbered
1..arity from left to right.

* arity  = number of open slots (the trivial tree has arity 1),
* weight = number of vertices (the trivial tree has weight 0).

A decorated tree stands for the ordered tensor of its vertex labels read in
root-first depth-first (preorder) order; every sign convention in the package
is derived from that reading via ``koszul_sign``.  This module is purely
combinatorial: it returns reorderings (permutations), never signs, so the
degree bookkeeping stays with the callers.
"""

from __future__ import annotations

import itertools

__all__ = [
    "PlanarTree", "TRIVIAL", "corolla", "node", "graft", "graft_all",
    "two_level_splits", "infinitesimal_splits", "render",
    "vertex_paths", "leaf_paths", "subtree_at", "replace_at",
    "split_reorder", "inf_split_reorder",
]


class PlanarTree:
    """Immutable planar rooted tree; label None marks the trivial tree."""

    __slots__ = ("label", "children", "arity", "weight", "_hash")

    def __init__(self, label, children=()):
        children = tuple(children)
        if label is None:
            assert not children, "the trivial tree has no children"
            arity, weight = 1, 0
        else:
            arity = sum(c.arity for c in children)
            weight = 1 + sum(c.weight for c in children)
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "children", children)
        object.__setattr__(self, "arity", arity)
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "_hash", hash((label, children)))

    def __setattr__(self, *a):
        raise AttributeError("PlanarTree is immutable")

    @property
    def is_trivial(self):
        return self.label is None

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, PlanarTree) and self._hash == other._hash
                and self.label == other.label and self.children == other.children)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return render(self)

    def decorations(self):
        """Vertex labels in preorder (root first, children left to right)."""
        if self.label is None:
            return []
        out = [self.label]
        for c in self.children:
            out.extend(c.decorations())
        return out


TRIVIAL = PlanarTree(None)


def node(label, children=()):
    return PlanarTree(label, children)


def corolla(label, arity):
    """Single vertex with ``arity`` open slots."""
    return PlanarTree(label, (TRIVIAL,) * arity)


def render(t):
    """Human-readable form, e.g. ``mu2(mu2(*, -), -)`` with ``-`` for slots."""
    if t.label is None:
        return "-"
    if not t.children:
        return str(t.label)
    return "%s(%s)" % (t.label, ", ".join(render(c) for c in t.children))


# ---------------------------------------------------------------------------
# grafting
# ---------------------------------------------------------------------------

def graft(t, i, s):
    """Replace the i-th open slot of t (1-indexed, left to right) by s."""
    assert 1 <= i <= t.arity, "slot %d out of range for arity %d" % (i, t.arity)
    if t.is_trivial:
        return s
    acc = 0
    for idx, c in enumerate(t.children):
        if acc + c.arity >= i:
            new_children = (t.children[:idx]
                            + (graft(c, i - acc, s),)
                            + t.children[idx + 1:])
            return PlanarTree(t.label, new_children)
        acc += c.arity
    raise AssertionError("unreachable: slot accounting is broken")


def graft_all(t, lowers):
    """Replace every open slot of t simultaneously, left to right."""
    lowers = tuple(lowers)
    assert len(lowers) == t.arity, "need one subtree per open slot"
    if t.is_trivial:
        return lowers[0]
    out_children = []
    pos = 0
    for c in t.children:
        out_children.append(graft_all(c, lowers[pos:pos + c.arity]))
        pos += c.arity
    return PlanarTree(t.label, tuple(out_children))


# ---------------------------------------------------------------------------
# paths: addresses of vertices and slots
# ---------------------------------------------------------------------------

def vertex_paths(t, prefix=()):
    """Addresses (tuples of child indices) of all vertices, in preorder."""
    if t.is_trivial:
        return []
    out = [prefix]
    for idx, c in enumerate(t.children):
        out.extend(vertex_paths(c, prefix + (idx,)))
    return out


def leaf_paths(t, prefix=()):
    """Addresses of the open slots, left to right."""
    if t.is_trivial:
        return [prefix]
    out = []
    for idx, c in enumerate(t.children):
        out.extend(leaf_paths(c, prefix + (idx,)))
    return out


def subtree_at(t, path):
    for idx in path:
        t = t.children[idx]
    return t


def replace_at(t, path, sub):
    if not path:
        return sub
    idx = path[0]
    new_children = (t.children[:idx]
                    + (replace_at(t.children[idx], path[1:], sub),)
                    + t.children[idx + 1:])
    return PlanarTree(t.label, new_children)


# ---------------------------------------------------------------------------
# splittings
# ---------------------------------------------------------------------------

def two_level_splits(t):
    """All ways to cut t into an upper part and one lower per upper slot.

    Returns a list of (upper, lowers) with graft_all(upper, lowers) == t,
    one entry per parent-closed set of vertices kept in the upper part (the
    empty set gives the root cut).  Lower entries may be trivial trees.  The
    trivial tree has exactly one split: (trivial; trivial).
    """
    if t.is_trivial:
        return [(TRIVIAL, (TRIVIAL,))]
    out = [(TRIVIAL, (t,))]
    for combo in itertools.product(*[two_level_splits(c) for c in t.children]):
        upper = PlanarTree(t.label, tuple(u for u, _ in combo))
        lowers = tuple(itertools.chain.from_iterable(ls for _, ls in combo))
        out.append((upper, lowers))
    return out


def infinitesimal_splits(t):
    """All triples (upper, i, lower) with graft(upper, i, lower) == t.

    One triple per vertex of t (cut the full subtree rooted there; the root
    vertex gives the degenerate cut with trivial upper) plus one per open slot
    (trivial lower).  For the trivial tree the two degenerate cuts coincide,
    leaving the single triple (trivial, 1, trivial).
    """
    if t.is_trivial:
        return [(TRIVIAL, 1, TRIVIAL)]
    out = []
    leaf_index = {p: i + 1 for i, p in enumerate(leaf_paths(t))}
    for path in vertex_paths(t):
        sub = subtree_at(t, path)
        upper = replace_at(t, path, TRIVIAL)
        pos = {p: i + 1 for i, p in enumerate(leaf_paths(upper))}[path]
        out.append((upper, pos, sub))
    for path, i in sorted(leaf_index.items(), key=lambda kv: kv[1]):
        out.append((t, i, TRIVIAL))
    return out


# ---------------------------------------------------------------------------
# reorderings induced by splittings (for Koszul signs)
# ---------------------------------------------------------------------------

def _target_positions(t, target_paths):
    source_paths = vertex_paths(t)
    index = {p: k + 1 for k, p in enumerate(target_paths)}
    assert len(index) == len(source_paths), "split does not partition vertices"
    return tuple(index[p] for p in source_paths)


def split_reorder(t, upper, lowers):
    """Permutation (1-based target positions, aligned with t's preorder)
    rearranging t's decorations into (upper's, then each lower's in turn)."""
    target = list(vertex_paths(upper))
    for base, low in zip(leaf_paths(upper), lowers):
        target.extend(base + p for p in vertex_paths(low))
    return _target_positions(t, target)


def inf_split_reorder(t, upper, pos, lower):
    """Permutation rearranging t's decorations into (upper's, then lower's)."""
    target = list(vertex_paths(upper))
    base = leaf_paths(upper)[pos - 1]
    target.extend(base + p for p in vertex_paths(lower))
    return _target_positions(t, target)
