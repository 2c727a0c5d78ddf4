"""Amalgamation constructions over a common codomain.

Given epimorphisms f: B -> A and g: C -> A, an amalgam is a graph D with
epimorphisms f0: D -> B and g0: D -> C closing the square, f∘f0 = g∘g0.
Everything here starts from the standard product: vertices are the pairs
(b, c) agreeing in A, edges are the coordinatewise edge-or-equal pairs.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

from . import config
from .factorize import (
    SpecialFailure,
    TAG_ADD,
    TAG_MERGE,
    TAG_SPLIT,
    _monotone_chain,
    decompose_simple_confluent,
    decompose_simple_star,
    is_simple_monotone,
    is_special,
    is_special_star,
)
from .graphs import (
    FiniteGraph,
    RootedTree,
    canonical_graph_code,
    components,
    edge_key,
    fresh_id,
    is_regular,
    is_tree,
    rooted_isomorphism,
)
from .morphisms import (
    Morphism,
    MorphismError,
    add_edge,
    compose,
    compose_chain,
    duplicate_cone,
    is_confluent,
    is_light,
    is_monotone,
    split_edge,
)


def pair_id(b: str, c: str) -> str:
    return f"({b},{c})"


@dataclass(frozen=True)
class StandardProduct:
    """Raw standard product with its two coordinate projections.

    The projections are plain homomorphisms; they are epimorphisms whenever
    the inputs are epimorphisms, but the product can be disconnected or
    cyclic, so no tree structure is implied.
    """

    product: FiniteGraph
    f0: Morphism  # product -> B
    g0: Morphism  # product -> C

    def pair(self, v: str) -> tuple:
        return (self.f0.map[v], self.g0.map[v])


@dataclass(frozen=True)
class AmalgamResult:
    """A closing square: f∘f0 = g∘g0 with validated epimorphism legs."""

    D: Union[FiniteGraph, RootedTree]
    f0: Morphism
    g0: Morphism
    certificate: tuple  # sorted ((vertex, common image), ...)

    @cached_property
    def domain_graph(self) -> FiniteGraph:
        return self.D.graph if isinstance(self.D, RootedTree) else self.D

    def to_json_obj(self) -> dict:
        return {
            "D": self.domain_graph.to_json_obj(),
            "f0": self.f0.to_json_obj(),
            "g0": self.g0.to_json_obj(),
            "certificate": {v: a for v, a in self.certificate},
        }


def seal(f: Morphism, g: Morphism, D, f0: Morphism, g0: Morphism) -> AmalgamResult:
    """Check the commuting square vertexwise and package the result."""
    dg = D.graph if isinstance(D, RootedTree) else D
    if f0.domain != dg or g0.domain != dg:
        raise MorphismError(["legs do not share the amalgam domain"])
    left = compose(f, f0)
    right = compose(g, g0)
    if left.map != right.map:
        raise MorphismError(["commutation failure: f∘f0 != g∘g0"])
    cert = tuple(sorted(left.map.items()))
    return AmalgamResult(D, f0, g0, cert)


def standard(f: Morphism, g: Morphism) -> StandardProduct:
    """The standard product of f: B -> A and g: C -> A.

    Vertices are pairs (b, c) with f(b) = g(c).  Two pairs span an edge when
    each coordinate pair is an edge or degenerate, and not both degenerate.
    The product is rooted at the root pair when both inputs are rooted.
    """
    if f.codomain != g.codomain:
        raise MorphismError(["codomain mismatch"])
    B, C = f.domain, g.domain
    pairs = [(b, c) for b in B.sorted_vertices for c in C.sorted_vertices
             if f.map[b] == g.map[c]]
    ids = {}
    for b, c in pairs:
        v = pair_id(b, c)
        if v in ids:
            raise MorphismError([f"ambiguous product vertex id {v!r}"])
        ids[(b, c)] = v
    edges = set()
    for i, (b, c) in enumerate(pairs):
        for b2, c2 in pairs[i + 1:]:
            b_ok = b == b2 or B.has_edge(b, b2)
            c_ok = c == c2 or C.has_edge(c, c2)
            if b_ok and c_ok and (b, c) != (b2, c2):
                edges.add(edge_key(ids[(b, c)], ids[(b2, c2)]))
    root = None
    if B.root is not None and C.root is not None:
        root = ids.get((B.root, C.root))
        if root is None:
            raise MorphismError(["root pair absent from product"])
    D = FiniteGraph.build(ids.values(), edges, root)
    f0 = Morphism.hom(D, B, {ids[(b, c)]: b for b, c in pairs})
    g0 = Morphism.hom(D, C, {ids[(b, c)]: c for b, c in pairs})
    return StandardProduct(D, f0, g0)


def component_amalgam(f: Morphism, g: Morphism) -> AmalgamResult:
    """Amalgam on one component of the standard product of two confluent
    epimorphisms of connected graphs; the component with the least canonical
    code is selected and both restricted projections stay confluent epis."""
    from .morphisms import _confluent_edge_check

    for name, m in (("f", f), ("g", g)):
        if not m.domain.is_connected() or not m.codomain.is_connected():
            raise MorphismError([f"{name}: disconnected input"])
        if not m.is_epi:
            raise MorphismError([f"{name}: not an epimorphism"])
        if not _confluent_edge_check(m):
            raise MorphismError([f"{name}: not confluent"])
    sp = standard(f, g)
    comps = components(sp.product, sp.product.vertices)
    coded = sorted(
        (canonical_graph_code(sp.product.induced(comp)), comp)
        for comp in comps)
    chosen = coded[0][1]
    keep_root = sp.product.root if sp.product.root in chosen else None
    D = sp.product.induced(chosen, root=keep_root)
    f0 = Morphism.epi(D, f.domain, {v: sp.f0.map[v] for v in chosen})
    g0 = Morphism.epi(D, g.domain, {v: sp.g0.map[v] for v in chosen})
    return seal(f, g, D, f0, g0)


def rooted_light(f: Morphism, g: Morphism) -> AmalgamResult:
    """Amalgam of a light confluent f: B -> A with a confluent g: C -> A over
    rooted trees: the whole standard product, rooted at the root pair.

    The product is always a tree here, the projection opposite the light leg
    is light confluent, and the other projection is confluent.  Both facts
    are re-checked on the output; a violation means an internal bug, not bad
    input, so it raises RuntimeError rather than MorphismError.
    """
    if not f.rooted or not g.rooted:
        raise MorphismError(["rooted tree inputs required"])
    if not f.is_epi or not g.is_epi:
        raise MorphismError(["validated epimorphisms required"])
    for label, graph in (("A", f.codomain), ("B", f.domain), ("C", g.domain)):
        if not is_tree(graph):
            raise MorphismError([f"{label}: not a tree"])
    if not (is_light(f) and is_confluent(f)):
        raise MorphismError(["f must be light confluent"])
    if not is_confluent(g):
        raise MorphismError(["g must be confluent"])
    sp = standard(f, g)
    if not sp.product.is_connected() or not is_tree(sp.product):
        raise RuntimeError("standard product of a light confluent pair "
                           "failed to be a tree")
    D = RootedTree(sp.product)
    f0 = Morphism.epi(D, f.domain, dict(sp.f0.pairs))
    g0 = Morphism.epi(D, g.domain, dict(sp.g0.pairs))
    if not is_confluent(f0):
        raise RuntimeError("projection onto the light-side domain lost "
                           "confluence")
    if not (is_light(g0) and is_confluent(g0)):
        raise RuntimeError("projection opposite the light leg is not light "
                           "confluent")
    return seal(f, g, D, f0, g0)


def _tree_path(graph: FiniteGraph, x: str, y: str) -> tuple:
    """Vertex sequence of the unique x-to-y path in an unrooted tree."""
    if x == y:
        return (x,)
    prev = {x: None}
    queue = deque([x])
    while queue and y not in prev:
        u = queue.popleft()
        for w in graph.neighbors(u):
            if w not in prev:
                prev[w] = u
                queue.append(w)
    if y not in prev:
        raise MorphismError([f"no path from {x!r} to {y!r}"])
    path = [y]
    while path[-1] != x:
        path.append(prev[path[-1]])
    return tuple(reversed(path))


def _cross_attachments(f: Morphism, a: str, b: str) -> tuple:
    """Endpoints of the unique domain edge joining the fibers of adjacent
    codomain vertices a and b, returned as (inside fiber a, inside fiber b).
    Monotone maps between trees admit exactly one such edge."""
    fa, fb = f.fiber(a), f.fiber(b)
    found = []
    for u, w in f.domain.edges:
        if u in fa and w in fb:
            found.append((u, w))
        elif w in fa and u in fb:
            found.append((w, u))
    if len(found) != 1:
        raise RuntimeError(
            f"expected one edge between the fibers of {a!r} and {b!r}, "
            f"found {len(found)}")
    return found[0]


def _anchor(f: Morphism, a: str) -> str:
    """Fiber vertex carrying the backbone copy of a in the order-3 amalgam.

    Order-3 vertices get the median of their three attachment vertices, the
    unique vertex on all three pairwise arcs.  Order-2 vertices get the
    least vertex on the arc between the two attachments; an off-arc choice
    would let part of another fiber hang off the arc and break the commuting
    square.  Order-1 vertices get the least end vertex of the domain inside
    the fiber, so nothing hangs off the anchor unaccounted for.
    """
    A, B = f.codomain, f.domain
    nbrs = sorted(A.neighbors(a))
    attach = [_cross_attachments(f, a, b)[0] for b in nbrs]
    if len(nbrs) >= 3:
        shared = (set(_tree_path(B, attach[0], attach[1]))
                  & set(_tree_path(B, attach[0], attach[2]))
                  & set(_tree_path(B, attach[1], attach[2])))
        if len(shared) != 1:
            raise RuntimeError(f"no unique median in the fiber of {a!r}")
        return shared.pop()
    if len(nbrs) == 2:
        return min(_tree_path(B, attach[0], attach[1]))
    if len(nbrs) == 1:
        ends = [v for v in sorted(f.fiber(a)) if B.order_of(v) == 1]
        if not ends:
            raise RuntimeError(f"no end vertex in the fiber of {a!r}")
        return ends[0]
    return min(f.fiber(a))


def _split_at_crossing(path: tuple, fiber: frozenset) -> tuple:
    """Interior pieces of an anchor-to-anchor path: the part after the first
    vertex while still in `fiber`, and the part from the crossing up to but
    not including the far anchor."""
    k = 1
    while k < len(path) and path[k] in fiber:
        k += 1
    return tuple(path[1:k]), tuple(path[k:-1])


def _branch_component(graph: FiniteGraph, cut: str, t: str) -> frozenset:
    for comp in components(graph, frozenset(graph.vertices) - {cut}):
        if t in comp:
            return comp
    raise RuntimeError(f"{t!r} not found off {cut!r}")


class _Assembly:
    """Mutable vertex/edge/image accumulator for the order-3 amalgam."""

    def __init__(self):
        self.images = {}   # D vertex id -> (image in B, image in C)
        self.edges = set()

    def put(self, vid: str, fb: str, gc: str, fresh: bool = False):
        old = self.images.get(vid)
        if old is not None and (fresh or old != (fb, gc)):
            raise RuntimeError(f"conflicting placement of {vid!r}")
        self.images[vid] = (fb, gc)

    def link(self, u: str, w: str):
        self.edges.add(edge_key(u, w))

    def hang(self, graph: FiniteGraph, comp: frozenset, tag: str,
             attach_from: str, attach_to: str, other_image: str,
             keep_side: str):
        """Add a whole off-arc component with its internal edges, joined by
        the edge (attach_from, tagged attach_to).  Vertices keep their own
        image on side `keep_side` and collapse to `other_image` opposite."""
        for w in comp:
            wid = f"{w}@{tag}"
            if keep_side == "B":
                self.put(wid, w, other_image, fresh=True)
            else:
                self.put(wid, other_image, w, fresh=True)
        self.link(attach_from, f"{attach_to}@{tag}")
        for u, w in graph.edges:
            if u in comp and w in comp:
                self.link(f"{u}@{tag}", f"{w}@{tag}")


def _hats_along(asm: _Assembly, mor: Morphism, path: tuple, tag: str,
                chain_other: dict):
    """Attach the off-arc branch at each interior path vertex.  The branch
    must sit inside the same fiber as its arc vertex; anything else means
    the anchors were chosen badly."""
    graph = mor.domain
    for i in range(1, len(path) - 1):
        v = path[i]
        extra = set(graph.neighbors(v)) - {path[i - 1], path[i + 1]}
        if not extra:
            continue
        if len(extra) > 1:
            raise RuntimeError(f"vertex {v!r} has order above 3")
        t = extra.pop()
        comp = _branch_component(graph, v, t)
        if mor.apply(comp) != {mor.map[v]}:
            raise RuntimeError(
                f"branch at {v!r} escapes the fiber of {mor.map[v]!r}")
        asm.hang(graph, comp, tag, f"{v}@{tag}", t, chain_other[v], tag)


def _require_order3_monotone(f: Morphism, g: Morphism):
    if f.codomain != g.codomain:
        raise MorphismError(["codomain mismatch"])
    problems = []
    for name, mor in (("f", f), ("g", g)):
        if not mor.is_epi:
            problems.append(f"{name}: not an epimorphism")
    for label, graph in (("A", f.codomain), ("B", f.domain), ("C", g.domain)):
        if not is_tree(graph):
            problems.append(f"{label}: not a tree")
            continue
        for v in graph.sorted_vertices:
            d = graph.order_of(v)
            if d > 3:
                problems.append(f"order violation: vertex {v!r} of {label} "
                                f"has order {d} > 3")
                break
    if problems:
        raise MorphismError(problems)
    for name, mor in (("f", f), ("g", g)):
        if not is_monotone(mor):
            raise MorphismError([f"non-monotone input {name}"])


def _wedge_at_least_ends(B: FiniteGraph, C: FiniteGraph):
    eB = min(v for v in B.vertices if B.order_of(v) == 1)
    eC = min(v for v in C.vertices if C.order_of(v) == 1)
    wedge = f"{eB}@B"
    bid = {v: f"{v}@B" for v in B.vertices}
    cid = {v: (wedge if v == eC else f"{v}@C") for v in C.vertices}
    edges = {edge_key(bid[a], bid[b]) for a, b in B.edges}
    edges |= {edge_key(cid[a], cid[b]) for a, b in C.edges}
    D = FiniteGraph.build(set(bid.values()) | set(cid.values()), edges, None)
    fmap = {bid[v]: v for v in B.vertices}
    fmap.update({cid[v]: eB for v in C.vertices if v != eC})
    gmap = {cid[v]: v for v in C.vertices}
    gmap.update({bid[v]: eC for v in B.vertices})
    f = Morphism.epi(D, B, fmap)
    g = Morphism.epi(D, C, gmap)
    return D, f, g


def _m3_point_codomain(f: Morphism, g: Morphism) -> AmalgamResult:
    B, C = f.domain, g.domain
    if len(B.vertices) == 1:
        x = next(iter(B.vertices))
        f0 = Morphism.epi(C, B, {v: x for v in C.vertices})
        return seal(f, g, C, f0, Morphism.identity(C))
    if len(C.vertices) == 1:
        y = next(iter(C.vertices))
        g0 = Morphism.epi(B, C, {v: y for v in B.vertices})
        return seal(f, g, B, Morphism.identity(B), g0)
    D, f0, g0 = _wedge_at_least_ends(B, C)
    return seal(f, g, D, f0, g0)


def m3(f: Morphism, g: Morphism) -> AmalgamResult:
    """Amalgam of monotone epimorphisms f: B -> A, g: C -> A between trees
    with every vertex order at most 3; both projections are monotone and the
    amalgam keeps the order bound.

    Each codomain vertex gets an anchor in each fiber; each codomain edge
    becomes a chain interleaving the two anchor-to-anchor arcs, B-side
    vertices first; off-arc branches ride along beside their arc vertex,
    and each order-2 codomain vertex whose anchors carry leftover branches
    gets one extra spreader vertex so the order bound survives.
    """
    _require_order3_monotone(f, g)
    A, B, C = f.codomain, f.domain, g.domain
    if len(A.vertices) == 1:
        return _m3_point_codomain(f, g)
    anchor_f = {a: _anchor(f, a) for a in A.sorted_vertices}
    anchor_g = {a: _anchor(g, a) for a in A.sorted_vertices}
    asm = _Assembly()
    for a in A.sorted_vertices:
        asm.put(f"{a}@A", anchor_f[a], anchor_g[a])
    for a, b in sorted(A.edges):
        pathB = _tree_path(B, anchor_f[a], anchor_f[b])
        pathC = _tree_path(C, anchor_g[a], anchor_g[b])
        aB, bB = _split_at_crossing(pathB, f.fiber(a))
        aC, bC = _split_at_crossing(pathC, g.fiber(a))
        f_of_aC = aB[-1] if aB else anchor_f[a]
        g_of_bB = bC[0] if bC else anchor_g[b]
        chain = ([(f"{a}@A", anchor_f[a], anchor_g[a])]
                 + [(f"{v}@B", v, anchor_g[a]) for v in aB]
                 + [(f"{v}@C", f_of_aC, v) for v in aC]
                 + [(f"{v}@B", v, g_of_bB) for v in bB]
                 + [(f"{v}@C", anchor_f[b], v) for v in bC]
                 + [(f"{b}@A", anchor_f[b], anchor_g[b])])
        for (u, _, _), (w, _, _) in zip(chain, chain[1:]):
            asm.link(u, w)
        for vid, fb, gc in chain:
            asm.put(vid, fb, gc)
        chain_g = {v: anchor_g[a] for v in aB}
        chain_g.update({v: g_of_bB for v in bB})
        _hats_along(asm, f, pathB, "B", chain_g)
        chain_f = {v: f_of_aC for v in aC}
        chain_f.update({v: anchor_f[b] for v in bC})
        _hats_along(asm, g, pathC, "C", chain_f)
    for a in A.sorted_vertices:
        if A.order_of(a) != 2:
            continue
        leftovers = []
        for mor, anchors, tag in ((f, anchor_f, "B"), (g, anchor_g, "C")):
            dom = mor.domain
            cut = anchors[a]
            for comp in components(dom, frozenset(dom.vertices) - {cut}):
                if mor.apply(comp) == {a}:
                    leftovers.append((mor, comp, cut, tag))
        if not leftovers:
            continue
        if len(leftovers) > 2:
            raise RuntimeError(f"too many leftover branches at {a!r}")
        prime = f"{a}@P"
        asm.put(prime, anchor_f[a], anchor_g[a], fresh=True)
        asm.link(f"{a}@A", prime)
        for mor, comp, cut, tag in leftovers:
            t = next(w for w in sorted(comp) if mor.domain.has_edge(cut, w))
            other = anchor_g[a] if tag == "B" else anchor_f[a]
            asm.hang(mor.domain, comp, tag, prime, t, other, tag)
    D = FiniteGraph.build(asm.images.keys(), asm.edges, None)
    if not is_tree(D):
        raise RuntimeError("order-3 amalgam failed to be a tree")
    high = [v for v in D.sorted_vertices if D.order_of(v) > 3]
    if high:
        raise RuntimeError(f"order-3 amalgam exceeds order 3 at {high[:3]}")
    f0 = Morphism.epi(D, B, {v: fb for v, (fb, _) in asm.images.items()})
    g0 = Morphism.epi(D, C, {v: gc for v, (_, gc) in asm.images.items()})
    if not is_monotone(f0) or not is_monotone(g0):
        raise RuntimeError("order-3 amalgam projections lost monotonicity")
    return seal(f, g, D, f0, g0)


def jpp_m3(B: FiniteGraph, C: FiniteGraph) -> tuple:
    """Joint projection for unrooted trees: the wedge of B and C at their
    lexicographically least end vertices.

    Returns (D, f, g) where f is the identity on the B half and collapses
    the C half to the chosen end of B, and symmetrically for g.  Both maps
    are monotone epimorphisms.
    """
    for label, graph in (("B", B), ("C", C)):
        graph = graph.graph if isinstance(graph, RootedTree) else graph
        if not is_tree(graph) or len(graph.vertices) < 2:
            raise MorphismError(
                [f"{label}: need a tree with at least 2 vertices"])
    B = B.graph if isinstance(B, RootedTree) else B
    C = C.graph if isinstance(C, RootedTree) else C
    return _wedge_at_least_ends(B, C)


def _regularize(tree: RootedTree, height: int, sord: int) -> tuple:
    """Factor chain turning `tree` into the regular tree of the given height
    and successor order: first lengthen every short branch by edge splits,
    then duplicate least child cones at deficient vertices, deepest first.

    Returns (regular tree, factors outermost first).
    """
    chain = []
    cur = tree
    while True:
        short = [e for e in cur.ends if cur.ht(e) < height]
        if not short:
            break
        e = min(short)
        cur, step = split_edge(cur, (cur.parent(e), e), e)
        chain.append(step)
    while True:
        deficient = [v for v in cur.sorted_vertices
                     if cur.ht(v) < height and cur.sord(v) < sord]
        if not deficient:
            break
        v = sorted(deficient, key=lambda u: (-cur.ht(u), u))[0]
        cur, step = duplicate_cone(cur, v, min(cur.children(v)))
        chain.append(step)
    if not is_regular(cur) or cur.height != height or cur.tree_sord != sord:
        raise RuntimeError("regularization missed its target shape")
    return cur, chain


def jpp_rooted(A: RootedTree, B: RootedTree) -> tuple:
    """Joint projection for rooted trees: a common regular cover.

    Returns (S, f, g) with S regular of the dominating height and successor
    order, and f: S -> A, g: S -> B compositions of edge splits, cone
    duplications, and one alignment isomorphism; both legs are confluent and
    decompose into elementary factors.
    """
    for label, t in (("A", A), ("B", B)):
        if len(t.vertices) < 2:
            raise MorphismError([f"{label}: need at least 2 vertices"])
    height = max(A.height, B.height)
    sord = max(A.tree_sord, B.tree_sord)
    target = sum(sord ** i for i in range(height + 1))
    if target > config.materialize_cap():
        raise config.CapExceeded(
            f"regular tree of height {height} and successor order {sord} "
            f"needs {target} vertices")
    S, chain_a = _regularize(A, height, sord)
    regular_b, chain_b = _regularize(B, height, sord)
    f = compose_chain(chain_a) if chain_a else Morphism.identity(S)
    sigma = rooted_isomorphism(S, regular_b)
    if sigma is None:
        raise RuntimeError("regularized trees fail to align")
    align = Morphism.epi(S, regular_b, sigma)
    g = compose_chain(chain_b + [align]) if chain_b else align
    return S, f, g


# -- pairwise amalgamation of decomposable epimorphisms --------------------


@dataclass(frozen=True)
class _Item:
    """One link of an amalgamation ladder.

    kind names what the link is: an elementary move ("split", "add"), a
    whole stage ("light", "mono"), or the residual relabeling ("iso").
    Elementary moves carry their data along: new is the domain vertex
    the move introduces, edge the refined codomain edge as a (parent,
    child) pair, img the codomain image of new (for an add, the vertex
    the leaf hangs from).  A link need not keep identity labels; only a
    bijection away from new is assumed.
    """

    kind: str
    mor: Morphism
    new: Optional[str] = None
    edge: Optional[tuple] = None
    img: Optional[str] = None


def _section(item: _Item) -> dict:
    """Codomain-to-domain inverse of a link away from its new vertex."""
    return {w: v for v, w in item.mor.pairs if v != item.new}


def _move_items(dec) -> list:
    """Ladder links of a split/add decomposition, innermost iso last."""
    items = []
    for tag, mor in zip(dec.tags, dec.factors):
        new = next(v for v in mor.domain.sorted_vertices
                   if v not in mor.codomain.vertices)
        if tag == TAG_SPLIT:
            t = mor.domain_tree
            m = mor.map
            items.append(_Item("split", mor, new=new,
                               edge=(m[t.parent(new)],
                                     m[t.children(new)[0]]),
                               img=m[new]))
        elif tag == TAG_ADD:
            items.append(_Item("add", mor, new=new, img=mor.map[new]))
        else:
            raise RuntimeError(f"unexpected tag {tag!r} in a split chain")
    items.append(_Item("iso", dec.isomorphism))
    return items


def _stage_items(dec) -> list:
    """Group a factor chain into alternating light confluent and
    simple-monotone stages, innermost iso last; consecutive factors of
    one class fuse into a single stage morphism."""
    runs = []
    for tag, mor in zip(dec.tags, dec.factors):
        kind = "light" if tag == TAG_MERGE else "mono"
        if runs and runs[-1][0] == kind:
            runs[-1][1].append(mor)
        else:
            runs.append((kind, [mor]))
    items = [_Item(kind, compose_chain(mors)) for kind, mors in runs]
    items.append(_Item("iso", dec.isomorphism))
    return items


def _ladder_row(u: _Item, gs: list, cell) -> tuple:
    """Transport the link u across the chain gs one square at a time;
    returns the rebuilt chain over u's domain and the carried link."""
    rebuilt = []
    cur = u
    for v in gs:
        a, b = cell(cur, v)
        rebuilt.append(a)
        cur = b
    return rebuilt, cur


def _grid(fs: list, gs: list, cell) -> tuple:
    """Fill the amalgamation grid row by row.

    fs and gs are outermost-first link chains with a common codomain.
    Each row transports one f-link across the current g-chain; the final
    g-chain composes to the leg onto the f-side domain, the carried
    f-links compose to the leg onto the g-side domain."""
    cur = gs
    rights = []
    for u in fs:
        cur, r = _ladder_row(u, cur, cell)
        rights.append(r)
    return cur, rights


def _cell_with_iso(u: _Item, v: _Item):
    """The degenerate squares: one side an isomorphism, the other link
    pulled back through it with an identity second leg; None when
    neither side is an isomorphism."""
    if u.kind == "iso":
        sec = _section(u)
        amap = {x: sec[w] for x, w in v.mor.pairs}
        a = _Item(v.kind, Morphism.epi(v.mor.domain, u.mor.domain, amap),
                  new=v.new,
                  edge=(None if v.edge is None
                        else (sec[v.edge[0]], sec[v.edge[1]])),
                  img=None if v.img is None else sec[v.img])
        return a, _Item("iso", Morphism.identity(v.mor.domain))
    if v.kind == "iso":
        sec = _section(v)
        bmap = {x: sec[w] for x, w in u.mor.pairs}
        b = _Item(u.kind, Morphism.epi(u.mor.domain, v.mor.domain, bmap),
                  new=u.new,
                  edge=(None if u.edge is None
                        else (sec[u.edge[0]], sec[u.edge[1]])),
                  img=None if u.img is None else sec[u.img])
        return _Item("iso", Morphism.identity(u.mor.domain)), b
    return None


def _elem_cell(u: _Item, v: _Item) -> tuple:
    """One square over two elementary moves with a common codomain.

    The amalgam applies both moves together: distinct moves land on
    disjoint spots of u's domain, while two splits of one codomain edge
    stack, ordered so that each transported copy still collapses onto a
    neighbor sharing its image.  Legs are the transported copies, so a
    split crosses as a split and an add as an add.
    """
    got = _cell_with_iso(u, v)
    if got is not None:
        return got
    M = u.mor.domain_tree
    sec_u = _section(u)
    sec_v = _section(v)
    y = fresh_id(v.new, M.vertices)
    umap = u.mor.map
    bmap = {y: v.new}
    for w in M.vertices:
        bmap[w] = sec_v[umap[w]]
    b_edge = None
    if u.kind == "split":
        b_edge = (sec_v[u.edge[0]], sec_v[u.edge[1]])
    if u.kind == "split" and v.kind == "split" and u.edge == v.edge:
        p, c = u.edge
        if u.img == c and v.img == p:
            ins_edge = (sec_u[p], u.new)
            a_img = sec_u[p]
            bmap[u.new] = sec_v[c]
            b_edge = (v.new, sec_v[c])
        else:
            ins_edge = (u.new, sec_u[c])
            a_img = sec_u[c] if (u.img == p and v.img == c) else u.new
            bmap[u.new] = sec_v[p] if u.img == p else v.new
            b_edge = (sec_v[p], v.new)
        D, a_mor = split_edge(M, ins_edge, a_img, new_id=y)
        a = _Item("split", a_mor, new=y, edge=ins_edge, img=a_img)
    elif v.kind == "split":
        e_m = (sec_u[v.edge[0]], sec_u[v.edge[1]])
        D, a_mor = split_edge(M, e_m, sec_u[v.img], new_id=y)
        a = _Item("split", a_mor, new=y, edge=e_m, img=sec_u[v.img])
    else:
        D, a_mor = add_edge(M, sec_u[v.img], new_id=y)
        a = _Item("add", a_mor, new=y, img=sec_u[v.img])
    b = _Item(u.kind, Morphism.epi(D, v.mor.domain, bmap),
              new=u.new, edge=b_edge, img=bmap[u.new])
    return a, b


def _light_cross(X: _Item, Y: _Item) -> tuple:
    """Square of a light confluent link X against one elementary move Y
    over their common codomain.

    The move is pulled back through X once per preimage: a split of
    ⟨p, c⟩ splits every preimage edge keeping the chosen side, and an
    add grows one leaf per preimage vertex of the attach point.  The
    first leg is that move composition, the second the rebuilt light
    link.  The standard product would glue pulled-back copies whenever
    a parent-side split meets sibling preimage edges, so the cover is
    built explicitly instead of through the product.
    """
    got = _cell_with_iso(X, Y)
    if got is not None:
        return got
    tree = X.mor.domain_tree
    xmap = X.mor.map
    sec = _section(Y)
    taken = set(tree.vertices)
    cur = tree
    mors = []
    news = []
    if Y.kind == "split":
        p, c = Y.edge
        for cj in tree.sorted_vertices:
            pj = tree.parent(cj)
            if pj is None or xmap[cj] != c or xmap[pj] != p:
                continue
            z = fresh_id(Y.new, taken)
            taken.add(z)
            cur, m = split_edge(cur, (pj, cj), pj if Y.img == p else cj,
                                new_id=z)
            mors.append(m)
            news.append(z)
    else:
        for w in tree.sorted_vertices:
            if xmap[w] != Y.img:
                continue
            z = fresh_id(Y.new, taken)
            taken.add(z)
            cur, m = add_edge(cur, w, new_id=z)
            mors.append(m)
            news.append(z)
    if not mors:
        raise RuntimeError("light link misses every preimage of a move")
    a = _Item("mono", compose_chain(mors))
    bmap = {z: Y.new for z in news}
    for v in tree.vertices:
        bmap[v] = sec[xmap[v]]
    b = _Item("light", Morphism.epi(cur, Y.mor.domain, bmap))
    return a, b


def _stage_ok(item: _Item, star: bool) -> bool:
    if item.kind == "light":
        return is_light(item.mor) and is_confluent(item.mor)
    if item.kind == "mono":
        if not star:
            return is_simple_monotone(item.mor)
        try:
            _monotone_chain(item.mor, star=True)
        except MorphismError:
            return False
        return True
    return item.mor.is_isomorphism()


def _stage_cell(star: bool):
    """Square filler for whole stages: a light side turns the cell into
    a standard product, two monotone sides run the elementary ladder on
    their split/add chains, and each leg is re-checked to carry the
    class of the opposite side."""
    def cell(u: _Item, v: _Item) -> tuple:
        got = _cell_with_iso(u, v)
        if got is not None:
            return got
        if u.kind == "light" and v.kind == "light":
            sp = standard(u.mor, v.mor)
            if not sp.product.is_connected() or not is_tree(sp.product):
                raise RuntimeError("standard product of a grid cell with "
                                   "two light sides is not a tree")
            D = RootedTree(sp.product)
            a = _Item(v.kind, Morphism.epi(D, u.mor.domain,
                                           dict(sp.f0.pairs)))
            b = _Item(u.kind, Morphism.epi(D, v.mor.domain,
                                           dict(sp.g0.pairs)))
        elif v.kind == "light":
            us = _move_items(_monotone_chain(u.mor, star))
            moved, carried = _ladder_row(v, us, _light_cross)
            a = _Item("light", carried.mor)
            b = _Item("mono", compose_chain([i.mor for i in moved]))
        elif u.kind == "light":
            vs = _move_items(_monotone_chain(v.mor, star))
            moved, carried = _ladder_row(u, vs, _light_cross)
            a = _Item("mono", compose_chain([i.mor for i in moved]))
            b = _Item("light", carried.mor)
        else:
            us = _move_items(_monotone_chain(u.mor, star))
            vs = _move_items(_monotone_chain(v.mor, star))
            rebuilt, rights = _grid(us, vs, _elem_cell)
            a = _Item("mono", compose_chain([i.mor for i in rebuilt]))
            b = _Item("mono", compose_chain([i.mor for i in rights]))
        for item in (a, b):
            if not _stage_ok(item, star):
                raise RuntimeError(
                    f"grid cell leg lost its {item.kind} class")
        return a, b
    return cell


def simple_monotone_pair(f: Morphism, g: Morphism,
                         star: bool = False) -> AmalgamResult:
    """Amalgam of two split compositions over a common codomain, built
    move by move.

    Both inputs are unrolled into their split chains (with star, splits
    and leaf additions) and the square is filled one elementary cell at
    a time: splits of distinct edges are applied simultaneously and a
    shared edge is split twice.  Both legs are again compositions of the
    same kinds of moves.
    """
    if f.codomain != g.codomain:
        raise MorphismError(["codomain mismatch"])
    label = "simple*-monotone" if star else "simple-monotone"
    chains = []
    for name, m in (("f", f), ("g", g)):
        try:
            chains.append(_move_items(_monotone_chain(m, star)))
        except MorphismError as exc:
            raise MorphismError([f"{name}: not {label}"]) from exc
    us, vs = chains
    rebuilt, rights = _grid(us, vs, _elem_cell)
    f0 = compose_chain([i.mor for i in rebuilt])
    g0 = compose_chain([i.mor for i in rights])
    D = RootedTree(f0.domain)
    for leg in (f0, g0):
        try:
            _monotone_chain(leg, star)
        except MorphismError as exc:
            raise RuntimeError(
                f"amalgam leg lost the {label} class") from exc
    return seal(f, g, D, f0, g0)


def mono_light_pair(f: Morphism, g: Morphism,
                    star: bool = False) -> AmalgamResult:
    """Amalgam of a split composition f: B -> A with a light confluent
    g: C -> A, built as the explicit pulled-back cover.

    Each split factor of f crosses g as one split per g-preimage of the
    split edge (with star, each leaf addition as one leaf per preimage
    of the attach vertex).  The leg onto B is light confluent; the leg
    onto C is again a split(/add) composition.  The cover equals the
    standard product except when a parent-side split meets sibling
    preimage edges; the product then glues their inserted vertices and
    its C-side projection falls out of the class, so the product is not
    used.
    """
    if f.codomain != g.codomain:
        raise MorphismError(["codomain mismatch"])
    label = "simple*-monotone" if star else "simple-monotone"
    try:
        us = _move_items(_monotone_chain(f, star))
    except MorphismError as exc:
        raise MorphismError([f"f must be {label}"]) from exc
    if not (g.rooted and is_tree(g.domain) and g.is_epi):
        raise MorphismError(["g must be a rooted tree epimorphism"])
    if not (is_light(g) and is_confluent(g)):
        raise MorphismError(["g must be light confluent"])
    moved, carried = _ladder_row(_Item("light", g), us, _light_cross)
    f0 = carried.mor
    g0 = compose_chain([i.mor for i in moved])
    D = RootedTree(f0.domain)
    if not (is_light(f0) and is_confluent(f0)):
        raise RuntimeError("leg onto the monotone-side domain is not "
                           "light confluent")
    try:
        _monotone_chain(g0, star)
    except MorphismError as exc:
        raise RuntimeError("leg onto the light-side domain is not "
                           f"{label}") from exc
    return seal(f, g, D, f0, g0)


def simple_confluent_pair(f: Morphism, g: Morphism,
                          star: bool = False) -> AmalgamResult:
    """Amalgam of two decomposable confluent epimorphisms of rooted
    trees by filling the stage grid.

    Each input is decomposed into its factor chain and regrouped into
    alternating light confluent and simple(-star)-monotone stages.  The
    square is then filled cell by cell: a cell with a light side is a
    standard product, a cell with two monotone sides runs the elementary
    ladder, and the residual isomorphisms transport through untouched.
    Every leg inherits the stage classes of the opposite input, so both
    legs are again decomposable; the sealed certificate checks the
    commutation exactly.
    """
    if f.codomain != g.codomain:
        raise MorphismError(["codomain mismatch"])
    decomposer = decompose_simple_star if star else decompose_simple_confluent
    chains = []
    for name, m in (("f", f), ("g", g)):
        dec = decomposer(m)
        if isinstance(dec, SpecialFailure):
            raise MorphismError(
                [f"{name}: not decomposable: {dec.detail}"])
        chains.append(_stage_items(dec))
    fs, gs = chains
    rebuilt, rights = _grid(fs, gs, _stage_cell(star))
    f0 = compose_chain([i.mor for i in rebuilt])
    g0 = compose_chain([i.mor for i in rights])
    D = RootedTree(f0.domain)
    good = is_special_star if star else is_special
    if not (good(f0) and good(g0)):
        raise RuntimeError("grid legs lost decomposability")
    return seal(f, g, D, f0, g0)
