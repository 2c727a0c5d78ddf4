"""Independent brute-force ground truth.

Exhaustive enumeration of trees, connected graphs, and epimorphisms, bounded
amalgam search through product graphs, breadth-first factor-chain search,
hereditary unicoherence by definition, and pinned extension search.  Nothing
here reuses the constructive algorithms it is meant to check; only the basic
graph types, validation, and the product vertex set are shared.

Candidate enumeration is embarrassingly parallel across candidates; this
implementation runs sequentially but keeps a deterministic, order-stable
output either way.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Union

import numpy as np

from . import config
from . import _enumkernel as kernel
from .amalgamate import AmalgamResult, seal
from .graphs import (
    FiniteGraph,
    RootedTree,
    canonical_code,
    canonical_code_labeled,
    canonical_graph_code,
    components,
    edge_key,
    is_tree,
    rooted_isomorphism,
)
from .morphisms import (
    Morphism,
    MorphismError,
    _confluent_edge_check,
    add_edge,
    compose,
    is_end_vertex_preserving,
    is_light,
    is_monotone,
    split_edge,
)

CONSTRAINT_NAMES = frozenset({
    "monotone", "light", "confluent", "end_vertex_preserving",
    "order_preserving",
})


@dataclass(frozen=True)
class EnumerationSpec:
    """What to enumerate or search for, and under which class constraints."""

    max_vertices: int
    rooted: bool = False
    constraints: frozenset = field(default_factory=frozenset)
    category: str = "auto"  # "tree" | "graph" | "auto"

    def __post_init__(self):
        bad = set(self.constraints) - CONSTRAINT_NAMES
        if bad:
            raise ValueError(f"unknown constraints: {sorted(bad)}")
        if self.category not in ("tree", "graph", "auto"):
            raise ValueError(f"unknown category {self.category!r}")
        object.__setattr__(self, "constraints", frozenset(self.constraints))


def _graph_of(x) -> FiniteGraph:
    return x.graph if isinstance(x, RootedTree) else x


def passes_constraints(m: Morphism, constraints: Iterable[str]) -> bool:
    for c in sorted(set(constraints)):
        if c == "monotone" and not is_monotone(m):
            return False
        if c == "light" and not is_light(m):
            return False
        if c == "confluent" and not _confluent_edge_check(m):
            return False
        if c == "end_vertex_preserving" and not is_end_vertex_preserving(m):
            return False
        # order_preserving holds structurally for validated rooted morphisms
    return True


# -- tree and graph enumeration ------------------------------------------


def _partitions(total: int, maxpart: int):
    if total == 0:
        yield ()
        return
    for p in range(min(total, maxpart), 0, -1):
        for rest in _partitions(total - p, p):
            yield (p,) + rest


@lru_cache(maxsize=None)
def _rooted_shape_codes(n: int) -> tuple:
    """Sorted canonical codes of all rooted trees with exactly n vertices."""
    if n == 1:
        return ("(0:)",)
    out = set()
    for part in _partitions(n - 1, n - 1):
        sizes = sorted(set(part))
        mult = {s: part.count(s) for s in sizes}
        pools = [
            itertools.combinations_with_replacement(_rooted_shape_codes(s),
                                                    mult[s])
            for s in sizes
        ]
        for combo in itertools.product(*pools):
            kids = sorted(code for grp in combo for code in grp)
            out.add("(0:" + "".join(kids) + ")")
    return tuple(sorted(out))


def _split_sibling_codes(body: str) -> list:
    """Split a concatenation of balanced ( ) codes into the top-level items."""
    items, depth, start = [], 0, 0
    for i, ch in enumerate(body):
        if ch == "(":
            if depth == 0:
                start = i
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                items.append(body[start:i + 1])
    return items


def tree_from_code(code: str, prefix: str = "n") -> RootedTree:
    """Materialize a canonical rooted tree code with child-path vertex ids."""
    vertices = []
    edges = []

    def build(c: str, name: str):
        vertices.append(name)
        body = c[c.index(":") + 1:-1]
        for i, sub in enumerate(_split_sibling_codes(body)):
            child = f"{name}.{i}"
            edges.append((name, child))
            build(sub, child)

    build(code, prefix)
    return RootedTree.build(vertices, edges, prefix)


def enumerate_rooted_trees(max_v: int, cap: Optional[int] = None) -> list:
    """One representative per rooted isomorphism class, sizes 1..max_v,
    ordered by size then canonical code."""
    config.require_cap(max_v, cap or config.ORACLE_TREE_CAP,
                       "rooted tree enumeration")
    out = []
    for n in range(1, max_v + 1):
        for code in _rooted_shape_codes(n):
            out.append(tree_from_code(code))
    return out


def enumerate_trees(max_v: int, cap: Optional[int] = None) -> list:
    """Unrooted trees up to isomorphism, as FiniteGraphs without root."""
    config.require_cap(max_v, cap or config.ORACLE_TREE_CAP,
                       "tree enumeration")
    seen = {}
    for t in enumerate_rooted_trees(max_v, cap=max(max_v, cap or 0) or None):
        bare = FiniteGraph(t.vertices, t.edges, None)
        key = (len(bare.vertices), canonical_graph_code(bare))
        if key not in seen:
            seen[key] = bare
    return [seen[k] for k in sorted(seen)]


def enumerate_connected_graphs(max_v: int, cap: Optional[int] = None) -> list:
    """Connected graphs up to isomorphism, sizes 1..max_v."""
    config.require_cap(max_v, cap or config.ORACLE_GRAPH_CAP,
                       "connected graph enumeration")
    out = []
    for n in range(1, max_v + 1):
        vs = [f"v{i}" for i in range(n)]
        all_edges = [(vs[i], vs[j]) for i in range(n) for j in range(i + 1, n)]
        seen = {}
        for k in range(len(all_edges) + 1):
            for chosen in itertools.combinations(all_edges, k):
                g = FiniteGraph.build(vs, chosen)
                if not g.is_connected():
                    continue
                code = canonical_graph_code(g)
                if code not in seen:
                    seen[code] = g
        out.extend(seen[c] for c in sorted(seen))
    return out


# -- kernel problem construction -----------------------------------------


def _visit_order(graph: FiniteGraph) -> list:
    """BFS order; starts at the root when present, else the least vertex."""
    order = []
    seen = set()
    starts = [graph.root] if graph.root is not None else []
    starts += [v for v in graph.sorted_vertices]
    for s in starts:
        if s in seen:
            continue
        queue = deque([s])
        seen.add(s)
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in graph.neighbors(v):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    return order


def _prev_arrays(graph: FiniteGraph, order: list,
                 tree: Optional[RootedTree]) -> tuple:
    idx = {v: i for i, v in enumerate(order)}
    prev_off = [0]
    prev_nbr = []
    prev_dir = []
    for v in order:
        for w in graph.neighbors(v):
            if idx[w] < idx[v]:
                prev_nbr.append(idx[w])
                if tree is None:
                    prev_dir.append(0)
                elif tree.parent(v) == w:
                    prev_dir.append(1)
                elif tree.parent(w) == v:
                    prev_dir.append(2)
                else:
                    prev_dir.append(0)
        prev_off.append(len(prev_nbr))
    return (np.asarray(prev_off, np.int64), np.asarray(prev_nbr, np.int64),
            np.asarray(prev_dir, np.int64))


def _identity_layer(cod: FiniteGraph, cod_order: list) -> kernel.SurjectivityLayer:
    nc = len(cod_order)
    idx = {v: i for i, v in enumerate(cod_order)}
    cls = np.arange(nc, dtype=np.int64)
    emat = np.full((nc, nc), -1, np.int64)
    edges = sorted(cod.edges)
    for ei, (a, b) in enumerate(edges):
        emat[idx[a], idx[b]] = ei
        emat[idx[b], idx[a]] = ei
    return kernel.SurjectivityLayer(nc, cls, len(edges), emat)


def _adj_or_equal(cod: FiniteGraph, cod_order: list) -> np.ndarray:
    nc = len(cod_order)
    idx = {v: i for i, v in enumerate(cod_order)}
    adjQ = np.zeros((nc, nc), np.uint8)
    for i in range(nc):
        adjQ[i, i] = 1
    for a, b in cod.edges:
        adjQ[idx[a], idx[b]] = 1
        adjQ[idx[b], idx[a]] = 1
    return adjQ


def _parent_or_equal(cod_tree: RootedTree, cod_order: list) -> np.ndarray:
    nc = len(cod_order)
    idx = {v: i for i, v in enumerate(cod_order)}
    ordQ = np.zeros((nc, nc), np.uint8)
    for v in cod_order:
        ordQ[idx[v], idx[v]] = 1
        p = cod_tree.parent(v)
        if p is not None:
            ordQ[idx[p], idx[v]] = 1
    return ordQ


def enumerate_epimorphisms(S, T, espec: EnumerationSpec) -> list:
    """All epimorphisms S -> T satisfying the spec constraints, sorted."""
    Sg, Tg = _graph_of(S), _graph_of(T)
    config.require_cap(len(Sg.vertices), config.ORACLE_EPI_DOMAIN_CAP,
                       "epimorphism domain")
    config.require_cap(len(Tg.vertices), config.ORACLE_EPI_CODOMAIN_CAP,
                       "epimorphism codomain")
    rooted = espec.rooted
    if rooted and (Sg.root is None or Tg.root is None):
        raise MorphismError(["rooted enumeration needs rooted inputs"])
    if len(Tg.vertices) > len(Sg.vertices) or not Tg.vertices:
        return []
    dom_order = _visit_order(Sg)
    cod_order = list(Tg.sorted_vertices)
    cod_idx = {v: i for i, v in enumerate(cod_order)}
    dom_tree = RootedTree(Sg) if rooted and is_tree(Sg) else None
    cod_tree = RootedTree(Tg) if rooted and is_tree(Tg) else None
    use_order = dom_tree is not None and cod_tree is not None
    prev = _prev_arrays(Sg, dom_order, dom_tree if use_order else None)
    adjQ = _adj_or_equal(Tg, cod_order)
    ordQ = (_parent_or_equal(cod_tree, cod_order) if use_order
            else np.zeros_like(adjQ))
    nd, nc = len(dom_order), len(cod_order)
    cand = np.ones((nd, nc), np.uint8)
    if rooted:
        cand[0, :] = 0
        cand[0, cod_idx[Tg.root]] = 1
    prob = kernel.Problem(nd, nc, prev[0], prev[1], prev[2], adjQ,
                          use_order, ordQ, cand,
                          _identity_layer(Tg, cod_order), None)
    rows = kernel.run(prob)
    out = []
    for row in rows:
        mapping = {dom_order[i]: cod_order[int(row[i])] for i in range(nd)}
        m = Morphism.epi(Sg, Tg, mapping)
        if passes_constraints(m, espec.constraints):
            out.append(m)
    out.sort(key=lambda m: m.pairs)
    return out


# -- bounded amalgam search ----------------------------------------------


def _product_pairs(f: Morphism, g: Morphism) -> list:
    return [(b, c)
            for b in f.domain.sorted_vertices
            for c in g.domain.sorted_vertices
            if f.map[b] == g.map[c]]


def search_amalgam(f: Morphism, g: Morphism, espec: EnumerationSpec,
                   max_v: Optional[int] = None) -> Optional[AmalgamResult]:
    """Exhaustive bounded search for an amalgam D with epimorphism legs in
    the requested class; None certifies nonexistence up to max_v vertices.

    All class constraints run inside the kernel: lightness restricts the
    image compatibility matrix, end-vertex preservation restricts the
    candidate mask, monotonicity and confluence are full-assignment checks.
    Any hit is re-verified with the Python classifiers."""
    if f.codomain != g.codomain:
        raise MorphismError(["codomain mismatch"])
    bound = max_v if max_v is not None else espec.max_vertices
    config.require_cap(bound, config.AMALGAM_BOUND, "amalgam search")
    B, C = f.domain, g.domain
    rooted = espec.rooted
    if rooted and (B.root is None or C.root is None
                   or f.codomain.root is None):
        raise MorphismError(["rooted search needs rooted inputs"])
    cons = espec.constraints
    if "end_vertex_preserving" in cons and not rooted:
        raise MorphismError(["end_vertex_preserving needs a rooted search"])
    light = "light" in cons
    checks = 0
    if "monotone" in cons:
        checks |= kernel.CHK_MONOTONE
    if "confluent" in cons:
        checks |= kernel.CHK_CONFLUENT
    pairs = _product_pairs(f, g)
    nc = len(pairs)
    bverts = list(B.sorted_vertices)
    cverts = list(C.sorted_vertices)
    bidx = {v: i for i, v in enumerate(bverts)}
    cidx = {v: i for i, v in enumerate(cverts)}
    b_of = np.asarray([bidx[b] for b, _ in pairs], np.int64)
    c_of = np.asarray([cidx[c] for _, c in pairs], np.int64)

    adjQ = np.zeros((nc, nc), np.uint8)
    for i in range(nc):
        for j in range(nc):
            xb, yb = bverts[b_of[i]], bverts[b_of[j]]
            xc, yc = cverts[c_of[i]], cverts[c_of[j]]
            ok = ((xb == yb or B.has_edge(xb, yb))
                  and (xc == yc or C.has_edge(xc, yc)))
            if light and (xb == yb or xc == yc):
                ok = False
            adjQ[i, j] = 1 if ok else 0

    use_order = False
    ordQ = np.zeros((nc, nc), np.uint8)
    root_pair = None
    if rooted:
        bt, ct = RootedTree(B), RootedTree(C)
        use_order = True
        for i in range(nc):
            for j in range(nc):
                pb, cb = bverts[b_of[i]], bverts[b_of[j]]
                pc, cc = cverts[c_of[i]], cverts[c_of[j]]
                ok_b = cb == pb or bt.parent(cb) == pb
                ok_c = cc == pc or ct.parent(cc) == pc
                ordQ[i, j] = 1 if (ok_b and ok_c) else 0
        root_pair = pairs.index((B.root, C.root))

    bedges = sorted(B.edges)
    cedges = sorted(C.edges)
    be_idx = {e: i for i, e in enumerate(bedges)}
    ce_idx = {e: i for i, e in enumerate(cedges)}
    e1 = np.full((nc, nc), -1, np.int64)
    e2 = np.full((nc, nc), -1, np.int64)
    for i in range(nc):
        for j in range(nc):
            if i == j:
                continue
            xb, yb = bverts[b_of[i]], bverts[b_of[j]]
            if xb != yb and B.has_edge(xb, yb):
                e1[i, j] = be_idx[edge_key(xb, yb)]
            xc, yc = cverts[c_of[i]], cverts[c_of[j]]
            if xc != yc and C.has_edge(xc, yc):
                e2[i, j] = ce_idx[edge_key(xc, yc)]
    earr1 = np.zeros((max(len(bedges), 1), 2), np.int64)
    for ei, (a, b) in enumerate(bedges):
        earr1[ei, 0] = bidx[a]
        earr1[ei, 1] = bidx[b]
    earr2 = np.zeros((max(len(cedges), 1), 2), np.int64)
    for ei, (a, b) in enumerate(cedges):
        earr2[ei, 0] = cidx[a]
        earr2[ei, 1] = cidx[b]
    layer1 = kernel.SurjectivityLayer(
        len(bverts), np.asarray(b_of), len(bedges), e1, checks, earr1)
    layer2 = kernel.SurjectivityLayer(
        len(cverts), np.asarray(c_of), len(cedges), e2, checks, earr2)

    evp_mask = None
    if "end_vertex_preserving" in cons:
        bt, ct = RootedTree(B), RootedTree(C)
        b_end = {v for v in bt.ends}
        c_end = {v for v in ct.ends}
        evp_mask = np.asarray(
            [1 if (bverts[b_of[j]] in b_end and cverts[c_of[j]] in c_end)
             else 0 for j in range(nc)], np.uint8)

    if espec.category == "graph":
        def candidates(n):
            return [d for d in enumerate_connected_graphs(n, cap=max(
                n, config.ORACLE_GRAPH_CAP)) if len(d.vertices) == n]
    elif rooted:
        def candidates(n):
            return [t.graph for t in enumerate_rooted_trees(n, cap=bound)
                    if len(t.vertices) == n]
    else:
        def candidates(n):
            return [d for d in enumerate_trees(n, cap=bound)
                    if len(d.vertices) == n]

    lo = max(len(bverts), len(cverts))
    for n in range(lo, bound + 1):
        for D in candidates(n):
            dom_tree = RootedTree(D) if rooted else None
            order = _visit_order(D)
            prev = _prev_arrays(D, order, dom_tree)
            nd = len(order)
            idx_of = {v: i for i, v in enumerate(order)}
            dom_adj = np.zeros((nd, nd), np.uint8)
            for a, b in D.edges:
                dom_adj[idx_of[a], idx_of[b]] = 1
                dom_adj[idx_of[b], idx_of[a]] = 1
            cand = np.ones((nd, nc), np.uint8)
            if rooted:
                cand[0, :] = 0
                cand[0, root_pair] = 1
            if evp_mask is not None:
                for i, v in enumerate(order):
                    if D.order_of(v) == 1 and v != D.root:
                        cand[i, :] &= evp_mask
            prob = kernel.Problem(nd, nc, prev[0], prev[1], prev[2], adjQ,
                                  use_order, ordQ, cand, layer1, layer2,
                                  dom_adj=dom_adj)
            rows = kernel.run(prob, limit=1)
            if len(rows):
                row = rows[0]
                f0_map = {order[i]: bverts[b_of[int(row[i])]]
                          for i in range(nd)}
                g0_map = {order[i]: cverts[c_of[int(row[i])]]
                          for i in range(nd)}
                f0 = Morphism.epi(D, B, f0_map)
                g0 = Morphism.epi(D, C, g0_map)
                if not (passes_constraints(f0, cons)
                        and passes_constraints(g0, cons)):
                    raise RuntimeError(
                        "kernel class checks disagree with the classifiers; "
                        "refusing to continue")
                return seal(f, g, D, f0, g0)
    return None


# -- factor chain search -------------------------------------------------


def _attach_cone_copy(tree: RootedTree, v: str, child: str) -> tuple:
    """Duplicate the closed cone at `child` as a fresh sibling under v;
    the returned morphism folds the copy back onto the original."""
    cone = sorted(tree.cone_closed(child))
    taken = set(tree.vertices)
    copy_of = {}
    for u in cone:
        base = f"{u}*"
        cand = base
        k = 0
        while cand in taken:
            k += 1
            cand = f"{base}{k}"
        copy_of[u] = cand
        taken.add(cand)
    verts = set(tree.vertices) | set(copy_of.values())
    edges = set(tree.edges)
    edges.add(edge_key(v, copy_of[child]))
    for a, b in tree.edges:
        if a in copy_of and b in copy_of:
            edges.add(edge_key(copy_of[a], copy_of[b]))
    big = RootedTree.build(verts, edges, tree.root)
    mapping = {u: u for u in tree.vertices}
    for u, cu in copy_of.items():
        mapping[cu] = u
    return big, Morphism.epi(big.graph, tree.graph, mapping)


def _state_key(tree: RootedTree, h: Morphism) -> str:
    return canonical_code_labeled(tree, lambda v: h.map[v])


_SPACE_CACHE = {}


def _chain_space(A: RootedTree, size_cap: int, allowed: frozenset) -> dict:
    """Every state reachable from (A, id) by elementary factors, up to
    size_cap domain vertices; keyed by labeled canonical code with parent
    pointers for chain reconstruction.  Cached per codomain and bound.

    `allowed` selects the move set by tag name; any subset of
    {splitting_edge, elementary_light_confluent, adding_edge} works.
    """
    cache_key = (A.graph.to_json(), size_cap, allowed)
    if cache_key in _SPACE_CACHE:
        return _SPACE_CACHE[cache_key]
    ident = Morphism.identity(A.graph)
    start_key = _state_key(A, ident)
    # key -> (tree, composite, parent_key, factor, tag, depth)
    seen = {start_key: (A, ident, None, None, None, 0)}
    frontier = deque([start_key])
    while frontier:
        key = frontier.popleft()
        tree, h, _, _, _, d = seen[key]
        if len(tree.vertices) >= size_cap:
            continue
        moves = []
        if "splitting_edge" in allowed:
            for edge in sorted(tree.edges):
                for choice in edge:
                    s, e = split_edge(tree, edge, choice)
                    moves.append((s, e, "splitting_edge"))
        if "elementary_light_confluent" in allowed:
            for v in tree.sorted_vertices:
                for child in tree.children(v):
                    if len(tree.vertices) + len(tree.cone_closed(child)) > size_cap:
                        continue
                    s, e = _attach_cone_copy(tree, v, child)
                    moves.append((s, e, "elementary_light_confluent"))
        if "adding_edge" in allowed:
            for v in tree.sorted_vertices:
                s, e = add_edge(tree, v)
                moves.append((s, e, "adding_edge"))
        for s, e, tag in moves:
            h2 = compose(h, e)
            k2 = _state_key(s, h2)
            if k2 in seen:
                continue
            seen[k2] = (s, h2, key, e, tag, d + 1)
            frontier.append(k2)
    _SPACE_CACHE[cache_key] = seen
    return seen


def _brute_chain(f: Morphism, max_chain: Optional[int],
                 allowed: frozenset) -> Optional[tuple]:
    if not f.rooted:
        raise MorphismError(["factor chain search needs rooted trees"])
    target_size = len(f.domain.vertices)
    config.require_cap(target_size, config.ORACLE_EPI_DOMAIN_CAP,
                       "factor chain search")
    A = f.codomain_tree
    B = f.domain_tree
    space = _chain_space(A, target_size, allowed)
    goal = canonical_code_labeled(B, lambda v: f.map[v])
    if goal not in space:
        return None
    if max_chain is not None and space[goal][5] > max_chain:
        return None
    chain = []
    tags = []
    key = goal
    while True:
        _, _, parent, factor, tag, _ = space[key]
        if parent is None:
            break
        chain.append(factor)
        tags.append(tag)
        key = parent
    chain.reverse()
    tags.reverse()
    goal_tree, goal_h, _, _, _, _ = space[goal]
    sigma_map = rooted_isomorphism(B, goal_tree,
                                   s_label=lambda v: f.map[v],
                                   t_label=lambda v: goal_h.map[v])
    sigma = Morphism.epi(B.graph, goal_tree.graph, sigma_map)
    if not chain:
        return ((sigma,), ("isomorphism",))
    chain[-1] = compose(chain[-1], sigma)
    return (tuple(chain), tuple(tags))


def brute_simple_confluent(f: Morphism, max_chain: Optional[int] = None,
                           star: bool = False) -> Optional[tuple]:
    """Breadth-first search for an elementary factor chain composing to f.

    Moves are edge splits and child-cone duplications; with star=True leaf
    additions join in.  Returns (factors, tags) with the factors listed
    outermost first and composing exactly to f, or None.
    """
    allowed = {"splitting_edge", "elementary_light_confluent"}
    if star:
        allowed.add("adding_edge")
    return _brute_chain(f, max_chain, frozenset(allowed))


def brute_simple_monotone(f: Morphism, max_chain: Optional[int] = None,
                          star: bool = False) -> Optional[tuple]:
    """Like brute_simple_confluent but with edge splits as the only move
    (star adds leaf additions), so a hit certifies a split(/add)-map
    composition."""
    allowed = {"splitting_edge"}
    if star:
        allowed.add("adding_edge")
    return _brute_chain(f, max_chain, frozenset(allowed))


# -- hereditary unicoherence ---------------------------------------------


def is_hereditarily_unicoherent(G: FiniteGraph) -> bool:
    """Every connected subgraph, decomposed as a union of two connected
    subgraphs, has a connected intersection.

    Subgraphs follow the permissive reading: a subgraph may keep fewer edges
    than its vertex set induces.  Trees pass; any cycle fails via two arcs
    meeting in their endpoints only.
    """
    config.require_cap(len(G.vertices), config.HU_CAP,
                       "hereditary unicoherence scan")
    if not G.is_connected() or not G.vertices:
        raise ValueError("hereditary unicoherence needs a nonempty connected graph")
    edges = sorted(G.edges)

    def sub_connected(vset, eset):
        if not vset:
            return False
        adj = {v: [] for v in vset}
        for a, b in eset:
            adj[a].append(b)
            adj[b].append(a)
        start = next(iter(vset))
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(vset)

    for k in range(1, len(edges) + 1):
        for eh in itertools.combinations(edges, k):
            vh = frozenset(v for e in eh for v in e)
            if not sub_connected(vh, eh):
                continue
            # all assignments of H's edges into P / Q / both
            for assign in itertools.product((0, 1, 2), repeat=k):
                ep = [e for e, a in zip(eh, assign) if a != 1]
                eq = [e for e, a in zip(eh, assign) if a != 0]
                if not ep or not eq:
                    continue
                vp = frozenset(v for e in ep for v in e)
                vq = frozenset(v for e in eq for v in e)
                if not sub_connected(vp, ep) or not sub_connected(vq, eq):
                    continue
                vi = vp & vq
                ei = frozenset(ep) & frozenset(eq)
                if not sub_connected(vi, ei):
                    return False
    return True


# -- extension search ----------------------------------------------------


def check_extension(trees: list, bonds: list, A, phi: Morphism,
                    horizon: int,
                    constraints: Iterable[str] = ("confluent",)) -> Optional[tuple]:
    """Search for (n, psi) with psi: trees[n] -> A an epimorphism in the
    given class and phi∘psi equal to the composite bonding map n -> m.

    bonds[i] maps trees[i+1] onto trees[i]; phi's codomain identifies m.
    Returns None when every stage up to the horizon is exhausted.
    """
    Ag = _graph_of(A)
    m = None
    for i, t in enumerate(trees):
        if _graph_of(t) == phi.codomain:
            m = i
            break
    if m is None:
        raise MorphismError(["phi's codomain is not a listed stage"])
    horizon = min(horizon, len(trees) - 1)
    a_order = list(Ag.sorted_vertices)
    a_idx = {v: i for i, v in enumerate(a_order)}
    a_tree = RootedTree(Ag) if Ag.root is not None else None
    adjQ = _adj_or_equal(Ag, a_order)
    ordQ = (_parent_or_equal(a_tree, a_order) if a_tree is not None
            else np.zeros_like(adjQ))
    bond_to_m = Morphism.identity(_graph_of(trees[m]))
    for n in range(m, horizon + 1):
        if n > m:
            bond_to_m = compose(bond_to_m, bonds[n - 1])
        Sg = _graph_of(trees[n])
        dom_tree = RootedTree(Sg) if Sg.root is not None else None
        use_order = dom_tree is not None and a_tree is not None
        order = _visit_order(Sg)
        prev = _prev_arrays(Sg, order, dom_tree if use_order else None)
        nd, nc = len(order), len(a_order)
        cand = np.zeros((nd, nc), np.uint8)
        for i, v in enumerate(order):
            want = bond_to_m.map[v]
            for a in Ag.sorted_vertices:
                if phi.map[a] == want:
                    cand[i, a_idx[a]] = 1
        prob = kernel.Problem(nd, nc, prev[0], prev[1], prev[2], adjQ,
                              use_order, ordQ, cand,
                              _identity_layer(Ag, a_order), None)
        rows = kernel.run(prob)
        rows = sorted(rows.tolist())
        for row in rows:
            mapping = {order[i]: a_order[int(row[i])] for i in range(nd)}
            psi = Morphism.epi(Sg, Ag, mapping)
            if passes_constraints(psi, constraints):
                return (n, psi)
    return None
