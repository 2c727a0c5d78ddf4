"""Finite graphs and rooted trees.

Edges are unordered pairs of distinct vertices; the reflexive pairs that the
ambient edge relation always contains are implicit and never stored.  Vertex
identifiers are opaque strings and every deterministic ordering used anywhere
in the package is the lexicographic order of those strings.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Mapping, Optional, Sequence


def edge_key(a: str, b: str) -> tuple[str, str]:
    """Normalize an unordered pair to (lexicographically smaller, larger)."""
    if a == b:
        raise ValueError(f"degenerate edge ({a!r},{a!r}) cannot be stored")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class FiniteGraph:
    """A finite graph with a symmetric, irreflexive stored edge set.

    vertices : frozenset of identifiers
    edges    : frozenset of normalized pairs (smaller endpoint first)
    root     : optional distinguished vertex
    """

    vertices: frozenset
    edges: frozenset
    root: Optional[str] = None

    def __post_init__(self):
        for a, b in self.edges:
            if a >= b:
                raise ValueError(f"edge ({a!r},{b!r}) is not normalized")
            if a not in self.vertices or b not in self.vertices:
                raise ValueError(f"edge ({a!r},{b!r}) has endpoint outside vertex set")
        if self.root is not None and self.root not in self.vertices:
            raise ValueError(f"root {self.root!r} is not a vertex")

    @staticmethod
    def build(vertices: Iterable[str], edges: Iterable[Sequence[str]],
              root: Optional[str] = None) -> "FiniteGraph":
        vs = frozenset(str(v) for v in vertices)
        es = frozenset(edge_key(str(a), str(b)) for a, b in edges)
        return FiniteGraph(vs, es, root)

    # -- basic queries ---------------------------------------------------

    @cached_property
    def adjacency(self) -> dict:
        adj = {v: set() for v in self.vertices}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return {v: tuple(sorted(ns)) for v, ns in adj.items()}

    def neighbors(self, v: str) -> tuple:
        return self.adjacency[v]

    def has_edge(self, a: str, b: str) -> bool:
        return a != b and edge_key(a, b) in self.edges

    def order_of(self, v: str) -> int:
        """Number of non-degenerate edges at v."""
        return len(self.adjacency[v])

    @cached_property
    def sorted_vertices(self) -> tuple:
        return tuple(sorted(self.vertices))

    def __iter__(self):
        return iter(self.sorted_vertices)

    def __len__(self) -> int:
        return len(self.vertices)

    # -- connectivity ----------------------------------------------------

    def component_of(self, start: str, subset: Optional[frozenset] = None) -> frozenset:
        allowed = self.vertices if subset is None else subset
        if start not in allowed:
            raise ValueError(f"vertex {start!r} not in subset")
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in self.adjacency[v]:
                if w in allowed and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return frozenset(seen)

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        start = self.sorted_vertices[0]
        return len(self.component_of(start)) == len(self.vertices)

    def induced(self, subset: Iterable[str], root: Optional[str] = None) -> "FiniteGraph":
        sub = frozenset(subset)
        missing = sub - self.vertices
        if missing:
            raise ValueError(f"unknown vertices in subset: {sorted(missing)}")
        es = frozenset(e for e in self.edges if e[0] in sub and e[1] in sub)
        if root is None and self.root in sub:
            root = self.root
        return FiniteGraph(sub, es, root)

    # -- serialization ---------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "vertices": list(self.sorted_vertices),
            "edges": [list(e) for e in sorted(self.edges)],
            "root": self.root,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @staticmethod
    def from_json_obj(obj: Mapping) -> "FiniteGraph":
        return FiniteGraph.build(obj["vertices"], obj["edges"], obj.get("root"))

    @staticmethod
    def from_json(text: str) -> "FiniteGraph":
        return FiniteGraph.from_json_obj(json.loads(text))


def components(graph: FiniteGraph, subset: Iterable[str]) -> tuple:
    """Partition `subset` into maximal connected pieces.

    Pieces are ordered by their least vertex identifier.  Adjacency is taken
    in `graph` restricted to `subset`.
    """
    sub = frozenset(subset)
    missing = sub - graph.vertices
    if missing:
        raise ValueError(f"unknown vertices in subset: {sorted(missing)}")
    remaining = set(sub)
    pieces = []
    while remaining:
        start = min(remaining)
        piece = graph.component_of(start, sub)
        pieces.append(piece)
        remaining -= piece
    return tuple(sorted(pieces, key=min))


def is_tree(graph: FiniteGraph) -> bool:
    if not graph.vertices:
        return False
    return graph.is_connected() and len(graph.edges) == len(graph.vertices) - 1


def is_arc(graph: FiniteGraph) -> Optional[tuple]:
    """Return the two end vertices when the graph is a path on >= 2 vertices.

    Every vertex other than the two returned ones disconnects the graph; a
    single vertex is not an arc.  The pair comes back in lexicographic order.
    """
    if len(graph.vertices) < 2 or not is_tree(graph):
        return None
    ends = [v for v in graph.sorted_vertices if graph.order_of(v) == 1]
    if len(ends) != 2:
        return None
    if any(graph.order_of(v) > 2 for v in graph.vertices):
        return None
    return (ends[0], ends[1])


class NotATreeError(ValueError):
    pass


@dataclass(frozen=True)
class VertexProfile:
    ord: int
    ht: int
    sord: int
    kind: str  # "end" | "ordinary" | "ramification" | "root"


@dataclass(frozen=True)
class RootedTree:
    """A FiniteGraph validated as a tree with a designated root.

    Derives the tree order (x <= y when the root-to-y arc passes through x),
    heights, parents, and successor orders.  Immutable; all derived data is
    cached on first use.
    """

    graph: FiniteGraph

    def __post_init__(self):
        if self.graph.root is None:
            raise NotATreeError("rooted tree requires a root")
        if not is_tree(self.graph):
            raise NotATreeError("graph is not a tree")

    @staticmethod
    def build(vertices: Iterable[str], edges: Iterable[Sequence[str]],
              root: str) -> "RootedTree":
        return RootedTree(FiniteGraph.build(vertices, edges, root))

    # -- delegation ------------------------------------------------------

    @property
    def root(self) -> str:
        return self.graph.root

    @property
    def vertices(self) -> frozenset:
        return self.graph.vertices

    @property
    def edges(self) -> frozenset:
        return self.graph.edges

    @property
    def sorted_vertices(self) -> tuple:
        return self.graph.sorted_vertices

    def neighbors(self, v: str) -> tuple:
        return self.graph.neighbors(v)

    def has_edge(self, a: str, b: str) -> bool:
        return self.graph.has_edge(a, b)

    def order_of(self, v: str) -> int:
        return self.graph.order_of(v)

    def __len__(self) -> int:
        return len(self.graph.vertices)

    def __iter__(self):
        return iter(self.graph.sorted_vertices)

    # -- derived structure ----------------------------------------------

    @cached_property
    def _bfs(self) -> tuple:
        """(bfs order, parent map, height map); neighbors visited in lex order."""
        parent = {self.root: None}
        height = {self.root: 0}
        order = [self.root]
        queue = [self.root]
        while queue:
            nxt = []
            for v in queue:
                for w in self.graph.adjacency[v]:
                    if w not in parent:
                        parent[w] = v
                        height[w] = height[v] + 1
                        order.append(w)
                        nxt.append(w)
            queue = nxt
        return tuple(order), parent, height

    @property
    def bfs_order(self) -> tuple:
        return self._bfs[0]

    def parent(self, v: str) -> Optional[str]:
        return self._bfs[1][v]

    @cached_property
    def children_map(self) -> dict:
        ch = {v: [] for v in self.vertices}
        for v, p in self._bfs[1].items():
            if p is not None:
                ch[p].append(v)
        return {v: tuple(sorted(cs)) for v, cs in ch.items()}

    def children(self, v: str) -> tuple:
        """Immediate successors of v, in lexicographic order."""
        return self.children_map[v]

    def ht(self, v: str) -> int:
        return self._bfs[2][v]

    @cached_property
    def height(self) -> int:
        return max(self._bfs[2].values())

    def sord(self, v: str) -> int:
        return len(self.children_map[v])

    @cached_property
    def tree_sord(self) -> int:
        return max(self.sord(v) for v in self.vertices)

    def le(self, x: str, y: str) -> bool:
        """x <= y in the rooted order."""
        hx = self.ht(x)
        while self.ht(y) > hx:
            y = self.parent(y)
        return x == y

    def lt(self, x: str, y: str) -> bool:
        return x != y and self.le(x, y)

    def comparable(self, x: str, y: str) -> bool:
        return self.le(x, y) or self.le(y, x)

    def cone(self, a: str) -> frozenset:
        """Vertices strictly above a."""
        out = set()
        stack = list(self.children(a))
        while stack:
            v = stack.pop()
            out.add(v)
            stack.extend(self.children(v))
        return frozenset(out)

    def cone_closed(self, a: str) -> frozenset:
        """Vertices weakly above a."""
        return self.cone(a) | {a}

    def cone_components(self, a: str) -> tuple:
        """Components of the strict cone over a: one closed cone per child."""
        return tuple(self.cone_closed(c) for c in self.children(a))

    def is_end(self, v: str) -> bool:
        """End vertex: order 1 and not the root."""
        return v != self.root and self.order_of(v) == 1

    @cached_property
    def ends(self) -> tuple:
        return tuple(v for v in self.sorted_vertices if self.is_end(v))

    def kind(self, v: str) -> str:
        if v == self.root:
            return "root"
        if self.order_of(v) == 1:
            return "end"
        return "ramification" if self.order_of(v) >= 3 else "ordinary"

    def profile(self, v: str) -> VertexProfile:
        return VertexProfile(ord=self.order_of(v), ht=self.ht(v),
                             sord=self.sord(v), kind=self.kind(v))

    def path_from_root(self, v: str) -> tuple:
        path = [v]
        while path[-1] != self.root:
            path.append(self.parent(path[-1]))
        return tuple(reversed(path))

    def arc(self, x: str, y: str) -> tuple:
        """Vertices of the unique path from x to y, in path order."""
        px, py = self.path_from_root(x), self.path_from_root(y)
        k = 0
        while k < min(len(px), len(py)) and px[k] == py[k]:
            k += 1
        down = list(px[k - 1:])
        down.reverse()
        return tuple(down + list(py[k:]))

    def relabeled(self, mapping: Mapping) -> "RootedTree":
        vs = [mapping[v] for v in self.vertices]
        es = [(mapping[a], mapping[b]) for a, b in self.edges]
        return RootedTree.build(vs, es, mapping[self.root])

    def to_json_obj(self) -> dict:
        return self.graph.to_json_obj()

    @staticmethod
    def from_json_obj(obj: Mapping) -> "RootedTree":
        return RootedTree(FiniteGraph.from_json_obj(obj))


def branches(tree: RootedTree) -> tuple:
    """One maximal proper chain (root-to-end path) per end vertex.

    Ordered lexicographically as vertex sequences.
    """
    out = [tree.path_from_root(e) for e in tree.ends]
    if not out and len(tree) == 1:
        out = []
    return tuple(sorted(out))


def is_regular(tree: RootedTree) -> bool:
    """Constant successor order off the ends, all ends at full height."""
    s = tree.tree_sord
    h = tree.height
    for v in tree.vertices:
        if tree.is_end(v):
            if tree.ht(v) != h:
                return False
        elif tree.sord(v) != s:
            return False
    return True


def regular_tree(height: int, sord: int, prefix: str = "n") -> RootedTree:
    """The regular rooted tree with the given height and successor order.

    Vertex ids encode root-to-vertex child-index paths, so the construction is
    deterministic.
    """
    if height < 0 or sord < 1:
        raise ValueError("height must be >= 0 and sord >= 1")
    vertices = []
    edges = []

    def grow(name: str, depth: int):
        vertices.append(name)
        if depth == height:
            return
        for i in range(sord):
            child = f"{name}.{i}"
            edges.append((name, child))
            grow(child, depth + 1)

    grow(prefix, 0)
    return RootedTree.build(vertices, edges, prefix)


# -- canonical forms -----------------------------------------------------


def canonical_code(tree: RootedTree) -> str:
    """Canonical string for the rooted isomorphism class.

    A vertex code is "(" + concatenation of the sorted child codes + ")";
    two rooted trees get the same code exactly when they are isomorphic.
    """
    return canonical_code_labeled(tree, lambda v: "")


def canonical_code_labeled(tree: RootedTree, label: Callable[[str], str]) -> str:
    """Canonical code of a rooted tree whose vertices carry labels.

    Isomorphism-invariant for label-preserving rooted isomorphisms.  The
    label is length-prefixed inside the code, so arbitrary label strings
    (including parentheses) stay unambiguous.
    """
    # bottom-up over a post-order walk to avoid recursion limits
    code = {}
    stack = [(tree.root, False)]
    while stack:
        v, done = stack.pop()
        if done:
            inner = "".join(sorted(code[c] for c in tree.children(v)))
            lab = label(v)
            code[v] = f"({len(lab)}:{lab}{inner})"
        else:
            stack.append((v, True))
            for c in tree.children(v):
                stack.append((c, False))
    return code[tree.root]


def iso_rooted(s: RootedTree, t: RootedTree) -> bool:
    return canonical_code(s) == canonical_code(t)


def rooted_isomorphism(s: RootedTree, t: RootedTree,
                       s_label: Callable[[str], str] = lambda v: "",
                       t_label: Callable[[str], str] = lambda v: "") -> Optional[dict]:
    """A concrete (label-preserving) rooted isomorphism s -> t, if one exists.

    Children are matched by (code, id) order on both sides, which makes the
    returned vertex bijection deterministic.
    """
    if canonical_code_labeled(s, s_label) != canonical_code_labeled(t, t_label):
        return None

    def codes(tree, label):
        out = {}
        stack = [(tree.root, False)]
        while stack:
            v, done = stack.pop()
            if done:
                inner = "".join(sorted(out[c] for c in tree.children(v)))
                lab = label(v)
                out[v] = f"({len(lab)}:{lab}{inner})"
            else:
                stack.append((v, True))
                for c in tree.children(v):
                    stack.append((c, False))
        return out

    cs, ct = codes(s, s_label), codes(t, t_label)
    mapping = {s.root: t.root}
    stack = [(s.root, t.root)]
    while stack:
        a, b = stack.pop()
        sa = sorted(s.children(a), key=lambda v: (cs[v], v))
        sb = sorted(t.children(b), key=lambda v: (ct[v], v))
        for ca, cb in zip(sa, sb):
            mapping[ca] = cb
            stack.append((ca, cb))
    return mapping


def canonical_graph_code(graph: FiniteGraph) -> str:
    """Canonical string for the isomorphism class of a FiniteGraph.

    Color refinement plus individualization; exact (not a hash).  The root,
    when present, gets its own initial color, so rooted graphs are compared
    as rooted graphs.
    """
    verts = graph.sorted_vertices
    n = len(verts)
    if n == 0:
        return "[]"
    idx = {v: i for i, v in enumerate(verts)}
    adj = [sorted(idx[w] for w in graph.neighbors(v)) for v in verts]
    root_i = idx[graph.root] if graph.root is not None else -1

    def refine(colors):
        while True:
            sig = [(colors[i], tuple(sorted(colors[j] for j in adj[i]))) for i in range(n)]
            ranking = {s: r for r, s in enumerate(sorted(set(sig)))}
            new = [ranking[s] for s in sig]
            if new == colors:
                return colors
            colors = new

    def canon(colors):
        colors = refine(colors)
        cells = {}
        for i, c in enumerate(colors):
            cells.setdefault(c, []).append(i)
        target = None
        for c in sorted(cells):
            if len(cells[c]) > 1:
                target = cells[c]
                break
        if target is None:
            pos = {i: colors[i] for i in range(n)}
            edges = sorted((min(pos[a], pos[b]), max(pos[a], pos[b]))
                           for a in range(n) for b in adj[a] if a < b)
            rp = pos[root_i] if root_i >= 0 else None
            return json.dumps([n, rp, edges])
        best = None
        for i in target:
            forced = [c + 1 if c >= colors[i] or j == i else c
                      for j, c in enumerate(colors)]
            forced[i] = colors[i]
            cand = canon(forced)
            if best is None or cand < best:
                best = cand
        return best

    init = [1 if i == root_i else 0 for i in range(n)] if root_i >= 0 else [0] * n
    return canon(init)


def graph_isomorphic(g: FiniteGraph, h: FiniteGraph) -> bool:
    if len(g.vertices) != len(h.vertices) or len(g.edges) != len(h.edges):
        return False
    return canonical_graph_code(g) == canonical_graph_code(h)


def fresh_id(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    cand = base
    while cand in taken:
        cand += "'"
    return cand
