"""Epimorphisms between finite graphs and rooted trees.

A morphism stores a total vertex mapping.  Validation distinguishes plain
homomorphisms (edges map to edges or collapse, which is allowed because the
ambient edge relation is reflexive) from epimorphisms (vertex- and
edge-surjective; root- and order-preserving when both sides are rooted).
Classification flags are computed lazily and cached on the immutable value.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional

from .graphs import (
    FiniteGraph,
    RootedTree,
    components,
    edge_key,
    fresh_id,
    is_tree,
)


class MorphismError(ValueError):
    """Raised when a candidate mapping fails validation."""

    def __init__(self, violations):
        self.violations = tuple(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple

    def __bool__(self) -> bool:
        return self.ok


def _rooted_pair(domain: FiniteGraph, codomain: FiniteGraph) -> bool:
    return domain.root is not None and codomain.root is not None


def check_epimorphism(domain: FiniteGraph, codomain: FiniteGraph,
                      mapping: Mapping) -> ValidationReport:
    """All violated epimorphism clauses for a candidate mapping, by name."""
    bad = []
    missing = set(domain.vertices) - set(mapping)
    extra = set(mapping) - set(domain.vertices)
    if missing or extra:
        bad.append(f"not-total: missing {sorted(missing)}, extra {sorted(extra)}")
        return ValidationReport(False, tuple(bad))
    if any(mapping[v] not in codomain.vertices for v in domain.vertices):
        bad.append("not-into-codomain")
        return ValidationReport(False, tuple(bad))
    for a, b in domain.edges:
        fa, fb = mapping[a], mapping[b]
        if fa != fb and not codomain.has_edge(fa, fb):
            bad.append(f"not-homomorphism: edge ({a},{b}) -> ({fa},{fb})")
    if set(mapping[v] for v in domain.vertices) != set(codomain.vertices):
        bad.append("not-vertex-surjective")
    covered = set()
    for a, b in domain.edges:
        fa, fb = mapping[a], mapping[b]
        if fa != fb:
            covered.add(edge_key(fa, fb))
    if covered != set(codomain.edges):
        bad.append("not-edge-surjective: missing "
                   f"{sorted(set(codomain.edges) - covered)}")
    if _rooted_pair(domain, codomain):
        if mapping[domain.root] != codomain.root:
            bad.append("root-not-preserved")
        elif is_tree(domain) and is_tree(codomain):
            # the rooted partial order is defined on trees only
            dt, ct = RootedTree(domain), RootedTree(codomain)
            for v in dt.sorted_vertices:
                p = dt.parent(v)
                if p is None:
                    continue
                fv, fp = mapping[v], mapping[p]
                if not (fv == fp or ct.parent(fv) == fp):
                    bad.append(f"not-order-preserving: at ({p},{v})")
    return ValidationReport(not bad, tuple(bad))


@dataclass(frozen=True)
class Morphism:
    """A vertex mapping between two finite graphs.

    Use `Morphism.epi` (or `validate`) for validated epimorphisms and
    `Morphism.hom` for bare homomorphisms such as raw product projections.
    """

    domain: FiniteGraph
    codomain: FiniteGraph
    pairs: tuple  # sorted ((v, f(v)), ...)
    is_epi: bool = field(default=True, compare=False)

    @staticmethod
    def epi(domain, codomain, mapping: Mapping) -> "Morphism":
        domain = domain.graph if isinstance(domain, RootedTree) else domain
        codomain = codomain.graph if isinstance(codomain, RootedTree) else codomain
        report = check_epimorphism(domain, codomain, mapping)
        if not report:
            raise MorphismError(report.violations)
        pairs = tuple(sorted((v, mapping[v]) for v in domain.vertices))
        return Morphism(domain, codomain, pairs, True)

    @staticmethod
    def hom(domain, codomain, mapping: Mapping) -> "Morphism":
        domain = domain.graph if isinstance(domain, RootedTree) else domain
        codomain = codomain.graph if isinstance(codomain, RootedTree) else codomain
        for a, b in domain.edges:
            fa, fb = mapping[a], mapping[b]
            if fa != fb and not codomain.has_edge(fa, fb):
                raise MorphismError([f"not-homomorphism: edge ({a},{b})"])
        pairs = tuple(sorted((v, mapping[v]) for v in domain.vertices))
        report = check_epimorphism(domain, codomain, mapping)
        return Morphism(domain, codomain, pairs, bool(report))

    @staticmethod
    def identity(graph) -> "Morphism":
        graph = graph.graph if isinstance(graph, RootedTree) else graph
        return Morphism.epi(graph, graph, {v: v for v in graph.vertices})

    # -- mapping access --------------------------------------------------

    @cached_property
    def map(self) -> dict:
        return dict(self.pairs)

    def __call__(self, v: str) -> str:
        return self.map[v]

    def apply(self, vs: Iterable[str]) -> frozenset:
        return frozenset(self.map[v] for v in vs)

    def fiber(self, t: str) -> frozenset:
        return frozenset(v for v, w in self.pairs if w == t)

    @cached_property
    def fibers(self) -> dict:
        out = {}
        for v, w in self.pairs:
            out.setdefault(w, set()).add(v)
        return {w: frozenset(s) for w, s in out.items()}

    def preimage(self, ts: Iterable[str]) -> frozenset:
        ts = set(ts)
        return frozenset(v for v, w in self.pairs if w in ts)

    @property
    def rooted(self) -> bool:
        return _rooted_pair(self.domain, self.codomain)

    @cached_property
    def domain_tree(self) -> RootedTree:
        return RootedTree(self.domain)

    @cached_property
    def codomain_tree(self) -> RootedTree:
        return RootedTree(self.codomain)

    def is_injective(self) -> bool:
        return len(set(self.map.values())) == len(self.map)

    def is_isomorphism(self) -> bool:
        return (self.is_epi and self.is_injective()
                and len(self.domain.edges) == len(self.codomain.edges))

    # -- serialization ---------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "domain": self.domain.to_json_obj(),
            "codomain": self.codomain.to_json_obj(),
            "map": {v: w for v, w in self.pairs},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @staticmethod
    def from_json_obj(obj: Mapping, epi: bool = True) -> "Morphism":
        dom = FiniteGraph.from_json_obj(obj["domain"])
        cod = FiniteGraph.from_json_obj(obj["codomain"])
        make = Morphism.epi if epi else Morphism.hom
        return make(dom, cod, dict(obj["map"]))

    @staticmethod
    def from_json(text: str, epi: bool = True) -> "Morphism":
        return Morphism.from_json_obj(json.loads(text), epi)

    # -- classification --------------------------------------------------

    @cached_property
    def report(self) -> "ClassReport":
        return ClassReport(
            monotone=is_monotone(self),
            light=is_light(self),
            confluent=_confluent_edge_check(self),
            end_vertex_preserving=(is_end_vertex_preserving(self)
                                   if self.rooted else False),
            splitting_edge=detect_splitting_edge(self) is not None,
            adding_edge=detect_adding_edge(self) is not None,
            elementary_light_confluent=(
                is_elementary_light_confluent(self) is not None
                if self.rooted else False),
        )


@dataclass(frozen=True)
class ClassReport:
    monotone: bool
    light: bool
    confluent: bool
    end_vertex_preserving: bool
    splitting_edge: bool
    adding_edge: bool
    elementary_light_confluent: bool

    def to_json_obj(self) -> dict:
        return {
            "monotone": self.monotone,
            "light": self.light,
            "confluent": self.confluent,
            "end_vertex_preserving": self.end_vertex_preserving,
            "splitting_edge": self.splitting_edge,
            "adding_edge": self.adding_edge,
            "elementary_light_confluent": self.elementary_light_confluent,
        }


def validate(domain, codomain, mapping: Mapping):
    """A validated Morphism, or the report naming each violated clause."""
    domain = domain.graph if isinstance(domain, RootedTree) else domain
    codomain = codomain.graph if isinstance(codomain, RootedTree) else codomain
    report = check_epimorphism(domain, codomain, mapping)
    if not report:
        return report
    return Morphism.epi(domain, codomain, mapping)


def compose(g: Morphism, f: Morphism) -> Morphism:
    """g after f."""
    if f.codomain != g.domain:
        raise MorphismError(["domain-mismatch: codomain(f) != domain(g)"])
    mapping = {v: g.map[f.map[v]] for v in f.domain.vertices}
    if f.is_epi and g.is_epi:
        return Morphism.epi(f.domain, g.codomain, mapping)
    return Morphism.hom(f.domain, g.codomain, mapping)


def compose_chain(factors: Iterable[Morphism]) -> Morphism:
    """Compose factors listed outermost-first: [f1, f2, f3] -> f1∘f2∘f3."""
    factors = list(factors)
    if not factors:
        raise MorphismError(["empty chain has no composite"])
    out = factors[-1]
    for g in reversed(factors[:-1]):
        out = compose(g, out)
    return out


def is_monotone(f: Morphism) -> bool:
    """Every vertex fiber is connected (equivalent to the connected-preimage
    definition for finite graphs)."""
    for t, fib in f.fibers.items():
        if len(components(f.domain, fib)) != 1:
            return False
    return True


def is_light(f: Morphism) -> bool:
    """No fiber contains a non-degenerate edge."""
    for a, b in f.domain.edges:
        if f.map[a] == f.map[b]:
            return False
    return True


def _confluent_edge_check(f: Morphism) -> bool:
    """Edge characterization of confluence: every component of the preimage
    of every codomain edge contains an edge mapping onto it.  Evaluable for
    disconnected domains as well."""
    for p in sorted(f.codomain.edges):
        pre = f.preimage(p)
        for comp in components(f.domain, pre):
            found = False
            for a, b in f.domain.edges:
                if a in comp and b in comp and {f.map[a], f.map[b]} == set(p):
                    found = True
                    break
            if not found:
                return False
    return True


def is_confluent(f: Morphism) -> bool:
    """Edge-based confluence test; requires connected graphs."""
    if not f.domain.is_connected() or not f.codomain.is_connected():
        raise MorphismError(["disconnected input"])
    return _confluent_edge_check(f)


def _connected_subsets(graph: FiniteGraph, max_vertices: int):
    """All connected vertex subsets, generated by neighborhood expansion.

    Each subset is produced exactly once: a subset is grown only from
    vertices at least as large as its seed, with excluded vertices blocked.
    """
    verts = graph.sorted_vertices
    for i, seed in enumerate(verts):
        blocked = set(verts[:i])
        stack = [(frozenset([seed]), frozenset(blocked))]
        while stack:
            cur, blk = stack.pop()
            yield cur
            frontier = sorted(set(w for v in cur for w in graph.neighbors(v))
                              - cur - blk)
            grow = blk
            for w in frontier:
                nxt = cur | {w}
                if len(nxt) <= max_vertices:
                    stack.append((nxt, grow))
                grow = grow | {w}


def is_confluent_semantic(f: Morphism, max_vertices: int = 12) -> bool:
    """Definition-level confluence: every component of the preimage of every
    connected codomain subset maps onto that subset.  Exhaustive; the domain
    is capped at `max_vertices` vertices."""
    if not f.domain.is_connected() or not f.codomain.is_connected():
        raise MorphismError(["disconnected input"])
    if len(f.domain.vertices) > max_vertices:
        raise MorphismError([f"size bound exceeded: {len(f.domain.vertices)} > {max_vertices}"])
    for q in _connected_subsets(f.codomain, len(f.codomain.vertices)):
        pre = f.preimage(q)
        for comp in components(f.domain, pre):
            if f.apply(comp) != q:
                return False
    return True


def is_end_vertex_preserving(f: Morphism) -> bool:
    if not f.rooted:
        raise MorphismError(["non-rooted input"])
    s, t = f.domain_tree, f.codomain_tree
    return all(t.is_end(f.map[e]) for e in s.ends)


# -- elementary constructors ---------------------------------------------


def split_edge(tree: RootedTree, edge, image_choice: str,
               new_id: Optional[str] = None):
    """Insert a new vertex inside `edge`; the map sends it to `image_choice`.

    Returns (new tree, morphism new -> old).
    """
    a, b = edge
    if not tree.has_edge(a, b):
        raise MorphismError([f"edge ({a},{b}) absent"])
    if tree.parent(b) != a:
        a, b = b, a  # normalize to parent, child
    if image_choice not in (a, b):
        raise MorphismError([f"image choice {image_choice!r} must be an endpoint"])
    x = new_id or fresh_id(f"{a}+{b}", tree.vertices)
    if x in tree.vertices:
        raise MorphismError([f"vertex id {x!r} already taken"])
    edges = set(tree.edges) - {edge_key(a, b)}
    edges |= {edge_key(a, x), edge_key(x, b)}
    s = RootedTree.build(tree.vertices | {x}, edges, tree.root)
    mapping = {v: v for v in tree.vertices}
    mapping[x] = image_choice
    return s, Morphism.epi(s.graph, tree.graph, mapping)


def add_edge(tree: RootedTree, v: str, new_id: Optional[str] = None):
    """Attach a new leaf at v; the map sends it to v.

    Returns (new tree, morphism new -> old).
    """
    if v not in tree.vertices:
        raise MorphismError([f"vertex {v!r} absent"])
    y = new_id or fresh_id(f"{v}^", tree.vertices)
    if y in tree.vertices:
        raise MorphismError([f"vertex id {y!r} already taken"])
    s = RootedTree.build(tree.vertices | {y}, set(tree.edges) | {edge_key(v, y)},
                         tree.root)
    mapping = {w: w for w in tree.vertices}
    mapping[y] = v
    return s, Morphism.epi(s.graph, tree.graph, mapping)


def duplicate_cone(tree: RootedTree, v: str, child: str):
    """Attach a fresh copy of the closed cone over `child` next to it under v;
    the map folds the copy back onto the original cone.

    Returns (new tree, morphism new -> old).  The morphism is an elementary
    light confluent epimorphism witnessed at v.
    """
    if tree.parent(child) != v:
        raise MorphismError([f"{child!r} is not a child of {v!r}"])
    cone = tree.cone_closed(child)
    taken = set(tree.vertices)
    copy = {}
    for w in sorted(cone):
        copy[w] = fresh_id(f"{w}*", taken)
        taken.add(copy[w])
    edges = set(tree.edges) | {edge_key(v, copy[child])}
    for a, b in tree.edges:
        if a in cone and b in cone:
            edges.add(edge_key(copy[a], copy[b]))
    s = RootedTree.build(taken, edges, tree.root)
    mapping = {w: w for w in tree.vertices}
    for w in cone:
        mapping[copy[w]] = w
    return s, Morphism.epi(s.graph, tree.graph, mapping)


def antitransitivity_split(graph: FiniteGraph, a: str, b: str):
    """Replace the edge (a,b) by the three-edge path a - a' - b' - b with
    a' mapping to a and b' to b.

    After the split no vertex pair can witness a transitive edge chain over
    (a,b): for p in the fiber of a, q in the fiber of b, the pair (p,q) spans
    an edge only between the two fresh middle vertices, which are adjacent to
    nothing else on that side.  Returns (new graph, morphism new -> old).
    """
    if not graph.has_edge(a, b):
        raise MorphismError([f"vertices {a!r},{b!r} not adjacent"])
    if graph.root is not None:
        t = RootedTree(graph)
        if t.parent(b) == a:
            pass
        elif t.parent(a) == b:
            a, b = b, a
    ap = fresh_id(f"{a}'", graph.vertices)
    bp = fresh_id(f"{b}'", graph.vertices | {ap})
    edges = set(graph.edges) - {edge_key(a, b)}
    edges |= {edge_key(a, ap), edge_key(ap, bp), edge_key(bp, b)}
    h = FiniteGraph.build(graph.vertices | {ap, bp}, edges, graph.root)
    mapping = {v: v for v in graph.vertices}
    mapping[ap] = a
    mapping[bp] = b
    return h, Morphism.epi(h, graph, mapping)


# -- structural detectors ------------------------------------------------


def _unique_merge_witness(f: Morphism):
    """The unique pair (kept, dropped) when f identifies exactly two vertices
    and is injective elsewhere; None otherwise."""
    if len(f.domain.vertices) != len(f.codomain.vertices) + 1:
        return None
    big = [fib for fib in f.fibers.values() if len(fib) > 1]
    if len(big) != 1 or len(big[0]) != 2:
        return None
    return tuple(sorted(big[0]))


def detect_splitting_edge(f: Morphism):
    """Witness (edge in codomain, inserted vertex, image choice) when f is a
    splitting edge map up to the identity-off-the-new-vertex convention."""
    if not f.rooted or not f.is_epi:
        return None
    w = _unique_merge_witness(f)
    if w is None:
        return None
    s = f.domain_tree
    for x in w:
        other = w[0] if x == w[1] else w[1]
        if f.map[x] != f.map[other]:
            continue
        if s.order_of(x) != 2 or x == s.root:
            continue
        if any(f.map[v] != v for v in s.vertices if v != x):
            continue
        p, c = s.parent(x), s.children(x)[0]
        # contracting x must give back the codomain exactly
        edges = set(e for e in s.edges if x not in e) | {edge_key(p, c)}
        if edges == set(f.codomain.edges):
            return (edge_key(p, c), x, f.map[x])
    return None


def detect_adding_edge(f: Morphism):
    """Witness (attachment vertex, new leaf) when f is an adding edge map."""
    if not f.rooted or not f.is_epi:
        return None
    w = _unique_merge_witness(f)
    if w is None:
        return None
    s = f.domain_tree
    for y in w:
        v = w[0] if y == w[1] else w[1]
        if f.map[y] != v or f.map[v] != v:
            continue
        if s.order_of(y) != 1 or y == s.root:
            continue
        if s.parent(y) != v:
            continue
        if any(f.map[u] != u for u in s.vertices if u != y):
            continue
        if set(e for e in s.edges if y not in e) == set(f.codomain.edges):
            return (v, y)
    return None


def is_elementary_light_confluent(f: Morphism):
    """Witness (v, C1, C2) satisfying the elementary light confluent clauses:
    f injective on each of two components C1, C2 of domain minus v, their
    images coincide with one component of codomain minus f(v), and f is
    injective elsewhere.  None when no witness exists."""
    if not f.rooted or not f.is_epi:
        return None
    dom = f.domain
    for v in dom.sorted_vertices:
        rest = frozenset(dom.vertices - {v})
        comps = components(dom, rest)
        if len(comps) < 2:
            continue
        fv = f.map[v]
        cod_comps = components(f.codomain,
                               frozenset(f.codomain.vertices - {fv}))
        for i in range(len(comps)):
            for j in range(i + 1, len(comps)):
                c1, c2 = comps[i], comps[j]
                img1, img2 = f.apply(c1), f.apply(c2)
                if img1 != img2 or img1 not in cod_comps:
                    continue
                if len(img1) != len(c1) or len(img2) != len(c2):
                    continue
                outside = dom.vertices - (c1 | c2)
                if len(f.apply(outside)) != len(outside):
                    continue
                return (v, c1, c2)
    return None


def restrict_to_component(f: Morphism, x_subset: Iterable[str],
                          y_component: Iterable[str]) -> Morphism:
    """Restrict a confluent f to one component of the preimage of a connected
    codomain subset; the restriction is confluent onto that subset."""
    xs = frozenset(x_subset)
    ys = frozenset(y_component)
    if len(components(f.codomain, xs)) != 1:
        raise MorphismError(["restriction subset is not connected"])
    pre = f.preimage(xs)
    if ys not in components(f.domain, pre):
        raise MorphismError(["not a component of the preimage"])
    dom = f.domain.induced(ys, root=None)
    cod = f.codomain.induced(xs, root=None)
    # keep rootedness only when the roots survive
    if f.domain.root in ys and f.codomain.root in xs:
        dom = f.domain.induced(ys)
        cod = f.codomain.induced(xs)
    return Morphism.epi(dom, cod, {v: f.map[v] for v in ys})
