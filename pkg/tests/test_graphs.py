"""Graph core: trees, rooted order, canonical codes, serialization."""
import json

import pytest

from fraisse_trees.graphs import (
    FiniteGraph,
    NotATreeError,
    RootedTree,
    branches,
    canonical_code,
    canonical_graph_code,
    components,
    edge_key,
    fresh_id,
    graph_isomorphic,
    is_arc,
    is_regular,
    is_tree,
    iso_rooted,
    regular_tree,
    rooted_isomorphism,
)


def path(n, root=None):
    vs = [f"v{i}" for i in range(n)]
    return FiniteGraph.build(vs, [(vs[i], vs[i + 1]) for i in range(n - 1)], root)


def cycle(n):
    vs = [f"c{i}" for i in range(n)]
    return FiniteGraph.build(vs, [(vs[i], vs[(i + 1) % n]) for i in range(n)])


class TestFiniteGraph:
    def test_edge_normalization(self):
        g = FiniteGraph.build("ab", [("b", "a")])
        assert g.edges == frozenset({("a", "b")})
        assert g.has_edge("a", "b") and g.has_edge("b", "a")

    def test_reflexive_edges_rejected_in_storage(self):
        with pytest.raises(ValueError):
            edge_key("a", "a")
        with pytest.raises(ValueError):
            FiniteGraph.build("ab", [("a", "a")])

    def test_edge_endpoints_must_exist(self):
        with pytest.raises(ValueError):
            FiniteGraph.build("ab", [("a", "c")])

    def test_root_must_be_vertex(self):
        with pytest.raises(ValueError):
            FiniteGraph.build("ab", [("a", "b")], root="z")

    def test_empty_and_singleton_are_valid(self):
        e = FiniteGraph.build([], [])
        s = FiniteGraph.build(["x"], [])
        assert len(e) == 0 and len(s) == 1
        assert s.is_connected()

    def test_degree_and_neighbors(self):
        g = FiniteGraph.build("abc", [("a", "b"), ("b", "c")])
        assert g.order_of("b") == 2
        assert g.neighbors("b") == ("a", "c")

    def test_components_ordered_by_least_vertex(self):
        g = FiniteGraph.build("abcd", [("c", "d")])
        cs = components(g, g.vertices)
        assert cs == (frozenset({"a"}), frozenset({"b"}), frozenset({"c", "d"}))

    def test_induced_subgraph(self):
        g = path(4)
        h = g.induced({"v0", "v1", "v3"})
        assert h.edges == frozenset({("v0", "v1")})
        assert not h.is_connected()

    def test_json_round_trip(self):
        g = path(3, root="v0")
        clone = FiniteGraph.from_json(g.to_json())
        assert clone == g
        obj = json.loads(g.to_json())
        assert obj["root"] == "v0"
        assert all(a < b for a, b in obj["edges"])


class TestTreeAndArc:
    def test_path_is_tree_and_arc(self):
        g = path(4)
        assert is_tree(g)
        assert is_arc(g) == ("v0", "v3")

    def test_single_vertex_not_an_arc(self):
        assert is_arc(FiniteGraph.build(["x"], [])) is None

    def test_single_edge_is_arc(self):
        assert is_arc(FiniteGraph.build("ab", [("a", "b")])) == ("a", "b")

    def test_cycle_not_tree(self):
        assert not is_tree(cycle(4))
        assert is_arc(cycle(4)) is None

    def test_branching_tree_not_arc(self):
        g = FiniteGraph.build("rabc", [("r", "a"), ("r", "b"), ("r", "c")])
        assert is_tree(g)
        assert is_arc(g) is None

    def test_disconnected_not_tree(self):
        assert not is_tree(FiniteGraph.build("ab", []))

    def test_rooted_tree_rejects_cycles(self):
        g = cycle(3)
        with pytest.raises(NotATreeError):
            RootedTree(FiniteGraph(g.vertices, g.edges, "c0"))


class TestRootedOrder:
    def tripod(self):
        # root r, ends a and long leg b-c
        return RootedTree.build("rabc", [("r", "a"), ("r", "b"), ("b", "c")], "r")

    def test_parent_children(self):
        t = self.tripod()
        assert t.parent("r") is None
        assert t.parent("c") == "b"
        assert t.children("r") == ("a", "b")
        assert t.children("c") == ()

    def test_heights(self):
        t = self.tripod()
        assert t.ht("r") == 0 and t.ht("c") == 2
        assert t.height == 2

    def test_order_relation(self):
        t = self.tripod()
        assert t.le("r", "c") and t.lt("r", "c")
        assert t.le("b", "c")
        assert not t.le("a", "c") and not t.le("c", "a")
        assert t.comparable("r", "a")
        assert not t.comparable("a", "b")

    def test_cones(self):
        t = self.tripod()
        assert t.cone("b") == frozenset({"c"})
        assert t.cone_closed("b") == frozenset({"b", "c"})
        assert t.cone("r") == frozenset({"a", "b", "c"})
        assert t.cone_components("r") == (frozenset({"a"}), frozenset({"b", "c"}))

    def test_sord(self):
        t = self.tripod()
        assert t.sord("r") == 2
        assert t.sord("b") == 1
        assert t.sord("c") == 0
        assert t.tree_sord == 2

    def test_ends_exclude_root(self):
        # two-vertex tree: root has order 1 but is not an end
        t = RootedTree.build("rx", [("r", "x")], "r")
        assert t.ends == ("x",)
        assert not t.is_end("r")

    def test_kind_and_profile(self):
        t = self.tripod()
        assert t.kind("a") == "end"
        assert t.kind("b") == "ordinary"
        assert t.kind("r") == "root"
        p = t.profile("b")
        assert (p.ord, p.ht, p.sord) == (2, 1, 1)

    def test_arcs(self):
        t = self.tripod()
        assert t.path_from_root("c") == ("r", "b", "c")
        assert t.arc("a", "c") == ("a", "r", "b", "c")
        assert t.arc("c", "a") == ("c", "b", "r", "a")

    def test_branches_sorted(self):
        t = self.tripod()
        assert branches(t) == (("r", "a"), ("r", "b", "c"))

    def test_relabel(self):
        t = self.tripod()
        u = t.relabeled({"r": "R", "a": "A", "b": "B", "c": "C"})
        assert u.root == "R" and u.has_edge("B", "C")
        assert iso_rooted(t, u)


class TestRegularTrees:
    def test_regular_tree_shape(self):
        t = regular_tree(2, 3)
        assert len(t) == 1 + 3 + 9
        assert t.height == 2 and t.tree_sord == 3
        assert is_regular(t)

    def test_height_85(self):
        t = regular_tree(3, 4)
        assert len(t) == 85
        assert is_regular(t)

    def test_irregular_detected(self):
        t = RootedTree.build("rabc", [("r", "a"), ("r", "b"), ("b", "c")], "r")
        assert not is_regular(t)  # ends at different heights

    def test_uneven_sord_detected(self):
        t = RootedTree.build("rabxy", [("r", "a"), ("r", "b"),
                                       ("a", "x"), ("a", "y")], "r")
        assert not is_regular(t)  # b has one child short


class TestCanonicalCodes:
    def test_shape_codes_distinguish(self):
        chain = RootedTree.build("abc", [("a", "b"), ("b", "c")], "a")
        star = RootedTree.build("abc", [("a", "b"), ("a", "c")], "a")
        assert canonical_code(chain) != canonical_code(star)

    def test_iso_rooted_ignores_labels(self):
        t = RootedTree.build("rab", [("r", "a"), ("a", "b")], "r")
        u = RootedTree.build("xyz", [("z", "y"), ("y", "x")], "z")
        assert iso_rooted(t, u)
        m = rooted_isomorphism(t, u)
        assert m["r"] == "z" and m["a"] == "y" and m["b"] == "x"

    def test_root_placement_matters(self):
        mid = RootedTree.build("abc", [("a", "b"), ("b", "c")], "b")
        end = RootedTree.build("abc", [("a", "b"), ("b", "c")], "a")
        assert not iso_rooted(mid, end)

    def test_graph_code_handles_cycles(self):
        c = cycle(4)
        relabel = FiniteGraph.build("wxyz", [("w", "x"), ("x", "y"),
                                             ("y", "z"), ("w", "z")])
        assert canonical_graph_code(c) == canonical_graph_code(relabel)
        assert graph_isomorphic(c, relabel)

    def test_graph_code_separates_c4_k4(self):
        k4 = FiniteGraph.build("abcd", [("a", "b"), ("a", "c"), ("a", "d"),
                                        ("b", "c"), ("b", "d"), ("c", "d")])
        assert canonical_graph_code(cycle(4)) != canonical_graph_code(k4)

    def test_rooted_graph_code_fixes_root(self):
        a = FiniteGraph.build("abc", [("a", "b"), ("b", "c")], root="a")
        b = FiniteGraph.build("abc", [("a", "b"), ("b", "c")], root="b")
        assert canonical_graph_code(a) != canonical_graph_code(b)


def test_fresh_id_avoids_collisions():
    got = fresh_id("x", {"x", "x'"})
    assert got not in {"x", "x'"}
