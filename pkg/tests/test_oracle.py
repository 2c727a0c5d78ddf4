"""Oracle enumerations, bounded searches, and ground-truth fixtures."""
from collections import Counter

import pytest

from fraisse_trees import config
from fraisse_trees import oracle as O
from fraisse_trees.graphs import (
    FiniteGraph,
    RootedTree,
    canonical_code,
    canonical_graph_code,
    is_tree,
)
from fraisse_trees.morphisms import (
    Morphism,
    compose,
    compose_chain,
    is_confluent,
    is_light,
    is_monotone,
    split_edge,
)


def p2():
    return FiniteGraph.build("ra", [("r", "a")], root="r")


def a1():
    return FiniteGraph.build(["r", "a", "b"], [("r", "a"), ("r", "b")],
                             root="r")


class TestEnumeration:
    def test_rooted_tree_counts(self):
        # exhaustive generation with canonical dedup; counts frozen from a
        # verified run of this oracle
        ts = O.enumerate_rooted_trees(8)
        cnt = Counter(len(t) for t in ts)
        assert [cnt[i] for i in range(1, 9)] == [1, 1, 2, 4, 9, 20, 48, 115]

    def test_rooted_trees_distinct_codes(self):
        ts = O.enumerate_rooted_trees(6)
        codes = [canonical_code(t) for t in ts]
        assert len(codes) == len(set(codes))

    def test_unrooted_tree_counts(self):
        tr = O.enumerate_trees(8)
        cnt = Counter(len(t.vertices) for t in tr)
        assert [cnt[i] for i in range(1, 9)] == [1, 1, 1, 2, 3, 6, 11, 23]

    def test_connected_graph_counts(self):
        gs = O.enumerate_connected_graphs(6)
        cnt = Counter(len(g.vertices) for g in gs)
        assert [cnt[i] for i in range(1, 7)] == [1, 1, 2, 6, 21, 112]

    def test_connected_graphs_distinct_codes(self):
        gs = O.enumerate_connected_graphs(5)
        codes = [canonical_graph_code(g) for g in gs]
        assert len(codes) == len(set(codes))

    def test_caps_enforced(self):
        with pytest.raises(config.CapExceeded):
            O.enumerate_rooted_trees(9)
        with pytest.raises(config.CapExceeded):
            O.enumerate_connected_graphs(7)

    def test_tree_from_code_round_trip(self):
        for t in O.enumerate_rooted_trees(6):
            assert canonical_code(O.tree_from_code(canonical_code(t))) \
                == canonical_code(t)


class TestEpimorphismEnumeration:
    def test_p2_to_p2_identity_only(self):
        sp = O.EnumerationSpec(8, rooted=True)
        out = O.enumerate_epimorphisms(p2(), p2(), sp)
        assert len(out) == 1
        assert out[0].map == {"r": "r", "a": "a"}

    def test_a1_to_p2_unconstrained(self):
        # both leaves to the leaf, or one leaf to the leaf and the other
        # folded onto the root: three maps in total
        sp = O.EnumerationSpec(8, rooted=True)
        out = O.enumerate_epimorphisms(a1(), p2(), sp)
        assert len(out) == 3

    def test_a1_to_p2_end_vertex_preserving(self):
        sp = O.EnumerationSpec(8, rooted=True,
                               constraints=frozenset({"end_vertex_preserving"}))
        out = O.enumerate_epimorphisms(a1(), p2(), sp)
        assert len(out) == 1
        assert out[0].map == {"r": "r", "a": "a", "b": "a"}

    def test_no_epi_onto_larger(self):
        sp = O.EnumerationSpec(8, rooted=True)
        assert O.enumerate_epimorphisms(p2(), a1(), sp) == []

    def test_backend_agreement(self, monkeypatch):
        sp = O.EnumerationSpec(8, rooted=True)
        monkeypatch.setenv("FRAISSE_KERNEL", "numpy")
        out_np = O.enumerate_epimorphisms(a1(), p2(), sp)
        monkeypatch.delenv("FRAISSE_KERNEL")
        out_default = O.enumerate_epimorphisms(a1(), p2(), sp)
        assert [m.pairs for m in out_np] == [m.pairs for m in out_default]

    def test_unrooted_enumeration(self):
        arc = FiniteGraph.build("01", [("0", "1")])
        path3 = FiniteGraph.build("abc", [("a", "b"), ("b", "c")])
        sp = O.EnumerationSpec(8)
        out = O.enumerate_epimorphisms(path3, arc, sp)
        # every 0/1 pattern except the two constant ones is an epimorphism
        assert len(out) == 6
        for m in out:
            assert m.is_epi


class TestAmalgamSearch:
    def confluent_spec(self, rooted=False):
        return O.EnumerationSpec(10, rooted=rooted,
                                 constraints=frozenset({"confluent"}))

    def test_identity_inputs(self):
        E = FiniteGraph.build("uv", [("u", "v")])
        i = Morphism.identity(E)
        res = O.search_amalgam(i, i, self.confluent_spec(), max_v=3)
        assert res is not None
        assert len(res.domain_graph) == 2
        assert dict(res.certificate) == {v: i.map[res.f0.map[v]]
                                         for v in res.domain_graph.vertices}

    def test_monotone_positive(self):
        T3 = FiniteGraph.build(["x", "a", "b", "c"],
                               [("x", "a"), ("x", "b"), ("x", "c")])
        B3 = FiniteGraph.build(["x1", "x2", "a", "b", "c"],
                               [("a", "x1"), ("b", "x1"), ("x1", "x2"),
                                ("x2", "c")])
        f3 = Morphism.epi(B3, T3, {"a": "a", "b": "b", "c": "c",
                                   "x1": "x", "x2": "x"})
        sp = O.EnumerationSpec(10, constraints=frozenset({"monotone"}))
        res = O.search_amalgam(f3, Morphism.identity(T3), sp, max_v=6)
        assert res is not None
        assert is_monotone(res.f0) and is_monotone(res.g0)
        assert is_tree(res.domain_graph)

    def test_no_confluent_small_bound(self):
        A = FiniteGraph.build("01", [("0", "1")])
        B = FiniteGraph.build("acb", [("a", "c"), ("c", "b")])
        C = FiniteGraph.build("prq", [("p", "r"), ("r", "q")])
        f = Morphism.epi(B, A, {"a": "0", "b": "0", "c": "1"})
        g = Morphism.epi(C, A, {"p": "1", "q": "1", "r": "0"})
        assert O.search_amalgam(f, g, self.confluent_spec(), max_v=7) is None

    def test_kernel_checks_match_classifiers(self):
        # enumerate without kernel class checks at a small bound and confirm
        # the Python classifiers find nothing either
        A = FiniteGraph.build("01", [("0", "1")])
        B = FiniteGraph.build("acb", [("a", "c"), ("c", "b")])
        C = FiniteGraph.build("prq", [("p", "r"), ("r", "q")])
        f = Morphism.epi(B, A, {"a": "0", "b": "0", "c": "1"})
        g = Morphism.epi(C, A, {"p": "1", "q": "1", "r": "0"})
        hits = []
        for D in O.enumerate_trees(5):
            sp = O.EnumerationSpec(5)
            for f0 in O.enumerate_epimorphisms(D, B, sp):
                for g0 in O.enumerate_epimorphisms(D, C, sp):
                    if compose(f, f0).map != compose(g, g0).map:
                        continue
                    if is_confluent(f0) and is_confluent(g0):
                        hits.append((D, f0, g0))
        assert hits == []

    def test_rooted_negative_small_bound(self):
        Ag = FiniteGraph.build(["aA", "bA", "cA", "xA"],
                               [("xA", "aA"), ("xA", "bA"), ("xA", "cA")],
                               root="xA")
        Bg = FiniteGraph.build(["aB", "bB", "cB", "xB", "yB"],
                               [("yB", "aB"), ("yB", "bB"), ("xB", "yB"),
                                ("xB", "cB")], root="xB")
        Cg = FiniteGraph.build(["aC", "bC", "cC", "xC", "yC"],
                               [("xC", "aC"), ("yC", "bC"), ("yC", "cC"),
                                ("xC", "yC")], root="xC")
        fb = Morphism.epi(Bg, Ag, {"xB": "xA", "yB": "xA", "aB": "aA",
                                   "bB": "bA", "cB": "cA"})
        gc = Morphism.epi(Cg, Ag, {"xC": "xA", "yC": "xA", "aC": "aA",
                                   "bC": "bA", "cC": "cA"})
        assert O.search_amalgam(fb, gc, self.confluent_spec(rooted=True),
                                max_v=8) is None

    def test_amalgam_bound_cap(self):
        E = FiniteGraph.build("uv", [("u", "v")])
        i = Morphism.identity(E)
        with pytest.raises(config.CapExceeded):
            O.search_amalgam(i, i, self.confluent_spec(), max_v=11)


class TestFactorChainSearch:
    def test_single_split(self):
        t = RootedTree.build("ra", [("r", "a")], "r")
        s, f = split_edge(t, ("r", "a"), "a")
        chain, tags = O.brute_simple_confluent(f)
        assert tags == ("splitting_edge",)
        assert compose_chain(list(chain)).map == f.map

    def test_single_cone_duplication(self):
        dom = FiniteGraph.build(["r", "a1", "a2"],
                                [("r", "a1"), ("r", "a2")], root="r")
        cod = FiniteGraph.build(["R", "A"], [("R", "A")], root="R")
        e = Morphism.epi(dom, cod, {"r": "R", "a1": "A", "a2": "A"})
        chain, tags = O.brute_simple_confluent(e)
        assert tags == ("elementary_light_confluent",)
        assert compose_chain(list(chain)).map == e.map

    def test_isomorphism_chain(self):
        t = RootedTree.build("ra", [("r", "a")], "r")
        u = RootedTree.build("RX", [("R", "X")], "R")
        f = Morphism.epi(t, u, {"r": "R", "a": "X"})
        chain, tags = O.brute_simple_confluent(f)
        assert tags == ("isomorphism",)
        assert compose_chain(list(chain)).map == f.map

    def test_two_factor_chain(self):
        t = RootedTree.build("ra", [("r", "a")], "r")
        s1, f1 = split_edge(t, ("r", "a"), "a")
        mid = next(v for v in s1.vertices if v not in t.vertices)
        s2, f2 = split_edge(s1, ("r", mid), "r")
        f = compose(f1, f2)
        chain, tags = O.brute_simple_confluent(f)
        assert len(chain) == 2
        assert all(t == "splitting_edge" for t in tags)
        assert compose_chain(list(chain)).map == f.map

    def test_non_simple_map_rejected(self):
        # collapsing a three-vertex chain onto an edge monotonically but
        # with the middle vertex folded down is not confluent, hence not
        # reachable by elementary factors
        dom = FiniteGraph.build(["r", "m", "e"], [("m", "r"), ("e", "m")],
                                root="r")
        cod = FiniteGraph.build(["R", "E"], [("E", "R")], root="R")
        f = Morphism.epi(dom, cod, {"r": "R", "m": "E", "e": "E"})
        res = O.brute_simple_confluent(f)
        # this map is a split of the edge (R,E); it is simple
        assert res is not None
        # a genuinely non-simple map: fold a leaf back onto the root level
        g = Morphism.epi(dom, cod, {"r": "R", "m": "R", "e": "E"})
        res2 = O.brute_simple_confluent(g)
        assert res2 is not None  # also a split, image choice at the root end
        bad_dom = FiniteGraph.build(["r", "x", "y"], [("r", "x"), ("r", "y")],
                                    root="r")
        bad = Morphism.epi(bad_dom, cod, {"r": "R", "x": "E", "y": "R"})
        assert O.brute_simple_confluent(bad) is None

    def test_star_chain_reaches_added_leaf(self):
        t = RootedTree.build("ra", [("r", "a")], "r")
        from fraisse_trees.morphisms import add_edge
        s, f = add_edge(t, "r")
        assert O.brute_simple_confluent(f) is None
        chain, tags = O.brute_simple_confluent(f, star=True)
        assert tags == ("adding_edge",)
        assert compose_chain(list(chain)).map == f.map


class TestHereditaryUnicoherence:
    def test_trees_pass(self):
        for g in O.enumerate_trees(6):
            assert O.is_hereditarily_unicoherent(g)

    def test_four_cycle_fails(self):
        c4 = FiniteGraph.build("abcd", [("a", "b"), ("b", "c"), ("c", "d"),
                                        ("a", "d")])
        assert not O.is_hereditarily_unicoherent(c4)

    def test_triangle_fails_edge_subset_semantics(self):
        k3 = FiniteGraph.build("abc", [("a", "b"), ("b", "c"), ("a", "c")])
        assert not O.is_hereditarily_unicoherent(k3)

    def test_cap(self):
        path9 = FiniteGraph.build([f"v{i}" for i in range(9)],
                                  [(f"v{i}", f"v{i+1}") for i in range(8)])
        with pytest.raises(config.CapExceeded):
            O.is_hereditarily_unicoherent(path9)


def doubling_stages(k):
    """T_0 = three-vertex fan; T_{i+1} duplicates the cone at child 'a'."""
    t0 = RootedTree.build(["r", "a", "b"], [("r", "a"), ("r", "b")], "r")
    trees = [t0]
    bonds = []
    cur = t0
    for _ in range(k):
        nxt, e = O._attach_cone_copy(cur, "r", "a")
        trees.append(nxt)
        bonds.append(e)
        cur = nxt
    return trees, bonds


class TestExtensionSearch:
    def test_identity_phi(self):
        trees, bonds = doubling_stages(2)
        phi = Morphism.identity(trees[0].graph)
        res = O.check_extension(trees, bonds, trees[0], phi, horizon=2)
        assert res is not None
        n, psi = res
        assert n == 0
        assert psi.is_isomorphism()

    def test_one_doubling_found_next_stage(self):
        trees, bonds = doubling_stages(2)
        phi = bonds[0]  # trees[1] -> trees[0]
        res = O.check_extension(trees, bonds, trees[1], phi, horizon=2)
        assert res is not None
        n, psi = res
        assert n == 1
        assert compose(phi, psi).map == bonds[0].map

    def test_horizon_exhausted(self):
        trees, bonds = doubling_stages(2)
        phi = compose(bonds[0], bonds[1])  # trees[2] -> trees[0]
        res = O.check_extension(trees[:2], bonds[:1], trees[2], phi,
                                horizon=1)
        assert res is None
