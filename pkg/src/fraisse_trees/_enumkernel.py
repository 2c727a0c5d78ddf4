"""Backtracking enumeration kernel over integer-coded constraint problems.

One search routine powers every exhaustive map enumeration: epimorphism
listing, amalgam search through product graphs, and pinned extension search.
A problem instance is:

  - a domain visit order where each vertex carries the list of its
    earlier-visited neighbors,
  - a codomain compatibility matrix adjQ (equal-or-adjacent, possibly
    restricted further to encode edge-local constraints such as lightness),
  - an optional directed compatibility matrix ordQ for parent edges,
  - a per-vertex candidate mask (pins, fiber and end-vertex constraints),
  - up to two surjectivity layers, each a vertex classing plus an edge
    classing whose classes must all be covered, with optional full-assignment
    checks (fiber connectivity for monotone legs, per-edge component
    coverage for confluent legs) evaluated inside the search.

The hot loop is compiled with numba when available; the identical function
body running under plain numpy serves as the fallback.  Selection is via
FRAISSE_KERNEL=numba|numpy (default: numba when importable).
"""
import numpy as np

from . import config

try:
    from numba import njit
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - mirror lacks numba only in theory
    njit = None
    _HAVE_NUMBA = False

CHK_MONOTONE = 1
CHK_CONFLUENT = 2


def _search(nd, nc, prev_off, prev_nbr, prev_dir, adjQ, use_order, ordQ,
            cand, dom_adj,
            k1, cls1, m1, e1, chk1, earr1,
            k2, cls2, m2, e2, chk2, earr2,
            limit, out):
    """Count assignments satisfying all constraints; store up to out.shape[0].

    Returns the total number found (which may exceed the buffer capacity;
    callers compare against out.shape[0] and retry with a larger buffer).
    """
    max_out = out.shape[0]
    found = 0
    if nd == 0:
        if k1 == 0 and m1 == 0 and k2 == 0 and m2 == 0:
            return 1
        return 0
    assign = np.full(nd, -1, np.int64)
    cur = np.zeros(nd, np.int64)
    suffix_edges = np.zeros(nd + 1, np.int64)
    for v in range(nd - 1, -1, -1):
        suffix_edges[v] = suffix_edges[v + 1] + (prev_off[v + 1] - prev_off[v])
    c1cnt = np.zeros(k1 + 1, np.int64)
    ec1cnt = np.zeros(m1 + 1, np.int64)
    c2cnt = np.zeros(k2 + 1, np.int64)
    ec2cnt = np.zeros(m2 + 1, np.int64)
    visited = np.zeros(nd, np.int64)
    stk = np.zeros(nd, np.int64)
    ncov1 = 0
    necov1 = 0
    ncov2 = 0
    necov2 = 0
    pos = 0
    while True:
        backtrack = False
        if pos == nd:
            ok = (ncov1 == k1 and necov1 == m1
                  and ncov2 == k2 and necov2 == m2)
            if ok and (chk1 & CHK_MONOTONE) != 0:
                # every layer-1 fiber must be connected in the domain
                for kc in range(k1):
                    first = -1
                    cnt_in = 0
                    for u in range(nd):
                        if cls1[assign[u]] == kc:
                            cnt_in += 1
                            if first < 0:
                                first = u
                    if cnt_in > 1:
                        for u in range(nd):
                            visited[u] = 0
                        visited[first] = 1
                        stk[0] = first
                        sp = 1
                        reach = 1
                        while sp > 0:
                            sp -= 1
                            u = stk[sp]
                            for v in range(nd):
                                if (visited[v] == 0 and dom_adj[u, v] != 0
                                        and cls1[assign[v]] == kc):
                                    visited[v] = 1
                                    reach += 1
                                    stk[sp] = v
                                    sp += 1
                        if reach != cnt_in:
                            ok = False
                            break
            if ok and (chk2 & CHK_MONOTONE) != 0:
                for kc in range(k2):
                    first = -1
                    cnt_in = 0
                    for u in range(nd):
                        if cls2[assign[u]] == kc:
                            cnt_in += 1
                            if first < 0:
                                first = u
                    if cnt_in > 1:
                        for u in range(nd):
                            visited[u] = 0
                        visited[first] = 1
                        stk[0] = first
                        sp = 1
                        reach = 1
                        while sp > 0:
                            sp -= 1
                            u = stk[sp]
                            for v in range(nd):
                                if (visited[v] == 0 and dom_adj[u, v] != 0
                                        and cls2[assign[v]] == kc):
                                    visited[v] = 1
                                    reach += 1
                                    stk[sp] = v
                                    sp += 1
                        if reach != cnt_in:
                            ok = False
                            break
            if ok and (chk1 & CHK_CONFLUENT) != 0:
                # each component of each layer-1 edge preimage must carry an
                # edge mapping onto it
                for e in range(m1):
                    p = earr1[e, 0]
                    q = earr1[e, 1]
                    for u in range(nd):
                        visited[u] = 0
                    bad = False
                    for u0 in range(nd):
                        cu0 = cls1[assign[u0]]
                        if visited[u0] != 0 or (cu0 != p and cu0 != q):
                            continue
                        cross = False
                        visited[u0] = 1
                        stk[0] = u0
                        sp = 1
                        while sp > 0:
                            sp -= 1
                            u = stk[sp]
                            cu = cls1[assign[u]]
                            for v in range(nd):
                                if dom_adj[u, v] == 0:
                                    continue
                                cv = cls1[assign[v]]
                                if cv != p and cv != q:
                                    continue
                                if cv != cu:
                                    cross = True
                                if visited[v] == 0:
                                    visited[v] = 1
                                    stk[sp] = v
                                    sp += 1
                        if not cross:
                            bad = True
                            break
                    if bad:
                        ok = False
                        break
            if ok and (chk2 & CHK_CONFLUENT) != 0:
                for e in range(m2):
                    p = earr2[e, 0]
                    q = earr2[e, 1]
                    for u in range(nd):
                        visited[u] = 0
                    bad = False
                    for u0 in range(nd):
                        cu0 = cls2[assign[u0]]
                        if visited[u0] != 0 or (cu0 != p and cu0 != q):
                            continue
                        cross = False
                        visited[u0] = 1
                        stk[0] = u0
                        sp = 1
                        while sp > 0:
                            sp -= 1
                            u = stk[sp]
                            cu = cls2[assign[u]]
                            for v in range(nd):
                                if dom_adj[u, v] == 0:
                                    continue
                                cv = cls2[assign[v]]
                                if cv != p and cv != q:
                                    continue
                                if cv != cu:
                                    cross = True
                                if visited[v] == 0:
                                    visited[v] = 1
                                    stk[sp] = v
                                    sp += 1
                        if not cross:
                            bad = True
                            break
                    if bad:
                        ok = False
                        break
            if ok:
                if found < max_out:
                    for i in range(nd):
                        out[found, i] = assign[i]
                found += 1
                if limit > 0 and found >= limit:
                    return found
            backtrack = True
        elif ((k1 - ncov1) > (nd - pos) or (m1 - necov1) > suffix_edges[pos]
              or (k2 - ncov2) > (nd - pos)
              or (m2 - necov2) > suffix_edges[pos]):
            backtrack = True
        else:
            advanced = False
            img = cur[pos]
            while img < nc:
                ok = cand[pos, img] != 0
                if ok:
                    for j in range(prev_off[pos], prev_off[pos + 1]):
                        iu = assign[prev_nbr[j]]
                        if adjQ[iu, img] == 0:
                            ok = False
                            break
                        if use_order != 0:
                            d = prev_dir[j]
                            if d == 1 and ordQ[iu, img] == 0:
                                ok = False
                                break
                            if d == 2 and ordQ[img, iu] == 0:
                                ok = False
                                break
                if ok:
                    assign[pos] = img
                    if k1 > 0:
                        c = cls1[img]
                        c1cnt[c] += 1
                        if c1cnt[c] == 1:
                            ncov1 += 1
                    if k2 > 0:
                        c = cls2[img]
                        c2cnt[c] += 1
                        if c2cnt[c] == 1:
                            ncov2 += 1
                    for j in range(prev_off[pos], prev_off[pos + 1]):
                        iu = assign[prev_nbr[j]]
                        if iu != img:
                            if m1 > 0:
                                ec = e1[iu, img]
                                if ec >= 0:
                                    ec1cnt[ec] += 1
                                    if ec1cnt[ec] == 1:
                                        necov1 += 1
                            if m2 > 0:
                                ec = e2[iu, img]
                                if ec >= 0:
                                    ec2cnt[ec] += 1
                                    if ec2cnt[ec] == 1:
                                        necov2 += 1
                    cur[pos] = img + 1
                    pos += 1
                    if pos < nd:
                        cur[pos] = 0
                    advanced = True
                    break
                img += 1
            if not advanced:
                backtrack = True
        if backtrack:
            pos -= 1
            if pos < 0:
                return found
            img = assign[pos]
            if k1 > 0:
                c = cls1[img]
                c1cnt[c] -= 1
                if c1cnt[c] == 0:
                    ncov1 -= 1
            if k2 > 0:
                c = cls2[img]
                c2cnt[c] -= 1
                if c2cnt[c] == 0:
                    ncov2 -= 1
            for j in range(prev_off[pos], prev_off[pos + 1]):
                iu = assign[prev_nbr[j]]
                if iu != img:
                    if m1 > 0:
                        ec = e1[iu, img]
                        if ec >= 0:
                            ec1cnt[ec] -= 1
                            if ec1cnt[ec] == 0:
                                necov1 -= 1
                    if m2 > 0:
                        ec = e2[iu, img]
                        if ec >= 0:
                            ec2cnt[ec] -= 1
                            if ec2cnt[ec] == 0:
                                necov2 -= 1
            assign[pos] = -1


_search_numba = njit(cache=True)(_search) if _HAVE_NUMBA else None


class SurjectivityLayer:
    """Vertex and edge classes that a valid assignment must cover.

    checks is a bitmask: CHK_MONOTONE requires connected fibers in the
    domain, CHK_CONFLUENT requires each component of each edge preimage to
    carry an edge mapping onto that edge.
    """

    __slots__ = ("k", "cls", "m", "emat", "checks", "earr")

    def __init__(self, k, cls, m, emat, checks=0, earr=None):
        self.k = int(k)
        self.cls = np.asarray(cls, np.int64)
        self.m = int(m)
        self.emat = np.asarray(emat, np.int64)
        self.checks = int(checks)
        if earr is None:
            earr = np.zeros((max(self.m, 1), 2), np.int64)
        self.earr = np.asarray(earr, np.int64)

    @staticmethod
    def disabled(nc: int) -> "SurjectivityLayer":
        return SurjectivityLayer(0, np.zeros(nc, np.int64), 0,
                                 np.full((nc, nc), -1, np.int64))


class Problem:
    """Fully arrayed search instance ready for either backend."""

    __slots__ = ("nd", "nc", "prev_off", "prev_nbr", "prev_dir", "adjQ",
                 "use_order", "ordQ", "cand", "dom_adj", "layer1", "layer2")

    def __init__(self, nd, nc, prev_off, prev_nbr, prev_dir, adjQ,
                 use_order, ordQ, cand, layer1, layer2, dom_adj=None):
        self.nd = int(nd)
        self.nc = int(nc)
        self.prev_off = np.asarray(prev_off, np.int64)
        self.prev_nbr = np.asarray(prev_nbr, np.int64)
        self.prev_dir = np.asarray(prev_dir, np.int64)
        self.adjQ = np.asarray(adjQ, np.uint8)
        self.use_order = 1 if use_order else 0
        self.ordQ = np.asarray(ordQ, np.uint8)
        self.cand = np.asarray(cand, np.uint8)
        if dom_adj is None:
            dom_adj = np.zeros((self.nd, self.nd), np.uint8)
        self.dom_adj = np.asarray(dom_adj, np.uint8)
        self.layer1 = layer1 or SurjectivityLayer.disabled(self.nc)
        self.layer2 = layer2 or SurjectivityLayer.disabled(self.nc)


def _dispatch():
    backend = config.kernel_backend()
    if backend == "numba":
        if not _HAVE_NUMBA:
            raise config.CapExceeded(
                "FRAISSE_KERNEL=numba but numba is unavailable")
        return _search_numba
    return _search


def _invoke(fn, p: Problem, limit: int, out: np.ndarray) -> int:
    return int(fn(p.nd, p.nc, p.prev_off, p.prev_nbr, p.prev_dir, p.adjQ,
                  p.use_order, p.ordQ, p.cand, p.dom_adj,
                  p.layer1.k, p.layer1.cls, p.layer1.m, p.layer1.emat,
                  p.layer1.checks, p.layer1.earr,
                  p.layer2.k, p.layer2.cls, p.layer2.m, p.layer2.emat,
                  p.layer2.checks, p.layer2.earr,
                  limit, out))


def run(problem: Problem, limit: int = 0, max_out: int = 4096) -> np.ndarray:
    """All satisfying assignments as an array of shape (count, nd).

    With limit > 0 the search stops after that many solutions.  The buffer
    grows automatically when a full enumeration overflows it.
    """
    fn = _dispatch()
    while True:
        out = np.zeros((max_out, problem.nd), np.int64)
        total = _invoke(fn, problem, limit, out)
        if total <= max_out:
            return out[:total]
        max_out = int(total)


def count(problem: Problem) -> int:
    """Number of satisfying assignments without materializing them."""
    out = np.zeros((1, problem.nd), np.int64)
    return _invoke(_dispatch(), problem, 0, out)
