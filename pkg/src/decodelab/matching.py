"""Exact minimum-weight perfect matching on small weighted graphs.

The core solver is an O(V^3) primal-dual blossom algorithm for maximum-weight
matching (Galil's formulation), run in maximum-cardinality mode on inverted
weights. All arithmetic stays in integers when the input weights are integers,
so there is no floating-point tie ambiguity.

Among equal-weight optima, `min_weight_perfect_matching` returns the
lexicographically smallest sorted pair list; the tie-break is resolved by
re-solving reduced instances, which is cheap unless the instance is tie-heavy.
"""

from __future__ import annotations

from dataclasses import dataclass

Edge = tuple[int, int, float]


class MatchingError(ValueError):
    """Raised when no perfect matching exists (or the input is malformed)."""


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with u < v edges, no self-loops, no parallel edges."""

    node_count: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if self.node_count < 0:
            raise MatchingError("node_count must be non-negative")
        seen = set()
        for u, v, w in self.edges:
            if not (0 <= u < v < self.node_count):
                raise MatchingError(f"bad edge ({u}, {v}): need 0 <= u < v < node_count")
            if (u, v) in seen:
                raise MatchingError(f"duplicate edge ({u}, {v})")
            if not (w >= 0 and w < float("inf")):
                raise MatchingError(f"edge ({u}, {v}) weight must be finite and >= 0")
            seen.add((u, v))

    @classmethod
    def from_edges(cls, node_count: int, edges) -> "WeightedGraph":
        return cls(node_count, tuple((int(u), int(v), w) for u, v, w in edges))


def maximum_weight_matching(edges: list[Edge], nvertex: int, maxcardinality: bool = False,
                            with_certificate: bool = False):
    """Blossom algorithm; returns mate[v] = matched partner or -1.

    Edges are (i, j, weight) with i != j; at most one edge per pair. With
    maxcardinality the matching has maximum cardinality first and maximum
    weight among those. With with_certificate, also returns a per-edge
    "tight" flag from the final duals: a non-tight edge belongs to no
    optimal maximum-cardinality matching.
    """
    nedge = len(edges)
    if nvertex == 0:
        return ([], []) if with_certificate else []

    integer_weights = all(isinstance(w, int) for (_, _, w) in edges)
    maxweight = max([w for (_, _, w) in edges], default=0)
    maxweight = max(0, maxweight)

    # endpoint[p] is the vertex at endpoint p of edge p//2 (p%2 picks the side).
    endpoint = [edges[p // 2][p % 2] for p in range(2 * nedge)]
    # neighbend[v] lists the remote endpoints of edges incident to v.
    neighbend = [[] for _ in range(nvertex)]
    for k, (i, j, _w) in enumerate(edges):
        neighbend[i].append(2 * k + 1)
        neighbend[j].append(2 * k)

    # mate[v] is the remote endpoint of v's matched edge, or -1.
    mate = nvertex * [-1]
    # Blossom bookkeeping: ids 0..nvertex-1 are trivial (vertex) blossoms,
    # ids nvertex..2*nvertex-1 are allocated to nontrivial blossoms.
    label = (2 * nvertex) * [0]
    labelend = (2 * nvertex) * [-1]
    inblossom = list(range(nvertex))
    blossomparent = (2 * nvertex) * [-1]
    blossomchilds = (2 * nvertex) * [None]
    blossombase = list(range(nvertex)) + nvertex * [-1]
    blossomendps = (2 * nvertex) * [None]
    bestedge = (2 * nvertex) * [-1]
    blossombestedges = (2 * nvertex) * [None]
    unusedblossoms = list(range(nvertex, 2 * nvertex))
    # Vertex duals are premultiplied by 2 so integer inputs stay integer.
    dualvar = nvertex * [maxweight] + nvertex * [0]
    allowedge = nedge * [False]
    queue = []

    def slack(k):
        i, j, wt = edges[k]
        return dualvar[i] + dualvar[j] - 2 * wt

    def blossom_leaves(b):
        if b < nvertex:
            yield b
        else:
            for t in blossomchilds[b]:
                if t < nvertex:
                    yield t
                else:
                    yield from blossom_leaves(t)

    def assign_label(w, t, p):
        b = inblossom[w]
        label[w] = label[b] = t
        labelend[w] = labelend[b] = p
        bestedge[w] = bestedge[b] = -1
        if t == 1:
            queue.extend(blossom_leaves(b))
        elif t == 2:
            base = blossombase[b]
            assign_label(endpoint[mate[base]], 1, mate[base] ^ 1)

    def scan_blossom(v, w):
        # Trace back from both endpoints; either paths meet (new blossom base)
        # or both hit single vertices (augmenting path, return -1).
        path = []
        base = -1
        while v != -1 or w != -1:
            b = inblossom[v]
            if label[b] & 4:
                base = blossombase[b]
                break
            path.append(b)
            label[b] = 5
            if labelend[b] == -1:
                v = -1
            else:
                v = endpoint[labelend[b]]
                b = inblossom[v]
                v = endpoint[labelend[b]]
            if w != -1:
                v, w = w, v
        for b in path:
            label[b] = 1
        return base

    def add_blossom(base, k):
        (v, w, _wt) = edges[k]
        bb = inblossom[base]
        bv = inblossom[v]
        bw = inblossom[w]
        b = unusedblossoms.pop()
        blossombase[b] = base
        blossomparent[b] = -1
        blossomparent[bb] = b
        blossomchilds[b] = path = []
        blossomendps[b] = endps = []
        while bv != bb:
            blossomparent[bv] = b
            path.append(bv)
            endps.append(labelend[bv])
            v = endpoint[labelend[bv]]
            bv = inblossom[v]
        path.append(bb)
        path.reverse()
        endps.reverse()
        endps.append(2 * k)
        while bw != bb:
            blossomparent[bw] = b
            path.append(bw)
            endps.append(labelend[bw] ^ 1)
            w = endpoint[labelend[bw]]
            bw = inblossom[w]
        label[b] = 1
        labelend[b] = labelend[bb]
        dualvar[b] = 0
        for v in blossom_leaves(b):
            if label[inblossom[v]] == 2:
                queue.append(v)
            inblossom[v] = b
        # Combine the sub-blossoms' least-slack edge lists.
        bestedgeto = (2 * nvertex) * [-1]
        for bv in path:
            if blossombestedges[bv] is None:
                nblists = [[p // 2 for p in neighbend[leaf]] for leaf in blossom_leaves(bv)]
            else:
                nblists = [blossombestedges[bv]]
            for nblist in nblists:
                for k2 in nblist:
                    (i, j, _w2) = edges[k2]
                    if inblossom[j] == b:
                        i, j = j, i
                    bj = inblossom[j]
                    if (bj != b and label[bj] == 1
                            and (bestedgeto[bj] == -1 or slack(k2) < slack(bestedgeto[bj]))):
                        bestedgeto[bj] = k2
            blossombestedges[bv] = None
            bestedge[bv] = -1
        blossombestedges[b] = [k2 for k2 in bestedgeto if k2 != -1]
        bestedge[b] = -1
        for k2 in blossombestedges[b]:
            if bestedge[b] == -1 or slack(k2) < slack(bestedge[b]):
                bestedge[b] = k2

    def expand_blossom(b, endstage):
        for s in blossomchilds[b]:
            blossomparent[s] = -1
            if s < nvertex:
                inblossom[s] = s
            elif endstage and dualvar[s] == 0:
                expand_blossom(s, endstage)
            else:
                for v in blossom_leaves(s):
                    inblossom[v] = s
        # Expanding a T-blossom mid-stage: relabel the even-path sub-blossoms.
        if (not endstage) and label[b] == 2:
            entrychild = inblossom[endpoint[labelend[b] ^ 1]]
            j = blossomchilds[b].index(entrychild)
            if j & 1:
                j -= len(blossomchilds[b])
                jstep = 1
                endptrick = 0
            else:
                jstep = -1
                endptrick = 1
            p = labelend[b]
            while j != 0:
                label[endpoint[p ^ 1]] = 0
                label[endpoint[blossomendps[b][j - endptrick] ^ endptrick ^ 1]] = 0
                assign_label(endpoint[p ^ 1], 2, p)
                allowedge[blossomendps[b][j - endptrick] // 2] = True
                j += jstep
                p = blossomendps[b][j - endptrick] ^ endptrick
                allowedge[p // 2] = True
                j += jstep
            bv = blossomchilds[b][j]
            label[endpoint[p ^ 1]] = label[bv] = 2
            labelend[endpoint[p ^ 1]] = labelend[bv] = p
            bestedge[bv] = -1
            j += jstep
            while blossomchilds[b][j] != entrychild:
                bv = blossomchilds[b][j]
                if label[bv] == 1:
                    j += jstep
                    continue
                for v in blossom_leaves(bv):
                    if label[v] != 0:
                        break
                if label[v] != 0:
                    label[v] = 0
                    label[endpoint[mate[blossombase[bv]]]] = 0
                    assign_label(v, 2, labelend[v])
                j += jstep
        label[b] = labelend[b] = -1
        blossomchilds[b] = blossomendps[b] = None
        blossombase[b] = -1
        blossombestedges[b] = None
        bestedge[b] = -1
        unusedblossoms.append(b)

    def augment_blossom(b, v):
        t = v
        while blossomparent[t] != b:
            t = blossomparent[t]
        if t >= nvertex:
            augment_blossom(t, v)
        i = j = blossomchilds[b].index(t)
        if i & 1:
            j -= len(blossomchilds[b])
            jstep = 1
            endptrick = 0
        else:
            jstep = -1
            endptrick = 1
        while j != 0:
            j += jstep
            t = blossomchilds[b][j]
            p = blossomendps[b][j - endptrick] ^ endptrick
            if t >= nvertex:
                augment_blossom(t, endpoint[p])
            j += jstep
            t = blossomchilds[b][j]
            if t >= nvertex:
                augment_blossom(t, endpoint[p ^ 1])
            mate[endpoint[p]] = p ^ 1
            mate[endpoint[p ^ 1]] = p
        blossomchilds[b] = blossomchilds[b][i:] + blossomchilds[b][:i]
        blossomendps[b] = blossomendps[b][i:] + blossomendps[b][:i]
        blossombase[b] = blossombase[blossomchilds[b][0]]

    def augment_matching(k):
        (v, w, _wt) = edges[k]
        for (s, p) in ((v, 2 * k + 1), (w, 2 * k)):
            while True:
                bs = inblossom[s]
                if bs >= nvertex:
                    augment_blossom(bs, s)
                mate[s] = p
                if labelend[bs] == -1:
                    break
                t = endpoint[labelend[bs]]
                bt = inblossom[t]
                s = endpoint[labelend[bt]]
                j = endpoint[labelend[bt] ^ 1]
                if bt >= nvertex:
                    augment_blossom(bt, j)
                mate[j] = labelend[bt]
                p = labelend[bt] ^ 1

    for _stage in range(nvertex):
        label[:] = (2 * nvertex) * [0]
        bestedge[:] = (2 * nvertex) * [-1]
        for b in range(nvertex, 2 * nvertex):
            blossombestedges[b] = None
        allowedge[:] = nedge * [False]
        queue[:] = []
        for v in range(nvertex):
            if mate[v] == -1 and label[inblossom[v]] == 0:
                assign_label(v, 1, -1)

        augmented = False
        while True:
            while queue and not augmented:
                v = queue.pop()
                for p in neighbend[v]:
                    k = p // 2
                    w = endpoint[p]
                    if inblossom[v] == inblossom[w]:
                        continue
                    if not allowedge[k]:
                        kslack = slack(k)
                        if kslack <= 0:
                            allowedge[k] = True
                    if allowedge[k]:
                        if label[inblossom[w]] == 0:
                            assign_label(w, 2, p ^ 1)
                        elif label[inblossom[w]] == 1:
                            base = scan_blossom(v, w)
                            if base >= 0:
                                add_blossom(base, k)
                            else:
                                augment_matching(k)
                                augmented = True
                                break
                        elif label[w] == 0:
                            label[w] = 2
                            labelend[w] = p ^ 1
                    elif label[inblossom[w]] == 1:
                        b = inblossom[v]
                        if bestedge[b] == -1 or kslack < slack(bestedge[b]):
                            bestedge[b] = k
                    elif label[w] == 0:
                        if bestedge[w] == -1 or kslack < slack(bestedge[w]):
                            bestedge[w] = k
            if augmented:
                break

            # No augmenting path: pump slack out of the duals.
            deltatype = -1
            delta = deltaedge = deltablossom = None
            if not maxcardinality:
                deltatype = 1
                delta = min(dualvar[:nvertex])
            for v in range(nvertex):
                if label[inblossom[v]] == 0 and bestedge[v] != -1:
                    d = slack(bestedge[v])
                    if deltatype == -1 or d < delta:
                        delta = d
                        deltatype = 2
                        deltaedge = bestedge[v]
            for b in range(2 * nvertex):
                if blossomparent[b] == -1 and label[b] == 1 and bestedge[b] != -1:
                    kslack = slack(bestedge[b])
                    d = kslack // 2 if integer_weights else kslack / 2.0
                    if deltatype == -1 or d < delta:
                        delta = d
                        deltatype = 3
                        deltaedge = bestedge[b]
            for b in range(nvertex, 2 * nvertex):
                if (blossombase[b] >= 0 and blossomparent[b] == -1 and label[b] == 2
                        and (deltatype == -1 or dualvar[b] < delta)):
                    delta = dualvar[b]
                    deltatype = 4
                    deltablossom = b
            if deltatype == -1:
                # Max-cardinality optimum reached; final update for verifiability.
                deltatype = 1
                delta = max(0, min(dualvar[:nvertex]))

            for v in range(nvertex):
                lab = label[inblossom[v]]
                if lab == 1:
                    dualvar[v] -= delta
                elif lab == 2:
                    dualvar[v] += delta
            for b in range(nvertex, 2 * nvertex):
                if blossombase[b] >= 0 and blossomparent[b] == -1:
                    if label[b] == 1:
                        dualvar[b] += delta
                    elif label[b] == 2:
                        dualvar[b] -= delta

            if deltatype == 1:
                break
            elif deltatype == 2:
                allowedge[deltaedge] = True
                (i, j, _wt) = edges[deltaedge]
                if label[inblossom[i]] == 0:
                    i, j = j, i
                queue.append(i)
            elif deltatype == 3:
                allowedge[deltaedge] = True
                (i, j, _wt) = edges[deltaedge]
                queue.append(i)
            else:
                expand_blossom(deltablossom, False)

        if not augmented:
            break

        for b in range(nvertex, 2 * nvertex):
            if (blossomparent[b] == -1 and blossombase[b] >= 0
                    and label[b] == 1 and dualvar[b] == 0):
                expand_blossom(b, True)

    result = [endpoint[mate[v]] if mate[v] >= 0 else -1 for v in range(nvertex)]
    if not with_certificate:
        return result

    # Reduced slack per edge, counting duals of blossoms containing both
    # endpoints. Complementary slackness: an edge with positive slack is in
    # no optimal (max-cardinality) matching.
    def ancestors(v):
        chain = []
        b = blossomparent[v]
        while b != -1:
            chain.append(b)
            b = blossomparent[b]
        return chain

    tol = 0 if integer_weights else 1e-9 * max(1, maxweight)
    tight = []
    for k, (i, j, _w) in enumerate(edges):
        s = slack(k)
        common = set(ancestors(i)) & set(ancestors(j))
        for b in common:
            s += 2 * dualvar[b]
        tight.append(s <= tol)
    return result, tight


def _min_perfect_mate(node_count: int, edges: list[Edge], with_certificate: bool = False):
    """mate array of a min-weight perfect matching, or None when not perfect."""
    empty_fail = (None, None) if with_certificate else None
    if node_count % 2:
        return empty_fail
    if node_count == 0:
        return ([], []) if with_certificate else []
    if not edges:
        return empty_fail
    top = max(w for (_, _, w) in edges) + 1
    inverted = [(u, v, top - w) for (u, v, w) in edges]
    out = maximum_weight_matching(inverted, node_count, maxcardinality=True,
                                  with_certificate=with_certificate)
    mate = out[0] if with_certificate else out
    if any(p < 0 for p in mate):
        return empty_fail
    return out


def _mate_pairs(mate: list[int]) -> list[tuple[int, int]]:
    return sorted((v, p) for v, p in enumerate(mate) if p > v)


def _matching_weight(pairs, wlookup) -> float:
    return sum(wlookup[p] for p in pairs)


def min_weight_perfect_matching(g: WeightedGraph) -> list[tuple[int, int]]:
    """Perfect matching of minimum total weight, as a sorted list of (u, v) pairs.

    The node count must be even and a perfect matching must exist, else
    MatchingError. Among equal-weight optima, the lexicographically smallest
    sorted pair list is returned.
    """
    n = g.node_count
    if n % 2:
        raise MatchingError(f"perfect matching needs an even node count, got {n}")
    if n == 0:
        return []

    wlookup = {(u, v): w for (u, v, w) in g.edges}
    # Tight edges only: an edge with positive reduced slack is in no optimal
    # perfect matching, so only tight edges are tie-break candidates.
    mate, tight = _min_perfect_mate(n, list(g.edges), with_certificate=True)
    if mate is None:
        raise MatchingError("graph has no perfect matching")
    tight_adjacency = {v: [] for v in range(n)}
    tight_edges = []
    for k, (u, v, w) in enumerate(g.edges):
        if tight[k]:
            tight_adjacency[u].append(v)
            tight_adjacency[v].append(u)
            tight_edges.append((u, v, w))
    current = {v: p for v, p in enumerate(mate)}
    remaining_total = _matching_weight(_mate_pairs(mate), wlookup)

    # Refine toward the lexicographically smallest optimal pair list: fix the
    # smallest unmatched node's cheapest viable partner, verified by re-solving
    # the reduced instance at unchanged optimal weight.
    remaining = set(range(n))
    result = []
    while remaining:
        u = min(remaining)
        partner = current[u]
        for x in sorted(tight_adjacency[u]):
            if x >= partner:
                break
            if x not in remaining:
                continue
            w_ux = wlookup[(u, x) if u < x else (x, u)]
            rest = sorted(remaining - {u, x})
            relabel = {node: i for i, node in enumerate(rest)}
            # Optimal matchings only use tight edges, so verifying on the
            # sparse tight subgraph is lossless and much faster.
            sub_edges = [(relabel[a], relabel[b], w) for (a, b, w) in tight_edges
                         if a in relabel and b in relabel]
            sub_mate = _min_perfect_mate(len(rest), sub_edges)
            if sub_mate is None:
                continue
            sub_pairs = [(rest[a], rest[b]) for a, b in _mate_pairs(sub_mate)]
            if w_ux + _matching_weight(sub_pairs, wlookup) == remaining_total:
                partner = x
                current = {u: x, x: u}
                for a, b in sub_pairs:
                    current[a] = b
                    current[b] = a
                break
        result.append((u, partner))
        remaining.discard(u)
        remaining.discard(partner)
        remaining_total -= wlookup[(u, partner) if u < partner else (partner, u)]
    return result


def matching_total_weight(g: WeightedGraph, pairs) -> float:
    wlookup = {(u, v): w for (u, v, w) in g.edges}
    return sum(wlookup[(min(a, b), max(a, b))] for a, b in pairs)
