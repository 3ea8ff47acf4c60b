"""MWPM and HDRG decoders behind a common syndrome -> recovery interface.

Both decoders treat the two defect species independently: flipped X-stabilizers
(vertex defects, caused by Z/Y components) are cleared with Z chains, flipped
Z-stabilizers (face defects, caused by X/Y components) with X chains. Distances
between same-type stabilizers are Manhattan distance on the grid divided by
two, which equals the minimal error-chain length. Vertex defects can terminate
on the top/bottom grid rows, face defects on the left/right columns; those are
the boundaries their error chains can end on given the row-0 / column-0
logical representatives.

Correction paths are deterministic: row steps before column steps, nearer
boundary first (ties go to the lower row / column).
"""

from __future__ import annotations

import numpy as np

from decodelab.code import CodeLayout, PauliOperator
from decodelab.matching import maximum_weight_matching

DECODER_NAMES = ("mwpm", "hdrg")

# Above this many defects the matcher switches from exhaustive subset DP to
# the blossom solver.
_DP_CUTOFF = 8

VERTEX = 0  # X-stabilizer defects, corrected with Z chains
FACE = 1    # Z-stabilizer defects, corrected with X chains


class _TypeGeometry:
    """Per-species precomputed coordinates, distances and path lookups."""

    def __init__(self, layout: CodeLayout, kind: int):
        self.kind = kind
        coords = layout.x_stabilizers if kind == VERTEX else layout.z_stabilizers
        self.coords = coords
        side = layout.grid_side
        qidx = layout.qubit_index
        k = len(coords)

        # Manhattan/2 between same-type stabilizers.
        rs = np.array([rc[0] for rc in coords])
        cs = np.array([rc[1] for rc in coords])
        dist = (np.abs(rs[:, None] - rs[None, :]) + np.abs(cs[:, None] - cs[None, :])) // 2
        self.dist = dist.astype(np.int64)

        # Distance to the two admissible boundary sides, and the nearer one.
        if kind == VERTEX:
            near = [(r + 1) // 2 for (r, c) in coords]
            far = [(side - r) // 2 for (r, c) in coords]
        else:
            near = [(c + 1) // 2 for (r, c) in coords]
            far = [(side - c) // 2 for (r, c) in coords]
        self.boundary_dist = [min(a, b) for a, b in zip(near, far)]
        self._near_is_low = [a <= b for a, b in zip(near, far)]

        # Qubit toggle masks for every stabilizer pair path and boundary route.
        self.pair_mask = [[0] * k for _ in range(k)]
        for i in range(k):
            for j in range(i + 1, k):
                mask = self._path_mask(qidx, coords[i], coords[j])
                self.pair_mask[i][j] = self.pair_mask[j][i] = mask
        self.boundary_mask = [self._boundary_route(qidx, side, i) for i in range(k)]

    @staticmethod
    def _path_mask(qidx, a, b) -> int:
        # Row steps first, then column steps; toggled qubits sit between stabs.
        (r, c), (r2, c2) = a, b
        mask = 0
        step = 1 if r2 > r else -1
        while r != r2:
            mask ^= 1 << qidx[(r + step, c)]
            r += 2 * step
        step = 1 if c2 > c else -1
        while c != c2:
            mask ^= 1 << qidx[(r, c + step)]
            c += 2 * step
        return mask

    def _boundary_route(self, qidx, side, i) -> int:
        r, c = self.coords[i]
        mask = 0
        if self.kind == VERTEX:
            rng = range(r - 1, -1, -2) if self._near_is_low[i] else range(r + 1, side, 2)
            for rr in rng:
                mask ^= 1 << qidx[(rr, c)]
        else:
            rng = range(c - 1, -1, -2) if self._near_is_low[i] else range(c + 1, side, 2)
            for cc in rng:
                mask ^= 1 << qidx[(r, cc)]
        return mask


def _min_cost_pairing(defects, dist, bdist):
    """Offsets into `defects` paired up or sent to the boundary, at minimum cost.

    Returns (pairs, boundary) with pairs a list of (i, j) offsets and boundary
    a list of offsets routed to their nearest side. Exact for any size: subset
    DP up to _DP_CUTOFF defects, blossom with per-defect virtual boundary
    nodes beyond.
    """
    d = len(defects)
    if d == 0:
        return [], []
    if d == 1:
        return [], [0]
    w = [[int(dist[defects[i], defects[j]]) for j in range(d)] for i in range(d)]
    b = [int(bdist[defects[i]]) for i in range(d)]

    if d <= _DP_CUTOFF:
        full = (1 << d) - 1
        inf = float("inf")
        f = [inf] * (full + 1)
        choice = [None] * (full + 1)
        f[0] = 0
        for mask in range(1, full + 1):
            i = (mask & -mask).bit_length() - 1
            rest = mask ^ (1 << i)
            best = b[i] + f[rest]
            ch = (i, -1)
            sub = rest
            while sub:
                j = (sub & -sub).bit_length() - 1
                sub ^= 1 << j
                cost = w[i][j] + f[rest ^ (1 << j)]
                if cost < best:
                    best = cost
                    ch = (i, j)
            f[mask] = best
            choice[mask] = ch
        pairs, boundary = [], []
        mask = full
        while mask:
            i, j = choice[mask]
            if j < 0:
                boundary.append(i)
                mask ^= 1 << i
            else:
                pairs.append((i, j))
                mask ^= (1 << i) | (1 << j)
        return pairs, boundary

    # Blossom on defects 0..d-1 plus one virtual boundary twin per defect;
    # twin-twin edges are free so the node count stays even. Defect-defect
    # edges never cheaper than the two boundary routes are dropped.
    edges = []
    top = 1
    for i in range(d):
        for j in range(i + 1, d):
            if w[i][j] < b[i] + b[j]:
                edges.append((i, j, w[i][j]))
                top = max(top, w[i][j] + 1)
    for i in range(d):
        edges.append((i, d + i, b[i]))
        top = max(top, b[i] + 1)
    for i in range(d):
        for j in range(i + 1, d):
            edges.append((d + i, d + j, 0))
    inverted = [(u, v, top - wt) for (u, v, wt) in edges]
    mate = maximum_weight_matching(inverted, 2 * d, maxcardinality=True)
    pairs, boundary = [], []
    for i in range(d):
        p = mate[i]
        if p == d + i:
            boundary.append(i)
        elif p > i and p < d:
            pairs.append((i, p))
    return pairs, boundary


class MwpmDecoder:
    """Minimum-weight perfect matching decoder."""

    name = "mwpm"

    def __init__(self, layout: CodeLayout):
        self.layout = layout
        self._geom = (_TypeGeometry(layout, VERTEX), _TypeGeometry(layout, FACE))

    def correct_defects(self, kind: int, defects: list[int]) -> int:
        geom = self._geom[kind]
        pairs, boundary = _min_cost_pairing(defects, geom.dist, geom.boundary_dist)
        mask = 0
        for i, j in pairs:
            mask ^= geom.pair_mask[defects[i]][defects[j]]
        for i in boundary:
            mask ^= geom.boundary_mask[defects[i]]
        return mask

    def decode(self, s: np.ndarray) -> PauliOperator:
        xd, zd = _split_defects(self.layout, s)
        zmask = self.correct_defects(VERTEX, xd)
        xmask = self.correct_defects(FACE, zd)
        return PauliOperator(xmask, zmask)


class HdrgDecoder:
    """Hard-decision cluster-growth decoder with a linear radius schedule.

    For radius r = 1, 2, ...: defects within distance r are clustered
    (a defect within r of an admissible boundary joins that boundary's
    cluster). Neutral clusters -- even defect count, or containing a
    boundary -- are annihilated: an odd cluster first routes its
    boundary-nearest defect out, then defects are greedily paired closest
    first. Survivors grow at r + 1.
    """

    name = "hdrg"

    def __init__(self, layout: CodeLayout):
        self.layout = layout
        self._geom = (_TypeGeometry(layout, VERTEX), _TypeGeometry(layout, FACE))

    def correct_defects(self, kind: int, defects: list[int]) -> int:
        geom = self._geom[kind]
        dist = geom.dist
        bdist = geom.boundary_dist
        mask = 0
        alive = list(defects)
        radius = 0
        while alive:
            radius += 1
            # Components among surviving defects; the two boundary sides act
            # as virtual nodes -1 (low) and -2 (high) so opposite sides do
            # not merge through the boundary.
            parent = {i: i for i in alive}
            parent[-1] = -1
            parent[-2] = -2

            def find(a):
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                return a

            def union(a, b):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)

            for pos, i in enumerate(alive):
                for j in alive[pos + 1:]:
                    if dist[i, j] <= radius:
                        union(i, j)
                if bdist[i] <= radius:
                    union(i, -1 if geom._near_is_low[i] else -2)

            clusters: dict[int, list[int]] = {}
            for i in alive:
                clusters.setdefault(find(i), []).append(i)
            boundary_roots = {find(-1), find(-2)}

            survivors = []
            for root, members in sorted(clusters.items()):
                touches = root in boundary_roots
                if len(members) % 2 == 1 and not touches:
                    survivors.extend(members)
                    continue
                members = sorted(members)
                if len(members) % 2 == 1:
                    # Send the boundary-nearest defect out (lowest index on ties).
                    k = min(members, key=lambda i: (bdist[i], i))
                    mask ^= geom.boundary_mask[k]
                    members.remove(k)
                # Greedy closest-first pairing, lexicographic on ties.
                while members:
                    best = None
                    for a_pos, a in enumerate(members):
                        for b in members[a_pos + 1:]:
                            key = (int(dist[a, b]), a, b)
                            if best is None or key < best:
                                best = key
                    _, a, b = best
                    mask ^= geom.pair_mask[a][b]
                    members.remove(a)
                    members.remove(b)
            alive = survivors
        return mask

    def decode(self, s: np.ndarray) -> PauliOperator:
        xd, zd = _split_defects(self.layout, s)
        zmask = self.correct_defects(VERTEX, xd)
        xmask = self.correct_defects(FACE, zd)
        return PauliOperator(xmask, zmask)


def _split_defects(layout: CodeLayout, s: np.ndarray) -> tuple[list[int], list[int]]:
    if len(s) != layout.m:
        raise ValueError(f"syndrome length {len(s)} != m = {layout.m}")
    half = len(layout.x_stabilizers)
    flat = np.flatnonzero(s)
    xd = [int(i) for i in flat if i < half]
    zd = [int(i) - half for i in flat if i >= half]
    return xd, zd


def make_decoder(name: str, layout: CodeLayout):
    if name == "mwpm":
        return MwpmDecoder(layout)
    if name == "hdrg":
        return HdrgDecoder(layout)
    raise ValueError(f"unknown decoder {name!r}; known: {DECODER_NAMES}")


def default_decoders(layout: CodeLayout):
    """The ensemble's constituents in label order (0 = mwpm, 1 = hdrg)."""
    return [make_decoder(name, layout) for name in DECODER_NAMES]
