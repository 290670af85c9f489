"""Topological pants decomposition of a triangle mesh surface.

Strategy: greedily split components along shortest essential simple
cycles until every piece is a pair of pants (genus 0, three boundary
cycles).  Candidate cycles come from BFS trees rooted at every usable
vertex ("systolic" search); a candidate is essential when cutting along
it leaves no disc and no annulus.  Curves are vertex paths along mesh
edges; when no disjoint simple representative can be routed the mesh is
too coarse and the caller must refine.

All ordering decisions use plain index order, so results are a pure
function of the input arrays.  Run on a canonicalized mesh to get
labeling-invariant output.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    AdmissibilityError,
    CurveError,
    RefinementNeeded,
    TopologyError,
)
from .halfedge import HalfedgeMesh, signature


@dataclass(frozen=True)
class CutCurve:
    """Simple closed vertex-disjoint cycle of mesh edges."""

    vertices: tuple
    kind: str  # "interior" or "boundary"

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(int(v) for v in self.vertices))
        if self.kind not in ("interior", "boundary"):
            raise CurveError(f"unknown curve kind {self.kind!r}")
        if len(self.vertices) < 3 or len(set(self.vertices)) != len(self.vertices):
            raise CurveError("curve must be a simple cycle of at least 3 vertices")

    def __len__(self):
        return len(self.vertices)

    @property
    def edge_pairs(self):
        v = self.vertices
        return tuple((v[i], v[(i + 1) % len(v)]) for i in range(len(v)))

    def reversed(self):
        v = self.vertices
        return CutCurve((v[0],) + tuple(reversed(v[1:])), self.kind)

    def canonical(self):
        """Rotate to the minimal vertex and orient toward the smaller
        neighbor."""
        v = list(self.vertices)
        k = v.index(min(v))
        v = v[k:] + v[:k]
        if v[-1] < v[1]:
            v = [v[0]] + v[:0:-1]
        return CutCurve(tuple(v), self.kind)

    def edge_ids(self, mesh):
        out = []
        for u, w in self.edge_pairs:
            e = mesh.edge_index(u, w)
            if e == -1:
                raise CurveError(f"curve edge ({u}, {w}) is not a mesh edge")
            out.append(e)
        return out


@dataclass(frozen=True)
class Pants:
    """One pair of pants: a face set and its three cuff slots.

    Each cuff is ``(curve_index, side)`` with side +1 when the pants lies
    on the left of the oriented curve and -1 on the right.
    """

    index: int
    faces: tuple
    cuffs: tuple


@dataclass(frozen=True)
class PantsDecomposition:
    """Interior curves first, then boundary curves; 2g-2+b pants."""

    curves: tuple
    pants: tuple
    adjacency: dict  # curve index -> ((pants, slot),) or ((pants, slot), (pants, slot))
    genus: int
    boundary_count: int

    @property
    def interior_curves(self):
        return tuple(c for c in self.curves if c.kind == "interior")

    @property
    def boundary_curves(self):
        return tuple(c for c in self.curves if c.kind == "boundary")


# ------------------------------------------------------------------ cutting math

def _face_neighbors(mesh, f, in_comp, blocked):
    """Faces adjacent to f inside the component, not across blocked edges."""
    out = []
    for c in range(3):
        h = 3 * f + c
        t = mesh.twin[h]
        if t == -1:
            continue
        if blocked[mesh.halfedge_edge[h]]:
            continue
        g = t // 3
        if in_comp[g]:
            out.append(g)
    return out


def _flood(mesh, seed, in_comp, blocked, stop_at=None):
    """Faces reachable from ``seed``.  Stops early (returns None) when a
    face in ``stop_at`` is reached."""
    seen = {seed}
    stack = [seed]
    while stack:
        f = stack.pop()
        for g in _face_neighbors(mesh, f, in_comp, blocked):
            if g in seen:
                continue
            if stop_at is not None and g in stop_at:
                return None
            seen.add(g)
            stack.append(g)
    return seen


def _split_by_cycle(mesh, comp_faces, in_comp, blocked, cycle):
    """Face sets of the (one or two) pieces after cutting the component
    along ``cycle``.  Alternating flood fill, so a small piece costs only
    its own size."""
    u, v = cycle[0], cycle[1]
    h = mesh.directed_halfedge(u, v)
    if h == -1:
        h = mesh.directed_halfedge(v, u)
    t = mesh.twin[h]
    fa, fb = h // 3, t // 3
    sides = [{fa}, {fb}]
    stacks = [[fa], [fb]]
    while stacks[0] or stacks[1]:
        for s in (0, 1):
            if not stacks[s]:
                continue
            f = stacks[s].pop()
            for g in _face_neighbors(mesh, f, in_comp, blocked):
                if g in sides[s]:
                    continue
                if g in sides[1 - s]:
                    # the two sides meet: the cut does not separate
                    return [comp_faces]
                sides[s].add(g)
                stacks[s].append(g)
        # one side exhausted first: it is a complete piece
        if not stacks[0]:
            small = sides[0]
            break
        if not stacks[1]:
            small = sides[1]
            break
    other = np.array(sorted(set(comp_faces.tolist()) - small), dtype=np.int64)
    small = np.array(sorted(small), dtype=np.int64)
    return [small, other]


def _piece_euler(mesh, piece_faces, in_piece, blocked):
    """Euler characteristic of a piece cut open along blocked edges.

    chi = V' + (interior edges) - 2F' where V' counts one vertex copy per
    fan arc.
    """
    Fp = len(piece_faces)
    interior_he = 0
    cnt = {}
    conn = {}
    for f in piece_faces:
        for c in range(3):
            h = 3 * f + c
            u = mesh._origin[h]
            cnt[u] = cnt.get(u, 0) + 1
            t = mesh.twin[h]
            if t != -1 and in_piece[t // 3] and not blocked[mesh.halfedge_edge[h]]:
                interior_he += 1
                conn[u] = conn.get(u, 0) + 1
    interior = interior_he // 2
    Vp = 0
    for v, k in cnt.items():
        links = conn.get(v, 0)
        Vp += 1 if links == k else k - links
    return Vp + interior - 2 * Fp


def _piece_boundary_halfedges(mesh, in_piece, blocked, piece_faces):
    out = []
    for f in piece_faces:
        for c in range(3):
            h = 3 * f + c
            t = mesh.twin[h]
            if t == -1 or not in_piece[t // 3] or blocked[mesh.halfedge_edge[h]]:
                out.append(h)
    return out


def _piece_boundary_cycles(mesh, in_piece, blocked, piece_faces):
    """Boundary cycles of a cut-open piece, as halfedge tuples."""
    S = set(_piece_boundary_halfedges(mesh, in_piece, blocked, piece_faces))
    cycles = []
    left = set(S)
    while left:
        h0 = min(left)
        cyc = []
        h = h0
        while True:
            cyc.append(h)
            left.discard(h)
            g = 3 * (h // 3) + (h + 1) % 3
            guard = 0
            while g not in S:
                t = mesh.twin[g]
                if t == -1 or not in_piece[t // 3] or blocked[mesh.halfedge_edge[g]]:
                    raise TopologyError("piece boundary walk left the piece")
                g = 3 * (t // 3) + (t + 1) % 3
                guard += 1
                if guard > len(S) + mesh.n_faces * 3:
                    raise TopologyError("piece boundary walk does not close")
            h = g
            if h == h0:
                break
        cycles.append(tuple(cyc))
    return cycles


def _component_signature(mesh, piece_faces, in_piece, blocked):
    chi = _piece_euler(mesh, piece_faces, in_piece, blocked)
    b = len(_piece_boundary_cycles(mesh, in_piece, blocked, piece_faces))
    num = 2 - b - chi
    if num % 2 != 0 or num < 0:
        raise TopologyError(f"component with chi={chi}, b={b} is not a surface")
    return num // 2, b, chi


# ------------------------------------------------------------------ cycle search

def _allowed_graph(mesh, comp_faces, in_comp, blocked, forbidden):
    """Adjacency over vertices usable for a new cut curve: interior to
    the component and not on any existing curve or boundary."""
    adj = {}
    for f in comp_faces:
        for c in range(3):
            h = 3 * f + c
            t = mesh.twin[h]
            if t == -1 or t < h:
                continue
            if not in_comp[t // 3] or blocked[mesh.halfedge_edge[h]]:
                continue
            u = int(mesh._origin[h])
            w = int(mesh._origin[3 * f + (c + 1) % 3])
            if u in forbidden or w in forbidden:
                continue
            adj.setdefault(u, []).append(w)
            adj.setdefault(w, []).append(u)
    for v in adj:
        adj[v] = sorted(set(adj[v]))
    return adj


def _shortest_essential_cycle(mesh, comp_faces, in_comp, blocked, forbidden):
    """Shortest (edge count, then lexicographic) essential simple cycle
    through allowed vertices, or None."""
    adj = _allowed_graph(mesh, comp_faces, in_comp, blocked, forbidden)
    if not adj:
        return None
    V = mesh.n_vertices
    dist = np.full(V, -1, dtype=np.int64)
    par = np.full(V, -1, dtype=np.int64)
    stamp = np.full(V, -1, dtype=np.int64)
    best = None  # (length, vertices, cycle)
    verdicts = {}
    chi_comp = _piece_euler(mesh, comp_faces, in_comp, blocked)

    def essential(cycle):
        cblocked = blocked.copy()
        for u, w in zip(cycle, cycle[1:] + cycle[:1]):
            e = mesh.edge_index(u, w)
            if e == -1:
                return False
            cblocked[e] = True
        pieces = _split_by_cycle(mesh, comp_faces, in_comp, cblocked, cycle)
        if len(pieces) == 1:
            return chi_comp <= -1
        in_small = np.zeros(mesh.n_faces, dtype=bool)
        in_small[pieces[0]] = True
        chi_small = _piece_euler(mesh, pieces[0], in_small, cblocked)
        return chi_small <= -1 and (chi_comp - chi_small) <= -1

    for idx, s in enumerate(sorted(adj)):
        limit = None if best is None else best[0] // 2 + 1
        stamp[s] = idx
        dist[s] = 0
        par[s] = -1
        frontier = [s]
        candidates = []
        seen_cand = set()
        d = 0
        while frontier and (limit is None or d < limit):
            d += 1
            nxt = []
            for u in frontier:
                for w in adj[u]:
                    if stamp[w] != idx:
                        stamp[w] = idx
                        dist[w] = d
                        par[w] = u
                        nxt.append(w)
                    elif w != par[u]:
                        key = (u, w) if u < w else (w, u)
                        if key not in seen_cand:
                            seen_cand.add(key)
                            candidates.append(
                                (int(dist[u] + dist[w] + 1), key[0], key[1])
                            )
            frontier = nxt
        candidates.sort()
        for ell, u, w in candidates:
            if best is not None and ell > best[0]:
                break
            pu, pw = [u], [w]
            while par[pu[-1]] != -1:
                pu.append(int(par[pu[-1]]))
            while par[pw[-1]] != -1:
                pw.append(int(par[pw[-1]]))
            if len(set(pu) & set(pw)) != 1:
                continue  # tree paths re-meet: not a simple cycle
            cyc = pu[::-1] + pw[:-1]
            curve = CutCurve(tuple(cyc), "interior").canonical()
            key = curve.vertices
            if best is not None and (ell, key) >= (best[0], best[1]):
                continue
            if key not in verdicts:
                verdicts[key] = essential(list(key))
            if verdicts[key]:
                best = (ell, key, curve)
    return best[2] if best else None


# ------------------------------------------------------------------ operations

def pants_decompose(mesh):
    """Split the surface into pairs of pants along 3g - 3 + b interior
    curves.

    Raises RefinementNeeded when some component admits no essential
    simple cycle through vertices untouched by boundary or earlier
    curves.
    """
    sig = signature(mesh)
    if not sig.admissible:
        raise AdmissibilityError(
            f"2g-2+b = {2 * sig.genus - 2 + sig.boundary_count} <= 0"
        )
    F = mesh.n_faces
    blocked = np.zeros(mesh.n_edges, dtype=bool)
    forbidden = set(int(v) for v in np.where(mesh.vertex_boundary)[0])
    interior = []
    queue = [np.arange(F, dtype=np.int64)]
    pants_faces = []
    while queue:
        queue.sort(key=lambda a: int(a[0]))
        comp = queue.pop(0)
        in_comp = np.zeros(F, dtype=bool)
        in_comp[comp] = True
        g, b, _chi = _component_signature(mesh, comp, in_comp, blocked)
        if g == 0 and b == 3:
            pants_faces.append(comp)
            continue
        cyc = _shortest_essential_cycle(mesh, comp, in_comp, blocked, forbidden)
        if cyc is None:
            raise RefinementNeeded(
                f"no essential simple cycle avoids existing curves in a "
                f"(g={g}, b={b}) component; refine the mesh"
            )
        interior.append(cyc)
        for e in cyc.edge_ids(mesh):
            blocked[e] = True
        forbidden.update(cyc.vertices)
        queue.extend(_split_by_cycle(mesh, comp, in_comp, blocked, list(cyc.vertices)))

    boundary = [CutCurve(loop, "boundary") for loop in mesh.boundary_loops]
    return _assemble_decomposition(mesh, sig, interior, boundary, blocked, pants_faces)


def _assemble_decomposition(mesh, sig, interior, boundary, blocked, pants_faces):
    g, b = sig.genus, sig.boundary_count
    if len(interior) != 3 * g - 3 + b or len(pants_faces) != 2 * g - 2 + b:
        raise TopologyError(
            f"decomposition has {len(interior)} curves / {len(pants_faces)} "
            f"pants, expected {3 * g - 3 + b} / {2 * g - 2 + b}"
        )
    curves = list(interior) + list(boundary)
    edge_to_curve = {}
    for ci, curve in enumerate(curves):
        for u, w in curve.edge_pairs:
            edge_to_curve[(u, w)] = (ci, 1)   # halfedge along the curve: left side
            edge_to_curve[(w, u)] = (ci, -1)

    pants_faces = sorted(pants_faces, key=lambda a: int(a[0]))
    pants = []
    slots = {ci: [] for ci in range(len(curves))}
    for pi, faces in enumerate(pants_faces):
        in_piece = np.zeros(mesh.n_faces, dtype=bool)
        in_piece[faces] = True
        cycles = _piece_boundary_cycles(mesh, in_piece, blocked, faces)
        cuffs = []
        for cyc in cycles:
            h = cyc[0]
            u = int(mesh._origin[h])
            w = int(mesh._origin[3 * (h // 3) + (h + 1) % 3])
            if (u, w) not in edge_to_curve:
                raise TopologyError("pants boundary not on any curve")
            cuffs.append(edge_to_curve[(u, w)])
        if len(cuffs) != 3:
            raise TopologyError(f"pants piece with {len(cuffs)} cuffs")
        cuffs.sort()
        pants.append((pi, tuple(int(f) for f in faces), cuffs))

    # orient interior curves so the lower-indexed pants sits on the left
    for ci in range(len(interior)):
        at = [(pi, si) for pi, _f, cuffs in pants
              for si, (cj, _side) in enumerate(cuffs) if cj == ci]
        if len(at) != 2:
            raise TopologyError(f"interior curve {ci} borders {len(at)} cuffs")
        sides = {}
        for pi, _f, cuffs in pants:
            for cj, side in cuffs:
                if cj == ci:
                    sides[side] = pi
        if len(sides) == 2 and sides[1] > sides[-1]:
            curves[ci] = curves[ci].reversed()
            new_pants = []
            for pi, f, cuffs in pants:
                cuffs = [(cj, -side if cj == ci else side) for cj, side in cuffs]
                cuffs.sort()
                new_pants.append((pi, f, cuffs))
            pants = new_pants

    adjacency = {ci: [] for ci in range(len(curves))}
    for pi, _f, cuffs in pants:
        for si, (cj, _side) in enumerate(cuffs):
            adjacency[cj].append((pi, si))
    for ci, curve in enumerate(curves):
        want = 2 if curve.kind == "interior" else 1
        if len(adjacency[ci]) != want:
            raise TopologyError(
                f"curve {ci} ({curve.kind}) borders {len(adjacency[ci])} cuff slots"
            )

    return PantsDecomposition(
        curves=tuple(curves),
        pants=tuple(Pants(index=pi, faces=f, cuffs=tuple(cuffs))
                    for pi, f, cuffs in pants),
        adjacency={ci: tuple(sorted(v)) for ci, v in adjacency.items()},
        genus=g,
        boundary_count=b,
    )


def homotopy_generators(mesh):
    """Independent cycles spanning the surface's first homology: 2g
    tree-cotree loops plus all but one boundary loop.

    Cutting along the tree-cotree system (with the boundary) reduces the
    surface to a disc.
    """
    sig = signature(mesh)
    if not sig.admissible:
        raise AdmissibilityError(
            f"2g-2+b = {2 * sig.genus - 2 + sig.boundary_count} <= 0"
        )
    V, F = mesh.n_vertices, mesh.n_faces

    # primal spanning tree (BFS from vertex 0 over edge index order)
    par = np.full(V, -1, dtype=np.int64)
    seen = np.zeros(V, dtype=bool)
    seen[0] = True
    in_tree = np.zeros(mesh.n_edges, dtype=bool)
    vadj = {}
    for e, (u, w) in enumerate(mesh.edges):
        vadj.setdefault(int(u), []).append((int(w), e))
        vadj.setdefault(int(w), []).append((int(u), e))
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for w, e in sorted(vadj.get(u, [])):
                if not seen[w]:
                    seen[w] = True
                    par[w] = u
                    in_tree[e] = True
                    nxt.append(w)
        frontier = nxt
    if not seen.all():
        raise TopologyError("primal graph is disconnected")

    # dual spanning tree over faces plus one cap node per boundary loop
    loop_of_halfedge = {}
    for li, loop_h in enumerate(mesh._boundary_loop_halfedges):
        for h in loop_h:
            loop_of_halfedge[h] = li
    b = len(mesh.boundary_loops)
    n_dual = F + b
    dseen = np.zeros(n_dual, dtype=bool)
    dseen[0] = True
    crossed = np.zeros(mesh.n_edges, dtype=bool)
    frontier = [0]
    cap_halfedges = {}
    for h, li in loop_of_halfedge.items():
        cap_halfedges.setdefault(li, []).append(h)
    while frontier:
        nxt = []
        for node in frontier:
            hs = ([3 * node + c for c in range(3)] if node < F
                  else sorted(cap_halfedges[node - F]))
            for h in hs:
                e = mesh.halfedge_edge[h]
                if in_tree[e] or crossed[e]:
                    continue
                t = mesh.twin[h]
                if node < F:
                    nb = (t // 3) if t != -1 else F + loop_of_halfedge[h]
                else:
                    nb = h // 3
                if dseen[nb]:
                    continue
                dseen[nb] = True
                crossed[e] = True
                nxt.append(nb)
        frontier = nxt
    if not dseen.all():
        raise TopologyError("dual graph is disconnected")

    leftovers = np.where(~in_tree & ~crossed)[0]
    out = []
    for e in leftovers:
        u, w = (int(x) for x in mesh.edges[e])
        pu, pw = [u], [w]
        while par[pu[-1]] != -1:
            pu.append(int(par[pu[-1]]))
        while par[pw[-1]] != -1:
            pw.append(int(par[pw[-1]]))
        su, sw = set(pu), set(pw)
        # trim to the paths up to the lowest common ancestor
        lca = next(x for x in pu if x in sw)
        cyc = pu[:pu.index(lca) + 1] + pw[:pw.index(lca)][::-1]
        out.append(CutCurve(tuple(cyc), "interior").canonical())
    for loop in mesh.boundary_loops[:max(b - 1, 0)]:
        out.append(CutCurve(loop, "boundary").canonical())
    expect = 2 * sig.genus + max(b - 1, 0)
    if len(out) != expect:
        raise TopologyError(
            f"tree-cotree produced {len(out)} generators, expected {expect}"
        )
    return out


def cut_along(mesh, curves):
    """Cut the mesh open along disjoint simple cycles.

    Returns one HalfedgeMesh per resulting component; curve vertices are
    duplicated on both sides, so each cut appears as new boundary.
    """
    seen_v = set()
    blocked = np.zeros(mesh.n_edges, dtype=bool)
    for curve in curves:
        overlap = seen_v & set(curve.vertices)
        if overlap:
            raise CurveError(f"curves intersect at vertices {sorted(overlap)}")
        seen_v.update(curve.vertices)
        for e in curve.edge_ids(mesh):
            blocked[e] = True
    if not curves:
        return [mesh]

    F = mesh.n_faces
    all_faces = np.ones(F, dtype=bool)
    remaining = set(range(F))
    pieces = []
    while remaining:
        seed = min(remaining)
        piece = _flood(mesh, seed, all_faces, blocked)
        remaining -= piece
        pieces.append(np.array(sorted(piece), dtype=np.int64))
    pieces.sort(key=lambda a: int(a[0]))

    out = []
    total_chi = 0
    for faces in pieces:
        in_piece = np.zeros(F, dtype=bool)
        in_piece[faces] = True
        # group each vertex's incident piece faces into fan arcs
        incident = {}
        for f in faces:
            for c in range(3):
                incident.setdefault(int(mesh._origin[3 * f + c]), []).append(int(f))
        new_id = {}
        positions = []
        for v in sorted(incident):
            fs = incident[v]
            links = {}
            for f in fs:
                c = list(mesh.faces[f]).index(v)
                for h in (3 * f + c, 3 * f + (c + 2) % 3):
                    t = mesh.twin[h]
                    if (t != -1 and in_piece[t // 3]
                            and not blocked[mesh.halfedge_edge[h]]):
                        links.setdefault(f, []).append(t // 3)
            left = set(fs)
            while left:
                f0 = min(left)
                arc = {f0}
                stack = [f0]
                while stack:
                    f = stack.pop()
                    for g in links.get(f, []):
                        if g in left and g not in arc:
                            arc.add(g)
                            stack.append(g)
                left -= arc
                idx = len(positions)
                positions.append(mesh.positions[v])
                for f in arc:
                    new_id[(v, f)] = idx
        new_faces = np.array(
            [[new_id[(int(mesh._origin[3 * f + c]), int(f))] for c in range(3)]
             for f in faces],
            dtype=np.int64,
        )
        piece_mesh = HalfedgeMesh(np.array(positions), new_faces)
        total_chi += piece_mesh.euler_characteristic
        out.append(piece_mesh)

    if total_chi != mesh.euler_characteristic:
        raise TopologyError(
            f"cut changed Euler characteristic: {total_chi} != "
            f"{mesh.euler_characteristic}"
        )
    return out
