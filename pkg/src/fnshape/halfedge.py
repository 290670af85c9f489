"""Halfedge triangle meshes, landmark excision, and OFF/OBJ loading.

The mesh is stored as flat arrays.  Halfedge ``h = 3*f + c`` is the
directed edge from corner ``c`` of face ``f`` to the next corner, so
``next`` and ``prev`` are arithmetic and only ``twin`` is stored.  A twin
of ``-1`` marks a boundary edge.  Faces wind counterclockwise; the face of
a halfedge lies on its left.

Instances are immutable after construction (all arrays are frozen), so
they can be shared freely between threads.
"""

import hashlib
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    AdmissibilityError,
    Disconnected,
    LandmarkError,
    NonManifold,
    NonTriangular,
    ParseError,
    TopologyError,
)


@dataclass(frozen=True)
class SurfaceSignature:
    """Genus and boundary-loop count of a surface."""

    genus: int
    boundary_count: int

    @property
    def admissible(self):
        """True when 2g - 2 + b > 0 (the surface carries a hyperbolic
        metric with geodesic boundary)."""
        return 2 * self.genus - 2 + self.boundary_count > 0


@dataclass(frozen=True)
class LandmarkSet:
    """Vertex indices marking points of interest, one puncture each."""

    vertex_ids: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertex_ids", tuple(int(v) for v in self.vertex_ids))

    def __len__(self):
        return len(self.vertex_ids)


class HalfedgeMesh:
    """Oriented manifold triangle mesh with boundary loops.

    Parameters
    ----------
    positions : (V, 3) array_like
        Vertex coordinates.  Used only to seed the initial metric.
    faces : (F, 3) array_like
        Triangles by vertex index, counterclockwise.

    Raises
    ------
    NonTriangular, NonManifold, Disconnected
        When the data does not describe a single oriented manifold
        surface made of triangles.
    """

    def __init__(self, positions, faces):
        positions = np.asarray(positions, dtype=np.float64)
        faces = np.asarray(faces, dtype=np.int64)
        if positions.ndim != 2 or positions.shape[1] != 3:
            raise ParseError("positions must be (V, 3)")
        if faces.size == 0:
            raise ParseError("mesh has no faces")
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise NonTriangular("faces must be (F, 3) triangles")
        if faces.min() < 0 or faces.max() >= len(positions):
            raise ParseError("face index out of range")
        if ((faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2])
                | (faces[:, 2] == faces[:, 0])).any():
            raise NonTriangular("face with a repeated vertex")

        self.positions = positions
        self.faces = faces
        self._build()
        for a in (self.positions, self.faces, self.twin, self.halfedge_edge,
                  self.edges, self.vertex_boundary, self.face_opp_edge):
            a.setflags(write=False)

    # ------------------------------------------------------------- construction

    def _build(self):
        F = len(self.faces)
        V = len(self.positions)
        origin = self.faces.reshape(-1)  # origin[3f+c] = faces[f, c]

        directed = {}
        for h in range(3 * F):
            u = origin[h]
            v = origin[_next(h)]
            if (u, v) in directed:
                raise NonManifold(
                    f"directed edge {u}->{v} appears twice "
                    "(non-manifold edge or inconsistent winding)"
                )
            directed[(u, v)] = h

        twin = np.full(3 * F, -1, dtype=np.int64)
        for (u, v), h in directed.items():
            twin[h] = directed.get((v, u), -1)
        self.twin = twin
        self._directed = directed

        # undirected edges, in order of first appearance
        edge_id = {}
        h2e = np.empty(3 * F, dtype=np.int64)
        edge_list = []
        for h in range(3 * F):
            u, v = origin[h], origin[_next(h)]
            key = (u, v) if u < v else (v, u)
            if key not in edge_id:
                edge_id[key] = len(edge_list)
                edge_list.append(key)
            h2e[h] = edge_id[key]
        self.halfedge_edge = h2e
        self.edges = np.array(edge_list, dtype=np.int64)
        self._edge_id = edge_id

        # edge opposite corner c of face f is the edge of halfedge 3f+c+1
        self.face_opp_edge = np.column_stack(
            [h2e[np.arange(F) * 3 + (c + 1) % 3] for c in range(3)]
        )

        # outgoing halfedges per vertex, fan check (bowtie detection)
        out_count = np.zeros(V, dtype=np.int64)
        np.add.at(out_count, origin, 1)
        if (out_count == 0).any():
            raise Disconnected("isolated vertex")
        first_out = np.full(V, -1, dtype=np.int64)
        for h in range(3 * F - 1, -1, -1):
            first_out[origin[h]] = h

        for v in range(V):
            # spin clockwise from any outgoing halfedge to the fan start
            h0 = first_out[v]
            h = h0
            steps = 0
            while twin[h] != -1:
                h = _next(twin[h])
                steps += 1
                if h == h0:
                    break
                if steps > out_count[v]:
                    raise NonManifold(f"vertex {v} fan does not close")
            start = h
            # sweep counterclockwise, counting the fan
            seen = 1
            h = start
            while True:
                p = _prev(h)
                if twin[p] == -1:
                    break
                h = twin[p]
                if h == start:
                    break
                seen += 1
                if seen > out_count[v]:
                    raise NonManifold(f"vertex {v} fan does not close")
            if seen != out_count[v]:
                raise NonManifold(f"vertex {v} is a bowtie (two face fans)")

        # boundary vertices: endpoints of twinless halfedges
        bd = np.where(twin == -1)[0]
        self.vertex_boundary = np.zeros(V, dtype=bool)
        self.vertex_boundary[origin[bd]] = True
        self.vertex_boundary[origin[_next_arr(bd)]] = True
        self.vertex_boundary.setflags(write=False)

        # boundary loops: walk twinless halfedges
        loops = []
        visited = set()
        for h in bd:
            if h in visited:
                continue
            loop = []
            g = h
            while True:
                visited.add(g)
                loop.append(g)
                g = self._next_boundary(g)
                if g == h:
                    break
                if len(loop) > len(bd):
                    raise NonManifold("boundary walk does not close")
            loops.append(tuple(loop))
        # canonical order: by minimal origin vertex, rotated to start there
        canon = []
        for loop in loops:
            verts = tuple(int(origin[g]) for g in loop)
            k = verts.index(min(verts))
            canon.append((verts[k:] + verts[:k], loop[k:] + loop[:k]))
        canon.sort(key=lambda t: t[0])
        self.boundary_loops = tuple(t[0] for t in canon)
        self._boundary_loop_halfedges = tuple(t[1] for t in canon)

        # connectivity over faces through shared edges
        if F > 0:
            seen_f = np.zeros(F, dtype=bool)
            stack = [0]
            seen_f[0] = True
            while stack:
                f = stack.pop()
                for c in range(3):
                    t = twin[3 * f + c]
                    if t != -1 and not seen_f[t // 3]:
                        seen_f[t // 3] = True
                        stack.append(t // 3)
            if not seen_f.all():
                raise Disconnected("mesh faces are not edge-connected")

        self._origin = origin
        self._first_out = first_out

    def _next_boundary(self, h):
        """Next twinless halfedge along the boundary after ``h``."""
        g = _next(h)
        while self.twin[g] != -1:
            g = _next(self.twin[g])
        return g

    # ------------------------------------------------------------- basic queries

    @property
    def n_vertices(self):
        return len(self.positions)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_faces

    def halfedge_origin(self, h):
        return int(self._origin[h])

    def halfedge_dest(self, h):
        return int(self._origin[_next(h)])

    def directed_halfedge(self, u, v):
        """Halfedge id of directed edge u->v, or -1."""
        return self._directed.get((u, v), -1)

    def edge_index(self, u, v):
        """Undirected edge id of {u, v}, or -1."""
        key = (u, v) if u < v else (v, u)
        return self._edge_id.get(key, -1)

    def one_ring(self, v):
        """Neighbors of ``v`` in counterclockwise order.

        For a boundary vertex the walk starts at the outgoing boundary
        side and ends at the incoming one, so the ring is an open path.
        """
        # find the clockwise-most outgoing halfedge
        h0 = int(self._first_out[v])
        if h0 == -1:
            raise TopologyError(f"vertex {v} has no incident face")
        h = h0
        while self.twin[h] != -1:
            h = _next(self.twin[h])
            if h == h0:
                break
        start = h
        ring = []
        h = start
        while True:
            ring.append(self.halfedge_dest(h))
            p = _prev(h)
            if self.twin[p] == -1:
                ring.append(self.halfedge_origin(p))
                break
            h = self.twin[p]
            if h == start:
                break
        return ring

    def vertex_faces(self, v):
        """Face ids incident to ``v`` (counterclockwise from the fan start)."""
        h0 = int(self._first_out[v])
        h = h0
        while self.twin[h] != -1:
            h = _next(self.twin[h])
            if h == h0:
                break
        start = h
        out = []
        h = start
        while True:
            out.append(h // 3)
            p = _prev(h)
            if self.twin[p] == -1:
                break
            h = self.twin[p]
            if h == start:
                break
        return out

    def euclidean_edge_lengths(self):
        p = self.positions
        return np.linalg.norm(p[self.edges[:, 0]] - p[self.edges[:, 1]], axis=1)

    # ------------------------------------------------------------- canonical form

    def canonicalize(self):
        """Relabel vertices by lexicographic position and sort faces.

        Returns ``(mesh, vertex_map)`` where ``vertex_map[old] = new``.
        Two meshes that differ only by a relabeling of vertices (with
        distinct positions) canonicalize to bitwise-identical arrays,
        which makes the whole pipeline invariant to relabeling.
        """
        p = self.positions
        order = np.lexsort((np.arange(len(p)), p[:, 2], p[:, 1], p[:, 0]))
        vmap = np.empty(len(p), dtype=np.int64)
        vmap[order] = np.arange(len(p))
        faces = vmap[self.faces]
        shift = np.argmin(faces, axis=1)
        faces = np.take_along_axis(
            faces, (shift[:, None] + np.arange(3)[None, :]) % 3, axis=1
        )
        faces = faces[np.lexsort((faces[:, 2], faces[:, 1], faces[:, 0]))]
        return HalfedgeMesh(p[order], faces), vmap

    def __repr__(self):
        return (f"HalfedgeMesh(V={self.n_vertices}, E={self.n_edges}, "
                f"F={self.n_faces}, b={len(self.boundary_loops)})")


def _next(h):
    return h - h % 3 + (h + 1) % 3


def _prev(h):
    return h - h % 3 + (h + 2) % 3


def _next_arr(h):
    return h - h % 3 + (h + 1) % 3


# ------------------------------------------------------------------ operations

def signature(mesh):
    """Genus and boundary count from the Euler characteristic.

    g = (2 - b - chi) / 2 must be a nonnegative integer; anything else
    means the connectivity is corrupt.
    """
    chi = mesh.euler_characteristic
    b = len(mesh.boundary_loops)
    num = 2 - b - chi
    if num % 2 != 0 or num < 0:
        raise TopologyError(f"invalid genus from chi={chi}, b={b}")
    return SurfaceSignature(genus=num // 2, boundary_count=b)


def excise_landmarks(mesh, landmarks):
    """Remove each landmark vertex with its incident faces.

    Every landmark one-ring becomes a new boundary loop, so the genus is
    unchanged and b grows by ``len(landmarks)``.  Landmarks must be
    distinct interior vertices, pairwise non-adjacent; the result must
    satisfy 2g - 2 + b > 0 and still be a valid surface (landmarks whose
    one-rings interact can pinch the complex -- refine the mesh first).
    """
    ids = landmarks.vertex_ids
    if len(set(ids)) != len(ids):
        raise LandmarkError("duplicate landmark indices")
    for v in ids:
        if not 0 <= v < mesh.n_vertices:
            raise LandmarkError(f"landmark {v} out of range")
        if mesh.vertex_boundary[v]:
            raise LandmarkError(f"landmark {v} lies on the boundary")
    for i, u in enumerate(ids):
        for v in ids[i + 1:]:
            if mesh.edge_index(u, v) != -1:
                raise LandmarkError(f"landmarks {u} and {v} are adjacent")

    sig = signature(mesh)
    if 2 * sig.genus - 2 + sig.boundary_count + len(ids) <= 0:
        raise AdmissibilityError(
            f"2g-2+n = {2 * sig.genus - 2 + sig.boundary_count + len(ids)} <= 0 "
            f"for g={sig.genus}, n={sig.boundary_count + len(ids)}"
        )
    if not ids:
        return mesh

    drop = np.zeros(mesh.n_vertices, dtype=bool)
    drop[list(ids)] = True
    keep_face = ~drop[mesh.faces].any(axis=1)
    faces = mesh.faces[keep_face]
    used = np.zeros(mesh.n_vertices, dtype=bool)
    used[faces.reshape(-1)] = True
    vmap = -np.ones(mesh.n_vertices, dtype=np.int64)
    vmap[used] = np.arange(used.sum())
    try:
        out = HalfedgeMesh(mesh.positions[used], vmap[faces])
    except (NonManifold, Disconnected, NonTriangular) as exc:
        raise LandmarkError(
            f"excision does not leave a valid surface ({exc}); "
            "landmark one-rings interact, refine the mesh"
        ) from exc

    out_sig = signature(out)
    if (out_sig.genus != sig.genus
            or out_sig.boundary_count != sig.boundary_count + len(ids)):
        raise LandmarkError(
            "excision changed the topology unexpectedly "
            f"(got g={out_sig.genus}, b={out_sig.boundary_count})"
        )
    return out


# ------------------------------------------------------------------ file loading

def load_mesh(source, format=None):
    """Load an ASCII OFF or OBJ triangle mesh.

    ``source`` may be a path, bytes, or a binary file object.  ``format``
    ("off" or "obj") is inferred from a path suffix when omitted.
    """
    data, inferred = _read_source(source)
    fmt = (format or inferred or "").lower().lstrip(".")
    if fmt not in ("off", "obj"):
        raise ParseError(f"unknown mesh format {format!r}")
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError("mesh file is not valid UTF-8 text") from exc
    if fmt == "off":
        positions, faces = _parse_off(text)
    else:
        positions, faces = _parse_obj(text)
    return HalfedgeMesh(positions, faces)


def mesh_sha256(source):
    data, _ = _read_source(source)
    return hashlib.sha256(data).hexdigest()


def _read_source(source):
    if isinstance(source, (str, Path)):
        p = Path(source)
        return p.read_bytes(), p.suffix
    if isinstance(source, bytes):
        return source, None
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        data = source.read()
        if isinstance(data, str):
            data = data.encode("utf-8")
        return data, getattr(source, "name", None) and Path(source.name).suffix
    raise ParseError(f"unsupported mesh source {type(source)!r}")


def _parse_off(text):
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != "OFF":
        raise ParseError("missing OFF header")
    try:
        nv, nf, _ = (int(t) for t in lines[1].split()[:3])
    except (ValueError, IndexError) as exc:
        raise ParseError("malformed OFF counts line") from exc
    if len(lines) < 2 + nv + nf:
        raise ParseError("truncated OFF file")
    try:
        positions = [[float(t) for t in lines[2 + i].split()[:3]] for i in range(nv)]
    except (ValueError, IndexError) as exc:
        raise ParseError("malformed OFF vertex line") from exc
    faces = []
    for i in range(nf):
        toks = lines[2 + nv + i].split()
        try:
            cnt = int(toks[0])
            idx = [int(t) for t in toks[1:1 + cnt]]
        except (ValueError, IndexError) as exc:
            raise ParseError("malformed OFF face line") from exc
        if cnt != 3 or len(idx) != 3:
            raise NonTriangular(f"OFF face with {cnt} vertices")
        faces.append(idx)
    return np.array(positions), np.array(faces)


def _parse_obj(text):
    positions = []
    faces = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "v":
            try:
                positions.append([float(t) for t in toks[1:4]])
            except ValueError as exc:
                raise ParseError(f"malformed OBJ vertex: {raw!r}") from exc
            if len(toks) < 4:
                raise ParseError(f"OBJ vertex with fewer than 3 coordinates: {raw!r}")
        elif toks[0] == "f":
            idx = []
            for t in toks[1:]:
                head = t.split("/", 1)[0]
                try:
                    i = int(head)
                except ValueError as exc:
                    raise ParseError(f"malformed OBJ face token {t!r}") from exc
                if i <= 0:
                    raise ParseError("OBJ indices must be positive and 1-based")
                idx.append(i - 1)
            if len(idx) != 3:
                raise NonTriangular(f"OBJ face with {len(idx)} vertices")
            faces.append(idx)
        # all other keywords (vn, vt, o, g, s, usemtl, ...) are ignored
    if not positions or not faces:
        raise ParseError("OBJ file has no vertices or no faces")
    return np.array(positions), np.array(faces)


def load_landmarks(source, mesh=None):
    """Read a landmark file: one 0-based vertex index per line, ``#``
    comments allowed."""
    data, _ = _read_source(source)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError("landmark file is not valid UTF-8") from exc
    ids = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            ids.append(int(line))
        except ValueError as exc:
            raise ParseError(f"malformed landmark line {raw!r}") from exc
    lm = LandmarkSet(tuple(ids))
    if mesh is not None:
        for v in lm.vertex_ids:
            if not 0 <= v < mesh.n_vertices:
                raise LandmarkError(f"landmark {v} out of range")
    return lm
