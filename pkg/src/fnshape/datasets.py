"""Deterministic test meshes: spheres, tori, genus-2 surfaces.

These generators exist for tests, examples, and the acceptance suite.
All of them are pure functions of their arguments.
"""

import numpy as np

from .errors import LandmarkError, TopologyError
from .halfedge import HalfedgeMesh

_PHI = (1.0 + np.sqrt(5.0)) / 2.0

_ICOSA_POS = np.array([
    (-1, _PHI, 0), (1, _PHI, 0), (-1, -_PHI, 0), (1, -_PHI, 0),
    (0, -1, _PHI), (0, 1, _PHI), (0, -1, -_PHI), (0, 1, -_PHI),
    (_PHI, 0, -1), (_PHI, 0, 1), (-_PHI, 0, -1), (-_PHI, 0, 1),
], dtype=np.float64)

_ICOSA_FACES = np.array([
    (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
    (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
    (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
    (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
], dtype=np.int64)


def make_tetrahedron():
    pos = np.array([(0, 0, 0), (1, 0, 0), (0.5, 1, 0), (0.5, 0.5, 1)], dtype=np.float64)
    faces = np.array([(0, 2, 1), (0, 1, 3), (1, 2, 3), (0, 3, 2)], dtype=np.int64)
    return HalfedgeMesh(pos, faces)


def make_icosahedron():
    return HalfedgeMesh(_ICOSA_POS / np.linalg.norm(_ICOSA_POS[0]), _ICOSA_FACES)


def make_icosphere(level=1):
    """Icosahedron with ``level`` rounds of 1:4 subdivision, projected to
    the unit sphere."""
    mesh = make_icosahedron()
    for _ in range(level):
        mesh = subdivide(mesh)
        pos = mesh.positions / np.linalg.norm(mesh.positions, axis=1)[:, None]
        mesh = HalfedgeMesh(pos, mesh.faces)
    return mesh


def subdivide(mesh):
    """Midpoint 1:4 subdivision.

    Original vertices keep their indices and positions, so landmark ids
    survive refinement while their one-rings shrink.
    """
    V = mesh.n_vertices
    mid = V + np.arange(mesh.n_edges)
    pos = np.vstack([
        mesh.positions,
        0.5 * (mesh.positions[mesh.edges[:, 0]] + mesh.positions[mesh.edges[:, 1]]),
    ])
    f = mesh.faces
    # midpoint of the edge opposite corner c
    m = mesh.face_opp_edge + V
    faces = np.concatenate([
        np.column_stack([f[:, 0], m[:, 2], m[:, 1]]),
        np.column_stack([f[:, 1], m[:, 0], m[:, 2]]),
        np.column_stack([f[:, 2], m[:, 1], m[:, 0]]),
        np.column_stack([m[:, 0], m[:, 1], m[:, 2]]),
    ])
    return HalfedgeMesh(pos, faces)


def make_torus(nu=10, nv=10, major=2.0, minor=0.7):
    """Torus grid, each quad split into two triangles. ``nu * nv``
    vertices, ``2 * nu * nv`` faces, genus 1."""
    if nu < 3 or nv < 3:
        raise ValueError("torus grid needs nu, nv >= 3")
    ii, jj = np.meshgrid(np.arange(nu), np.arange(nv), indexing="ij")
    phi = 2 * np.pi * ii / nu
    psi = 2 * np.pi * jj / nv
    pos = np.stack([
        (major + minor * np.cos(psi)) * np.cos(phi),
        (major + minor * np.cos(psi)) * np.sin(phi),
        minor * np.sin(psi),
    ], axis=-1).reshape(-1, 3)

    def vid(i, j):
        return (i % nu) * nv + (j % nv)

    faces = []
    for i in range(nu):
        for j in range(nv):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            faces.append((a, b, c))
            faces.append((a, c, d))
    return HalfedgeMesh(pos, np.array(faces, dtype=np.int64))


def make_genus2(nu=8, nv=8, rotate=0, major=2.0, minor=0.7):
    """Closed genus-2 surface: two identical tori with one vertex star
    removed from each, glued along the exposed one-rings.

    ``rotate`` twists the gluing by that many ring vertices.  With
    ``rotate=0`` the swap of the two tori is an automorphism of the
    result, which makes the gluing mirror-symmetric.  The two copies
    share vertex positions on purpose: only edge lengths matter, and
    identical positions keep the two halves exactly isometric.
    """
    torus = make_torus(nu, nv, major, minor)
    v0 = 0
    ring = torus.one_ring(v0)
    k = len(ring)
    keep = ~(torus.faces == v0).any(axis=1)
    faces_a = torus.faces[keep]

    # copy A: drop v0, compact the rest
    nva = torus.n_vertices
    amap = np.full(nva, -1, dtype=np.int64)
    amap[np.arange(nva) != v0] = np.arange(nva - 1)

    # copy B: ring vertices fold onto copy A's ring reversed (and
    # rotated); everything else gets a fresh index
    bmap = np.full(nva, -1, dtype=np.int64)
    for i, rv in enumerate(ring):
        bmap[rv] = amap[ring[(rotate - i) % k]]
    fresh = [v for v in range(nva) if v != v0 and bmap[v] == -1]
    for t, v in enumerate(fresh):
        bmap[v] = (nva - 1) + t

    pos = np.vstack([torus.positions[np.arange(nva) != v0], torus.positions[fresh]])
    mesh = HalfedgeMesh(pos, np.vstack([amap[faces_a], bmap[faces_a]]))
    if mesh.euler_characteristic != -2 or mesh.boundary_loops:
        raise TopologyError("genus-2 construction failed")
    return mesh


def spread_landmarks(mesh, n, min_dist=4):
    """Greedy pick of ``n`` interior vertices pairwise at graph distance
    >= ``min_dist`` (so their one-rings cannot interact)."""
    chosen = []
    dist = np.full(mesh.n_vertices, np.iinfo(np.int64).max)
    for v in range(mesh.n_vertices):
        if mesh.vertex_boundary[v] or dist[v] < min_dist:
            continue
        chosen.append(v)
        if len(chosen) == n:
            return tuple(chosen)
        # BFS to update distance-to-chosen
        frontier = [v]
        dist[v] = 0
        d = 0
        while frontier and d < min_dist:
            d += 1
            nxt = []
            for u in frontier:
                for w in mesh.one_ring(u):
                    if dist[w] > d:
                        dist[w] = d
                        nxt.append(w)
            frontier = nxt
    raise LandmarkError(
        f"cannot place {n} landmarks at distance >= {min_dist} on this mesh"
    )


def to_off(mesh):
    """Serialize as ASCII OFF bytes."""
    out = ["OFF", f"{mesh.n_vertices} {mesh.n_faces} {mesh.n_edges}"]
    for p in mesh.positions:
        out.append(f"{p[0]!r} {p[1]!r} {p[2]!r}")
    for f in mesh.faces:
        out.append(f"3 {f[0]} {f[1]} {f[2]}")
    return ("\n".join(out) + "\n").encode()


def to_obj(mesh):
    """Serialize as ASCII OBJ bytes (1-based indices)."""
    out = []
    for p in mesh.positions:
        out.append(f"v {p[0]!r} {p[1]!r} {p[2]!r}")
    for f in mesh.faces:
        out.append(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}")
    return ("\n".join(out) + "\n").encode()
