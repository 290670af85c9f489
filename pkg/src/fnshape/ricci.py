"""Discrete hyperbolic Ricci flow on a circle-packing metric.

Each vertex carries a circle of radius r_i, encoded by the conformal
factor u_i = log tanh(r_i / 2) < 0.  Edge lengths come from the
hyperbolic cosine law with a per-edge intersection weight w in [0, 1]:

    cosh l_ij = cosh r_i cosh r_j + w_ij sinh r_i sinh r_j

The flow drives every vertex angle defect to zero (interior target 2*pi,
boundary target pi), which makes curvature -1 inside the triangles and
all boundaries geodesic.  A Newton iteration with backtracking line
search replaces explicit time stepping.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from .errors import (
    AdmissibilityError,
    InitError,
    NoConvergence,
    SolveFailure,
    StepFailure,
)
from .halfedge import signature
from .hyperbolic import hyp_angle


def _radii(u):
    return 2.0 * np.arctanh(np.exp(u))


class DiscreteMetric:
    """Per-vertex conformal factors plus per-edge weights and lengths."""

    def __init__(self, mesh, u, weights, _validate=True):
        self.mesh = mesh
        self.u = np.asarray(u, dtype=np.float64).copy()
        self.weights = np.asarray(weights, dtype=np.float64).copy()
        self.lengths = self._edge_lengths(self.u)
        for a in (self.u, self.weights, self.lengths):
            a.setflags(write=False)
        if _validate and not self.is_valid():
            raise InitError("metric violates the triangle inequality")

    def _edge_lengths(self, u):
        r = _radii(u)
        e = self.mesh.edges
        ru, rv = r[e[:, 0]], r[e[:, 1]]
        with np.errstate(over="ignore", invalid="ignore"):
            cosh_l = np.cosh(ru) * np.cosh(rv) + self.weights * np.sinh(ru) * np.sinh(rv)
            return np.arccosh(np.maximum(cosh_l, 1.0))

    @property
    def radii(self):
        return _radii(self.u)

    def face_lengths(self):
        """(F, 3) lengths, slot c opposite corner c."""
        return self.lengths[self.mesh.face_opp_edge]

    def is_valid(self):
        if not np.isfinite(self.u).all() or (self.u >= 0).any():
            return False
        L = self.face_lengths()
        if not np.isfinite(L).all() or (L <= 0).any():
            return False
        a, b, c = L[:, 0], L[:, 1], L[:, 2]
        return bool(((a + b > c) & (b + c > a) & (c + a > b)).all())

    def with_u(self, u, _validate=True):
        return DiscreteMetric(self.mesh, u, self.weights, _validate=_validate)

    def total_boundary_length(self):
        out = []
        for loop in self.mesh.boundary_loops:
            s = 0.0
            for i, v in enumerate(loop):
                w = loop[(i + 1) % len(loop)]
                s += self.lengths[self.mesh.edge_index(v, w)]
            out.append(s)
        return out


@dataclass
class CurvatureState:
    """Vertex curvatures, face areas, and convergence bookkeeping."""

    K: np.ndarray
    areas: np.ndarray
    target: np.ndarray
    residual: float
    gauss_bonnet_defect: float


@dataclass
class FlowLog:
    """Iteration trace: (iter, residual, min_radius, step_scale)."""

    rows: list = field(default_factory=list)
    iterations: int = 0
    final_residual: float = float("nan")

    def record(self, iteration, residual, min_radius, step_scale, defect):
        self.rows.append((iteration, residual, min_radius, step_scale, defect))

    def residuals(self):
        return [r[1] for r in self.rows]

    def defects(self):
        return [r[4] for r in self.rows]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iter", "residual", "min_radius", "step_scale"])
            for it, res, mr, ss, _defect in self.rows:
                w.writerow([it, repr(res), repr(mr), repr(ss)])


# ------------------------------------------------------------------ operations

def init_metric(mesh):
    """Seed the packing from the embedding.

    The input scale is normalized away (mean edge length one), radii are
    a third of the mean incident edge length, and weights best-fit the
    input lengths, clamped into [0, 1].  If some face then violates the
    triangle inequality, radii are rescaled by powers of two within
    [1e-6, 1e6] until all faces validate.
    """
    ell = mesh.euclidean_edge_lengths()
    if (ell <= 0).any():
        raise InitError("mesh has a zero-length edge")
    ell = ell / ell.mean()

    vertex_sum = np.zeros(mesh.n_vertices)
    vertex_cnt = np.zeros(mesh.n_vertices)
    for (a, b), l in zip(mesh.edges, ell):
        vertex_sum[a] += l
        vertex_sum[b] += l
        vertex_cnt[a] += 1
        vertex_cnt[b] += 1
    base_r = vertex_sum / (3.0 * vertex_cnt)

    scales = [1.0]
    for k in range(1, 21):
        scales.extend([2.0 ** -k, 2.0 ** k])
    for s in scales:
        r = base_r * s
        ru, rv = r[mesh.edges[:, 0]], r[mesh.edges[:, 1]]
        with np.errstate(over="ignore", invalid="ignore"):
            w = (np.cosh(ell) - np.cosh(ru) * np.cosh(rv)) / (np.sinh(ru) * np.sinh(rv))
        w = np.clip(np.nan_to_num(w, nan=1.0, posinf=1.0, neginf=0.0), 0.0, 1.0)
        u = np.log(np.tanh(r / 2.0))
        metric = DiscreteMetric(mesh, u, w, _validate=False)
        if metric.is_valid():
            return metric
    raise InitError("no radius rescale in [1e-6, 1e6] yields a valid metric")


def corner_angles(mesh, metric):
    """(F, 3) interior angles, slot c at corner c."""
    L = metric.face_lengths()
    return np.stack(
        [hyp_angle(L[:, c], L[:, (c + 1) % 3], L[:, (c + 2) % 3]) for c in range(3)],
        axis=1,
    )


def target_curvature(mesh):
    """Zero at every vertex: flat vertex links, geodesic boundary."""
    return np.zeros(mesh.n_vertices)


def curvature(mesh, metric):
    """Angle-defect curvature and triangle areas.

    K_i = 2*pi - sum(angles) at interior vertices, pi - sum at boundary
    vertices; area(f) = pi - angle sum.  The discrete Gauss-Bonnet
    identity sum(K) - sum(area) = 2*pi*chi holds at every metric.
    """
    ang = corner_angles(mesh, metric)
    K = np.where(mesh.vertex_boundary, np.pi, 2.0 * np.pi)
    angle_sum = np.zeros(mesh.n_vertices)
    np.add.at(angle_sum, mesh.faces.reshape(-1), ang.reshape(-1))
    K = K - angle_sum
    areas = np.pi - ang.sum(axis=1)
    target = target_curvature(mesh)
    defect = float(K.sum() - areas.sum() - 2.0 * np.pi * mesh.euler_characteristic)
    return CurvatureState(
        K=K,
        areas=areas,
        target=target,
        residual=float(np.abs(K - target).max()),
        gauss_bonnet_defect=defect,
    )


def curvature_hessian(mesh, metric, mode="analytic"):
    """Sparse symmetric H = dK/du.

    "analytic" uses closed-form angle derivatives; "fd" builds the matrix
    from central finite differences of the curvature (slow, for
    cross-validation).
    """
    if mode == "fd":
        return _fd_hessian(mesh, metric)
    if mode != "analytic":
        raise ValueError(f"unknown hessian mode {mode!r}")

    faces = mesh.faces
    L = metric.face_lengths()
    ang = corner_angles(mesh, metric)
    sinhL = np.sinh(L)

    # dtheta[i]/dl[j] per face: slot j is the edge opposite corner j
    d_opp = sinhL / (np.sin(ang) * sinhL[:, [1, 2, 0]] * sinhL[:, [2, 0, 1]])
    dtheta_dl = np.empty(ang.shape[:1] + (3, 3))
    for i in range(3):
        for j in range(3):
            if i == j:
                dtheta_dl[:, i, j] = d_opp[:, i]
            else:
                k = 3 - i - j
                dtheta_dl[:, i, j] = -np.cos(ang[:, k]) * d_opp[:, i]

    # dl/du per edge and endpoint
    r = metric.radii
    e = mesh.edges
    ru, rv = r[e[:, 0]], r[e[:, 1]]
    w = metric.weights
    sinh_l = np.sinh(metric.lengths)
    dl_du = np.empty((mesh.n_edges, 2))
    dl_du[:, 0] = np.sinh(ru) * (np.sinh(ru) * np.cosh(rv) + w * np.cosh(ru) * np.sinh(rv)) / sinh_l
    dl_du[:, 1] = np.sinh(rv) * (np.sinh(rv) * np.cosh(ru) + w * np.cosh(rv) * np.sinh(ru)) / sinh_l

    e_ids = mesh.face_opp_edge
    # endpoint picker: slot j has corners (j+1, j+2)
    def endpoint_term(j, corner):
        vid = faces[:, corner]
        first = mesh.edges[e_ids[:, j], 0] == vid
        return np.where(first, dl_du[e_ids[:, j], 0], dl_du[e_ids[:, j], 1])

    M = np.zeros((len(faces), 3, 3))
    for i in range(3):
        for m in range(3):
            j1 = (m + 1) % 3  # edge slot with m as its (j+2) corner
            j2 = (m + 2) % 3  # edge slot with m as its (j+1) corner
            M[:, i, m] = (dtheta_dl[:, i, j1] * endpoint_term(j1, m)
                          + dtheta_dl[:, i, j2] * endpoint_term(j2, m))

    rows = np.broadcast_to(faces[:, :, None], M.shape).reshape(-1)
    cols = np.broadcast_to(faces[:, None, :], M.shape).reshape(-1)
    H = sparse.coo_matrix(
        (-M.reshape(-1), (rows, cols)),
        shape=(mesh.n_vertices, mesh.n_vertices),
    ).tocsr()
    return (H + H.T) * 0.5


def _fd_hessian(mesh, metric, h=1e-6):
    V = mesh.n_vertices
    cols = []
    for j in range(V):
        up = metric.u.copy()
        up[j] += h
        um = metric.u.copy()
        um[j] -= h
        Kp = curvature(mesh, metric.with_u(up, _validate=False)).K
        Km = curvature(mesh, metric.with_u(um, _validate=False)).K
        cols.append((Kp - Km) / (2 * h))
    H = sparse.csr_matrix(np.column_stack(cols))
    return (H + H.T) * 0.5


def newton_step(mesh, metric, target=None, hessian="analytic"):
    """One damped Newton update toward the target curvature.

    Solves H du = -(K - target) with escalating diagonal regularization,
    then backtracks (halving) until the metric stays valid and the
    residual does not increase.  Returns (metric, residual_after).
    """
    state = curvature(mesh, metric)
    target = state.target if target is None else np.asarray(target, dtype=np.float64)
    rhs = -(state.K - target)
    res0 = float(np.abs(rhs).max())
    if res0 == 0.0:
        return metric, 0.0

    H = curvature_hessian(mesh, metric, mode=hessian)
    sign = -1.0 if H.diagonal().sum() < 0 else 1.0
    delta = None
    lam = 1e-12
    eye = sparse.identity(mesh.n_vertices, format="csr")
    for _attempt in range(7):
        try:
            cand = sparse_linalg.spsolve((H + sign * lam * eye).tocsc(), rhs)
            if np.isfinite(cand).all():
                delta = cand
                break
        except Exception:
            pass
        lam *= 10.0
    if delta is None:
        raise SolveFailure(f"Hessian solve failed up to regularization {lam:.1e}")

    scale = 1.0
    while scale >= 2.0 ** -40:
        trial = metric.with_u(metric.u + scale * delta, _validate=False)
        if trial.is_valid():
            new_state = curvature(mesh, trial)
            if new_state.residual <= res0:
                trial._last_step_scale = scale
                return trial, new_state.residual
        scale *= 0.5
    raise StepFailure(
        f"line search stalled at residual {res0:.3e} (no valid non-increasing step)"
    )


def flow_to_hyperbolic(mesh, metric, tolerance=1e-8, max_iters=100,
                       hessian="analytic", log=None):
    """Run Newton steps until max |K| <= tolerance.

    The converged metric is hyperbolic with geodesic boundaries: interior
    angle sums are 2*pi, boundary angle sums pi, and the total area is
    -2*pi*chi.  Raises NoConvergence with the residual history if the
    budget runs out.
    """
    sig = signature(mesh)
    if not sig.admissible:
        raise AdmissibilityError(
            "zero target curvature needs 2g-2+b > 0 (negative Euler characteristic)"
        )
    log = FlowLog() if log is None else log
    state = curvature(mesh, metric)
    log.record(0, state.residual, float(metric.radii.min()), 0.0,
               state.gauss_bonnet_defect)
    history = [state.residual]
    iteration = 0
    while state.residual > tolerance:
        if iteration >= max_iters:
            raise NoConvergence(max_iters, history)
        metric, _res = newton_step(mesh, metric, hessian=hessian)
        state = curvature(mesh, metric)
        iteration += 1
        history.append(state.residual)
        log.record(iteration, state.residual, float(metric.radii.min()),
                   getattr(metric, "_last_step_scale", 1.0),
                   state.gauss_bonnet_defect)
    log.iterations = iteration
    log.final_residual = state.residual
    return metric


def total_area(mesh, metric):
    return float(curvature(mesh, metric).areas.sum())
