"""Hyperbolic trigonometry and isometries of the upper half-plane.

Points of the half-plane are complex numbers with positive imaginary
part.  Orientation-preserving isometries are real 2x2 matrices of
determinant one acting by fractional linear maps; they compose by matrix
multiplication.  Everything here accepts numpy scalars of any float
width, so the layout code can rerun in extended precision.
"""

import numpy as np

from .errors import (
    DegenerateTriangle,
    GeometryError,
    InvalidCuff,
    NotHyperbolic,
)

CLAMP_TOL = 1e-12
TRACE_TOL = 1e-10


def _clamped_arccos(x):
    """arccos with roundoff forgiveness: clamp within CLAMP_TOL of
    [-1, 1], reject anything farther out."""
    x = np.asarray(x)
    bad = (x < -1 - CLAMP_TOL) | (x > 1 + CLAMP_TOL)
    if bad.any():
        raise DegenerateTriangle(
            f"cosine-law argument outside [-1, 1]: {np.atleast_1d(x)[np.atleast_1d(bad)]}"
        )
    return np.arccos(np.clip(x, -1.0, 1.0))


def _check_triangle(a, b, c):
    a, b, c = np.asarray(a), np.asarray(b), np.asarray(c)
    if (a <= 0).any() or (b <= 0).any() or (c <= 0).any():
        raise DegenerateTriangle("edge lengths must be positive")
    if ((a + b <= c) | (b + c <= a) | (c + a <= b)).any():
        raise DegenerateTriangle("triangle inequality fails")


def hyp_angle(opposite, adjacent1, adjacent2):
    """Interior angle opposite the first length, by the hyperbolic law of
    cosines:

        cos(theta) = (cosh a1 * cosh a2 - cosh opp) / (sinh a1 * sinh a2)

    Array-valued arguments broadcast.
    """
    _check_triangle(opposite, adjacent1, adjacent2)
    num = np.cosh(adjacent1) * np.cosh(adjacent2) - np.cosh(opposite)
    den = np.sinh(adjacent1) * np.sinh(adjacent2)
    return _clamped_arccos(num / den)


def triangle_angles(a, b, c):
    """The three angles of the triangle with side lengths (a, b, c), each
    opposite the same-named side."""
    return hyp_angle(a, b, c), hyp_angle(b, c, a), hyp_angle(c, a, b)


def triangle_area(a, b=None, c=None):
    """Area by angle defect: pi minus the angle sum.

    Accepts three lengths or a single :class:`HyperbolicTriangle`.
    """
    if b is None:
        a, b, c = a.edge_lengths
    A, B, C = triangle_angles(a, b, c)
    return np.pi - (A + B + C)


class HyperbolicTriangle:
    """Triangle in the hyperbolic plane given by its side lengths."""

    def __init__(self, edge_lengths):
        lengths = tuple(float(x) for x in edge_lengths)
        if len(lengths) != 3:
            raise DegenerateTriangle("a triangle has three sides")
        _check_triangle(*lengths)
        self.edge_lengths = lengths

    @property
    def angles(self):
        return triangle_angles(*self.edge_lengths)

    @property
    def area(self):
        return triangle_area(*self.edge_lengths)

    def __repr__(self):
        return f"HyperbolicTriangle({self.edge_lengths})"


def pants_seam(l_i, l_j, l_k):
    """Length of the common perpendicular (seam) between cuffs i and j of
    a hyperbolic pair of pants with boundary lengths (l_i, l_j, l_k):

        cosh s_ij = (cosh(l_k/2) + cosh(l_i/2) cosh(l_j/2))
                    / (sinh(l_i/2) sinh(l_j/2))
    """
    for l in (l_i, l_j, l_k):
        if not l > 0:
            raise InvalidCuff(f"cuff length {l} must be positive")
    num = np.cosh(l_k / 2) + np.cosh(l_i / 2) * np.cosh(l_j / 2)
    den = np.sinh(l_i / 2) * np.sinh(l_j / 2)
    return np.arccosh(num / den)


# --------------------------------------------------------------- isometries

class HolonomyTransform:
    """Unit-determinant real 2x2 matrix acting on the upper half-plane.

    The determinant is renormalized to one on construction and after
    every composition, so long products stay in SL(2, R).
    """

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=np.float64).reshape(2, 2)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if not det > 0:
            raise GeometryError(f"matrix determinant {det} is not positive")
        m = m / np.sqrt(det)
        self.matrix = m
        self.matrix.setflags(write=False)

    @classmethod
    def identity(cls):
        return cls(np.eye(2))

    def compose(self, other):
        return HolonomyTransform(self.matrix @ other.matrix)

    def inverse(self):
        a, b, c, d = self.matrix.reshape(-1)
        return HolonomyTransform([[d, -b], [-c, a]])

    @property
    def trace(self):
        return float(self.matrix[0, 0] + self.matrix[1, 1])

    def classify(self):
        """"elliptic", "parabolic", or "hyperbolic" by |trace| vs 2."""
        t = abs(self.trace)
        if t > 2 + TRACE_TOL:
            return "hyperbolic"
        if t < 2 - TRACE_TOL:
            return "elliptic"
        return "parabolic"

    def translation_length(self):
        t = abs(self.trace)
        if t <= 2 + TRACE_TOL:
            raise NotHyperbolic(
                f"|trace| = {t} is not above 2: curve inessential or flow unconverged"
            )
        return 2.0 * float(np.arccosh(t / 2.0))

    def apply(self, z):
        return apply_mobius(self.matrix, z)

    def fixed_points(self):
        """(repelling, attracting) fixed points on the real axis of a
        hyperbolic transform."""
        if self.classify() != "hyperbolic":
            raise NotHyperbolic("only hyperbolic transforms have an axis")
        return axis_endpoints(self.matrix)

    def __repr__(self):
        a, b, c, d = self.matrix.reshape(-1)
        return f"HolonomyTransform([[{a:.6g}, {b:.6g}], [{c:.6g}, {d:.6g}]])"


def compose(a, b):
    """Matrix product of two holonomies, renormalized to det 1."""
    return a.compose(b)


def translation_length(m):
    """Geodesic translation length 2*arccosh(|trace| / 2)."""
    return m.translation_length()


# --------------------------------------------------- half-plane primitives
#
# These are dtype-generic: feed float64 or longdouble scalars and the
# computation stays in that precision.

def apply_mobius(m, z):
    a, b, c, d = m.reshape(-1) if hasattr(m, "reshape") else m
    return (a * z + b) / (c * z + d)


def uhp_distance(z1, z2):
    """Hyperbolic distance between two half-plane points."""
    y1, y2 = z1.imag, z2.imag
    if y1 <= 0 or y2 <= 0:
        raise GeometryError("points must have positive imaginary part")
    x = 1.0 + (abs(z2 - z1) ** 2) / (2.0 * y1 * y2)
    return np.arccosh(x)


def direction_angle(z_from, z_to):
    """Euclidean angle of the tangent at ``z_from`` of the geodesic
    through ``z_from`` toward ``z_to``."""
    x1, y1 = z_from.real, z_from.imag
    x2, y2 = z_to.real, z_to.imag
    dx = x2 - x1
    scale = max(abs(x1), abs(x2), y1, y2)
    if abs(dx) <= 1e-14 * scale:
        half_pi = np.arctan2(np.ones_like(y1), np.zeros_like(y1))
        return half_pi if y2 > y1 else -half_pi
    # geodesic is a semicircle centered on the real axis
    xi = (x2 * x2 + y2 * y2 - x1 * x1 - y1 * y1) / (2.0 * dx)
    phi1 = np.arctan2(y1, x1 - xi)
    phi2 = np.arctan2(y2, x2 - xi)
    quarter = np.arctan2(np.ones_like(y1), np.zeros_like(y1))
    return phi1 + quarter if phi2 > phi1 else phi1 - quarter


def rotation_matrix(theta, dtype=np.float64):
    """Isometry fixing i whose derivative there is exp(i * theta)."""
    t = dtype(theta) / dtype(2)
    return np.array([[np.cos(t), np.sin(t)], [-np.sin(t), np.cos(t)]], dtype=dtype)


def point_to_i_matrix(z, dtype=np.float64):
    """Isometry i -> z with real positive derivative (preserves tangent
    directions)."""
    x, y = dtype(z.real), dtype(z.imag)
    s = np.sqrt(y)
    return np.array([[s, x / s], [dtype(0), 1 / s]], dtype=dtype)


def point_at(z, angle, dist):
    """Point at hyperbolic distance ``dist`` from ``z`` along the
    geodesic with initial direction ``angle``."""
    dtype = np.asarray(z).real.dtype.type
    m = point_to_i_matrix(z, dtype=dtype)
    half_pi = np.arctan2(dtype(1), dtype(0))
    r = rotation_matrix(angle - half_pi, dtype=dtype)
    target = np.exp(dist) * _imag_unit(dtype)
    return apply_mobius(m @ r, target)


def _imag_unit(dtype):
    if dtype is np.longdouble:
        return np.clongdouble(1j)
    return complex(0.0, 1.0)


def frame_matrix(p, q, dtype=None):
    """Isometry sending the canonical frame to (p, q): it maps i to p and
    i*e^{d(p,q)} to q."""
    dtype = dtype or np.asarray(p).real.dtype.type
    ang = direction_angle(p, q)
    half_pi = np.arctan2(dtype(1), dtype(0))
    return point_to_i_matrix(p, dtype=dtype) @ rotation_matrix(ang - half_pi, dtype=dtype)


def axis_endpoints(matrix):
    """(repelling, attracting) real fixed points of a hyperbolic matrix."""
    m = np.asarray(matrix, dtype=np.float64)
    # if the axis passes through infinity, conjugate it away first
    if abs(m[1, 0]) < 1e-9 * np.abs(m).max():
        for theta in (0.7, 1.3, 2.1):
            w = rotation_matrix(theta)
            try:
                p, q = axis_endpoints(w @ m @ w.T)
            except GeometryError:
                continue
            winv = w.T  # rotation inverse = transpose
            return (float(np.real(apply_mobius(winv, p))),
                    float(np.real(apply_mobius(winv, q))))
        raise GeometryError("could not normalize axis away from infinity")
    a, b, c, d = m.reshape(-1)
    disc = (a + d) ** 2 - 4.0
    if disc <= 0:
        raise NotHyperbolic(f"|trace| = {abs(a + d)} is not above 2")
    root = np.sqrt(disc)
    p1 = (a - d + root) / (2 * c)
    p2 = (a - d - root) / (2 * c)
    # attracting fixed point: |derivative| = |cp + d|^{-2} > ... < 1
    d1 = abs(c * p1 + d)
    fixed = (p2, p1) if d1 > 1 else (p1, p2)
    return float(fixed[0]), float(fixed[1])


def axis_chart(matrix):
    """Matrix mapping the axis of ``matrix`` to the positively-oriented
    imaginary axis (repelling endpoint to 0, attracting to infinity)."""
    p_rep, p_att = axis_endpoints(matrix)
    if p_att > p_rep:
        chart = np.array([[-1.0, p_rep], [1.0, -p_att]])
    else:
        chart = np.array([[1.0, -p_rep], [1.0, -p_att]])
    det = chart[0, 0] * chart[1, 1] - chart[0, 1] * chart[1, 0]
    return chart / np.sqrt(det)


def perpendicular_foot(alpha, beta):
    """Foot on the imaginary axis of the common perpendicular from the
    geodesic with real endpoints (alpha, beta).

    Returns ``(t, foot)`` where ``t`` is the signed distance of the foot
    from i along the axis and ``foot`` the half-plane point.  The two
    geodesics must be disjoint, i.e. alpha*beta > 0.
    """
    prod = alpha * beta
    if prod <= 0:
        raise GeometryError(
            f"axis endpoints ({alpha}, {beta}) straddle the imaginary axis"
        )
    rho = np.sqrt(prod)
    return float(0.5 * np.log(prod)), complex(0, rho)


def geodesic_gap(alpha, beta):
    """Distance between the imaginary axis and the geodesic with real
    endpoints (alpha, beta) along their common perpendicular."""
    t, foot_i = perpendicular_foot(alpha, beta)
    rho = foot_i.imag
    center = 0.5 * (alpha + beta)
    # intersection of |z| = rho with the (alpha, beta) semicircle
    cos_phi = rho / center
    if not -1 <= cos_phi <= 1:
        raise GeometryError("perpendicular does not meet the geodesic")
    sin_phi = np.sqrt(1.0 - cos_phi * cos_phi)
    foot_j = complex(rho * cos_phi, rho * sin_phi)
    return float(uhp_distance(foot_i, foot_j))
