"""Exception hierarchy.

Every error raised by this package derives from :class:`FnShapeError`.
Input and topology problems are distinct from numerical failures so that
callers (and the CLI exit codes) can tell "fix your mesh" apart from
"the solver gave up".
"""


class FnShapeError(Exception):
    """Base class for all fnshape errors."""


# ---------------------------------------------------------------- input / topology

class ParseError(FnShapeError):
    """Malformed OFF/OBJ/landmark file."""


class NonManifold(FnShapeError):
    """Edge with more than two incident faces, inconsistent winding, or a
    bowtie vertex (more than one face fan)."""


class NonTriangular(FnShapeError):
    """A face with a vertex count other than three."""


class Disconnected(FnShapeError):
    """The mesh has more than one connected component."""


class TopologyError(FnShapeError):
    """Corrupted connectivity: non-integral or negative genus, or an
    operation produced an impossible surface."""


class AdmissibilityError(FnShapeError):
    """The surface violates 2g - 2 + n > 0."""


class LandmarkError(FnShapeError):
    """Landmark indices out of range, duplicated, adjacent, on the
    boundary, or whose excision does not yield a valid surface."""


class RefinementNeeded(FnShapeError):
    """Disjoint simple decomposition curves cannot be routed on the
    current mesh; refine it and retry."""


class CurveError(FnShapeError):
    """Cut curves intersect or are not simple cycles."""


class SignatureMismatch(FnShapeError):
    """Descriptors from different strata (g, n); distance is undefined."""


class CountMismatch(FnShapeError):
    """Curve/length/twist cardinalities disagree with 3g-3+n or n."""


# ---------------------------------------------------------------- numerics

class DegenerateTriangle(FnShapeError):
    """Triangle inequality fails, or a cosine-law argument leaves [-1, 1]
    by more than the clamping tolerance."""


class InvalidCuff(FnShapeError):
    """A cuff length that is not strictly positive."""


class NotHyperbolic(FnShapeError):
    """Holonomy trace too close to 2: the curve is not essential or the
    flow has not converged."""


class InitError(FnShapeError):
    """No radius rescale in [1e-6, 1e6] yields a valid initial metric."""


class NoConvergence(FnShapeError):
    """Ricci flow failed to reach the residual tolerance."""

    def __init__(self, max_iters, history):
        self.max_iters = max_iters
        self.history = list(history)
        last = self.history[-1] if self.history else float("nan")
        super().__init__(
            f"no convergence after {max_iters} iterations "
            f"(last residual {last:.3e})"
        )


class StepFailure(FnShapeError):
    """Line search could not restore triangle inequalities or reduce the
    residual."""


class SolveFailure(FnShapeError):
    """Hessian solve failed beyond the regularization budget."""


class NumericalDrift(FnShapeError):
    """Shared-edge mismatch in a developed strip exceeded tolerance even
    in extended precision."""


class GeometryError(FnShapeError):
    """A perpendicular foot or axis could not be located (degenerate
    configuration)."""


#: errors that mean "the input is bad" (CLI exit code 2)
INPUT_ERRORS = (
    ParseError,
    NonManifold,
    NonTriangular,
    Disconnected,
    TopologyError,
    AdmissibilityError,
    LandmarkError,
    RefinementNeeded,
    CurveError,
    SignatureMismatch,
    CountMismatch,
    InvalidCuff,
)

#: errors that mean "the numerics gave up" (CLI exit code 3)
NUMERIC_ERRORS = (
    DegenerateTriangle,
    NotHyperbolic,
    InitError,
    NoConvergence,
    StepFailure,
    SolveFailure,
    NumericalDrift,
    GeometryError,
)
