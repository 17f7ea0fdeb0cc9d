"""
Exception hierarchy for contrakt.

Library code raises these; only the CLI turns them into exit codes.
"""


class ContraktError(Exception):
    """Base class for every error raised by the library."""


class ContraktInputError(ContraktError):
    """Malformed or inconsistent user input."""


# linalg
class NonConvergence(ContraktError):
    """An iterative factorization did not converge."""


class RankDeficient(ContraktError):
    """Basis columns are linearly dependent beyond tolerance."""


class DimensionMismatch(ContraktInputError):
    """Operand shapes do not agree."""


# graph
class InvalidGraph(ContraktInputError):
    """Edge list violates the weighted digraph invariants."""


class NotReachable(ContraktError):
    """No globally reachable node / zero eigenvalue is not simple."""


class Disconnected(ContraktError):
    """Undirected graph has lambda2 numerically zero."""


class NotConnected(ContraktError):
    """A connected undirected graph was required."""


class EpsilonTooSmall(ContraktError):
    """Perturbation search could not meet the requested epsilon slack."""


# measures
class UnsupportedP(ContraktError):
    """No closed form is available for this p."""


class AllZeroWeights(ContraktError):
    """Weight vector has no positive entry."""


class KernelNotInvariant(ContraktError):
    """Kernel of the weight is not invariant under the matrix."""


class NotInvariant(ContraktError):
    """Subspace is not invariant under the matrix."""


class PositiveSpectrum(ContraktError):
    """Eigenvalue with positive real part where none is allowed."""


# tensor norm
class BadRepresentation(ContraktError):
    """Tensor representation does not reconstruct the target vector."""


# systems
class NonConvexCost(ContraktError):
    """Sampled Hessian has a negative eigenvalue."""


class NotMetzler(ContraktError):
    """Matrix has a negative off-diagonal entry."""


class NotHurwitz(ContraktError):
    """Matrix is not Hurwitz."""


class UnknownName(ContraktInputError):
    """Unknown model or example name."""


# certify
class SingularQ(ContraktError):
    """Transformation matrix is singular or badly conditioned."""


class EquilibriumSubspaceViolation(ContraktError):
    """Vector field does not vanish on the supplied equilibrium subspace."""


# sim
class Diverged(ContraktError):
    """State norm exceeded the divergence threshold."""


class StepUnderflow(ContraktError):
    """Integrator step size fell below machine spacing."""


class InsufficientDecay(ContraktError):
    """Too few usable samples to fit a decay rate."""


class NonPositiveState(ContraktError):
    """Logarithmic monitor evaluated on a non-positive entry."""


# cli
class ConfigError(ContraktInputError):
    """Invalid run configuration."""
