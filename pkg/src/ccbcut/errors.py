"""Exception types raised across the package.

The CLI maps these onto exit codes: input/format problems -> 1,
configuration and domain problems -> 2, solver failures -> 3.
"""


class CcbError(Exception):
    """Base class for all package-specific errors."""


class GraphError(CcbError, ValueError):
    """Invalid graph construction or graph-typed argument."""


class SelfLoopError(GraphError):
    """An edge joins a vertex to itself."""


class DuplicateEdgeError(GraphError):
    """The same vertex pair appears more than once in an edge list."""


class NonpositiveWeightError(GraphError):
    """An edge weight is zero, negative, or below the validity floor."""


class VertexIndexError(GraphError):
    """A vertex index is outside [0, n)."""


class ZeroDegreeError(GraphError):
    """A vertex has zero degree where positive degree is required."""


class DimensionMismatchError(CcbError, ValueError):
    """Vector or matrix length does not match the expected dimension."""


class PartitionError(CcbError, ValueError):
    """Invalid partition (empty block, bad label range, wrong length)."""


class DomainError(CcbError, ValueError):
    """A numeric parameter is outside its documented domain."""


class EnumerationLimitError(CcbError):
    """Exhaustive enumeration would exceed the configured size guard."""


class EigensolverError(CcbError, RuntimeError):
    """The iterative eigensolver failed to reach the requested tolerance."""


class DegenerateWeightsError(CcbError, ArithmeticError):
    """Edge reweighting hit 0 raised to a negative power."""


class ConstraintViolationError(CcbError, ValueError):
    """A matrix argument violates its orthogonality/balance constraints."""


class ConstantVectorError(CcbError, ValueError):
    """A threshold split was requested on an all-equal value vector."""


class FormatError(CcbError, ValueError):
    """A text or image file does not follow the documented format."""
