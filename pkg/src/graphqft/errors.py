"""Exception types shared across the package."""


class GraphQFTError(Exception):
    """Base class for all package errors."""


class NonPositiveMass(GraphQFTError):
    """Squared mass must be strictly positive."""


class IdentificationMismatch(GraphQFTError):
    """Gluing identification is not an isomorphism of the marked subgraphs."""


class OverlappingMarkings(GraphQFTError):
    """Two boundary markings that must be disjoint share vertices."""


class SingularMatrix(GraphQFTError):
    """Factorization hit a pivot below the singularity threshold."""


class NotPositiveDefinite(GraphQFTError):
    """Operation requires a positive definite matrix."""


class NegativeEntry(GraphQFTError):
    """Operation requires an entrywise nonnegative matrix."""


class DimensionMismatch(GraphQFTError):
    """Vector or matrix dimensions do not match the expected layout."""


class InsertionOnBoundary(GraphQFTError):
    """Correlator insertion points must be bulk vertices."""


class NegativeTime(GraphQFTError):
    """Heat flow time must be nonnegative."""


class BoundaryMismatch(GraphQFTError):
    """Gluing data of the two sides disagrees on the shared boundary."""


class OrderTooLarge(GraphQFTError):
    """Requested perturbative order exceeds the configured cap."""


class PotentialUnbounded(GraphQFTError):
    """Interaction potential does not satisfy the growth condition."""


class DimensionTooLarge(GraphQFTError):
    """Tensor-product quadrature grid would be too large."""


class UnsupportedShape(GraphQFTError):
    """Continuum sweep supports only line and circle families."""


class NumericalFault(GraphQFTError):
    """Internal cross-check failed; indicates a numerical fault, not bad input."""
