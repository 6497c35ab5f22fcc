#!/usr/bin/env python3
"""Exception types shared by the grid, mesh and verification modules."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class ResolutionError(ValueError):
    """Request cannot be represented on the sampled mesh."""


class PreconditionError(ValueError):
    """A measured precondition of a verifier does not hold."""


class VerificationError(AssertionError):
    """Raised when a failed VerificationReport is required to pass."""
