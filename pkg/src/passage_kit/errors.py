"""Exception hierarchy shared by every module of the package."""


class PassageKitError(Exception):
    """Base class for all package errors."""


class LawError(PassageKitError, ValueError):
    """A jump law (or arrival law) failed validation."""


class HypothesisError(PassageKitError, ValueError):
    """The law does not satisfy the structural assumptions an operation needs."""


class SolverError(PassageKitError, RuntimeError):
    """A bracketed root search failed to converge or lost its bracket."""
