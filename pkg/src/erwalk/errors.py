"""Exception types shared across the toolkit."""


class ErwalkError(Exception):
    """Base class for toolkit-specific failures."""


class NotDifferentiableError(ErwalkError, ValueError):
    """The urn function has no derivative at the requested point."""


class UnsupportedUrnError(ErwalkError, ValueError):
    """Operation requires a property (e.g. strict monotonicity) the spec lacks."""


class InvalidPathError(ErwalkError, ValueError):
    """A trajectory violates the monotone-Lipschitz path constraints."""


class DomainBreachError(ErwalkError, RuntimeError):
    """An ODE right-hand side left the domain of the inverse urn function.

    Carries a human-readable diagnostic in ``args[0]``.
    """


class NonConvergenceError(ErwalkError, RuntimeError):
    """A numerical routine failed to reach its target tolerance."""


class ResourceLimitError(ErwalkError, RuntimeError):
    """A requested computation exceeds a documented size cap."""
