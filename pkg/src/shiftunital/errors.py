"""Exception types shared across the package."""


class FieldError(ValueError):
    """Invalid field parameters or arithmetic request (bad modulus, division by zero, ...)."""


class DesignError(ValueError):
    """A geometric object failed one of its defining incidence properties."""


class VerificationError(AssertionError):
    """An independent cross-check (closed form vs enumeration, engine vs engine) disagreed."""
