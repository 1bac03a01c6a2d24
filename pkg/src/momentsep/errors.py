"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class IntegrityError(ValueError):
    """Input data is internally inconsistent."""


class IncompleteTmsError(KeyError):
    """A moment required by a construction is missing from the sequence."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "incomplete moment sequence"


class ExtractionError(RuntimeError):
    """Atom extraction from a flat moment matrix failed."""
