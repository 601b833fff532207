"""Sculpt-specific exceptions."""


class SculptError(Exception):
    """Generic base exception for Sculpt errors."""


class NotPositiveError(SculptError):
    """Parameter or value must be strictly positive."""


class NotAProbabilityError(SculptError):
    """Value must be in the range [0, 1]"""


class ContractViolationError(SculptError):
    """An operation was called with arguments that break its preconditions."""


class ExhaustiveLimitError(SculptError):
    """Instance is too large for exhaustive enumeration."""

    def __init__(self, n, limit):
        self.n = n
        self.limit = limit
        super().__init__(
            f"Refusing exhaustive enumeration over {n} variables (limit is {limit})"
        )


class GenerationError(SculptError):
    """Instance generation ran out of draws."""

    def __init__(self, message, attempts):
        self.attempts = attempts
        super().__init__(f"{message} after {attempts} attempts")


class DimacsParseError(SculptError):
    """DIMACS text is malformed."""

    def __init__(self, message, line):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ConflictError(SculptError):
    """Fixing a variable emptied a clause."""


class CapacityError(SculptError):
    """The register would not fit under the configured qubit cap."""


class CertainFailureError(SculptError):
    """A clause check annihilated the state (pass probability below floor)."""


class IllConditionedError(SculptError):
    """The solution Gram matrix is numerically singular."""

    def __init__(self, condition, limit):
        self.condition = condition
        super().__init__(
            f"Gram matrix condition estimate {condition:.3e} exceeds {limit:.1e}"
        )


class DivergenceError(SculptError):
    """Fidelity threshold was not reached within the check cap."""

    def __init__(self, cap, fidelity):
        self.cap = cap
        self.fidelity = fidelity
        super().__init__(
            f"Fidelity {fidelity:.6f} still below threshold after {cap} checks"
        )


class StateConsumedError(SculptError):
    """The register was measured or aborted and can no longer be used."""


class ConfigError(SculptError):
    """Experiment configuration is malformed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = path if path is not None else "<config>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {message}")


class NotUniqueIDError(SculptError):
    """An item was added to a model under an existing ID."""
