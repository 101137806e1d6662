"""Exception hierarchy shared across the engine."""


class NopressError(Exception):
    """Base class for all engine errors."""


class MapIntegrityError(NopressError):
    """Map data file is corrupt or violates a structural invariant."""


class UnknownLocationError(NopressError, KeyError):
    """A location name does not exist on the map."""


class OrderSyntaxError(NopressError, ValueError):
    """Order text does not match the grammar.

    Carries the character position of the first offending token.
    """

    def __init__(self, text: str, pos: int, reason: str):
        super().__init__(f"{reason} at position {pos} in {text!r}")
        self.text = text
        self.pos = pos
        self.reason = reason


class PhaseError(NopressError):
    """Operation called in the wrong phase kind."""


class StateError(NopressError):
    """Operation called on a game in the wrong lifecycle state."""


class ContractViolation(NopressError):
    """Caller broke a precondition (e.g. unvalidated orders fed to the resolver)."""


class RecordError(NopressError):
    """Game record is malformed or does not replay."""

    def __init__(self, message: str, divergent_phase: str | None = None):
        super().__init__(message)
        self.divergent_phase = divergent_phase


class ProtocolError(NopressError):
    """Agent wire-protocol violation or transport failure."""
