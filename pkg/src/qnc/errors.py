"""Exception hierarchy shared by the simulator layers."""


class QNCError(Exception):
    """Base class for every error raised by this package."""


class StateError(QNCError):
    """Malformed state, unknown label, or dimension mismatch."""


class ImpossibleBranch(QNCError):
    """A forced measurement outcome has probability zero."""


class DisposalError(StateError):
    """A qubit cannot be dropped because it is entangled or in superposition."""


class CapacityError(QNCError):
    """A configured size cap was exceeded."""


class LocalityError(QNCError):
    """An operation touched a register its node does not own."""


class ChannelError(QNCError):
    """No classical channel (or no received bit) backs a communication step."""


class LinkError(QNCError):
    """A primitive needed an EPR link that is not present."""


class TopologyError(QNCError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line else ""
        super().__init__(f"{where}{message}")


class ScriptError(QNCError):
    """Positioned diagnostic from the protocol script parser."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"{line}:{column}: {message}")
