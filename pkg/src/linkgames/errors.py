"""Exception types shared across the package.

Each CLI-facing error carries a short diagnostic code so exit statuses and
report files can name the failure class without parsing prose.
"""


class LinkGamesError(Exception):
    """Base class for all package errors."""

    code = "error"


class GraphError(LinkGamesError):
    """Invalid graph construction (self-loop, duplicate edge, disconnected...)."""

    code = "invalid-graph"


class InvalidActionError(LinkGamesError):
    """A player action references an edge not in the graph or exceeds its budget."""

    code = "invalid-action"


class InvalidMatrixError(LinkGamesError):
    """Matrix handed to the spectral propagator is not symmetric."""

    code = "invalid-matrix"


class ScheduleError(LinkGamesError):
    """Switching schedule violates the dwell-time or ordering constraints."""

    code = "invalid-schedule"


class InvalidEpsilonError(LinkGamesError):
    """Separation parameter fails the gamma > 1 requirement."""

    code = "invalid-epsilon"


class PreconditionError(LinkGamesError):
    """Operation preconditions (ordered states, caps on sizes, ...) not met."""

    code = "precondition"


class CapExceededError(LinkGamesError):
    """Enumeration or subset-search size exceeds the configured cap."""

    code = "cap-exceeded"

    def __init__(self, message, size=None, cap=None):
        super().__init__(message)
        self.size = size
        self.cap = cap


class ScenarioError(LinkGamesError):
    """Scenario file rejected; carries a diagnostic code and source location."""

    code = "invalid-scenario"

    def __init__(self, diagnostic, message, line=None, column=None):
        self.diagnostic = diagnostic
        self.line = line
        self.column = column
        location = ""
        if line is not None:
            location = f" (line {line}" + (f", col {column}" if column is not None else "") + ")"
        super().__init__(f"{diagnostic}{location}: {message}")
