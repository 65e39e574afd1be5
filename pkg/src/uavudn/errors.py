"""Exception hierarchy shared across the package."""


class UavUdnError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(UavUdnError, ValueError):
    """A parameter is outside its admissible range."""


class SingularGeometryError(UavUdnError, ValueError):
    """Transmitter and receiver coincide, so the path loss is undefined."""


class InfeasibleTrajectoryError(UavUdnError, ValueError):
    """The requested trajectory cannot be flown within the speed/duration budget."""


class BudgetError(UavUdnError, RuntimeError):
    """An exhaustive search would exceed its evaluation budget."""


class EvaluationError(UavUdnError, ArithmeticError):
    """An objective returned a non-finite value."""


class ConsistencyError(UavUdnError, RuntimeError):
    """A solver broke one of its own guarantees (e.g. a non-monotone trace)."""


class InfeasiblePlanError(UavUdnError, ValueError):
    """A relay plan violates information causality.

    Attributes
    ----------
    slot : int
        Index of the first violating slot.
    """

    def __init__(self, slot, message=None):
        self.slot = slot
        super().__init__(message or f"information causality violated at slot {slot}")


class InvalidComparisonError(UavUdnError, ValueError):
    """Two runs cannot be compared because they differ in more than the schedule."""


class SpecValidationError(UavUdnError, ValueError):
    """An experiment spec failed validation.

    ``errors`` holds every problem found, each as ``(key_path, line, message)``.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        lines = []
        for path, line, msg in self.errors:
            where = f"line {line}" if line is not None else "line ?"
            lines.append(f"{path or '<root>'} ({where}): {msg}")
        super().__init__("invalid experiment spec:\n  " + "\n  ".join(lines))
