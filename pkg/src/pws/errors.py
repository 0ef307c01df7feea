"""Exception types raised across the toolkit."""


class PwsError(Exception):
    """Base class for every error raised by this package."""


class DslError(PwsError):
    """Lexical, syntax or reference errors found while reading a model.

    ``errors`` holds the located diagnostics; the exception message is the
    first of them.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(str(e) for e in self.errors) or "dsl error")


class ModelError(PwsError):
    """A model failed structural validation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("\n".join(str(v) for v in self.violations))


class UnboundSlot(PwsError):
    pass


class CommandNotEnabled(PwsError):
    """A whole issued a command its part cannot accept in its current state."""

    def __init__(self, command, configuration=None, transition=None, state=None):
        self.command = command
        self.configuration = configuration
        self.transition = transition
        self.state = state
        where = f" in transition {transition}" if transition else ""
        at = f" at {configuration}" if configuration is not None else ""
        part_state = f" (part is in {state})" if state else ""
        super().__init__(f"command {command} not enabled{where}{at}{part_state}")


class UnknownNotification(PwsError):
    def __init__(self, part, event, transition=None):
        self.part = part
        self.event = event
        self.transition = transition
        where = f" in transition {transition}" if transition else ""
        super().__init__(f"part {part} never emits notification {event}{where}")


class ExtractionAmbiguity(PwsError):
    def __init__(self, state, event, transitions):
        self.state = state
        self.event = event
        self.transitions = tuple(transitions)
        super().__init__(
            f"whole state {state} has several transitions on command {event}: "
            + ", ".join(self.transitions)
        )


class InterfaceMismatch(PwsError):
    def __init__(self, slot, diff):
        self.slot = slot
        self.diff = list(diff)
        super().__init__(f"interface mismatch for slot {slot}: " + "; ".join(self.diff))


class CyclicHolarchy(PwsError):
    pass


class FlattenCapExceeded(PwsError):
    pass


class SimulationError(PwsError):
    pass


class AmbiguousFiring(SimulationError):
    def __init__(self, path, trigger, candidates):
        self.path = path
        self.trigger = trigger
        self.candidates = tuple(candidates)
        super().__init__(
            f"ambiguous firing at {path or '.'} on {trigger}: " + ", ".join(self.candidates)
        )


class ConformanceError(SimulationError):
    pass
