"""Exception types raised across the planner and simulator."""


class EcoCorridorError(Exception):
    """Base class for all package errors."""


class InvalidRouteError(EcoCorridorError, ValueError):
    pass


class HorizonExhaustedError(EcoCorridorError):
    """The ego vehicle is at or beyond the end of the route."""


class InfeasibleSpatError(EcoCorridorError):
    """No usable green phase could be found for a signal."""


class InfeasibleWindowError(EcoCorridorError):
    """A feasible green window is empty.

    ``index`` is the 1-based intersection index whose window collapsed.
    """

    def __init__(self, index, t_min=None, t_max=None):
        self.index = index
        self.t_min = t_min
        self.t_max = t_max
        msg = f"empty green window at intersection {index}"
        if t_min is not None:
            msg += f" (t_min={t_min:.6g} > t_max={t_max:.6g})"
        super().__init__(msg)


class InfeasiblePlanError(EcoCorridorError):
    """The travel-time optimization has an empty feasible set."""


class SolverError(EcoCorridorError, ArithmeticError):
    pass


class ScenarioParseError(EcoCorridorError, ValueError):
    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ScenarioValidationError(EcoCorridorError, ValueError):
    pass


class SimulationTimeout(EcoCorridorError):
    """Raised when a run hits its time ceiling; carries the partial log."""

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = log
