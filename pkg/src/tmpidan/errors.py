"""Exception hierarchy shared across the package."""


class TmpidanError(Exception):
    """Base class for all package errors."""


# graph layer
class GraphError(TmpidanError):
    pass


class CycleError(GraphError):
    pass


class DanglingRef(GraphError):
    pass


class InfeasibleFire(GraphError):
    pass


class DepthLimitReached(GraphError):
    pass


class AlreadySolved(GraphError):
    pass


# workspace layer
class InconsistentEffect(TmpidanError):
    """An effect's geometric or symbolic precondition does not hold."""

    def __init__(self, precondition: str, detail: str = ""):
        self.precondition = precondition
        self.detail = detail
        msg = precondition if not detail else f"{precondition}: {detail}"
        super().__init__(msg)


class ScenarioError(TmpidanError):
    pass


class PackingFailure(TmpidanError):
    pass


# motion layer
class InvalidStart(TmpidanError):
    pass


class OutOfRangeAngle(TmpidanError):
    pass


# heuristic / allocation
class NoFeasibleAngle(TmpidanError):
    pass


class MissingRawSet(TmpidanError):
    pass


class FewerTasksThanRobots(TmpidanError):
    pass


class TooLarge(TmpidanError):
    pass


# planner
class EmptyFeasibleSet(TmpidanError):
    pass
