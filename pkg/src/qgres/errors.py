"""Typed errors raised across the package.

Two branches matter to callers: InputError (malformed data, CLI exit 2) and
SolverError (a computation could not be completed as asked, CLI exit 3).
"""


class QgError(Exception):
    pass


class InputError(QgError):
    pass


class SolverError(QgError):
    pass


# graph / family validation

class DuplicateId(InputError):
    pass


class DanglingReference(InputError):
    pass


class LoopEdge(InputError):
    pass


class NonpositiveLength(InputError):
    pass


class InvalidFamily(InputError):
    pass


# wave evaluation

class OutOfRange(InputError):
    pass


class NotIncident(InputError):
    pass


class DivergentLeadIntegral(InputError):
    pass


# spectral search

class InvalidWindow(InputError):
    pass


class ContourThroughZero(SolverError):
    pass


class MaxDepthExceeded(SolverError):
    pass


class SingularInconsistent(SolverError):
    pass


class NotSimple(SolverError):
    pass


class NotEmbedded(SolverError):
    pass


# tracking

class GridTooCoarse(InputError):
    pass


# quasimodes

class SupportsOverlap(SolverError):
    pass


class NotOutgoing(SolverError):
    pass


class ResonanceTooDeep(SolverError):
    pass
