"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map it
without a lookup table: 2 input, 3 state, 4 hypothesis, 5 geometry.
"""


class Rank1Error(Exception):
    exit_code = 1


class InputError(Rank1Error):
    exit_code = 2


class StateError(Rank1Error):
    exit_code = 3


class HypothesisError(Rank1Error):
    exit_code = 4


class GeometryError(Rank1Error):
    exit_code = 5


class BadWord(InputError):
    pass


class DocumentError(InputError):
    pass


class UnknownFamily(InputError):
    pass


class EmptySample(InputError):
    pass


class RelativeLengthBudget(StateError):
    pass


class UnverifiedAutomaton(StateError):
    pass


class InvalidAutomaton(StateError):
    pass


class LikelyIndiscrete(HypothesisError):
    pass


class BadStabilityInstance(HypothesisError):
    pass


class NotTypePreserving(HypothesisError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ElementaryGroup(HypothesisError):
    pass


class DegenerateCircle(GeometryError):
    pass


class CapTooLarge(GeometryError):
    pass


class NotPingPong(GeometryError):
    def __init__(self, message, generator=None, point=None):
        super().__init__(message)
        self.generator = generator
        self.point = point
