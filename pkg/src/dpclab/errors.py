"""Exception hierarchy shared by every dpclab module."""


class DpclabError(Exception):
    """Base class; the CLI maps these to exit status 2 unless noted."""


class TrsSyntaxError(DpclabError):
    pass


class IllFormedRule(DpclabError):
    pass


class ArityClash(DpclabError):
    pass


class PositionOutOfRange(DpclabError):
    pass


class NonTerminating(DpclabError):
    pass


class NonTerminatingRelative(NonTerminating):
    pass


class BudgetExceeded(DpclabError):
    pass


class MissingFilterEntry(DpclabError):
    pass


class ChainNotProgenyLinked(DpclabError):
    pass


class UndefinedRoot(DpclabError):
    pass


class NotOnMainBranch(DpclabError):
    pass


class NotAnSrs(DpclabError):
    pass


class ArgumentTooLarge(DpclabError):
    pass


class MissingInterpretation(DpclabError):
    pass


class NonAffine(DpclabError):
    pass


class IncompatibleAlgebra(DpclabError):
    pass


class BadParams(DpclabError):
    pass


class SimulationFailed(DpclabError):
    pass
