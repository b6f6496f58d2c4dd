"""Exception hierarchy shared by the solver, the analysis tools and the CLI."""


class PMEError(Exception):
    """Base class for all package errors."""


class PreconditionError(PMEError, ValueError):
    """An argument lies outside the domain where a formula or run is defined."""


class NumericalError(PMEError, RuntimeError):
    """The time stepper could not proceed (stability, positivity, domain)."""


class CFLError(NumericalError):
    pass


class PositivityError(NumericalError):
    pass


class DomainTooSmallError(NumericalError):
    pass


class NoInterfaceError(NumericalError):
    pass


class AnalysisError(PMEError, RuntimeError):
    """Post-processing of a trace failed."""


class NotFocusedError(AnalysisError):
    pass


class InsufficientSamplesError(AnalysisError):
    pass
