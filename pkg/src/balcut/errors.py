"""Exception hierarchy shared by all balcut modules."""


class BalcutError(Exception):
    """Base class for every error raised by this package."""


class InputError(BalcutError):
    """Bad user input: malformed graphs, invalid parameters."""


class GraphFormatError(InputError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DisconnectedGraph(InputError):
    pass


class InvalidParams(InputError):
    pass


class EmptyOrFullCut(InputError):
    pass


class NegativeBeta(InputError):
    pass


class SizeLimit(InputError):
    pass


class PreconditionViolated(InputError):
    pass


class NotApplicable(BalcutError):
    pass


class ContractViolation(BalcutError):
    """An internal guarantee failed; carries the run trace when available."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace if trace is not None else []


class SweepCutMissing(ContractViolation):
    pass


class NoQualifyingSweep(ContractViolation):
    pass


class BreakdownNotConverged(ContractViolation):
    pass


class DegenerateEmbedding(ContractViolation):
    pass


class RecursionDepthExceeded(ContractViolation):
    pass
