"""Exception hierarchy shared across the package."""


class PropsError(Exception):
    """Base class for every error raised by propslab."""


# environments / policies
class StepAfterEnd(PropsError):
    pass


class InvalidAction(PropsError):
    pass


class PolicyShapeMismatch(PropsError):
    pass


class InvalidTabularEntry(PropsError):
    pass


class UnsupportedCombination(PropsError):
    pass


# representation extensions
class DimensionError(PropsError):
    pass


class NumericOverflow(PropsError):
    pass


class LengthMismatch(PropsError):
    pass


# prompt protocol
class TemplateVarMissing(PropsError):
    pass


class RankMismatch(PropsError):
    pass


class ResponseParseError(PropsError):
    """A model reply that violates the response grammar. Always retriable."""


class MissingIndex(ResponseParseError):
    def __init__(self, index: int):
        super().__init__(f"params[{index}] missing from response")
        self.index = index


class DuplicateIndex(ResponseParseError):
    def __init__(self, index: int):
        super().__init__(f"params[{index}] assigned conflicting values")
        self.index = index


class NonNumericValue(ResponseParseError):
    pass


class IllegalTabularAction(ResponseParseError):
    pass


# providers
class ProviderError(PropsError):
    pass


class AuthMissing(ProviderError):
    pass


class TransportError(ProviderError):
    pass


class ProviderRefusal(ProviderError):
    pass


class ReplayExhausted(ProviderError):
    pass


class UnparseablePrompt(ProviderError):
    pass


class ProviderFailure(PropsError):
    """Raised by a search run when its provider gives up; the partial record is attached."""

    def __init__(self, message: str, record=None):
        super().__init__(message)
        self.record = record


# numerical optimisation
class NonSmoothPoint(PropsError):
    pass


class EmptyInput(PropsError):
    pass


# runner
class ConfigParseError(PropsError):
    pass


class ValidationError(PropsError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class NoRecords(PropsError):
    pass


class RecordCorrupt(PropsError):
    pass
