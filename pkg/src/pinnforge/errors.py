"""Exception types shared across the pipeline."""


class PinnforgeError(Exception):
    """Base class for all package errors."""


class ExprSyntaxError(PinnforgeError):
    """Malformed expression text; carries the 0-based offset of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset
        self.reason = message


class UnknownSymbolError(PinnforgeError):
    """Function name outside the closed grammar vocabulary."""

    def __init__(self, name: str, offset: int = -1):
        super().__init__(f"unknown function: {name}")
        self.name = name
        self.offset = offset


class ProviderUnavailable(PinnforgeError):
    pass


class FixtureMissing(PinnforgeError):
    def __init__(self, key: str, prompt_head: str = ""):
        detail = f"no fixture for key {key}"
        if prompt_head:
            detail += f" (prompt starts: {prompt_head!r})"
        super().__init__(detail)
        self.key = key


class AllParsesFailed(PinnforgeError):
    pass


class EmptyCandidateSet(PinnforgeError):
    pass


class UnknownArchitecture(PinnforgeError):
    def __init__(self, name: str):
        super().__init__(f"architecture not in registry: {name}")
        self.name = name


class DegenerateVector(PinnforgeError):
    pass


class TemplateMissing(PinnforgeError):
    pass


class InterfaceNotExtractable(PinnforgeError):
    pass


class ResidualBlockMissing(PinnforgeError):
    pass


class PreconditionFailed(PinnforgeError):
    pass


class UnsupportedPde(PinnforgeError):
    pass


class DegenerateTrace(PinnforgeError):
    pass


class WeightsInvalid(PinnforgeError):
    pass


class ConfigInvalid(PinnforgeError):
    pass


class ReplayMismatch(PinnforgeError):
    pass


class DatasetMalformed(PinnforgeError):
    def __init__(self, problems: list):
        lines = "; ".join(f"line {n}: {msg}" for n, msg in problems)
        super().__init__(f"malformed dataset: {lines}")
        self.problems = problems
