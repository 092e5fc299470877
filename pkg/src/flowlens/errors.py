"""Exception types shared across the pipeline and service."""


class FlowlensError(Exception):
    """Base class for all errors raised by this package."""


class MalformedRecord(FlowlensError):
    """An input record is missing required fields or has the wrong shape."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class DuplicateId(FlowlensError):
    def __init__(self, submission_id: str):
        super().__init__(f"duplicate submission id: {submission_id!r}")
        self.submission_id = submission_id


class EmptyCorpus(FlowlensError):
    """The input stream contained no submissions."""


class ConfigError(FlowlensError):
    """The run configuration is malformed or self-contradictory."""


class RemoteUnavailable(FlowlensError):
    def __init__(self, backend: str, detail: str = ""):
        msg = f"remote backend {backend!r} unavailable"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.backend = backend


class DimMismatch(FlowlensError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"embedding dim mismatch: expected {expected}, got {got}")
        self.expected = expected
        self.got = got


class NoCorrectSolutions(FlowlensError):
    """Progression mining needs at least one passed submission."""


class UnparseableResponse(FlowlensError):
    """A labeler response contained an error block but no parseable records."""


class UnknownVariant(FlowlensError):
    def __init__(self, variant_id: str):
        super().__init__(f"unknown variant: {variant_id!r}")
        self.variant_id = variant_id


class UnknownErrorKind(FlowlensError):
    def __init__(self, kind: str):
        super().__init__(f"unknown error kind: {kind!r}")
        self.kind = kind


class EmptyStack(FlowlensError):
    """Pop requested on an empty filter stack."""
