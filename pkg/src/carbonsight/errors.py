"""Exception hierarchy with stable machine codes.

Every error that can cross a process boundary (CLI exit, HTTP response)
carries a ``code`` string that is part of the public contract and must
never change once released.
"""

from __future__ import annotations


class CarbonsightError(Exception):
    """Base class; ``code`` is the stable machine-readable identifier."""

    code = "internal_error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)


class ParseError(CarbonsightError):
    code = "parse_error"

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class ValidationError(CarbonsightError):
    code = "validation_error"


class ConfigError(CarbonsightError):
    code = "config_error"


class EmptyDataset(CarbonsightError):
    code = "empty_dataset"


class EmptyDescription(CarbonsightError):
    code = "empty_description"


class EmptyInput(CarbonsightError):
    code = "empty_input"


class EmptyPrompt(CarbonsightError):
    code = "empty_prompt"


class NormalizationUnsupported(CarbonsightError):
    code = "normalization_unsupported"


class UnknownMaterial(CarbonsightError):
    code = "unknown_material"


class ReplayMiss(CarbonsightError):
    code = "replay_miss"

    def __init__(self, message: str, request_hash: str = ""):
        super().__init__(message)
        self.request_hash = request_hash


class BackendUnavailable(CarbonsightError):
    code = "backend_unavailable"

    def __init__(self, message: str, retry_after_s: float | None = None):
        super().__init__(message)
        self.retry_after_s = retry_after_s


class ExtractionParseError(CarbonsightError):
    code = "extraction_parse_error"

    def __init__(self, message: str, raw_text: str = ""):
        super().__init__(message)
        self.raw_text = raw_text


class StorageError(CarbonsightError):
    code = "storage_error"


class PipelineStageError(CarbonsightError):
    code = "pipeline_stage_error"

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


class AttemptLimitExceeded(CarbonsightError):
    code = "attempt_limit_exceeded"


class SessionClosed(CarbonsightError):
    code = "session_closed"


class SessionNotFound(CarbonsightError):
    code = "session_not_found"


class NothingToFinalize(CarbonsightError):
    code = "nothing_to_finalize"


class ConditionMismatch(CarbonsightError):
    code = "condition_mismatch"


class UncodableAnswer(CarbonsightError):
    code = "uncodable_answer"


class IncompleteStudy(CarbonsightError):
    code = "incomplete_study"


#: machine code -> CLI exit code. Grouped by failure family; anything not
#: listed exits 1. Usage errors exit 2 (argument parser convention).
EXIT_CODES: dict[str, int] = {
    "parse_error": 3,
    "validation_error": 3,
    "config_error": 3,
    "empty_dataset": 3,
    "empty_description": 3,
    "empty_input": 3,
    "empty_prompt": 3,
    "uncodable_answer": 3,
    "condition_mismatch": 3,
    "nothing_to_finalize": 3,
    "unknown_material": 4,
    "replay_miss": 4,
    "session_not_found": 4,
    "backend_unavailable": 5,
    "extraction_parse_error": 5,
    "pipeline_stage_error": 5,
    "attempt_limit_exceeded": 6,
    "session_closed": 6,
    "incomplete_study": 6,
    "storage_error": 7,
    "normalization_unsupported": 7,
}


def exit_code_for(exc: CarbonsightError) -> int:
    return EXIT_CODES.get(exc.code, 1)
