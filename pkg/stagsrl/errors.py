"""
Exception hierarchy for the supertag SRL toolkit.
Every error carries the process exit code the CLI reports for it.
"""
from typing import Optional, Sequence


class StagSrlError(Exception):
    """Base class for all toolkit errors."""

    kind: str = "internal"
    exit_code: int = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class UsageError(StagSrlError):
    kind = "usage"
    exit_code = 2


class ConfigError(UsageError):
    kind = "config"


class InputFileError(StagSrlError):
    kind = "missing_file"
    exit_code = 3


class CheckpointFormatError(StagSrlError):
    kind = "checkpoint_format"
    exit_code = 4


class CheckpointVersionError(CheckpointFormatError):
    kind = "checkpoint_version"


class DataError(StagSrlError):
    kind = "data"
    exit_code = 5


class ConllParseError(DataError):
    """Malformed CoNLL-2009 line."""
    kind = "conll_parse"

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class TreeValidationError(DataError):
    """Structural problem in a dependency tree (range, self-loop, cycle)."""
    kind = "tree_validation"

    def __init__(self, message: str, sentence: Optional[int] = None, token: Optional[int] = None):
        where = []
        if sentence is not None:
            where.append(f"sentence {sentence}")
        if token is not None:
            where.append(f"token {token}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.sentence = sentence
        self.token = token


class EmbeddingFormatError(DataError):
    kind = "embedding_format"

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class TagFormatError(DataError):
    kind = "tag_format"


class ProjectionError(DataError):
    kind = "projection"


class AlignmentError(DataError):
    """Labels, frames or supertags do not line up with the tokens."""
    kind = "alignment"


class ShapeError(StagSrlError):
    """Incompatible operand shapes in a tensor op."""
    kind = "shape"

    def __init__(self, op: str, *shapes: Sequence[int]):
        rendered = " and ".join(str(tuple(s)) for s in shapes)
        super().__init__(f"{op}: incompatible shapes {rendered}")
        self.op = op
        self.shapes = tuple(tuple(s) for s in shapes)
