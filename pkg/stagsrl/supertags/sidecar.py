"""
``.stags`` sidecar files: one block per sentence, one ``index<TAB>tag`` line
per token, blocks separated by a blank line.
"""
import logging
from pathlib import Path
from typing import List, Sequence

from ..errors import InputFileError, TagFormatError

logger = logging.getLogger(__name__)


def serialize_stags(sequences: Sequence[Sequence[str]]) -> str:
    blocks = [
        "".join(f"{i}\t{tag}\n" for i, tag in enumerate(tags, start=1))
        for tags in sequences
    ]
    return "\n".join(blocks)


def parse_stags(text: str) -> List[List[str]]:
    sequences: List[List[str]] = []
    current: List[str] = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            if current:
                sequences.append(current)
                current = []
            continue
        index, sep, tag = line.strip().partition("\t")
        if not sep or not tag:
            raise TagFormatError(f"line {line_number}: expected 'index<TAB>tag'")
        if index != str(len(current) + 1):
            raise TagFormatError(f"line {line_number}: expected index {len(current) + 1}, found {index!r}")
        current.append(tag)
    if current:
        sequences.append(current)
    return sequences


def read_stags_file(path: Path) -> List[List[str]]:
    path = Path(path)
    if not path.is_file():
        raise InputFileError(f"no such file: {path}")
    sequences = parse_stags(path.read_text(encoding="utf-8"))
    logger.info("Read supertags for %d sentences from %s", len(sequences), path)
    return sequences


def write_stags_file(path: Path, sequences: Sequence[Sequence[str]]) -> None:
    Path(path).write_text(serialize_stags(sequences), encoding="utf-8")
    logger.info("Wrote supertags for %d sentences to %s", len(sequences), path)
