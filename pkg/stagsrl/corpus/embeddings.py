"""
Plain-text word embedding files (GloVe / FastText ``.vec`` style).
One entry per line: the word followed by space-separated floats. A leading
word2vec ``<count> <dim>`` header line is skipped.
"""
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict

import numpy as np

from ..errors import EmbeddingFormatError, InputFileError

logger = logging.getLogger(__name__)

HEADER = re.compile(r"\d+\s+\d+")


@dataclass
class EmbeddingTable:
    """Pre-trained vectors; unknown words map to ``unk_vector``."""
    dim: int
    entries: Dict[str, np.ndarray] = field(default_factory=dict)
    unk_vector: np.ndarray = None

    def __post_init__(self):
        if self.unk_vector is None:
            self.unk_vector = np.zeros(self.dim)

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, word: str) -> np.ndarray:
        return self.entries.get(word, self.unk_vector)


def load_embeddings(text: str) -> EmbeddingTable:
    """
    Parse an embedding file.

    The dimension comes from the header when there is one, else from the first
    entry; a repeated word keeps its first vector; the UNK vector is the mean
    of all loaded vectors.

    Raises:
        EmbeddingFormatError: empty input, a non-numeric value or a line whose
            dimension differs from the header's or the first entry's
    """
    entries: Dict[str, np.ndarray] = {}
    dim = None
    duplicates = 0
    seen_first = False
    for line_number, line in enumerate(text.splitlines(), start=1):
        items = line.strip().split()
        if not items:
            continue
        if not seen_first:
            seen_first = True
            if HEADER.fullmatch(line.strip()):
                dim = int(items[1])
                if dim == 0:
                    raise EmbeddingFormatError("header declares zero dimensions", line_number)
                continue
        word, values = items[0], items[1:]
        if dim is None:
            if not values:
                raise EmbeddingFormatError("no vector values", line_number)
            dim = len(values)
        elif len(values) != dim:
            raise EmbeddingFormatError(f"expected {dim} values, found {len(values)}", line_number)
        if word in entries:
            duplicates += 1
            continue
        try:
            entries[word] = np.array([float(v) for v in values])
        except ValueError:
            raise EmbeddingFormatError("non-numeric vector value", line_number) from None

    if not entries:
        raise EmbeddingFormatError("embedding file has no entries")
    if duplicates:
        logger.debug("Ignored %d duplicate embedding entries", duplicates)

    unk = np.mean(np.stack(list(entries.values())), axis=0)
    return EmbeddingTable(dim=dim, entries=entries, unk_vector=unk)


def load_embeddings_file(path: Path) -> EmbeddingTable:
    path = Path(path)
    if not path.is_file():
        raise InputFileError(f"no such file: {path}")
    table = load_embeddings(path.read_text(encoding="utf-8"))
    logger.info("Read %d vectors of dim %d from %s", len(table), table.dim, path)
    return table
