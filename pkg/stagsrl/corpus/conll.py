"""
CoNLL-2009 reader and writer.

Column layout (14 fixed columns followed by one APRED column per predicate):
ID FORM LEMMA PLEMMA POS PPOS FEAT PFEAT HEAD PHEAD DEPREL PDEPREL FILLPRED PRED APREDs...
"""
import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

from ..errors import ConllParseError, InputFileError, TreeValidationError

logger = logging.getLogger(__name__)

FIXED_COLUMNS = 14
ABSENT = "_"

# Space-or-tab separated input; output always uses tabs.
FIELD_SEPARATOR = re.compile(r"[ \t]+")


def _opt(value: str) -> Optional[str]:
    return None if value == ABSENT else value


def _show(value: Optional[object]) -> str:
    return ABSENT if value is None else str(value)


@dataclass(frozen=True)
class ConllToken:
    """One CoNLL-2009 row. ``None`` stands for an absent (``_``) column."""
    id: int
    form: str
    lemma: Optional[str] = None
    plemma: Optional[str] = None
    pos: Optional[str] = None
    ppos: Optional[str] = None
    feat: Optional[str] = None
    pfeat: Optional[str] = None
    head: int = 0
    phead: Optional[int] = None
    deprel: Optional[str] = None
    pdeprel: Optional[str] = None
    fillpred: bool = False
    pred: Optional[str] = None
    apreds: Tuple[Optional[str], ...] = ()

    def to_line(self) -> str:
        columns = [
            str(self.id), self.form,
            _show(self.lemma), _show(self.plemma),
            _show(self.pos), _show(self.ppos),
            _show(self.feat), _show(self.pfeat),
            str(self.head), _show(self.phead),
            _show(self.deprel), _show(self.pdeprel),
            "Y" if self.fillpred else ABSENT,
            _show(self.pred),
        ]
        columns.extend(_show(role) for role in self.apreds)
        return "\t".join(columns)


@dataclass(frozen=True)
class ConllSentence:
    """An ordered, validated list of tokens."""
    tokens: Tuple[ConllToken, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def predicates(self) -> List[int]:
        """Token ids of predicate rows (FILLPRED = Y), in surface order."""
        return [t.id for t in self.tokens if t.fillpred]

    @property
    def forms(self) -> List[str]:
        return [t.form for t in self.tokens]

    def lemmas(self, use_predicted: bool = True) -> List[str]:
        """Lemma column; predicted lemmas fall back to gold ones (and vice versa)."""
        if use_predicted:
            return [t.plemma or t.lemma or t.form for t in self.tokens]
        return [t.lemma or t.plemma or t.form for t in self.tokens]

    def pos_tags(self, use_predicted: bool = True) -> List[str]:
        if use_predicted:
            return [t.ppos or t.pos or ABSENT for t in self.tokens]
        return [t.pos or t.ppos or ABSENT for t in self.tokens]

    def token(self, index: int) -> ConllToken:
        """1-based access."""
        return self.tokens[index - 1]

    def with_tokens(self, tokens: Iterable[ConllToken]) -> "ConllSentence":
        return replace(self, tokens=tuple(tokens))


def validate_sentence(sentence: ConllSentence, sentence_number: Optional[int] = None) -> None:
    """Check ids, head ranges, self-loops and APRED alignment."""
    n = len(sentence)
    n_predicates = len(sentence.predicates)
    for position, token in enumerate(sentence.tokens, start=1):
        if token.id != position:
            raise TreeValidationError(
                f"expected id {position}, found {token.id}", sentence_number, token.id
            )
        if not 0 <= token.head <= n:
            raise TreeValidationError(
                f"head {token.head} out of range [0, {n}]", sentence_number, token.id
            )
        if token.head == token.id:
            raise TreeValidationError("token is its own head", sentence_number, token.id)
        if token.phead is not None:
            if not 0 <= token.phead <= n:
                raise TreeValidationError(
                    f"predicted head {token.phead} out of range [0, {n}]", sentence_number, token.id
                )
            if token.phead == token.id:
                raise TreeValidationError("token is its own predicted head", sentence_number, token.id)
        if len(token.apreds) != n_predicates:
            raise TreeValidationError(
                f"{len(token.apreds)} APRED columns for {n_predicates} predicates",
                sentence_number, token.id,
            )


def _parse_int(value: str, what: str, line_number: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConllParseError(f"{what} is not an integer: {value!r}", line_number) from None


def _parse_line(line: str, line_number: int) -> ConllToken:
    columns = FIELD_SEPARATOR.split(line.strip())
    if len(columns) < FIXED_COLUMNS:
        raise ConllParseError(
            f"expected at least {FIXED_COLUMNS} columns, found {len(columns)}", line_number
        )
    token_id = _parse_int(columns[0], "ID", line_number)
    if token_id < 1:
        raise ConllParseError(f"ID must be >= 1, found {token_id}", line_number)
    fillpred = columns[12]
    if fillpred not in ("Y", ABSENT):
        raise ConllParseError(f"FILLPRED must be 'Y' or '_', found {fillpred!r}", line_number)
    phead = None if columns[9] == ABSENT else _parse_int(columns[9], "PHEAD", line_number)
    return ConllToken(
        id=token_id,
        form=columns[1],
        lemma=_opt(columns[2]),
        plemma=_opt(columns[3]),
        pos=_opt(columns[4]),
        ppos=_opt(columns[5]),
        feat=_opt(columns[6]),
        pfeat=_opt(columns[7]),
        head=_parse_int(columns[8], "HEAD", line_number),
        phead=phead,
        deprel=_opt(columns[10]),
        pdeprel=_opt(columns[11]),
        fillpred=fillpred == "Y",
        pred=_opt(columns[13]),
        apreds=tuple(_opt(c) for c in columns[FIXED_COLUMNS:]),
    )


def parse_conll2009(text: str, skip_invalid: bool = False) -> List[ConllSentence]:
    """
    Parse CoNLL-2009 text into validated sentences.

    With ``skip_invalid`` a sentence failing validation is logged and dropped
    instead of aborting the whole read.

    Raises:
        ConllParseError: a line has fewer than 14 columns or a bad numeric field
        TreeValidationError: ids, head indices or APRED columns are inconsistent
    """
    sentences: List[ConllSentence] = []
    block: List[ConllToken] = []
    seen = 0

    def flush() -> None:
        nonlocal seen
        if not block:
            return
        seen += 1
        sentence = ConllSentence(tuple(block))
        block.clear()
        try:
            validate_sentence(sentence, seen)
        except TreeValidationError as exc:
            if not skip_invalid:
                raise
            logger.warning("Skipping invalid sentence: %s", exc)
            return
        sentences.append(sentence)

    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            flush()
            continue
        block.append(_parse_line(line, line_number))
    flush()
    return sentences


def serialize_conll2009(sentences: Sequence[ConllSentence]) -> str:
    """Tab-separated rows, one blank line between sentences."""
    blocks = ["".join(token.to_line() + "\n" for token in sentence.tokens) for sentence in sentences]
    return "\n".join(blocks)


def read_conll_file(path: Path, skip_invalid: bool = False) -> List[ConllSentence]:
    path = Path(path)
    if not path.is_file():
        raise InputFileError(f"no such file: {path}")
    sentences = parse_conll2009(path.read_text(encoding="utf-8"), skip_invalid=skip_invalid)
    logger.info("Read %d sentences from %s", len(sentences), path)
    return sentences


def write_conll_file(path: Path, sentences: Sequence[ConllSentence]) -> None:
    Path(path).write_text(serialize_conll2009(sentences), encoding="utf-8")
    logger.info("Wrote %d sentences to %s", len(sentences), path)
