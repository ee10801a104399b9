"""
Predicate-argument frames and where predicates come from.
"""
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Tuple

from ..corpus.conll import ConllSentence, read_conll_file
from ..errors import AlignmentError, DataError

logger = logging.getLogger(__name__)

NULL_ROLE = "_"

# (sentence, predicate, argument, role)
ArgumentTuple = Tuple[int, int, int, str]


@dataclass
class SrlFrame:
    """One predicate (1-based token id) and its labeled arguments."""
    predicate: int
    lemma: str
    arguments: Dict[int, str] = field(default_factory=dict)
    sense: Optional[str] = None

    def tuples(self, sentence_id: int) -> Set[ArgumentTuple]:
        return {(sentence_id, self.predicate, arg, role) for arg, role in self.arguments.items()}

    def to_dict(self) -> Dict:
        return {
            "predicate": self.predicate,
            "lemma": self.lemma,
            "sense": self.sense,
            "arguments": {str(k): v for k, v in sorted(self.arguments.items())},
        }


def frames_from_sentence(sentence: ConllSentence, use_predicted_lemmas: bool = True) -> List[SrlFrame]:
    """Gold frames from the PRED / APRED columns, in predicate order."""
    lemmas = sentence.lemmas(use_predicted_lemmas)
    frames = []
    for column, predicate in enumerate(sentence.predicates):
        token = sentence.token(predicate)
        arguments = {
            t.id: t.apreds[column]
            for t in sentence.tokens
            if t.apreds[column] is not None
        }
        frames.append(SrlFrame(predicate, lemmas[predicate - 1], arguments, token.pred))
    return frames


def apply_frames(sentence: ConllSentence, frames: Sequence[SrlFrame]) -> ConllSentence:
    """
    Rewrite FILLPRED / PRED / APRED so the sentence carries exactly ``frames``.
    Other columns are left untouched.
    """
    ordered = sorted(frames, key=lambda f: f.predicate)
    by_predicate = {f.predicate: f for f in ordered}
    for frame in ordered:
        if not 1 <= frame.predicate <= len(sentence):
            raise AlignmentError(f"predicate {frame.predicate} outside sentence of {len(sentence)} tokens")
    tokens = []
    for token in sentence.tokens:
        frame = by_predicate.get(token.id)
        tokens.append(replace(
            token,
            fillpred=frame is not None,
            pred=(frame.sense or token.pred or frame.lemma) if frame is not None else None,
            apreds=tuple(f.arguments.get(token.id) for f in ordered),
        ))
    return sentence.with_tokens(tokens)


class PredicateMode(str, Enum):
    GOLD = "gold"
    EXTERNAL = "external"


# (predicate id, sense) per predicate
PredicateList = List[Tuple[int, Optional[str]]]


@dataclass(frozen=True)
class PredicateSource:
    """Gold FILLPRED/PRED columns, or those of an external CoNLL-2009 file."""
    mode: PredicateMode = PredicateMode.GOLD
    path: Optional[Path] = None

    @classmethod
    def parse(cls, value: Optional[str]) -> "PredicateSource":
        if value is None or value == PredicateMode.GOLD.value:
            return cls()
        return cls(PredicateMode.EXTERNAL, Path(value))

    def resolve(self, sentences: Sequence[ConllSentence]) -> List[PredicateList]:
        """
        Raises:
            AlignmentError: the external file disagrees on sentence count or lengths
        """
        if self.mode is PredicateMode.GOLD:
            source = sentences
        else:
            source = read_conll_file(self.path)
            if len(source) != len(sentences):
                raise AlignmentError(
                    f"{self.path}: {len(source)} sentences, expected {len(sentences)}"
                )
            for n, (external, sentence) in enumerate(zip(source, sentences), start=1):
                if len(external) != len(sentence):
                    raise AlignmentError(
                        f"{self.path}: sentence {n} has {len(external)} tokens, expected {len(sentence)}"
                    )
        return [[(p, s.token(p).pred) for p in s.predicates] for s in source]


def check_roles(frames: Sequence[SrlFrame], sentence_length: int) -> None:
    for frame in frames:
        for arg, role in frame.arguments.items():
            if not 1 <= arg <= sentence_length:
                raise DataError(f"argument {arg} of predicate {frame.predicate} outside sentence")
            if not role or role == NULL_ROLE:
                raise DataError(f"empty role for argument {arg} of predicate {frame.predicate}")
