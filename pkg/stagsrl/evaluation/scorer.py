"""
Supertag accuracy and labeled SRL precision / recall / F1 with
sentence-length and predicate-category/role breakdowns.
"""
import logging
import re
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set

from ..errors import AlignmentError, DataError
from ..models import Breakdown, SrlScore, TaggingScore
from ..srl.frames import ArgumentTuple, SrlFrame

logger = logging.getLogger(__name__)

ARGUMENTS = "arguments"
SENSE = "sense"
SCORE_MODES = (ARGUMENTS, SENSE)

LENGTH_BUCKETS = (
    (1, 10, "1-10"),
    (11, 15, "11-15"),
    (16, 20, "16-20"),
    (21, 25, "21-25"),
    (26, 30, "26-30"),
    (31, None, "31+"),
)

NUMBERED_ROLE = re.compile(r"^A[0-5]$")

# argument slot 0 never names a token, so it marks predicate-sense tuples
SENSE_SLOT = 0


def length_bucket(n_tokens: int) -> str:
    for low, high, key in LENGTH_BUCKETS:
        if n_tokens >= low and (high is None or n_tokens <= high):
            return key
    raise DataError(f"no length bucket for a sentence of {n_tokens} tokens")


def role_key(role: str) -> str:
    """A0-A5 stay distinct, every AM-* folds into AM, anything else is 'other'."""
    if NUMBERED_ROLE.match(role):
        return role
    if role == "AM" or role.startswith("AM-"):
        return "AM"
    return "other"


def predicate_category(pos: Optional[str]) -> str:
    if pos:
        first = pos[0].upper()
        if first in ("V", "N"):
            return first
    return "other"


def _flatten(sequences) -> List[str]:
    if sequences and isinstance(sequences[0], str):
        return list(sequences)
    return [label for seq in sequences for label in seq]


class SrlScorer:
    """Stateless scoring functions; counts merge by addition so corpora can be split freely."""

    def tagging_accuracy(self, gold, predicted) -> float:
        """
        Exact-match token accuracy. Accepts flat label lists or one list per sentence.

        Raises:
            AlignmentError: sequences differ in length
        """
        return self.tagging_accuracy_report(gold, predicted).accuracy

    def tagging_accuracy_report(self, gold, predicted, known_labels: Optional[Set[str]] = None) -> TaggingScore:
        """Accuracy plus the number of gold labels outside ``known_labels`` (scored as errors)."""
        if not isinstance(gold, str) and gold and not isinstance(gold[0], str):
            if len(gold) != len(predicted):
                raise AlignmentError(f"{len(gold)} gold sentences but {len(predicted)} predicted")
            for n, (g, p) in enumerate(zip(gold, predicted), start=1):
                if len(g) != len(p):
                    raise AlignmentError(f"sentence {n}: {len(g)} gold labels but {len(p)} predicted")
        flat_gold, flat_pred = _flatten(gold), _flatten(predicted)
        if len(flat_gold) != len(flat_pred):
            raise AlignmentError(f"{len(flat_gold)} gold labels but {len(flat_pred)} predicted")
        correct = sum(g == p for g, p in zip(flat_gold, flat_pred))
        unseen = 0 if known_labels is None else sum(g not in known_labels for g in flat_gold)
        return TaggingScore(correct=correct, total=len(flat_gold), unseen=unseen)

    def _tuples(self, frames: Sequence[Sequence[SrlFrame]], mode: str) -> Set[ArgumentTuple]:
        if mode not in SCORE_MODES:
            raise DataError(f"unknown scoring mode {mode!r}")
        tuples: Set[ArgumentTuple] = set()
        for sid, sentence_frames in enumerate(frames):
            for frame in sentence_frames:
                tuples |= frame.tuples(sid)
                if mode == SENSE:
                    if not frame.sense:
                        raise DataError(
                            f"sense scoring needs a sense for predicate {frame.predicate} of sentence {sid + 1}"
                        )
                    tuples.add((sid, frame.predicate, SENSE_SLOT, frame.sense))
        return tuples

    def _check_aligned(self, gold, predicted) -> None:
        if len(gold) != len(predicted):
            raise AlignmentError(f"{len(gold)} gold sentences but {len(predicted)} predicted")

    def _keyed(
        self,
        name: str,
        gold: Sequence[Sequence[SrlFrame]],
        predicted: Sequence[Sequence[SrlFrame]],
        key_of: Callable[[ArgumentTuple], str],
    ) -> Breakdown:
        self._check_aligned(gold, predicted)
        gold_tuples = self._tuples(gold, ARGUMENTS)
        predicted_tuples = self._tuples(predicted, ARGUMENTS)
        counts: Dict[str, List[int]] = {}

        def bump(tuples: Iterable[ArgumentTuple], slot: int) -> None:
            for item in tuples:
                counts.setdefault(key_of(item), [0, 0, 0])[slot] += 1

        bump(gold_tuples & predicted_tuples, 0)
        bump(predicted_tuples, 1)
        bump(gold_tuples, 2)
        scores = {
            key: SrlScore(correct=c, predicted=p, gold=g)
            for key, (c, p, g) in sorted(counts.items())
        }
        return Breakdown(name=name, scores=scores)

    def srl_prf(
        self,
        gold: Sequence[Sequence[SrlFrame]],
        predicted: Sequence[Sequence[SrlFrame]],
        mode: str = ARGUMENTS,
    ) -> SrlScore:
        """
        Micro-averaged labeled scores over (sentence, predicate, argument, role) tuples.
        ``sense`` mode also scores one (predicate, sense) tuple per frame.

        Raises:
            AlignmentError: frame lists differ in sentence count
            DataError: sense mode with a frame lacking its sense
        """
        self._check_aligned(gold, predicted)
        gold_tuples = self._tuples(gold, mode)
        predicted_tuples = self._tuples(predicted, mode)
        return SrlScore(
            correct=len(gold_tuples & predicted_tuples),
            predicted=len(predicted_tuples),
            gold=len(gold_tuples),
        )

    def breakdown_by_length(
        self,
        gold: Sequence[Sequence[SrlFrame]],
        predicted: Sequence[Sequence[SrlFrame]],
        lengths: Sequence[int],
    ) -> Breakdown:
        if len(lengths) != len(gold):
            raise AlignmentError(f"{len(lengths)} sentence lengths for {len(gold)} sentences")
        buckets = [length_bucket(n) for n in lengths]
        return self._keyed("length", gold, predicted, lambda item: buckets[item[0]])

    def breakdown_by_role(
        self,
        gold: Sequence[Sequence[SrlFrame]],
        predicted: Sequence[Sequence[SrlFrame]],
        pos_tags: Sequence[Sequence[str]],
    ) -> Breakdown:
        """Keys like ``V/A0`` or ``N/AM``: predicate category from its POS, then the role key."""
        if len(pos_tags) != len(gold):
            raise AlignmentError(f"POS tags for {len(pos_tags)} sentences, frames for {len(gold)}")

        def key_of(item: ArgumentTuple) -> str:
            sid, predicate, _, role = item
            return f"{predicate_category(pos_tags[sid][predicate - 1])}/{role_key(role)}"

        return self._keyed("role", gold, predicted, key_of)


# Singleton instance
srl_scorer = SrlScorer()

tagging_accuracy = srl_scorer.tagging_accuracy
tagging_accuracy_report = srl_scorer.tagging_accuracy_report
srl_prf = srl_scorer.srl_prf
breakdown_by_length = srl_scorer.breakdown_by_length
breakdown_by_role = srl_scorer.breakdown_by_role
