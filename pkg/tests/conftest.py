import os
from typing import List, Sequence, Tuple

import hypothesis
import numpy as np
import pytest

from stagsrl.corpus.conll import ConllSentence, ConllToken
from stagsrl.corpus.synthetic import generate_synthetic
from stagsrl.models import SynthConfig

np.seterr(all="warn")

hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("dev", max_examples=30, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))

# (form, pos, head, deprel)
Row = Tuple[str, str, int, str]

BLACK_MONDAY_ROWS: List[Row] = [
    ("No", "UH", 4, "DEP"),
    (",", ",", 4, "P"),
    ("it", "PRP", 4, "SBJ"),
    ("was", "VBD", 0, "ROOT"),
    ("n't", "RB", 4, "ADV"),
    ("black", "NNP", 7, "NAME"),
    ("Monday", "NNP", 4, "PRD"),
    (".", ".", 4, "P"),
]

DOG_ROWS: List[Row] = [
    ("the", "DT", 2, "NMOD"),
    ("dog", "NN", 3, "SBJ"),
    ("barks", "VBZ", 0, "ROOT"),
]


def make_sentence(rows: Sequence[Row], frames: Sequence[Tuple[int, dict]] = ()) -> ConllSentence:
    """Build a sentence from rows; ``frames`` is (predicate id, {argument id: role}) in predicate order."""
    predicates = {p for p, _ in frames}
    tokens = []
    for i, (form, pos, head, deprel) in enumerate(rows, start=1):
        lemma = form.lower()
        tokens.append(ConllToken(
            id=i, form=form, lemma=lemma, plemma=lemma, pos=pos, ppos=pos,
            head=head, phead=head, deprel=deprel, pdeprel=deprel,
            fillpred=i in predicates,
            pred=f"{lemma}.01" if i in predicates else None,
            apreds=tuple(args.get(i) for _, args in frames),
        ))
    return ConllSentence(tuple(tokens))


@pytest.fixture
def black_monday_sentence() -> ConllSentence:
    return make_sentence(BLACK_MONDAY_ROWS)


@pytest.fixture
def dog_sentence() -> ConllSentence:
    return make_sentence(DOG_ROWS, frames=[(3, {2: "A0"})])


@pytest.fixture
def sentence_factory():
    return make_sentence


@pytest.fixture(scope="session")
def synthetic_corpus() -> List[ConllSentence]:
    return generate_synthetic(SynthConfig(sentence_count=200, seed=7))


@pytest.fixture(scope="session")
def large_synthetic_corpus() -> List[ConllSentence]:
    return generate_synthetic(SynthConfig(sentence_count=1000, seed=11))
