"""
Pydantic models shared across the toolkit: training/generation configuration
and the evaluation report schema.
"""
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import ConfigError


def _split_list(value: Any) -> Any:
    """Config files give lists as comma-separated strings."""
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


def _split_weights(value: Any) -> Any:
    """``SBJ:2.0, OBJ:1.5`` -> {"SBJ": 2.0, "OBJ": 1.5}"""
    if isinstance(value, str):
        weights = {}
        for item in _split_list(value):
            name, _, weight = item.partition(":")
            weights[name.strip()] = float(weight) if weight else 1.0
        return weights
    return value


DEFAULT_RELATION_WEIGHTS = {
    "SBJ": 2.0, "OBJ": 1.5, "PRD": 0.5, "VC": 0.5,
    "NMOD": 3.0, "PMOD": 1.0, "NAME": 0.6, "DEP": 0.4,
    "ADV": 1.0, "TMP": 0.8, "LOC": 0.8, "P": 1.0,
}


class SynthConfig(BaseModel):
    """Synthetic treebank generator settings. The seed fully determines the corpus."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    sentence_count: int = Field(100, ge=0)
    min_length: int = Field(3, ge=1)
    max_length: int = Field(12, ge=1)
    relations: Dict[str, float] = Field(default_factory=lambda: dict(DEFAULT_RELATION_WEIGHTS))
    obligatory: List[str] = Field(default_factory=lambda: ["SBJ", "OBJ", "PRD", "VC"])
    modifier_relations: List[str] = Field(default_factory=lambda: ["ADV", "TMP", "LOC"])
    verb_pos_tags: List[str] = Field(default_factory=lambda: ["VBZ", "VBD", "VB"])
    verb_pos_probability: float = Field(0.25, ge=0.0, le=1.0)
    modifier_role_probability: float = Field(1.0, ge=0.0, le=1.0)
    max_dependents_per_side: int = Field(3, ge=1)
    lexicon_size: int = Field(12, ge=1)
    nonprojective_rate: float = Field(0.1, ge=0.0, le=1.0)
    projective: bool = True
    with_roles: bool = True
    seed: int = 7

    @field_validator("obligatory", "modifier_relations", "verb_pos_tags", mode="before")
    @classmethod
    def _parse_lists(cls, value: Any) -> Any:
        return _split_list(value)

    @field_validator("relations", mode="before")
    @classmethod
    def _parse_weights(cls, value: Any) -> Any:
        return _split_weights(value)

    @model_validator(mode="after")
    def _check(self) -> "SynthConfig":
        if self.min_length > self.max_length:
            raise ConfigError(f"empty length range [{self.min_length}, {self.max_length}]")
        if not self.relations or any(w <= 0 for w in self.relations.values()):
            raise ConfigError("relation weights must be positive")
        if not self.obligatory:
            raise ConfigError("obligatory relation set is empty")
        if not self.verb_pos_tags:
            raise ConfigError("at least one verb POS tag is required")
        return self


class TrainingConfig(BaseModel):
    """Optimizer, regularization and determinism settings common to both trainers."""
    model_config = ConfigDict(extra="forbid")

    d_w: int = Field(100, gt=0)
    d_h: int = Field(512, gt=0)
    k: int = Field(4, ge=1)
    lstm_dropout: float = Field(0.5, ge=0.0, lt=1.0)
    recurrent_dropout: float = Field(0.5, ge=0.0, lt=1.0)
    word_dropout: float = Field(0.0, ge=0.0)
    highway: bool = False
    batch_size: int = Field(100, ge=1)
    epochs: int = Field(30, ge=1)
    lrate: float = Field(0.01, gt=0.0)
    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    epsilon: float = Field(1e-8, gt=0.0)
    clip_norm: float = Field(5.0, gt=0.0)
    freeze_pretrained: bool = False
    dtype: Literal["float32", "float64"] = "float32"
    seed: int = 0


class TaggerConfig(TrainingConfig):
    """Sequence labeler (supertagger or POS tagger) hyperparameters."""
    use_words: bool = True
    use_pos: bool = True
    use_chars: bool = True
    d_pos: int = Field(100, gt=0)
    d_char: int = Field(30, gt=0)
    char_window: int = Field(3, ge=1)
    char_filters: int = Field(30, gt=0)
    use_predicted_pos: bool = True
    label_kind: Literal["supertag", "pos"] = "supertag"
    stag_model: Optional[str] = None

    @field_validator("char_window")
    @classmethod
    def _odd_window(cls, value: int) -> int:
        if value % 2 == 0:
            raise ConfigError(f"char_window must be odd, got {value}")
        return value


class SrlConfig(TrainingConfig):
    """Semantic role labeler hyperparameters."""
    d_pos: int = Field(16, gt=0)
    d_l: int = Field(100, gt=0)
    d_s: int = Field(50, gt=0)
    d_ind: int = Field(16, gt=0)
    d_r: int = Field(128, gt=0)
    d_lemma_out: int = Field(128, gt=0)
    d_pretrained: int = Field(0, ge=0)  # 0 = no pretrained channel
    word_dropout: float = Field(0.25, ge=0.0)
    recurrent_dropout: float = Field(0.0, ge=0.0, lt=1.0)
    highway: bool = True
    freeze_pretrained: bool = True
    use_pos: bool = True
    use_lemmas: bool = True
    use_supertags: bool = True
    stag_model: str = "1"
    use_predicted_lemmas: bool = True
    use_predicted_pos: bool = True


# ============== Evaluation Report ==============

class SrlScore(BaseModel):
    """Micro-averaged counts; P, R and F1 derive from them."""
    correct: int = 0
    predicted: int = 0
    gold: int = 0

    @property
    def precision(self) -> float:
        return self.correct / self.predicted if self.predicted else 0.0

    @property
    def recall(self) -> float:
        return self.correct / self.gold if self.gold else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0

    def __add__(self, other: "SrlScore") -> "SrlScore":
        return SrlScore(
            correct=self.correct + other.correct,
            predicted=self.predicted + other.predicted,
            gold=self.gold + other.gold,
        )


class TaggingScore(BaseModel):
    correct: int = 0
    total: int = 0
    unseen: int = 0

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0


class Breakdown(BaseModel):
    """Keyed sub-scores, e.g. by length bucket or predicate category / role."""
    name: str
    scores: Dict[str, SrlScore] = Field(default_factory=dict)

    def total(self) -> SrlScore:
        result = SrlScore()
        for score in self.scores.values():
            result = result + score
        return result


REPORT_FORMAT_VERSION = 1


class Report(BaseModel):
    """Self-describing evaluation report."""
    format_version: int = REPORT_FORMAT_VERSION
    corpus_id: str = ""
    model_id: str = ""
    overall: Optional[SrlScore] = None
    tagging: Optional[TaggingScore] = None
    breakdowns: List[Breakdown] = Field(default_factory=list)
    vocab: Dict[str, int] = Field(default_factory=dict)
    config: Dict[str, Any] = Field(default_factory=dict)
