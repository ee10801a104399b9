"""
BiLSTM sequence labeler used as both supertagger and POS tagger.

Input per token: word embedding, POS embedding and char-CNN vector (each
switchable), then a k-layer BiLSTM and a softmax over the closed label set.
"""
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .checkpoint import Checkpoint
from .optim import run_epochs, word_dropout
from ..autodiff import ops
from ..autodiff.graph import Node
from ..corpus.conll import ConllSentence
from ..corpus.embeddings import EmbeddingTable
from ..errors import AlignmentError, CheckpointFormatError, DataError
from ..evaluation.scorer import tagging_accuracy
from ..models import TaggerConfig
from ..nn.layers import BiLstm, CharCnn, Dense, EmbeddingBank, sequence_mask

logger = logging.getLogger(__name__)

CHECKPOINT_KIND = "tagger"


@dataclass
class TaggedSentence:
    labels: List[str]
    distributions: np.ndarray  # (n_tokens, n_labels)


class SequenceTagger:
    def __init__(
        self,
        cfg: TaggerConfig,
        vocabs: Dict[str, List[str]],
        rng: np.random.Generator,
        pretrained: Optional[EmbeddingTable] = None,
    ):
        if not (cfg.use_words or cfg.use_pos or cfg.use_chars):
            raise DataError("tagger needs at least one input feature")
        self.cfg = cfg
        self.vocabs = vocabs
        self.labels: List[str] = list(vocabs["labels"])
        self.label_index = {label: i for i, label in enumerate(self.labels)}
        dtype = np.dtype(cfg.dtype)

        input_dim = 0
        self.words = self.pos = self.chars = None
        if cfg.use_words:
            self.words = EmbeddingBank(vocabs["words"], cfg.d_w, rng, dtype, pretrained=pretrained, name="words")
            input_dim += cfg.d_w
        if cfg.use_pos:
            self.pos = EmbeddingBank(vocabs["pos"], cfg.d_pos, rng, dtype, name="pos")
            input_dim += cfg.d_pos
        if cfg.use_chars:
            self.chars = CharCnn(vocabs["chars"], cfg.d_char, cfg.char_window, cfg.char_filters, rng, dtype)
            input_dim += cfg.char_filters
        self.encoder = BiLstm(
            input_dim, cfg.d_h, cfg.k, rng, dtype,
            dropout=cfg.lstm_dropout, recurrent_dropout=cfg.recurrent_dropout,
            highway=cfg.highway, name="bilstm",
        )
        self.output = Dense(self.encoder.output_dim, len(self.labels), rng, dtype, name="out")

    @staticmethod
    def build_vocabs(sentences: Sequence[ConllSentence], labels: Sequence[Sequence[str]], cfg: TaggerConfig):
        words = sorted({form for s in sentences for form in s.forms})
        pos = sorted({tag for s in sentences for tag in s.pos_tags(cfg.use_predicted_pos) if tag})
        chars = sorted({ch for s in sentences for form in s.forms for ch in form})
        label_set = sorted({label for seq in labels for label in seq})
        return {"words": words, "pos": pos, "chars": chars, "labels": label_set}

    def parameters(self) -> Dict[str, Node]:
        params: Dict[str, Node] = {}
        for part in (self.words, self.pos, self.chars):
            if part is not None:
                params.update(part.parameters())
        params.update(self.encoder.parameters())
        params.update(self.output.parameters())
        return params

    def logits(
        self,
        sentences: Sequence[ConllSentence],
        train: bool = False,
        rng: Optional[np.random.Generator] = None,
        frequencies: Optional[Dict[str, int]] = None,
    ) -> Tuple[Node, np.ndarray]:
        """Stacked (T*B, n_labels) scores, row t*B + b, and the (T, B) token mask."""
        B = len(sentences)
        lengths = [len(s) for s in sentences]
        T = max(lengths)
        mask = sequence_mask(lengths, T)

        forms = [list(s.forms) for s in sentences]
        if train and self.cfg.word_dropout > 0 and frequencies is not None:
            forms = [word_dropout(f, frequencies, self.cfg.word_dropout, rng) for f in forms]
        pos_tags = [list(s.pos_tags(self.cfg.use_predicted_pos)) for s in sentences]

        def column(rows: List[List[str]], t: int) -> List[Optional[str]]:
            return [row[t] if t < len(row) else None for row in rows]

        inputs = []
        for t in range(T):
            features = []
            if self.words is not None:
                features.append(self.words.lookup(self.words.ids(column(forms, t))))
            if self.pos is not None:
                features.append(self.pos.lookup(self.pos.ids(column(pos_tags, t))))
            if self.chars is not None:
                raw = [s.forms[t] if t < len(s) else "" for s in sentences]
                features.append(self.chars.encode_words(raw))
            inputs.append(features[0] if len(features) == 1 else ops.concat(features, axis=-1))

        states = self.encoder.forward(inputs, mask, train, rng)
        stacked = ops.concat(states, axis=0) if T > 1 else states[0]
        return self.output(stacked), mask

    def loss(self, sentences, labels, rng, frequencies=None) -> Node:
        scores, mask = self.logits(sentences, train=True, rng=rng, frequencies=frequencies)
        T, B = mask.shape
        targets = np.zeros((T, B), dtype=np.int64)
        for b, seq in enumerate(labels):
            targets[:len(seq), b] = [self.label_index[label] for label in seq]
        return ops.cross_entropy(scores, targets.reshape(-1), mask.reshape(-1).astype(scores.dtype))

    def predict(self, sentences: Sequence[ConllSentence]) -> List[TaggedSentence]:
        scores, mask = self.logits(sentences, train=False)
        T, B = mask.shape
        probs = ops.softmax_values(scores.value.astype(np.float64), axis=-1).reshape(T, B, -1)
        results = []
        for b, sentence in enumerate(sentences):
            dist = probs[:len(sentence), b, :]
            best = np.argmax(dist, axis=1)
            results.append(TaggedSentence([self.labels[i] for i in best], dist))
        return results

    def to_checkpoint(self, metadata=None) -> Checkpoint:
        return Checkpoint.from_nodes(
            CHECKPOINT_KIND, self.cfg.model_dump(), self.vocabs, self.parameters(), metadata
        )

    @classmethod
    def from_checkpoint(cls, checkpoint: Checkpoint) -> "SequenceTagger":
        if checkpoint.kind != CHECKPOINT_KIND:
            raise CheckpointFormatError(f"expected a tagger checkpoint, found {checkpoint.kind!r}")
        cfg = TaggerConfig(**checkpoint.config)
        model = cls(cfg, checkpoint.vocabs, np.random.default_rng(cfg.seed))
        checkpoint.restore_into(model.parameters())
        return model


def _check_alignment(sentences: Sequence[ConllSentence], labels: Sequence[Sequence[str]]) -> None:
    if not sentences:
        raise DataError("empty training corpus")
    if len(sentences) != len(labels):
        raise AlignmentError(f"{len(sentences)} sentences but {len(labels)} label sequences")
    for n, (sentence, seq) in enumerate(zip(sentences, labels), start=1):
        if len(seq) != len(sentence):
            raise AlignmentError(f"sentence {n}: {len(sentence)} tokens but {len(seq)} labels")


def train_tagger(
    sentences: Sequence[ConllSentence],
    labels: Sequence[Sequence[str]],
    cfg: TaggerConfig,
    dev: Optional[Tuple[Sequence[ConllSentence], Sequence[Sequence[str]]]] = None,
    pretrained: Optional[EmbeddingTable] = None,
    progress: bool = False,
) -> Checkpoint:
    """
    Fit a tagger and return its checkpoint. Deterministic for a fixed seed.

    Raises:
        DataError: empty corpus
        AlignmentError: a label sequence does not match its sentence length
    """
    _check_alignment(sentences, labels)
    rng = np.random.default_rng(cfg.seed)
    vocabs = SequenceTagger.build_vocabs(sentences, labels, cfg)
    model = SequenceTagger(cfg, vocabs, rng, pretrained)
    frequencies = Counter(form for s in sentences for form in s.forms)
    logger.info(
        "Training %s tagger: %d sentences, %d labels, %d words",
        cfg.label_kind, len(sentences), len(vocabs["labels"]), len(vocabs["words"]),
    )

    def loss_fn(batch: Sequence[int], batch_rng: np.random.Generator) -> Node:
        return model.loss([sentences[i] for i in batch], [labels[i] for i in batch], batch_rng, frequencies)

    dev_score: Optional[Callable[[], float]] = None
    if dev is not None:
        dev_sentences, dev_labels = dev
        _check_alignment(dev_sentences, dev_labels)

        def dev_score() -> float:
            predicted = predict_batched(model, dev_sentences)
            return tagging_accuracy(dev_labels, [tagged.labels for tagged in predicted])

    metadata = run_epochs(
        model.parameters(), len(sentences), loss_fn, cfg, rng,
        dev_score=dev_score, progress=progress, desc=f"{cfg.label_kind}-tagger",
    )
    metadata["seed"] = cfg.seed
    return model.to_checkpoint(metadata)


def predict_batched(model: SequenceTagger, sentences: Sequence[ConllSentence]) -> List[TaggedSentence]:
    results: List[TaggedSentence] = []
    size = model.cfg.batch_size
    for start in range(0, len(sentences), size):
        batch = list(sentences[start:start + size])
        nonempty = [s for s in batch if len(s)]
        predicted = iter(model.predict(nonempty)) if nonempty else iter(())
        for s in batch:
            if len(s):
                results.append(next(predicted))
            else:
                results.append(TaggedSentence([], np.zeros((0, len(model.labels)))))
    return results


def tag(checkpoint: Checkpoint, sentences: Sequence[ConllSentence]) -> List[TaggedSentence]:
    """Argmax label (lowest index on ties) and label distribution per token."""
    model = SequenceTagger.from_checkpoint(checkpoint)
    return predict_batched(model, sentences)
