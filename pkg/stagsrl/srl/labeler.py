"""
Supertag-augmented semantic role labeler.

Each (sentence, predicate) pair is encoded separately: word, POS, lemma,
supertag and predicate-indicator embeddings (plus optional frozen pretrained
vectors) feed a highway BiLSTM. Every token is then scored against the
predicate: relu(W [h_t; h_p; lemma_out(p)] + b) projected onto role
embeddings, with NULL ("_") meaning "not an argument".
"""
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .frames import NULL_ROLE, PredicateList, PredicateSource, SrlFrame, check_roles, frames_from_sentence
from ..autodiff import ops
from ..autodiff.graph import Node, parameter
from ..corpus.conll import ConllSentence
from ..corpus.embeddings import EmbeddingTable
from ..errors import AlignmentError, CheckpointFormatError, DataError
from ..evaluation.scorer import srl_prf
from ..models import SrlConfig
from ..nn.layers import BiLstm, Dense, EmbeddingBank, glorot_uniform, sequence_mask
from ..tagging.checkpoint import Checkpoint
from ..tagging.optim import run_epochs, word_dropout

logger = logging.getLogger(__name__)

CHECKPOINT_KIND = "srl"


@dataclass
class _Instance:
    sentence: int
    predicate: int  # 1-based
    lemma: str
    sense: Optional[str] = None
    targets: Optional[np.ndarray] = None


class RoleLabeler:
    def __init__(
        self,
        cfg: SrlConfig,
        vocabs: Dict[str, List[str]],
        rng: np.random.Generator,
        pretrained: Optional[EmbeddingTable] = None,
    ):
        self.cfg = cfg
        self.vocabs = vocabs
        self.roles: List[str] = list(vocabs["roles"])
        if not self.roles or self.roles[0] != NULL_ROLE:
            raise DataError("role inventory must start with the NULL role")
        self.role_index = {role: i for i, role in enumerate(self.roles)}
        dtype = np.dtype(cfg.dtype)

        self.words = EmbeddingBank(vocabs["words"], cfg.d_w, rng, dtype, name="words")
        self.input_dim = cfg.d_w
        self.pretrained = self.pos = self.lemmas = self.stags = None
        if cfg.d_pretrained:
            self.pretrained = EmbeddingBank(
                vocabs["words"], cfg.d_pretrained, rng, dtype,
                trainable=not cfg.freeze_pretrained, pretrained=pretrained, name="pretrained",
            )
            self.input_dim += cfg.d_pretrained
        if cfg.use_pos:
            self.pos = EmbeddingBank(vocabs["pos"], cfg.d_pos, rng, dtype, name="pos")
            self.input_dim += cfg.d_pos
        if cfg.use_lemmas:
            self.lemmas = EmbeddingBank(vocabs["lemmas"], cfg.d_l, rng, dtype, name="lemmas")
            self.input_dim += cfg.d_l
        if cfg.use_supertags:
            self.stags = EmbeddingBank(vocabs["stags"], cfg.d_s, rng, dtype, name="stags")
            self.input_dim += cfg.d_s
        # row 1 marks the predicate token
        self.indicator = parameter(
            rng.uniform(-0.01, 0.01, size=(2, cfg.d_ind)).astype(dtype), name="indicator.table"
        )
        self.input_dim += cfg.d_ind

        self.encoder = BiLstm(
            self.input_dim, cfg.d_h, cfg.k, rng, dtype,
            dropout=cfg.lstm_dropout, recurrent_dropout=cfg.recurrent_dropout,
            highway=cfg.highway, name="bilstm",
        )
        self.predicate_lemmas = EmbeddingBank(
            vocabs["predicate_lemmas"], cfg.d_lemma_out, rng, dtype, name="pred_lemmas"
        )
        self.hidden = Dense(2 * self.encoder.output_dim + cfg.d_lemma_out, cfg.d_r, rng, dtype, name="scorer.hidden")
        self.role_embeddings = parameter(
            glorot_uniform(rng, (cfg.d_r, len(self.roles)), dtype), name="scorer.roles"
        )
        self.role_bias = parameter(np.zeros(len(self.roles), dtype=dtype), name="scorer.bias")

    @staticmethod
    def build_vocabs(
        sentences: Sequence[ConllSentence],
        frames: Sequence[Sequence[SrlFrame]],
        stags: Optional[Sequence[Sequence[str]]],
        cfg: SrlConfig,
    ) -> Dict[str, List[str]]:
        roles = sorted({role for fs in frames for f in fs for role in f.arguments.values()})
        return {
            "words": sorted({form for s in sentences for form in s.forms}),
            "pos": sorted({tag for s in sentences for tag in s.pos_tags(cfg.use_predicted_pos)}),
            "lemmas": sorted({lemma for s in sentences for lemma in s.lemmas(cfg.use_predicted_lemmas)}),
            "stags": sorted({tag for seq in (stags or []) for tag in seq}),
            "predicate_lemmas": sorted({f.lemma for fs in frames for f in fs}),
            "roles": [NULL_ROLE] + [r for r in roles if r != NULL_ROLE],
        }

    def parameters(self) -> Dict[str, Node]:
        params: Dict[str, Node] = {}
        for bank in (self.words, self.pretrained, self.pos, self.lemmas, self.stags):
            if bank is not None:
                params.update(bank.parameters())
        params["indicator.table"] = self.indicator
        params.update(self.encoder.parameters())
        params.update(self.predicate_lemmas.parameters())
        params.update(self.hidden.parameters())
        params["scorer.roles"] = self.role_embeddings
        params["scorer.bias"] = self.role_bias
        return params

    # ---------- encoding ----------

    def _encode_batch(
        self,
        sentences: Sequence[ConllSentence],
        stags: Sequence[Optional[Sequence[str]]],
        predicates: Sequence[int],
        train: bool = False,
        rng: Optional[np.random.Generator] = None,
        frequencies: Optional[Dict[str, int]] = None,
    ) -> Tuple[List[Node], np.ndarray]:
        cfg = self.cfg
        lengths = [len(s) for s in sentences]
        T = max(lengths)
        mask = sequence_mask(lengths, T)
        forms = [list(s.forms) for s in sentences]
        dropped = forms
        if train and cfg.word_dropout > 0 and frequencies is not None:
            dropped = [word_dropout(f, frequencies, cfg.word_dropout, rng) for f in forms]
        pos = [s.pos_tags(cfg.use_predicted_pos) for s in sentences]
        lemmas = [s.lemmas(cfg.use_predicted_lemmas) for s in sentences]

        def column(rows, t):
            return [row[t] if row is not None and t < len(row) else None for row in rows]

        inputs = []
        for t in range(T):
            features = [self.words.lookup(self.words.ids(column(dropped, t)))]
            if self.pretrained is not None:
                features.append(self.pretrained.lookup(self.pretrained.ids(column(forms, t))))
            if self.pos is not None:
                features.append(self.pos.lookup(self.pos.ids(column(pos, t))))
            if self.lemmas is not None:
                features.append(self.lemmas.lookup(self.lemmas.ids(column(lemmas, t))))
            if self.stags is not None:
                features.append(self.stags.lookup(self.stags.ids(column(stags, t))))
            flags = np.array([1 if p - 1 == t else 0 for p in predicates], dtype=np.int64)
            features.append(ops.embedding_lookup(self.indicator, flags))
            inputs.append(ops.concat(features, axis=-1))
        return self.encoder.forward(inputs, mask, train, rng), mask

    def encode_for_predicate(
        self,
        sentence: ConllSentence,
        predicate: int,
        stags: Optional[Sequence[str]] = None,
        train: bool = False,
        rng: Optional[np.random.Generator] = None,
    ) -> Node:
        """(n_tokens, 2*d_h) encoding of ``sentence`` relative to ``predicate`` (1-based)."""
        if not 1 <= predicate <= len(sentence):
            raise AlignmentError(f"predicate {predicate} outside sentence of {len(sentence)} tokens")
        self._check_stags([sentence], [stags])
        states, _ = self._encode_batch([sentence], [stags], [predicate], train, rng)
        return ops.concat(states, axis=0)

    # ---------- scoring ----------

    def _score(self, tokens: Node, predicate_rows: Node, lemma_rows: Node) -> Node:
        hidden = ops.relu(self.hidden(ops.concat([tokens, predicate_rows, lemma_rows], axis=-1)))
        return ops.add(ops.matmul(hidden, self.role_embeddings), self.role_bias)

    def score_roles(self, encoding: Node, predicate: int, lemma: str) -> Node:
        """Per-token softmax over roles (NULL included) for one encoded predicate."""
        n = encoding.shape[0]
        predicate_rows = ops.embedding_lookup(encoding, np.full(n, predicate - 1))
        lemma_rows = self.predicate_lemmas.lookup(np.full(n, self.predicate_lemmas.id(lemma)))
        return ops.softmax(self._score(encoding, predicate_rows, lemma_rows), axis=-1)

    def batch_logits(
        self,
        sentences: Sequence[ConllSentence],
        stags: Sequence[Optional[Sequence[str]]],
        instances: Sequence[_Instance],
        train: bool = False,
        rng: Optional[np.random.Generator] = None,
        frequencies: Optional[Dict[str, int]] = None,
    ) -> Tuple[Node, np.ndarray]:
        """(T*B, n_roles) logits, row t*B + b, and the (T, B) mask."""
        batch_sentences = [sentences[inst.sentence] for inst in instances]
        batch_stags = [stags[inst.sentence] for inst in instances]
        predicates = [inst.predicate for inst in instances]
        states, mask = self._encode_batch(batch_sentences, batch_stags, predicates, train, rng, frequencies)
        T, B = mask.shape
        stacked = ops.concat(states, axis=0)
        rows = np.array([(p - 1) * B + b for _ in range(T) for b, p in enumerate(predicates)])
        predicate_rows = ops.embedding_lookup(stacked, rows)
        lemma_ids = self.predicate_lemmas.ids([inst.lemma for inst in instances])
        lemma_rows = self.predicate_lemmas.lookup(np.tile(lemma_ids, T))
        return self._score(stacked, predicate_rows, lemma_rows), mask

    def loss(self, sentences, stags, instances, rng, frequencies=None) -> Node:
        logits, mask = self.batch_logits(sentences, stags, instances, True, rng, frequencies)
        T, B = mask.shape
        targets = np.zeros((T, B), dtype=np.int64)
        for b, inst in enumerate(instances):
            targets[:len(inst.targets), b] = inst.targets
        return ops.cross_entropy(logits, targets.reshape(-1), mask.reshape(-1).astype(logits.dtype))

    def predict(self, sentences, stags, instances: Sequence[_Instance]) -> List[SrlFrame]:
        logits, mask = self.batch_logits(sentences, stags, instances)
        T, B = mask.shape
        probs = ops.softmax_values(logits.value.astype(np.float64), axis=-1).reshape(T, B, -1)
        frames = []
        for b, inst in enumerate(instances):
            n = len(sentences[inst.sentence])
            best = np.argmax(probs[:n, b, :], axis=1)
            arguments = {t + 1: self.roles[r] for t, r in enumerate(best) if r != 0}
            frames.append(SrlFrame(inst.predicate, inst.lemma, arguments, inst.sense))
        return frames

    def _check_stags(self, sentences: Sequence[ConllSentence], stags: Sequence[Optional[Sequence[str]]]) -> None:
        if self.stags is None:
            return
        for n, (sentence, seq) in enumerate(zip(sentences, stags), start=1):
            if seq is None:
                raise AlignmentError(f"sentence {n}: missing supertags")
            if len(seq) != len(sentence):
                raise AlignmentError(f"sentence {n}: {len(sentence)} tokens but {len(seq)} supertags")

    def to_checkpoint(self, metadata=None) -> Checkpoint:
        return Checkpoint.from_nodes(
            CHECKPOINT_KIND, self.cfg.model_dump(), self.vocabs, self.parameters(), metadata
        )

    @classmethod
    def from_checkpoint(cls, checkpoint: Checkpoint) -> "RoleLabeler":
        if checkpoint.kind != CHECKPOINT_KIND:
            raise CheckpointFormatError(f"expected an srl checkpoint, found {checkpoint.kind!r}")
        cfg = SrlConfig(**checkpoint.config)
        model = cls(cfg, checkpoint.vocabs, np.random.default_rng(cfg.seed))
        checkpoint.restore_into(model.parameters())
        return model


def _normalize_stags(sentences, stags) -> List[Optional[Sequence[str]]]:
    if stags is None:
        return [None] * len(sentences)
    if len(stags) != len(sentences):
        raise AlignmentError(f"{len(sentences)} sentences but {len(stags)} supertag sequences")
    return list(stags)


def _gold_instances(model: RoleLabeler, sentences, frames) -> List[_Instance]:
    instances = []
    for si, (sentence, sentence_frames) in enumerate(zip(sentences, frames)):
        for frame in sentence_frames:
            targets = np.zeros(len(sentence), dtype=np.int64)
            for arg, role in frame.arguments.items():
                targets[arg - 1] = model.role_index[role]
            instances.append(_Instance(si, frame.predicate, frame.lemma, frame.sense, targets))
    return instances


def label_with_model(
    model: RoleLabeler,
    sentences: Sequence[ConllSentence],
    predicates: Sequence[PredicateList],
    stags: Optional[Sequence[Sequence[str]]] = None,
) -> List[List[SrlFrame]]:
    stags = _normalize_stags(sentences, stags)
    model._check_stags(sentences, stags)
    if len(predicates) != len(sentences):
        raise AlignmentError(f"{len(sentences)} sentences but predicates for {len(predicates)}")
    instances = []
    for si, (sentence, preds) in enumerate(zip(sentences, predicates)):
        lemmas = sentence.lemmas(model.cfg.use_predicted_lemmas)
        for predicate, sense in preds:
            instances.append(_Instance(si, predicate, lemmas[predicate - 1], sense))

    frames: List[List[SrlFrame]] = [[] for _ in sentences]
    size = model.cfg.batch_size
    for start in range(0, len(instances), size):
        batch = instances[start:start + size]
        for inst, frame in zip(batch, model.predict(sentences, stags, batch)):
            frames[inst.sentence].append(frame)
    return frames


def train_srl(
    sentences: Sequence[ConllSentence],
    stags: Optional[Sequence[Sequence[str]]],
    cfg: SrlConfig,
    dev: Optional[Tuple[Sequence[ConllSentence], Optional[Sequence[Sequence[str]]]]] = None,
    pretrained: Optional[EmbeddingTable] = None,
    progress: bool = False,
) -> Checkpoint:
    """
    Fit the role labeler on the gold frames of ``sentences``.

    Raises:
        DataError: no sentences or no predicates
        AlignmentError: supertags missing or misaligned while the channel is on
    """
    if not sentences:
        raise DataError("empty training corpus")
    if pretrained is not None:
        cfg = cfg.model_copy(update={"d_pretrained": pretrained.dim})
    stags = _normalize_stags(sentences, stags if cfg.use_supertags else None)
    frames = [frames_from_sentence(s, cfg.use_predicted_lemmas) for s in sentences]
    for s, fs in zip(sentences, frames):
        check_roles(fs, len(s))

    rng = np.random.default_rng(cfg.seed)
    vocabs = RoleLabeler.build_vocabs(sentences, frames, stags if cfg.use_supertags else None, cfg)
    model = RoleLabeler(cfg, vocabs, rng, pretrained)
    model._check_stags(sentences, stags)
    instances = _gold_instances(model, sentences, frames)
    if not instances:
        raise DataError("training corpus has no predicates")
    frequencies = Counter(form for s in sentences for form in s.forms)
    logger.info(
        "Training SRL: %d sentences, %d predicates, %d roles, supertags=%s",
        len(sentences), len(instances), len(model.roles), cfg.use_supertags,
    )

    def loss_fn(batch: Sequence[int], batch_rng: np.random.Generator) -> Node:
        return model.loss(sentences, stags, [instances[i] for i in batch], batch_rng, frequencies)

    dev_score = None
    if dev is not None:
        dev_sentences, dev_stags = dev
        dev_gold = [frames_from_sentence(s, cfg.use_predicted_lemmas) for s in dev_sentences]
        dev_predicates = PredicateSource().resolve(dev_sentences)

        def dev_score() -> float:
            predicted = label_with_model(model, dev_sentences, dev_predicates, dev_stags)
            return srl_prf(dev_gold, predicted).f1

    metadata = run_epochs(
        model.parameters(), len(instances), loss_fn, cfg, rng,
        dev_score=dev_score, progress=progress, desc="srl",
    )
    metadata["seed"] = cfg.seed
    return model.to_checkpoint(metadata)


def label(
    checkpoint: Checkpoint,
    sentences: Sequence[ConllSentence],
    predicate_source: PredicateSource = PredicateSource(),
    stags: Optional[Sequence[Sequence[str]]] = None,
) -> List[List[SrlFrame]]:
    """Frames per sentence; NULL-labeled tokens are omitted, ties go to the lowest role index."""
    model = RoleLabeler.from_checkpoint(checkpoint)
    return label_with_model(model, sentences, predicate_source.resolve(sentences), stags)
