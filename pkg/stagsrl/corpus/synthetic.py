"""
Seeded synthetic treebank generator for desk-scale experiments.

Word forms depend on POS only, never on the relation, so the syntactic
function of a token has to come from context (or from its supertag).
Verbs are predicates; their obligatory dependents carry core roles
(A0 for the first obligatory relation, A1 for the second, ...) and
modifier dependents carry AM-* roles.
"""
import logging
from collections import deque
from typing import Dict, List, Optional

import numpy as np

from .conll import ConllSentence, ConllToken
from ..models import SynthConfig

logger = logging.getLogger(__name__)

ROOT_RELATION = "ROOT"

# POS choices for non-verb dependents, by relation.
RELATION_POS: Dict[str, List[str]] = {
    "SBJ": ["NN", "NNS", "PRP"],
    "OBJ": ["NN", "NNS"],
    "PRD": ["JJ", "NN"],
    "NMOD": ["DT", "JJ"],
    "PMOD": ["NN", "NNS"],
    "NAME": ["NNP"],
    "DEP": ["UH", "RB"],
    "ADV": ["RB"],
    "TMP": ["NN", "RB"],
    "LOC": ["IN"],
    "P": [".", ","],
}
DEFAULT_POS = ["NN"]
NEVER_VERB = {"P", "NMOD", "NAME"}


class SyntheticTreebank:
    """Draws projective (or mildly non-projective) labelled trees from one RNG stream."""

    def __init__(self, cfg: SynthConfig):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        names = sorted(cfg.relations)
        weights = np.array([cfg.relations[r] for r in names], dtype=float)
        self._all_relations = names
        self._all_weights = weights / weights.sum()
        optional = [r for r in names if r not in cfg.obligatory]
        if optional:
            w = np.array([cfg.relations[r] for r in optional], dtype=float)
            self._optional_relations = optional
            self._optional_weights = w / w.sum()
        else:
            # Degenerate alphabet: non-verb heads fall back to a generic relation.
            self._optional_relations = ["DEP"]
            self._optional_weights = np.array([1.0])

    # ---------- structure ----------

    def _attach_span(self, lo: int, hi: int, head: int, heads: List[int]) -> None:
        """Attach positions lo..hi (a contiguous span) under ``head`` projectively."""
        if lo > hi:
            return
        size = hi - lo + 1
        k = int(self.rng.integers(1, min(self.cfg.max_dependents_per_side, size) + 1))
        cuts = sorted(self.rng.choice(np.arange(lo + 1, hi + 1), size=k - 1, replace=False)) if k > 1 else []
        bounds = [lo] + [int(c) for c in cuts] + [hi + 1]
        for a, b in zip(bounds[:-1], bounds[1:]):
            child = int(self.rng.integers(a, b))
            heads[child] = head
            self._attach_span(a, child - 1, child, heads)
            self._attach_span(child + 1, b - 1, child, heads)

    def _descendants(self, node: int, heads: List[int]) -> set:
        children: Dict[int, List[int]] = {}
        for i in range(1, len(heads)):
            children.setdefault(heads[i], []).append(i)
        found, stack = set(), [node]
        while stack:
            current = stack.pop()
            for c in children.get(current, []):
                if c not in found:
                    found.add(c)
                    stack.append(c)
        return found

    def _make_nonprojective(self, heads: List[int], root: int) -> None:
        n = len(heads) - 1
        for i in range(1, n + 1):
            if i == root or self.rng.random() >= self.cfg.nonprojective_rate:
                continue
            blocked = self._descendants(i, heads) | {i}
            options = [j for j in range(1, n + 1) if j not in blocked]
            if options:
                heads[i] = int(self.rng.choice(options))

    # ---------- labels ----------

    def _word(self, pos: str) -> tuple:
        """(form, lemma) drawn from a small per-POS lexicon."""
        if pos in (".", ","):
            return pos, pos
        k = int(self.rng.integers(self.cfg.lexicon_size))
        if pos in self.cfg.verb_pos_tags:
            lemma = f"v{k}"
            suffix = {"VBZ": "s", "VBD": "ed"}.get(pos, "")
            return lemma + suffix, lemma
        stem = pos.lower().rstrip("s") or "x"
        lemma = f"{stem}{k}"
        return (lemma + "s" if pos == "NNS" else lemma), lemma

    def _relation_for(self, head_is_verb: bool) -> str:
        if head_is_verb:
            return str(self.rng.choice(self._all_relations, p=self._all_weights))
        return str(self.rng.choice(self._optional_relations, p=self._optional_weights))

    def _pos_for(self, relation: str) -> str:
        if relation == "VC" or (
            relation not in NEVER_VERB and self.rng.random() < self.cfg.verb_pos_probability
        ):
            return str(self.rng.choice(self.cfg.verb_pos_tags))
        return str(self.rng.choice(RELATION_POS.get(relation, DEFAULT_POS)))

    def sentence(self) -> ConllSentence:
        cfg = self.cfg
        n = int(self.rng.integers(cfg.min_length, cfg.max_length + 1))
        heads = [0] * (n + 1)
        root = int(self.rng.integers(1, n + 1))
        self._attach_span(1, root - 1, root, heads)
        self._attach_span(root + 1, n, root, heads)
        if not cfg.projective:
            self._make_nonprojective(heads, root)

        children: Dict[int, List[int]] = {}
        for i in range(1, n + 1):
            children.setdefault(heads[i], []).append(i)

        relations: List[Optional[str]] = [None] * (n + 1)
        pos: List[Optional[str]] = [None] * (n + 1)
        relations[root] = ROOT_RELATION
        pos[root] = str(self.rng.choice(cfg.verb_pos_tags))
        queue = deque([root])
        while queue:
            h = queue.popleft()
            head_is_verb = pos[h] in cfg.verb_pos_tags
            for c in children.get(h, []):
                relations[c] = self._relation_for(head_is_verb)
                pos[c] = self._pos_for(relations[c])
                queue.append(c)

        words = [None] + [self._word(pos[i]) for i in range(1, n + 1)]
        predicates = [i for i in range(1, n + 1) if pos[i] in cfg.verb_pos_tags] if cfg.with_roles else []
        roles = {p: self._roles_for(p, children.get(p, []), relations) for p in predicates}

        tokens = []
        for i in range(1, n + 1):
            form, lemma = words[i]
            is_predicate = i in roles
            tokens.append(ConllToken(
                id=i, form=form, lemma=lemma, plemma=lemma,
                pos=pos[i], ppos=pos[i],
                head=heads[i], phead=heads[i],
                deprel=relations[i], pdeprel=relations[i],
                fillpred=is_predicate,
                pred=f"{lemma}.01" if is_predicate else None,
                apreds=tuple(roles[p].get(i) for p in predicates),
            ))
        return ConllSentence(tuple(tokens))

    def _roles_for(self, predicate: int, dependents: List[int], relations: List[Optional[str]]) -> Dict[int, str]:
        cfg = self.cfg
        roles: Dict[int, str] = {}
        for d in dependents:
            relation = relations[d]
            if relation in cfg.obligatory:
                roles[d] = f"A{cfg.obligatory.index(relation)}"
            elif relation in cfg.modifier_relations and self.rng.random() < cfg.modifier_role_probability:
                roles[d] = f"AM-{relation}"
        return roles


def generate_synthetic(cfg: SynthConfig) -> List[ConllSentence]:
    """Deterministic corpus of ``cfg.sentence_count`` valid sentences."""
    generator = SyntheticTreebank(cfg)
    corpus = [generator.sentence() for _ in range(cfg.sentence_count)]
    logger.debug("Generated %d synthetic sentences (seed %d)", len(corpus), cfg.seed)
    return corpus
