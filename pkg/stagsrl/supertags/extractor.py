"""
Supertag extraction from dependency trees, projection between models,
tag/tree consistency and vocabulary statistics.
"""
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

from .tags import (
    OMITTED_HEAD, ROOT_HEAD, HeadKind, HeadPart, ObligatorySet, StagModel, Supertag,
    arc_head, check_relation_label, serialize_tag,
)
from ..corpus.treebank import LEFT, RIGHT, DepTree, dependents_of
from ..errors import ProjectionError

logger = logging.getLogger(__name__)

# (finer, coarser) pairs on the feature grid
PROJECTABLE = {
    (StagModel.M1, StagModel.M0),
    (StagModel.M2, StagModel.M1),
    (StagModel.M2, StagModel.M0),
}


@dataclass
class SupertagVocab:
    """Tag-string counts for one model over a corpus."""
    model: StagModel
    counts: Dict[str, int] = field(default_factory=dict)
    total: int = 0

    def __len__(self) -> int:
        return len(self.counts)

    def __contains__(self, tag: str) -> bool:
        return tag in self.counts

    def sorted_counts(self) -> List[tuple]:
        """Most frequent first, ties by tag string."""
        return sorted(self.counts.items(), key=lambda item: (-item[1], item[0]))


class SupertagExtractor:
    """
    Rule-based supertag extraction for Models 0, 1, 2 and TAG.

    ``model2_optional_flags`` switches Model 2 to the grid reading where
    optional-dependent directions are kept next to a nonempty obligatory list.
    """

    def __init__(self, model2_optional_flags: bool = False):
        self.model2_optional_flags = model2_optional_flags

    def _head_part(self, tree: DepTree, i: int) -> HeadPart:
        h = tree.head(i)
        if h == 0:
            return ROOT_HEAD
        return arc_head(tree.relation(i), LEFT if h < i else RIGHT)

    def _token_tag(self, tree: DepTree, i: int, model: StagModel, oblig: ObligatorySet) -> Supertag:
        head = self._head_part(tree, i)
        if model is StagModel.M0:
            return Supertag(model, head)

        deps = dependents_of(tree, i)
        all_sides = {d.side for d in deps}
        if model is StagModel.M1:
            return Supertag(model, head, flags=tuple(all_sides))

        obligatory = tuple((d.relation, d.side) for d in deps if d.relation in oblig)
        if model is StagModel.M2:
            if not obligatory:
                return Supertag(model, head, flags=tuple(all_sides))
            if self.model2_optional_flags:
                optional_sides = {d.side for d in deps if d.relation not in oblig}
                return Supertag(model, head, flags=tuple(optional_sides), obligatory=obligatory)
            return Supertag(model, head, obligatory=obligatory)

        # Model TAG: obligatory attachments drop their head info (substitution
        # sites); only verbs record their obligatory dependents.
        if head.kind is HeadKind.ARC and tree.relation(i) in oblig:
            head = OMITTED_HEAD
        if not oblig.is_verb(tree.pos_of(i)):
            obligatory = ()
        return Supertag(model, head, obligatory=obligatory)

    def extract(self, tree: DepTree, model: "str | StagModel", oblig: ObligatorySet) -> List[Supertag]:
        """One tag per token, in surface order."""
        model = StagModel.parse(model)
        for i in range(1, tree.n + 1):
            if tree.head(i) != 0:
                check_relation_label(tree.relation(i))
        return [self._token_tag(tree, i, model, oblig) for i in range(1, tree.n + 1)]

    def extract_all(self, tree: DepTree, oblig: ObligatorySet) -> Dict[StagModel, List[Supertag]]:
        return {model: self.extract(tree, model, oblig) for model in StagModel}

    def extract_strings(self, tree: DepTree, model: "str | StagModel", oblig: ObligatorySet) -> List[str]:
        return [serialize_tag(t) for t in self.extract(tree, model, oblig)]

    def project(self, tag: Supertag, target: "str | StagModel") -> Supertag:
        """
        Map a tag onto a coarser model (M1->M0, M2->M1, M2->M0).

        M2->M1 flags are the union of the tag's direction flags and the sides
        of its obligatory list. Default-mode M2 tags carry one or the other;
        for optional-flags tags (``ROOT+SBJ/L+R``) the union yields the token's
        M1 flags (``ROOT+L_R``) where "flags, else obligatory sides" would not.

        Raises:
            ProjectionError: the pair is not ordered on the feature grid (TAG never is)
        """
        target = StagModel.parse(target)
        if (tag.model, target) not in PROJECTABLE:
            raise ProjectionError(f"cannot project Model {tag.model.value} onto Model {target.value}")
        if target is StagModel.M0:
            return Supertag(StagModel.M0, tag.head)
        return Supertag(StagModel.M1, tag.head, flags=tag.dep_sides)

    def consistent(self, tag: Supertag, tree: DepTree, i: int, oblig: ObligatorySet) -> bool:
        """True iff ``tag`` is exactly what token ``i`` (1-based) would be given."""
        if not 1 <= i <= tree.n:
            return False
        return self._token_tag(tree, i, tag.model, oblig) == tag

    def vocab_stats(
        self,
        corpus: Sequence[DepTree],
        model: "str | StagModel",
        oblig: ObligatorySet,
        threads: int = 1,
    ) -> SupertagVocab:
        """Serialized-tag counts; thread partitions are merged by addition."""
        model = StagModel.parse(model)

        def count(trees: Sequence[DepTree]) -> Counter:
            counter: Counter = Counter()
            for tree in trees:
                counter.update(self.extract_strings(tree, model, oblig))
            return counter

        if threads > 1 and len(corpus) > threads:
            size = -(-len(corpus) // threads)
            chunks = [corpus[i:i + size] for i in range(0, len(corpus), size)]
            with ThreadPoolExecutor(max_workers=threads) as pool:
                partials = list(pool.map(count, chunks))
            total: Counter = Counter()
            for partial in partials:
                total.update(partial)
        else:
            total = count(corpus)

        counts = dict(sorted(total.items()))
        return SupertagVocab(model=model, counts=counts, total=sum(counts.values()))


# Singleton instance
supertag_extractor = SupertagExtractor()

extract = supertag_extractor.extract
extract_all = supertag_extractor.extract_all
project = supertag_extractor.project
consistent = supertag_extractor.consistent
vocab_stats = supertag_extractor.vocab_stats
