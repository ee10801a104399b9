"""
Dependency-tree view over CoNLL sentences with structural validation.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import List, NamedTuple, Optional, Tuple

from .conll import ConllSentence
from ..errors import TreeValidationError

LEFT = "L"
RIGHT = "R"


class Dependent(NamedTuple):
    index: int
    relation: str
    side: str


@dataclass(frozen=True)
class DepTree:
    """
    Heads, relations and POS for tokens 1..n (stored 0-based in the tuples).
    Head 0 is the artificial root; several tokens may attach to it.
    """
    heads: Tuple[int, ...]
    relations: Tuple[str, ...]
    pos: Tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.heads)

    def head(self, i: int) -> int:
        return self.heads[i - 1]

    def relation(self, i: int) -> str:
        return self.relations[i - 1]

    def pos_of(self, i: int) -> str:
        return self.pos[i - 1]

    @cached_property
    def _children(self) -> Tuple[Tuple[int, ...], ...]:
        children: List[List[int]] = [[] for _ in range(self.n + 1)]
        for i, h in enumerate(self.heads, start=1):
            children[h].append(i)
        return tuple(tuple(c) for c in children)

    def roots(self) -> Tuple[int, ...]:
        return self._children[0]


def validate_tree(tree: DepTree, sentence_number: Optional[int] = None) -> None:
    """
    Every token must reach the root: heads in range, no self-loops, no cycles.

    Raises:
        TreeValidationError: naming the first offending token
    """
    n = tree.n
    for i, h in enumerate(tree.heads, start=1):
        if not 0 <= h <= n:
            raise TreeValidationError(f"head {h} out of range [0, {n}]", sentence_number, i)
        if h == i:
            raise TreeValidationError("token is its own head", sentence_number, i)

    # 0 unvisited, 1 on current path, 2 reaches root
    state = [0] * (n + 1)
    state[0] = 2
    for start in range(1, n + 1):
        path = []
        node = start
        while state[node] == 0:
            state[node] = 1
            path.append(node)
            node = tree.heads[node - 1]
        if state[node] == 1:
            cycle_start = path.index(node)
            offender = min(path[cycle_start:])
            raise TreeValidationError("cycle: token does not reach the root", sentence_number, offender)
        for visited in path:
            state[visited] = 2


def tree_from_sentence(
    sentence: ConllSentence,
    use_predicted: bool = False,
    sentence_number: Optional[int] = None,
) -> DepTree:
    """
    Build a validated tree from the gold (HEAD/DEPREL/POS) or predicted
    (PHEAD/PDEPREL/PPOS) columns.
    """
    heads, relations, pos = [], [], []
    for token in sentence.tokens:
        if use_predicted:
            head, relation, tag = token.phead, token.pdeprel, token.ppos
        else:
            head, relation, tag = token.head, token.deprel, token.pos
        if head is None:
            raise TreeValidationError("missing head", sentence_number, token.id)
        if relation is None:
            raise TreeValidationError("missing dependency relation", sentence_number, token.id)
        heads.append(head)
        relations.append(relation)
        pos.append(tag or "_")
    tree = DepTree(tuple(heads), tuple(relations), tuple(pos))
    validate_tree(tree, sentence_number)
    return tree


def dependents_of(tree: DepTree, i: int) -> List[Dependent]:
    """Dependents of token ``i`` in surface order, with the side they sit on."""
    if not 1 <= i <= tree.n:
        raise IndexError(f"token index {i} out of range [1, {tree.n}]")
    return [
        Dependent(j, tree.relation(j), LEFT if j < i else RIGHT)
        for j in tree._children[i]
    ]
