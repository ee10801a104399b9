"""
Supertag value type and its string grammar.

    tag       := head ["+" obligatory] ["+" flags]
    head      := "ROOT" | REL "/" DIR | "-"
    obligatory:= REL "/" DIR ("_" REL "/" DIR)*
    flags     := "L" | "R" | "L_R"

Default-mode tags carry at most one dependent segment. A tag with both an
obligatory list and flags only arises from the optional-flags Model 2 variant.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Iterable, NamedTuple, Optional, Tuple

from ..errors import TagFormatError

LEFT = "L"
RIGHT = "R"
DIRECTIONS = (LEFT, RIGHT)
ROOT = "ROOT"
OMITTED = "-"
RESERVED_CHARS = ("/", "+", "_")


class StagModel(str, Enum):
    """The four supertag granularities."""
    M0 = "0"
    M1 = "1"
    M2 = "2"
    TAG = "tag"

    @classmethod
    def parse(cls, value: "str | StagModel") -> "StagModel":
        if isinstance(value, StagModel):
            return value
        text = str(value).strip().lower()
        for model in cls:
            if text in (model.value, f"m{model.value}", f"model{model.value}"):
                return model
        raise TagFormatError(f"unknown supertag model {value!r}")


class HeadKind(str, Enum):
    ROOT = "root"
    ARC = "arc"
    OMITTED = "omitted"


class HeadPart(NamedTuple):
    kind: HeadKind
    relation: Optional[str] = None
    direction: Optional[str] = None

    def render(self) -> str:
        if self.kind is HeadKind.ROOT:
            return ROOT
        if self.kind is HeadKind.OMITTED:
            return OMITTED
        return f"{self.relation}/{self.direction}"


ROOT_HEAD = HeadPart(HeadKind.ROOT)
OMITTED_HEAD = HeadPart(HeadKind.OMITTED)


def arc_head(relation: str, direction: str) -> HeadPart:
    return HeadPart(HeadKind.ARC, relation, direction)


@dataclass(frozen=True)
class ObligatorySet:
    """Relations recorded by name in Model 2 / TAG tags, plus verb detection for TAG."""
    relations: FrozenSet[str]
    verb_pos_prefixes: Tuple[str, ...] = ("V",)

    def __post_init__(self):
        if not self.relations:
            raise TagFormatError("obligatory relation set is empty")
        object.__setattr__(self, "relations", frozenset(self.relations))
        object.__setattr__(self, "verb_pos_prefixes", tuple(self.verb_pos_prefixes))

    def __contains__(self, relation: str) -> bool:
        return relation in self.relations

    def is_verb(self, pos: Optional[str]) -> bool:
        return bool(pos) and any(pos.startswith(prefix) for prefix in self.verb_pos_prefixes)


ENGLISH_OBLIGATORY = ObligatorySet(frozenset({"SBJ", "OBJ", "PRD", "VC"}), ("V",))
SPANISH_OBLIGATORY = ObligatorySet(frozenset({"dc", "suj", "cd", "cpred"}), ("v",))


def _ordered_flags(flags: Iterable[str]) -> Tuple[str, ...]:
    present = set(flags)
    return tuple(d for d in DIRECTIONS if d in present)


@dataclass(frozen=True)
class Supertag:
    """
    One token's tag under one model.

    ``flags`` holds the dependent-side directions (Models 1/2), ``obligatory``
    the ordered (relation, direction) pairs of obligatory dependents (Models 2/TAG).
    """
    model: StagModel
    head: HeadPart
    flags: Tuple[str, ...] = ()
    obligatory: Tuple[Tuple[str, str], ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "flags", _ordered_flags(self.flags))
        object.__setattr__(self, "obligatory", tuple(tuple(item) for item in self.obligatory))
        if self.model is StagModel.M0 and (self.flags or self.obligatory):
            raise TagFormatError("Model 0 tags have no dependent part")
        if self.model is StagModel.M1 and self.obligatory:
            raise TagFormatError("Model 1 tags have no obligatory list")
        if self.model is StagModel.TAG and self.flags:
            raise TagFormatError("Model TAG tags have no direction flags")
        if self.head.kind is HeadKind.OMITTED and self.model is not StagModel.TAG:
            raise TagFormatError("an omitted head only occurs under Model TAG")
        for relation, direction in self.obligatory:
            if not relation or direction not in DIRECTIONS:
                raise TagFormatError(f"bad obligatory item {relation}/{direction}")

    def __str__(self) -> str:
        return serialize_tag(self)

    @property
    def dep_sides(self) -> Tuple[str, ...]:
        """Sides on which recorded dependents sit (flags or obligatory-list items)."""
        return _ordered_flags(set(self.flags) | {d for _, d in self.obligatory})


def serialize_tag(tag: Supertag) -> str:
    parts = [tag.head.render()]
    if tag.obligatory:
        parts.append("_".join(f"{rel}/{direction}" for rel, direction in tag.obligatory))
    if tag.flags:
        parts.append("_".join(tag.flags))
    return "+".join(parts)


def _parse_arc(text: str, what: str) -> Tuple[str, str]:
    relation, slash, direction = text.rpartition("/")
    if not slash:
        raise TagFormatError(f"{what} {text!r} lacks a direction")
    if not relation:
        raise TagFormatError(f"{what} {text!r} has an empty relation")
    if direction not in DIRECTIONS:
        raise TagFormatError(f"unknown direction {direction!r} in {text!r}")
    return relation, direction


def _parse_flags(text: str) -> Tuple[str, ...]:
    flags = tuple(text.split("_"))
    if flags not in ((LEFT,), (RIGHT,), (LEFT, RIGHT)):
        raise TagFormatError(f"unknown direction flags {text!r}")
    return flags


def parse_tag(text: str, model: "str | StagModel") -> Supertag:
    """
    Parse a canonical tag string produced by ``serialize_tag``.

    Raises:
        TagFormatError: unknown direction, empty relation, empty dependent part,
            or a shape the model does not allow
    """
    model = StagModel.parse(model)
    segments = text.split("+")
    head_text, dep_segments = segments[0], segments[1:]
    if any(not s for s in dep_segments):
        raise TagFormatError(f"empty dependent part in {text!r}")
    if len(dep_segments) > 2:
        raise TagFormatError(f"too many '+' segments in {text!r}")

    if head_text == ROOT:
        head = ROOT_HEAD
    elif head_text == OMITTED:
        head = OMITTED_HEAD
    else:
        head = arc_head(*_parse_arc(head_text, "head"))

    obligatory: Tuple[Tuple[str, str], ...] = ()
    flags: Tuple[str, ...] = ()
    for position, segment in enumerate(dep_segments):
        if "/" in segment:
            if position != 0 or obligatory:
                raise TagFormatError(f"obligatory list must directly follow the head in {text!r}")
            obligatory = tuple(_parse_arc(item, "obligatory item") for item in segment.split("_"))
        else:
            if flags:
                raise TagFormatError(f"repeated direction flags in {text!r}")
            flags = _parse_flags(segment)
    if len(dep_segments) == 2 and not (obligatory and flags):
        raise TagFormatError(f"two dependent segments must be an obligatory list then flags: {text!r}")

    tag = Supertag(model, head, flags, obligatory)
    if serialize_tag(tag) != text:
        raise TagFormatError(f"non-canonical tag string {text!r}")
    return tag


def check_relation_label(relation: str) -> None:
    """Relations are rendered verbatim, so grammar characters cannot appear in them."""
    if not relation:
        raise TagFormatError("empty relation label")
    for ch in RESERVED_CHARS:
        if ch in relation:
            raise TagFormatError(f"relation {relation!r} contains reserved character {ch!r}")
