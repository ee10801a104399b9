import pytest
from hypothesis import given, strategies as st

from stagsrl.corpus.synthetic import generate_synthetic
from stagsrl.corpus.treebank import DepTree, tree_from_sentence
from stagsrl.errors import ProjectionError, TagFormatError
from stagsrl.models import SynthConfig
from stagsrl.supertags.extractor import SupertagExtractor, supertag_extractor
from stagsrl.supertags.sidecar import parse_stags, read_stags_file, serialize_stags, write_stags_file
from stagsrl.supertags.tags import (
    ENGLISH_OBLIGATORY,
    HeadKind,
    StagModel,
    Supertag,
    arc_head,
    parse_tag,
    serialize_tag,
)

BLACK_MONDAY_MODEL1 = ["DEP/R", "P/R", "SBJ/R", "ROOT+L_R", "ADV/L", "NAME/R", "PRD/L+L", "P/L"]
BLACK_MONDAY_TAG = ["DEP/R", "P/R", "-", "ROOT+SBJ/L_PRD/R", "ADV/L", "NAME/R", "-", "P/L"]


def strings(tree, model, extractor=supertag_extractor):
    return extractor.extract_strings(tree, model, ENGLISH_OBLIGATORY)


# ---------- golden trees ----------

def test_black_monday_model1_column(black_monday_sentence):
    assert strings(tree_from_sentence(black_monday_sentence), "1") == BLACK_MONDAY_MODEL1


def test_black_monday_tag_column(black_monday_sentence):
    assert strings(tree_from_sentence(black_monday_sentence), "tag") == BLACK_MONDAY_TAG


def test_black_monday_model2(black_monday_sentence):
    tags = strings(tree_from_sentence(black_monday_sentence), StagModel.M2)
    assert tags[3] == "ROOT+SBJ/L_PRD/R"
    assert tags[6] == "PRD/L+L"


def test_model2_optional_flags_variant(black_monday_sentence):
    extractor = SupertagExtractor(model2_optional_flags=True)
    tags = strings(tree_from_sentence(black_monday_sentence), StagModel.M2, extractor)
    assert tags[3] == "ROOT+SBJ/L_PRD/R+L_R"
    assert tags[6] == "PRD/L+L"


def test_three_token_tree_all_models(dog_sentence):
    tree = tree_from_sentence(dog_sentence)
    assert strings(tree, "0") == ["NMOD/R", "SBJ/R", "ROOT"]
    assert strings(tree, "1") == ["NMOD/R", "SBJ/R+L", "ROOT+L"]
    assert strings(tree, "2") == ["NMOD/R", "SBJ/R+L", "ROOT+SBJ/L"]
    assert strings(tree, "tag") == ["NMOD/R", "-", "ROOT+SBJ/L"]


def test_single_token_is_root_under_models_0_and_1(sentence_factory):
    tree = tree_from_sentence(sentence_factory([("Yes", "UH", 0, "ROOT")]))
    assert strings(tree, "0") == ["ROOT"]
    assert strings(tree, "1") == ["ROOT"]


def test_reserved_character_in_relation_is_rejected():
    tree = DepTree(heads=(2, 0), relations=("A+B", "ROOT"), pos=("NN", "VB"))
    with pytest.raises(TagFormatError):
        supertag_extractor.extract(tree, "0", ENGLISH_OBLIGATORY)


def test_unknown_model_name():
    with pytest.raises(TagFormatError):
        StagModel.parse("3")


# ---------- string form ----------

def test_serialize_model1_tag():
    tag = Supertag(StagModel.M1, arc_head("SBJ", "R"), flags=("L",))
    assert serialize_tag(tag) == "SBJ/R+L"


def test_omitted_head_renders_dash():
    tag = parse_tag("-", "tag")
    assert tag.head.kind is HeadKind.OMITTED
    assert serialize_tag(tag) == "-"


def test_omitted_head_with_obligatory_list():
    tag = parse_tag("-+OBJ/R", "tag")
    assert tag.obligatory == (("OBJ", "R"),)


@pytest.mark.parametrize("text, model", [
    ("SBJ/X", "0"),      # unknown direction
    ("/R", "0"),         # empty relation
    ("ROOT+", "1"),      # empty dependent part
    ("ROOT+L", "0"),     # Model 0 has no dependent part
    ("ROOT+R_L", "1"),   # non-canonical flag order
    ("ROOT+L+SBJ/L", "2"),
    ("-", "1"),          # omitted head outside TAG
])
def test_malformed_tag_strings(text, model):
    with pytest.raises(TagFormatError):
        parse_tag(text, model)


def test_every_synthetic_tag_round_trips():
    corpus = generate_synthetic(SynthConfig(sentence_count=500, seed=13))
    for sentence in corpus:
        tree = tree_from_sentence(sentence)
        for model in StagModel:
            for tag in supertag_extractor.extract(tree, model, ENGLISH_OBLIGATORY):
                text = serialize_tag(tag)
                assert parse_tag(text, model) == tag


# ---------- projection and consistency ----------

def test_project_model2_to_model1():
    tag = parse_tag("ROOT+SBJ/L", "2")
    assert serialize_tag(supertag_extractor.project(tag, "1")) == "ROOT+L"


def test_project_optional_flags_tag_keeps_obligatory_sides():
    tag = parse_tag("ROOT+SBJ/L+R", "2")
    assert serialize_tag(supertag_extractor.project(tag, "1")) == "ROOT+L_R"


def test_project_optional_flags_tag_matches_model1_column(black_monday_sentence):
    extractor = SupertagExtractor(model2_optional_flags=True)
    tree = tree_from_sentence(black_monday_sentence)
    projected = [serialize_tag(extractor.project(t, "1")) for t in extractor.extract(tree, "2", ENGLISH_OBLIGATORY)]
    assert projected == BLACK_MONDAY_MODEL1


def test_project_model1_to_model0():
    tag = parse_tag("SBJ/R+L", "1")
    assert serialize_tag(supertag_extractor.project(tag, "0")) == "SBJ/R"


@pytest.mark.parametrize("source, target", [("tag", "0"), ("0", "1"), ("1", "2"), ("1", "1")])
def test_unsupported_projection(source, target):
    tag = parse_tag("ROOT", source)
    with pytest.raises(ProjectionError):
        supertag_extractor.project(tag, target)


def test_projection_coherence(large_synthetic_corpus):
    for sentence in large_synthetic_corpus:
        tags = supertag_extractor.extract_all(tree_from_sentence(sentence), ENGLISH_OBLIGATORY)
        for m0, m1, m2 in zip(tags[StagModel.M0], tags[StagModel.M1], tags[StagModel.M2]):
            assert supertag_extractor.project(m1, "0") == m0
            assert supertag_extractor.project(m2, "0") == m0
            assert m2.head == m0.head


def test_vocab_monotonicity(large_synthetic_corpus):
    trees = [tree_from_sentence(s) for s in large_synthetic_corpus]
    sizes = [len(supertag_extractor.vocab_stats(trees, m, ENGLISH_OBLIGATORY)) for m in ("0", "1", "2")]
    assert sizes[0] <= sizes[1]
    assert sizes[1] <= sizes[2]


def test_grid_model2_determines_model1(large_synthetic_corpus):
    extractor = SupertagExtractor(model2_optional_flags=True)
    trees = [tree_from_sentence(s) for s in large_synthetic_corpus]
    for tree in trees:
        m1_tags = extractor.extract(tree, "1", ENGLISH_OBLIGATORY)
        for m1, m2 in zip(m1_tags, extractor.extract(tree, "2", ENGLISH_OBLIGATORY)):
            assert extractor.project(m2, "1") == m1
    sizes = [len(extractor.vocab_stats(trees, m, ENGLISH_OBLIGATORY)) for m in ("0", "1", "2")]
    assert sizes[0] <= sizes[1] <= sizes[2]


def test_tag_nullability(large_synthetic_corpus):
    for sentence in large_synthetic_corpus[:300]:
        tree = tree_from_sentence(sentence)
        tags = supertag_extractor.extract(tree, "tag", ENGLISH_OBLIGATORY)
        for i, tag in enumerate(tags, start=1):
            has_obligatory = any(
                tree.head(j) == i and tree.relation(j) in ENGLISH_OBLIGATORY for j in range(1, tree.n + 1)
            )
            own_obligatory = tree.head(i) != 0 and tree.relation(i) in ENGLISH_OBLIGATORY
            is_verb = ENGLISH_OBLIGATORY.is_verb(tree.pos_of(i))
            expected_dash = own_obligatory and not (is_verb and has_obligatory)
            assert (serialize_tag(tag) == "-") == expected_dash


def test_extracted_tags_are_consistent(synthetic_corpus):
    for sentence in synthetic_corpus:
        tree = tree_from_sentence(sentence)
        for model in StagModel:
            for i, tag in enumerate(supertag_extractor.extract(tree, model, ENGLISH_OBLIGATORY), start=1):
                assert supertag_extractor.consistent(tag, tree, i, ENGLISH_OBLIGATORY)


def test_flipped_head_direction_is_inconsistent(dog_sentence):
    tree = tree_from_sentence(dog_sentence)
    assert not supertag_extractor.consistent(parse_tag("NMOD/L", "0"), tree, 1, ENGLISH_OBLIGATORY)
    assert not supertag_extractor.consistent(parse_tag("NMOD/R", "0"), tree, 4, ENGLISH_OBLIGATORY)


def test_name_tag_consistent_with_rightward_head(sentence_factory):
    sentence = sentence_factory([
        ("President", "NNP", 2, "NAME"),
        ("Wollaeger", "NNP", 3, "SBJ"),
        ("said", "VBD", 0, "ROOT"),
    ])
    tree = tree_from_sentence(sentence)
    assert supertag_extractor.consistent(parse_tag("NAME/R", "0"), tree, 1, ENGLISH_OBLIGATORY)
    assert strings(tree, "1")[1] == "SBJ/R+L"


# ---------- vocabulary ----------

def test_black_monday_model0_vocab(black_monday_sentence):
    vocab = supertag_extractor.vocab_stats([tree_from_sentence(black_monday_sentence)], "0", ENGLISH_OBLIGATORY)
    assert len(vocab) == 8
    assert vocab.total == 8
    assert "P/L" in vocab and "P/R" in vocab


def test_empty_corpus_vocab():
    vocab = supertag_extractor.vocab_stats([], "1", ENGLISH_OBLIGATORY)
    assert len(vocab) == 0
    assert vocab.total == 0


def test_threaded_counts_match_serial(synthetic_corpus):
    trees = [tree_from_sentence(s) for s in synthetic_corpus]
    serial = supertag_extractor.vocab_stats(trees, "2", ENGLISH_OBLIGATORY)
    threaded = supertag_extractor.vocab_stats(trees, "2", ENGLISH_OBLIGATORY, threads=4)
    assert serial == threaded


def test_sorted_counts_most_frequent_first(synthetic_corpus):
    trees = [tree_from_sentence(s) for s in synthetic_corpus]
    counts = [c for _, c in supertag_extractor.vocab_stats(trees, "0", ENGLISH_OBLIGATORY).sorted_counts()]
    assert counts == sorted(counts, reverse=True)


# ---------- .stags sidecar ----------

def test_sidecar_layout():
    text = serialize_stags([["SBJ/R", "ROOT+SBJ/L"], ["ROOT"]])
    assert text == "1\tSBJ/R\n2\tROOT+SBJ/L\n\n1\tROOT\n"
    assert parse_stags(text) == [["SBJ/R", "ROOT+SBJ/L"], ["ROOT"]]


def test_sidecar_index_must_count_up():
    with pytest.raises(TagFormatError):
        parse_stags("1\tROOT\n3\tP/L\n")


def test_sidecar_file_round_trip(tmp_path, black_monday_sentence):
    path = tmp_path / "black_monday.stags"
    tags = [strings(tree_from_sentence(black_monday_sentence), "1")]
    write_stags_file(path, tags)
    assert read_stags_file(path) == [BLACK_MONDAY_MODEL1]


@given(st.lists(st.lists(st.sampled_from(BLACK_MONDAY_MODEL1 + BLACK_MONDAY_TAG), min_size=1, max_size=6), max_size=5))
def test_sidecar_parse_inverts_serialize(sequences):
    assert parse_stags(serialize_stags(sequences)) == sequences
