"""
stagsrl - command-line entry point.

Pipeline: gen-synth -> extract-stags -> train-tagger -> tag -> train-srl ->
label -> evaluate -> report, plus stag-stats for supertag inventories.
"""
import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .config import RunConfig, get_settings, resolve_run_config, srl_config, synth_config, tagger_config
from .corpus.conll import ConllSentence, read_conll_file, serialize_conll2009, write_conll_file
from .corpus.embeddings import load_embeddings_file
from .corpus.synthetic import generate_synthetic
from .corpus.treebank import tree_from_sentence
from .errors import AlignmentError, StagSrlError, UsageError
from .evaluation.report import build_report, emit_report, emit_series, read_report
from .evaluation.scorer import srl_scorer
from .srl.frames import PredicateSource, apply_frames, frames_from_sentence
from .srl.labeler import RoleLabeler, label, label_with_model, train_srl
from .supertags.extractor import supertag_extractor
from .supertags.sidecar import read_stags_file, serialize_stags, write_stags_file
from .supertags.tags import StagModel
from .tagging.checkpoint import is_checkpoint, load_checkpoint, save_checkpoint
from .tagging.tagger import CHECKPOINT_KIND as TAGGER_KIND
from .tagging.tagger import tag, train_tagger

logger = logging.getLogger(__name__)

# Supertag inventory sizes of the CoNLL-2009 training sets
REFERENCE_STAG_COUNTS = {
    "en": {"0": 99, "1": 298, "2": 692, "tag": 430},
    "es": {"0": 88, "1": 220, "2": 503, "tag": 317},
}

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of printing usage and exiting."""

    def error(self, message: str):
        raise UsageError(message)


def configure_logging(level: str) -> None:
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT, stream=sys.stderr)


def format_error(exc: StagSrlError) -> str:
    return f"error kind={exc.kind} code={exc.exit_code} message={json.dumps(exc.message, ensure_ascii=False)}"


# ============== Shared helpers ==============

def _require(run: RunConfig, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(run, n) is None]
    if missing:
        raise UsageError(f"{run.command} requires {', '.join(missing)}")


def _read(run: RunConfig, path: Path) -> List[ConllSentence]:
    return read_conll_file(path, skip_invalid=run.skip_invalid)


def _gold_stags(run: RunConfig, sentences: Sequence[ConllSentence], model: Optional[str] = None) -> List[List[str]]:
    oblig = run.preset.obligatory_set()
    extractor = supertag_extractor
    if run.model2_optional_flags:
        extractor = type(supertag_extractor)(model2_optional_flags=True)
    stag_model = model or run.model
    return [
        extractor.extract_strings(
            tree_from_sentence(s, use_predicted=run.predicted_syntax, sentence_number=n), stag_model, oblig
        )
        for n, s in enumerate(sentences, start=1)
    ]


def _resolve_stags(
    run: RunConfig, source: str, sentences: Sequence[ConllSentence], model: Optional[str] = None
) -> List[List[str]]:
    """``gold`` extracts from the trees; a tagger checkpoint tags; any other path is a .stags file."""
    if source == "gold":
        return _gold_stags(run, sentences, model)
    path = Path(source)
    if is_checkpoint(path):
        return [tagged.labels for tagged in tag(load_checkpoint(path, TAGGER_KIND), sentences)]
    stags = read_stags_file(path)
    if len(stags) != len(sentences):
        raise AlignmentError(f"{path}: supertags for {len(stags)} sentences, expected {len(sentences)}")
    return stags


def _write_text(run: RunConfig, text: str) -> None:
    if run.output is None:
        sys.stdout.write(text)
    else:
        run.output.write_text(text, encoding="utf-8")


# ============== Commands ==============

def cmd_extract_stags(run: RunConfig) -> None:
    _require(run, "input")
    sentences = _read(run, run.input)
    stags = _gold_stags(run, sentences)
    if run.output is None:
        sys.stdout.write(serialize_stags(stags))
    else:
        write_stags_file(run.output, stags)


def cmd_stag_stats(run: RunConfig) -> None:
    _require(run, "input")
    sentences = _read(run, run.input)
    oblig = run.preset.obligatory_set()
    trees = [tree_from_sentence(s, use_predicted=run.predicted_syntax, sentence_number=n)
             for n, s in enumerate(sentences, start=1)]
    extractor = type(supertag_extractor)(model2_optional_flags=run.model2_optional_flags)
    reference = REFERENCE_STAG_COUNTS[run.lang]
    lines = []
    dump = []
    for model in StagModel:
        vocab = extractor.vocab_stats(trees, model, oblig, threads=run.threads)
        line = f"model={model.value} stags={len(vocab)} tokens={vocab.total}"
        if run.compare_reference:
            expected = reference[model.value]
            line += f" reference={expected} diff={len(vocab) - expected:+d}"
        lines.append(line)
        dump.extend(f"{model.value}\t{tag_string}\t{count}" for tag_string, count in vocab.sorted_counts())
    _write_text(run, "\n".join(lines) + "\n")
    if run.dump_tags is not None:
        run.dump_tags.write_text("\n".join(dump) + "\n", encoding="utf-8")
        logger.info("Wrote per-tag counts to %s", run.dump_tags)


def cmd_gen_synth(run: RunConfig) -> None:
    sentences = generate_synthetic(synth_config(run))
    if run.output is None:
        sys.stdout.write(serialize_conll2009(sentences))
    else:
        write_conll_file(run.output, sentences)


def _pretrained(run: RunConfig):
    return load_embeddings_file(run.embeddings) if run.embeddings is not None else None


def _tagger_labels(run: RunConfig, sentences: Sequence[ConllSentence]) -> List[List[str]]:
    if run.labels == "pos":
        return [s.pos_tags(use_predicted=False) for s in sentences]
    return _gold_stags(run, sentences)


def cmd_train_tagger(run: RunConfig) -> None:
    _require(run, "input", "output")
    cfg = tagger_config(run)
    pretrained = _pretrained(run)
    if pretrained is not None and cfg.d_w != pretrained.dim:
        cfg = cfg.model_copy(update={"d_w": pretrained.dim})
    logger.info("Tagger config: %s", json.dumps(cfg.model_dump(), sort_keys=True))
    sentences = _read(run, run.input)
    dev = None
    if run.dev is not None:
        dev_sentences = _read(run, run.dev)
        dev = (dev_sentences, _tagger_labels(run, dev_sentences))
    checkpoint = train_tagger(
        sentences, _tagger_labels(run, sentences), cfg,
        dev=dev, pretrained=pretrained, progress=get_settings().progress,
    )
    save_checkpoint(run.output, checkpoint)


def cmd_tag(run: RunConfig) -> None:
    _require(run, "input", "checkpoint")
    checkpoint = load_checkpoint(run.checkpoint, TAGGER_KIND)
    sentences = _read(run, run.input)
    tagged = tag(checkpoint, sentences)
    if checkpoint.config.get("label_kind") == "pos":
        # predicted POS goes back into the PPOS column
        rewritten = [
            s.with_tokens(replace(t, ppos=pos) for t, pos in zip(s.tokens, result.labels))
            for s, result in zip(sentences, tagged)
        ]
        _write_text(run, serialize_conll2009(rewritten))
        return
    _write_text(run, serialize_stags([result.labels for result in tagged]))


def _srl_stags(run: RunConfig, sentences, source: str) -> Optional[List[List[str]]]:
    return None if run.no_stags else _resolve_stags(run, source, sentences)


def cmd_train_srl(run: RunConfig) -> None:
    _require(run, "input", "output")
    cfg = srl_config(run)
    sentences = _read(run, run.input)
    stags = _srl_stags(run, sentences, run.stags)
    pretrained = _pretrained(run)

    dev = None
    if run.dev is not None:
        dev_sentences = _read(run, run.dev)
        dev_source = run.stags
        if run.stags != "gold" and not is_checkpoint(Path(run.stags)):
            if run.dev_stags is None:
                raise UsageError("a supertag file for training needs --dev-stags for the dev set")
            dev_source = str(run.dev_stags)
        dev = (dev_sentences, _srl_stags(run, dev_sentences, dev_source))

    best, scores = None, []
    for r in range(run.runs):
        run_cfg = cfg.model_copy(update={"seed": cfg.seed + r})
        logger.info("SRL run %d/%d (seed %d): %s", r + 1, run.runs, run_cfg.seed,
                    json.dumps(run_cfg.model_dump(), sort_keys=True))
        checkpoint = train_srl(sentences, stags, run_cfg, dev=dev, pretrained=pretrained,
                               progress=get_settings().progress)
        if dev is not None:
            score = checkpoint.metadata["dev_score"]
        else:
            model = RoleLabeler.from_checkpoint(checkpoint)
            predicted = label_with_model(model, sentences, PredicateSource().resolve(sentences), stags)
            score = srl_scorer.srl_prf([frames_from_sentence(s) for s in sentences], predicted).f1
        scores.append(score)
        if best is None or score > best[0]:
            best = (score, checkpoint)
    if run.runs > 1:
        logger.info("F1 over %d runs: mean=%.4f std=%.4f", run.runs, float(np.mean(scores)), float(np.std(scores)))
    save_checkpoint(run.output, best[1])


def cmd_label(run: RunConfig) -> None:
    _require(run, "input", "checkpoint")
    checkpoint = load_checkpoint(run.checkpoint, "srl")
    sentences = _read(run, run.input)
    stags = None
    if checkpoint.config.get("use_supertags"):
        stags = _resolve_stags(run, run.stags, sentences, checkpoint.config.get("stag_model"))
    frames = label(checkpoint, sentences, PredicateSource.parse(run.predicates), stags)
    labeled = [apply_frames(s, f) for s, f in zip(sentences, frames)]
    _write_text(run, serialize_conll2009(labeled))
    logger.info("Labeled %d predicates", sum(len(f) for f in frames))


def cmd_evaluate(run: RunConfig) -> None:
    _require(run, "gold", "input")
    gold_sentences = _read(run, run.gold)
    predicted_sentences = _read(run, run.input)
    if len(gold_sentences) != len(predicted_sentences):
        raise AlignmentError(f"{len(gold_sentences)} gold sentences but {len(predicted_sentences)} predicted")
    gold = [frames_from_sentence(s) for s in gold_sentences]
    predicted = [frames_from_sentence(s) for s in predicted_sentences]

    oblig = run.preset.obligatory_set()
    trees = [tree_from_sentence(s, sentence_number=n) for n, s in enumerate(gold_sentences, start=1)]
    vocab = {f"model_{m.value}": len(supertag_extractor.vocab_stats(trees, m, oblig, run.threads)) for m in StagModel}

    tagging = None
    if run.stags != "gold":
        model, known = run.model, None
        if run.checkpoint is not None:
            tagger = load_checkpoint(run.checkpoint, TAGGER_KIND)
            model = tagger.config.get("stag_model") or model
            known = set(tagger.vocabs["labels"])
        gold_tags = _gold_stags(run, gold_sentences, model)
        predicted_tags = _resolve_stags(run, run.stags, gold_sentences, model)
        tagging = srl_scorer.tagging_accuracy_report(gold_tags, predicted_tags, known)

    report = build_report(
        gold_sentences, gold, predicted,
        mode="sense" if run.sense else "arguments",
        corpus_id=run.gold.name, model_id=run.input.name,
        config=json.loads(run.canonical()), tagging=tagging, vocab=vocab,
    )
    data = emit_report(report, run.format)
    if run.output is None:
        sys.stdout.write(data.decode("utf-8"))
    else:
        run.output.write_bytes(data)
    logger.info("Overall F1 %.4f (P %.4f, R %.4f)", report.overall.f1, report.overall.precision, report.overall.recall)


def cmd_report(run: RunConfig) -> None:
    _require(run, "input")
    report = read_report(run.input)
    data = emit_series(report) if run.series else emit_report(report, run.format)
    if run.output is None:
        sys.stdout.write(data.decode("utf-8"))
    else:
        run.output.write_bytes(data)


COMMANDS: Dict[str, Callable[[RunConfig], None]] = {
    "extract-stags": cmd_extract_stags,
    "stag-stats": cmd_stag_stats,
    "gen-synth": cmd_gen_synth,
    "train-tagger": cmd_train_tagger,
    "tag": cmd_tag,
    "train-srl": cmd_train_srl,
    "label": cmd_label,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


# ============== Argument parsing ==============

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input", type=Path, help="Input file (CoNLL-2009 unless noted)")
    common.add_argument("--output", type=Path, help="Output file (stdout when omitted)")
    common.add_argument("--config", type=Path, help="INI config file with [common] / [<command>] sections")
    common.add_argument("--lang", choices=["en", "es"], help="Language preset")
    common.add_argument("--seed", type=int, help="Random seed")
    common.add_argument("--threads", type=int, help="Worker threads")
    common.add_argument("--skip-invalid", action="store_true", default=None,
                        help="Drop sentences that fail validation instead of aborting")

    parser = _Parser(prog="stagsrl", description="Dependency supertags for semantic role labeling")
    subparsers = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    subparsers.required = True

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return subparsers.add_parser(name, parents=[common], help=help_text)

    def model_flag(p: argparse.ArgumentParser) -> None:
        p.add_argument("--model", choices=["0", "1", "2", "tag"], help="Supertag model")
        p.add_argument("--model2-optional-flags", action="store_true", default=None,
                       help="Model 2 also keeps optional-dependent directions")
        p.add_argument("--predicted-syntax", action="store_true", default=None,
                       help="Read trees from PHEAD/PDEPREL instead of HEAD/DEPREL")

    p = add("extract-stags", "Write the supertags of every token to a .stags file")
    model_flag(p)

    p = add("stag-stats", "Supertag inventory size per model")
    p.add_argument("--compare-reference", action="store_true", default=None,
                   help="Also print the reference CoNLL-2009 counts and the difference")
    p.add_argument("--dump-tags", type=Path, help="Write per-tag counts (model, tag, count)")
    p.add_argument("--model2-optional-flags", action="store_true", default=None)
    p.add_argument("--predicted-syntax", action="store_true", default=None)

    p = add("gen-synth", "Generate a synthetic CoNLL-2009 treebank")
    p.add_argument("--sentences", type=int, help="Number of sentences")

    p = add("train-tagger", "Train a supertagger or POS tagger")
    model_flag(p)
    p.add_argument("--labels", choices=["supertag", "pos"], help="What to predict")
    p.add_argument("--dev", type=Path, help="Dev corpus for best-epoch selection")
    p.add_argument("--embeddings", type=Path, help="Pretrained word vectors (text format)")

    p = add("tag", "Tag a corpus with a tagger checkpoint")
    p.add_argument("--checkpoint", type=Path, help="Tagger checkpoint")

    p = add("train-srl", "Train the semantic role labeler")
    model_flag(p)
    p.add_argument("--stags", help="gold, a .stags file or a tagger checkpoint")
    p.add_argument("--dev-stags", type=Path, help="Supertags for --dev when --stags is a file")
    p.add_argument("--no-stags", action="store_true", default=None, help="Disable the supertag channel")
    p.add_argument("--runs", type=int, help="Train N seeds and keep the best")
    p.add_argument("--dev", type=Path, help="Dev corpus for model selection")
    p.add_argument("--embeddings", type=Path, help="Pretrained word vectors, concatenated frozen")

    p = add("label", "Label predicates with an SRL checkpoint")
    p.add_argument("--checkpoint", type=Path, help="SRL checkpoint")
    p.add_argument("--predicates", help="gold, or a CoNLL-2009 file with predicted predicates")
    p.add_argument("--stags", help="gold, a .stags file or a tagger checkpoint")
    p.add_argument("--model2-optional-flags", action="store_true", default=None)
    p.add_argument("--predicted-syntax", action="store_true", default=None)

    p = add("evaluate", "Score predicted frames (and supertags) against gold")
    model_flag(p)
    p.add_argument("--gold", type=Path, help="Gold CoNLL-2009 file")
    p.add_argument("--stags", help="Predicted supertags to score (.stags file or tagger checkpoint)")
    p.add_argument("--checkpoint", type=Path, help="Tagger checkpoint whose label set defines unseen tags")
    p.add_argument("--format", choices=["jsonl", "csv"], help="Report format")
    p.add_argument("--sense", action="store_true", default=None, help="Also score predicate senses")

    p = add("report", "Convert a JSON-lines report")
    p.add_argument("--format", choices=["jsonl", "csv"], help="Output format")
    p.add_argument("--series", action="store_true", default=None, help="Emit the length-bucket F1 series")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        settings = get_settings()
        configure_logging(settings.log)
        args = build_parser().parse_args(argv)
        flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
        if flags.get("threads") is None:
            flags["threads"] = settings.threads
        run = resolve_run_config(args.command, flags, args.config)
        logger.info("%s v%s %s: %s", settings.app_name, settings.app_version, run.command, run.canonical())
        COMMANDS[run.command](run)
        return 0
    except StagSrlError as exc:
        sys.stderr.write(format_error(exc) + "\n")
        return exc.exit_code
    except Exception as exc:
        logger.exception("Unexpected failure")
        internal = StagSrlError(f"{type(exc).__name__}: {exc}")
        sys.stderr.write(format_error(internal) + "\n")
        return internal.exit_code


if __name__ == "__main__":
    sys.exit(main())
