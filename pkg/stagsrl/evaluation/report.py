"""
Report assembly and emission.

JSON-lines: one object per line, keys sorted, score floats rendered with four
decimals. Records, in order:

    {"corpus_id", "format_version", "model_id", "record": "meta"}
    {"config", "record": "config"}
    {"correct", "f1", "gold", "precision", "predicted", "recall", "record": "overall"}
    {"accuracy", "correct", "record": "tagging", "total", "unseen"}
    {"correct", "f1", "gold", "group", "key", "precision", "predicted", "recall", "record": "breakdown"}
    {"count", "key", "record": "vocab"}

CSV: fixed header ``record,group,key,correct,predicted,gold,precision,recall,f1``.
Tagging rows put the token total in both count columns; vocab rows put the
tag count in ``correct`` and leave the rest empty.
"""
import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .scorer import ARGUMENTS, LENGTH_BUCKETS, srl_scorer
from ..corpus.conll import ConllSentence
from ..errors import DataError, InputFileError
from ..models import REPORT_FORMAT_VERSION, Breakdown, Report, SrlScore, TaggingScore
from ..srl.frames import SrlFrame

logger = logging.getLogger(__name__)

JSONL = "jsonl"
CSV = "csv"
CSV_HEADER = ["record", "group", "key", "correct", "predicted", "gold", "precision", "recall", "f1"]


def build_report(
    gold_sentences: Sequence[ConllSentence],
    gold: Sequence[Sequence[SrlFrame]],
    predicted: Sequence[Sequence[SrlFrame]],
    mode: str = ARGUMENTS,
    corpus_id: str = "",
    model_id: str = "",
    config: Optional[Dict[str, Any]] = None,
    tagging: Optional[TaggingScore] = None,
    vocab: Optional[Dict[str, int]] = None,
) -> Report:
    return Report(
        corpus_id=corpus_id,
        model_id=model_id,
        overall=srl_scorer.srl_prf(gold, predicted, mode),
        tagging=tagging,
        breakdowns=[
            srl_scorer.breakdown_by_length(gold, predicted, [len(s) for s in gold_sentences]),
            srl_scorer.breakdown_by_role(gold, predicted, [s.pos_tags(use_predicted=False) for s in gold_sentences]),
        ],
        vocab=dict(vocab or {}),
        config=dict(config or {}),
    )


def _render(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _line(record: Dict[str, Any]) -> str:
    return "{" + ",".join(f"{json.dumps(k)}:{_render(record[k])}" for k in sorted(record)) + "}\n"


def _score_fields(score: SrlScore) -> Dict[str, Any]:
    return {
        "correct": score.correct,
        "predicted": score.predicted,
        "gold": score.gold,
        "precision": score.precision,
        "recall": score.recall,
        "f1": score.f1,
    }


def _records(report: Report) -> List[Dict[str, Any]]:
    records = [
        {"record": "meta", "format_version": report.format_version,
         "corpus_id": report.corpus_id, "model_id": report.model_id},
        {"record": "config", "config": report.config},
    ]
    if report.overall is not None:
        records.append({"record": "overall", **_score_fields(report.overall)})
    if report.tagging is not None:
        t = report.tagging
        records.append({"record": "tagging", "correct": t.correct, "total": t.total,
                        "unseen": t.unseen, "accuracy": t.accuracy})
    for breakdown in report.breakdowns:
        for key, score in breakdown.scores.items():
            records.append({"record": "breakdown", "group": breakdown.name, "key": key, **_score_fields(score)})
    for key in sorted(report.vocab):
        records.append({"record": "vocab", "key": key, "count": report.vocab[key]})
    return records


def _emit_csv(report: Report) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for record in _records(report):
        kind = record["record"]
        if kind == "overall" or kind == "breakdown":
            writer.writerow([
                kind, record.get("group", ""), record.get("key", ""),
                record["correct"], record["predicted"], record["gold"],
                f"{record['precision']:.4f}", f"{record['recall']:.4f}", f"{record['f1']:.4f}",
            ])
        elif kind == "tagging":
            acc = f"{record['accuracy']:.4f}"
            writer.writerow([kind, "", "accuracy", record["correct"], record["total"], record["total"], acc, acc, acc])
        elif kind == "vocab":
            writer.writerow([kind, "", record["key"], record["count"], "", "", "", "", ""])
    return buffer.getvalue()


def emit_report(report: Report, fmt: str = JSONL) -> bytes:
    """Deterministic bytes for ``report`` in JSON-lines or CSV."""
    if fmt == JSONL:
        return "".join(_line(r) for r in _records(report)).encode("utf-8")
    if fmt == CSV:
        return _emit_csv(report).encode("utf-8")
    raise DataError(f"unknown report format {fmt!r}")


def parse_report(data: bytes) -> Report:
    """
    Read a JSON-lines report back.

    Raises:
        DataError: malformed line, unknown record or unsupported format version
    """
    report = Report()
    breakdowns: Dict[str, Breakdown] = {}
    for line_number, line in enumerate(data.decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"report line {line_number}: {exc}") from None
        kind = record.get("record")
        if kind == "meta":
            if record.get("format_version") != REPORT_FORMAT_VERSION:
                raise DataError(f"unsupported report format version {record.get('format_version')}")
            report.corpus_id = record.get("corpus_id", "")
            report.model_id = record.get("model_id", "")
        elif kind == "config":
            report.config = record.get("config", {})
        elif kind == "overall":
            report.overall = SrlScore(correct=record["correct"], predicted=record["predicted"], gold=record["gold"])
        elif kind == "tagging":
            report.tagging = TaggingScore(correct=record["correct"], total=record["total"], unseen=record["unseen"])
        elif kind == "breakdown":
            group = breakdowns.setdefault(record["group"], Breakdown(name=record["group"]))
            group.scores[record["key"]] = SrlScore(
                correct=record["correct"], predicted=record["predicted"], gold=record["gold"]
            )
        elif kind == "vocab":
            report.vocab[record["key"]] = record["count"]
        else:
            raise DataError(f"report line {line_number}: unknown record {kind!r}")
    report.breakdowns = list(breakdowns.values())
    return report


def emit_series(report: Report, group: str = "length") -> bytes:
    """CSV data series (``key,precision,recall,f1``) for one breakdown, length buckets in order."""
    breakdown = next((b for b in report.breakdowns if b.name == group), None)
    if breakdown is None:
        raise DataError(f"report has no {group!r} breakdown")
    keys = [key for _, _, key in LENGTH_BUCKETS] if group == "length" else sorted(breakdown.scores)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["key", "precision", "recall", "f1"])
    for key in keys:
        score = breakdown.scores.get(key, SrlScore())
        writer.writerow([key, f"{score.precision:.4f}", f"{score.recall:.4f}", f"{score.f1:.4f}"])
    return buffer.getvalue().encode("utf-8")


def write_report(path: Path, report: Report, fmt: str = JSONL) -> None:
    Path(path).write_bytes(emit_report(report, fmt))
    logger.info("Wrote %s report to %s", fmt, path)


def read_report(path: Path) -> Report:
    path = Path(path)
    if not path.is_file():
        raise InputFileError(f"no such report: {path}")
    return parse_report(path.read_bytes())
