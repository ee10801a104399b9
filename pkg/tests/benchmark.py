import asyncio
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from stagsrl.autodiff import grad_check, ops  # noqa: E402
from stagsrl.corpus.conll import parse_conll2009  # noqa: E402
from stagsrl.corpus.synthetic import generate_synthetic  # noqa: E402
from stagsrl.corpus.treebank import tree_from_sentence  # noqa: E402
from stagsrl.evaluation.scorer import srl_prf, tagging_accuracy  # noqa: E402
from stagsrl.models import SrlConfig, SynthConfig, TaggerConfig  # noqa: E402
from stagsrl.srl.frames import PredicateSource, SrlFrame, frames_from_sentence  # noqa: E402
from stagsrl.srl.labeler import RoleLabeler, label, train_srl  # noqa: E402
from stagsrl.supertags.extractor import SupertagExtractor, supertag_extractor  # noqa: E402
from stagsrl.supertags.tags import ENGLISH_OBLIGATORY, StagModel  # noqa: E402
from stagsrl.tagging.checkpoint import Checkpoint  # noqa: E402
from stagsrl.tagging.tagger import tag, train_tagger  # noqa: E402

# Benchmark Configuration
SYNTH_SEED = 7
LEARN_SENTENCES = 200
PROPERTY_SENTENCES = 1000


def _stags(sentences, model, extractor=supertag_extractor):
    return [extractor.extract_strings(tree_from_sentence(s), model, ENGLISH_OBLIGATORY) for s in sentences]


def bench_golden_tags() -> Dict[str, Any]:
    rows = [("No", "UH", 4, "DEP"), (",", ",", 4, "P"), ("it", "PRP", 4, "SBJ"), ("was", "VBD", 0, "ROOT"),
            ("n't", "RB", 4, "ADV"), ("black", "NNP", 7, "NAME"), ("Monday", "NNP", 4, "PRD"), (".", ".", 4, "P")]
    text = "".join(
        f"{i}\t{f}\t{f.lower()}\t{f.lower()}\t{p}\t{p}\t_\t_\t{h}\t{h}\t{r}\t{r}\t_\t_\n"
        for i, (f, p, h, r) in enumerate(rows, start=1)
    )
    tree = tree_from_sentence(parse_conll2009(text)[0])
    m1 = supertag_extractor.extract_strings(tree, "1", ENGLISH_OBLIGATORY)
    tag_column = supertag_extractor.extract_strings(tree, "tag", ENGLISH_OBLIGATORY)
    ok = (m1[3] == "ROOT+L_R" and m1[6] == "PRD/L+L"
          and tag_column[3] == "ROOT+SBJ/L_PRD/R" and tag_column[2] == "-")
    return {"success": ok, "detail": f"M1 root={m1[3]} TAG root={tag_column[3]}"}


def bench_projection() -> Dict[str, Any]:
    corpus = generate_synthetic(SynthConfig(sentence_count=PROPERTY_SENTENCES, seed=SYNTH_SEED))
    grid = SupertagExtractor(model2_optional_flags=True)
    violations = 0
    trees = [tree_from_sentence(s) for s in corpus]
    for tree in trees:
        tags = grid.extract_all(tree, ENGLISH_OBLIGATORY)
        for m0, m1, m2 in zip(tags[StagModel.M0], tags[StagModel.M1], tags[StagModel.M2]):
            violations += grid.project(m1, "0") != m0
            violations += m2.head != m0.head
            violations += grid.project(m2, "1") != m1
    sizes = [len(grid.vocab_stats(trees, m, ENGLISH_OBLIGATORY)) for m in ("0", "1", "2")]
    default_sizes = [len(supertag_extractor.vocab_stats(trees, m, ENGLISH_OBLIGATORY)) for m in ("0", "1", "2")]
    ok = (violations == 0 and sizes[0] <= sizes[1] <= sizes[2]
          and default_sizes[0] <= default_sizes[1] <= default_sizes[2])
    return {"success": ok, "detail": f"violations={violations} vocab={default_sizes} grid={sizes}"}


def bench_gradients() -> Dict[str, Any]:
    rows = [("the", "DT"), ("dog", "NN"), ("chased", "VBD"), ("cats", "NNS")]
    text = "".join(
        f"{i}\t{f}\t{f}\t{f}\t{p}\t{p}\t_\t_\t{h}\t{h}\t{r}\t{r}\t{y}\t{pred}\t{role}\n"
        for i, ((f, p), h, r, y, pred, role) in enumerate(zip(
            rows, (2, 3, 0, 3), ("NMOD", "SBJ", "ROOT", "OBJ"), "__Y_", ("_", "_", "chased.01", "_"),
            ("_", "A0", "_", "A1"),
        ), start=1)
    )
    sentence = parse_conll2009(text)[0]
    stags = _stags([sentence], "1")
    cfg = SrlConfig(d_w=4, d_pos=3, d_l=3, d_s=3, d_ind=2, d_h=3, k=1, d_r=4, d_lemma_out=3, dtype="float64")
    vocabs = RoleLabeler.build_vocabs([sentence], [frames_from_sentence(sentence)], stags, cfg)
    model = RoleLabeler(cfg, vocabs, np.random.default_rng(0))
    weights = np.random.default_rng(1).normal(size=(4, len(model.roles)))

    def f():
        probs = model.score_roles(model.encode_for_predicate(sentence, 3, stags[0]), 3, "chased")
        return ops.sum_(ops.mul(probs, weights))

    report = grad_check(f, model.parameters())
    return {"success": report.passed, "detail": f"max error={report.max_error:.2e}"}


def bench_supertagger() -> Dict[str, Any]:
    corpus = generate_synthetic(SynthConfig(sentence_count=LEARN_SENTENCES, seed=SYNTH_SEED))
    labels = _stags(corpus, "0")
    cfg = TaggerConfig(d_w=16, d_h=32, k=2, d_pos=16, use_chars=False, lstm_dropout=0.0,
                       recurrent_dropout=0.0, batch_size=10, epochs=50, seed=0)
    checkpoint = train_tagger(corpus, labels, cfg)
    accuracy = tagging_accuracy(labels, [t.labels for t in tag(checkpoint, corpus)])
    reloaded = Checkpoint.from_bytes(checkpoint.to_bytes())
    identical = all(
        np.array_equal(a.distributions, b.distributions)
        for a, b in zip(tag(checkpoint, corpus[:20]), tag(reloaded, corpus[:20]))
    )
    return {"success": accuracy >= 0.99 and identical, "detail": f"train accuracy={accuracy:.4f}"}


def bench_srl() -> Dict[str, Any]:
    corpus = generate_synthetic(SynthConfig(sentence_count=LEARN_SENTENCES, seed=SYNTH_SEED))
    stags = _stags(corpus, "1")
    cfg = SrlConfig(d_w=32, d_pos=8, d_l=16, d_s=16, d_ind=8, d_h=32, k=1, d_r=32, d_lemma_out=16,
                    lstm_dropout=0.0, recurrent_dropout=0.0, word_dropout=0.0, batch_size=10, epochs=50)
    checkpoint = train_srl(corpus, stags, cfg)
    predicted = label(checkpoint, corpus, PredicateSource(), stags)
    f1 = srl_prf([frames_from_sentence(s) for s in corpus], predicted).f1
    return {"success": f1 >= 0.95, "detail": f"train F1={f1:.4f}"}


def bench_scorer() -> Dict[str, Any]:
    gold = [[SrlFrame(3, "see", {2: "A0", 4: "A1"})]]
    predicted = [[SrlFrame(3, "see", {2: "A0", 4: "A2", 5: "AM-TMP"})]]
    score = srl_prf(gold, predicted)
    ok = abs(score.precision - 1 / 3) < 1e-12 and score.recall == 0.5 and abs(score.f1 - 0.4) < 1e-12
    return {"success": ok, "detail": f"P={score.precision:.4f} R={score.recall:.4f} F1={score.f1:.4f}"}


# Benchmark Cases
BENCHMARKS: Dict[str, Callable[[], Dict[str, Any]]] = {
    "Golden supertag columns": bench_golden_tags,
    "Projection and vocabulary monotonicity": bench_projection,
    "SRL scorer gradient check": bench_gradients,
    "Evaluator fixture": bench_scorer,
    "Supertagger learnability": bench_supertagger,
    "SRL learnability": bench_srl,
}


async def run_benchmark(name: str, fn: Callable[[], Dict[str, Any]]) -> Dict[str, Any]:
    print(f"Running Benchmark: {name}...")
    start_time = time.time()
    try:
        result = await asyncio.to_thread(fn)
        result.update(name=name, time=time.time() - start_time)
        return result
    except Exception as e:
        return {"name": name, "success": False, "detail": f"{type(e).__name__}: {e}", "time": time.time() - start_time}


async def main():
    results = await asyncio.gather(*[run_benchmark(name, fn) for name, fn in BENCHMARKS.items()])

    print("\n" + "=" * 50)
    print("STAGSRL BENCHMARK RESULTS")
    print("=" * 50)

    passed = 0
    for r in results:
        status = "PASS" if r["success"] else "FAIL"
        if r["success"]:
            passed += 1
        print(f"[{status}] {r['name']}")
        print(f"   - Time: {r['time']:.2f}s")
        print(f"   - {r['detail']}")

    print("=" * 50)
    print(f"OVERALL: {passed}/{len(results)} ({(passed / len(results)) * 100:.1f}%)")
    print("=" * 50)
    return 0 if passed == len(results) else 1


if __name__ == "__main__":
    sys.exit(asyncio.run(main()))
