# Copyright 2026 The advcsc Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

import advcsc


def toy_confusion():
    return advcsc.ConfusionSet.parse(["a\tbc", "b\ta", "c\ta", "# comment", "d\td"])


def test_confusion_parsing():
    d = toy_confusion()
    assert len(d) == 3
    assert d.candidates("a") == "bc"
    assert d.candidates("z") == ""
    assert d.dropped_self_loops == 1
    with pytest.raises(advcsc.Error):
        advcsc.ConfusionSet.parse(["no tab here"])


def test_synthesize_reports_rates():
    d = advcsc.ConfusionSet.parse(["a\tb", "b\ta"])
    lines = ["abab" * 10] * 500
    vocab = advcsc.build_vocab(lines, forced=d.characters())
    policy = advcsc.CorruptionPolicy(seed=3, attackable="letters")
    pairs, stats = advcsc.synthesize(lines, policy, d, vocab, workers=2)
    assert len(pairs) == 500
    assert all(t == lines[0] for _, t in pairs)
    assert 0.23 < stats["replaced_fraction"] < 0.27
    again, _ = advcsc.synthesize(lines, policy, d, vocab, workers=1)
    assert again == pairs


def test_positional_scores():
    logits = np.array([[2.0, 1.0, 0.5], [1.0, 3.0, 0.5]])
    assert advcsc.positional_scores(logits, [0, 0]) == [1.0, -2.0]


def test_train_attack_and_evaluate():
    vocab = advcsc.Vocab("abcd")
    scorer = advcsc.WindowScorer.initialize(vocab, advcsc.ScorerDims(dim=8, hidden=16), seed=1)
    pairs = [("abcd", "abcd"), ("dcba", "dcba"), ("abca", "abcd")] * 40
    losses = scorer.fit(pairs, advcsc.TrainConfig(lr=0.5, epochs=20, seed=2))
    assert losses[-1] < losses[0]
    assert scorer.predict("abcd") == "abcd"
    assert scorer.logits("abcd").shape == (4, len(vocab))

    d = advcsc.ConfusionSet.parse(["a\tb", "b\tc", "c\td", "d\ta"])
    out = advcsc.attack("abcd", "abcd", scorer, d, lam=0.5, attackable="letters")
    assert len(out.substitutions) <= advcsc.max_substitutions(0.5, 4)
    assert out.success == (scorer.predict(out.adversarial) != "abcd")

    report = advcsc.evaluate(scorer, pairs[:3], d, lam=0.5, attackable="letters")
    assert report["attack"]["correction"]["f1"] <= report["clean"]["correction"]["f1"]
    assert "drop" in report


def test_callback_scorer_matches_window_scorer():
    vocab = advcsc.Vocab("abc")
    inner = advcsc.WindowScorer.initialize(vocab, advcsc.ScorerDims(dim=4, hidden=4),
                                           init_scale=1.0, seed=5)
    outer = advcsc.CallbackScorer(vocab, inner.logits)
    d = advcsc.ConfusionSet.parse(["a\tbc", "b\tac", "c\tab"])
    y = inner.predict("abcab")
    a = advcsc.attack("abcab", y, inner, d, lam=1.0, attackable="letters")
    b = advcsc.attack("abcab", y, outer, d, lam=1.0, attackable="letters")
    assert (a.adversarial, a.success, a.skipped) == (b.adversarial, b.success, b.skipped)
    many = advcsc.attack_corpus([("abcab", y)] * 8, outer, d, lam=1.0,
                                attackable="letters", workers=3)
    assert all(o.adversarial == a.adversarial for o in many)


def test_metrics():
    pairs = [("abc", "abd"), ("bca", "bba"), ("cab", "aab"),
             ("abc", "abc"), ("aaa", "aaa"), ("bbb", "bbb")]
    preds = ["abd", "bba", "bab", "abb", "aaa", "bbb"]
    r = advcsc.compute_report(preds, pairs)
    assert r["detection"]["f1"] == 6 / 7
    assert r["correction"]["f1"] == 4 / 7
    assert advcsc.judge_sentence("abe", "abc", "abd") == (True, True, False)
    det, cor = advcsc.robustness_drop(0.8, 0.744, 0.2, 0.137)
    assert math.isclose(cor, 60.7)


def test_checkpoint_round_trip(tmp_path):
    vocab = advcsc.Vocab("xyz")
    f = advcsc.WindowScorer.initialize(vocab, seed=9)
    path = str(tmp_path / "m.ckpt")
    f.save(path)
    g = advcsc.WindowScorer.load(path)
    assert np.array_equal(f.logits("xyzzy"), g.logits("xyzzy"))
    (tmp_path / "bad.ckpt").write_bytes(b"junk")
    with pytest.raises(advcsc.Error):
        advcsc.WindowScorer.load(str(tmp_path / "bad.ckpt"))


def test_pipeline_reports_stages():
    corpus = ["abcdabcd", "dcbadcba"] * 20
    train = [("abcdabcd", "abcdabcd"), ("dbbadcba", "dcbadcba")] * 20
    d = advcsc.ConfusionSet.parse(["b\tc", "c\tb"])
    plan = advcsc.AdvTrainPlan(rounds=2, lam=0.2, attackable="letters",
                               train=advcsc.TrainConfig(lr=0.5))
    scorer, report = advcsc.pipeline(
        corpus, train, train[:4], d,
        dims=advcsc.ScorerDims(dim=8, hidden=16),
        policy=advcsc.CorruptionPolicy(attackable="letters"),
        pretrain=advcsc.TrainConfig(lr=0.5, epochs=2),
        finetune=advcsc.TrainConfig(lr=0.5, epochs=5),
        plan=plan, eval_lambda=0.2)
    assert [s["stage"] for s in report["stages"]] == [
        "pretrain", "finetune", "adversarial-round-1", "adversarial-round-2"]
    assert len(scorer.predict("abcd")) == 4
