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

"""Confusion-set corruption, greedy adversarial attacks and adversarial
training for character-level spelling correction."""

from ._core import (
    AdvTrainPlan,
    AttackOutcome,
    CallbackScorer,
    ConfusionSet,
    CorruptionPolicy,
    Error,
    Scorer,
    ScorerDims,
    Substitution,
    TrainConfig,
    Vocab,
    WindowScorer,
    adversarial_training,
    attack,
    attack_corpus,
    build_vocab,
    compute_report,
    evaluate,
    generate_adversarial_set,
    judge_sentence,
    max_substitutions,
    pipeline,
    positional_scores,
    robustness_drop,
    synthesize,
)

__all__ = [name for name in dir() if not name.startswith("_")]
