"""Canonical progression mining and per-submission LCS alignment."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .errors import NoCorrectSolutions


@dataclass(frozen=True)
class CanonicalProgression:
    step_tags: Tuple[int, ...]  # step id k carries tag step_tags[k]
    agreement: Tuple[float, ...]  # mode share among the step-k cohort
    min_agreement: float
    min_coverage: float

    @property
    def steps(self) -> range:
        return range(len(self.step_tags))


@dataclass(frozen=True)
class Alignment:
    submission_id: str
    matched: Tuple[Tuple[int, int], ...]  # (line index, step id), both increasing
    slot: Tuple[Optional[int], ...]  # one entry per line


def mine_progression(
    correct_sequences: Sequence[Sequence[int]],
    min_agreement: float = 0.30,
    min_coverage: float = 0.20,
) -> CanonicalProgression:
    """Mode tag per position over correct solutions, cut off by agreement.

    Position k draws on the cohort of correct solutions with more than k
    lines; mining stops when the cohort shrinks under min_coverage of all
    correct solutions or the mode's share drops under min_agreement.
    Ties go to the lower tag id.
    """
    n_correct = len(correct_sequences)
    if n_correct == 0:
        raise NoCorrectSolutions("progression mining needs a passed submission")
    step_tags: List[int] = []
    agreements: List[float] = []
    k = 0
    while True:
        cohort = [seq[k] for seq in correct_sequences if len(seq) > k]
        if not cohort or len(cohort) < min_coverage * n_correct:
            break
        counts = Counter(cohort)
        mode_tag = min(counts, key=lambda tag: (-counts[tag], tag))
        share = counts[mode_tag] / len(cohort)
        if share < min_agreement:
            break
        step_tags.append(mode_tag)
        agreements.append(share)
        k += 1
    return CanonicalProgression(
        tuple(step_tags), tuple(agreements), min_agreement, min_coverage
    )


def align(
    submission_id: str, tags: Sequence[int], progression: CanonicalProgression
) -> Alignment:
    """LCS of the submission's tag sequence against the progression.

    Matched lines take their step; unmatched lines attach to the step of the
    closest preceding matched line (the first step when nothing precedes).
    With an empty progression nothing can match and slots are None.
    """
    n = len(tags)
    if not progression.step_tags:
        return Alignment(submission_id, (), tuple([None] * n))
    pairs = kernels.lcs_leftmost(
        np.asarray(tags, dtype=np.int64),
        np.asarray(progression.step_tags, dtype=np.int64),
    )
    matched = {int(i): int(j) for i, j in pairs}
    slots: List[Optional[int]] = []
    current = 0
    for i in range(n):
        if i in matched:
            current = matched[i]
        slots.append(current)
    return Alignment(
        submission_id,
        tuple((int(i), int(j)) for i, j in pairs),
        tuple(slots),
    )
