"""Coarse tags and fine variants over deduplicated normalized lines.

Clustering runs on the distinct-line table, not raw lines: a corpus of 35k
lines typically collapses to a few thousand distinct statements, and the
leader pass is O(distinct x clusters). Visit order (frequency descending,
text ascending) plus lowest-id tie-breaking makes assignments reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from . import kernels
from .embed import LineVector
from .errors import ConfigError
from .normalize import NormalizedLine

LineRef = Tuple[str, int]  # (submission_id, line index)


@dataclass
class DistinctLine:
    text: str
    kind: str
    vector: np.ndarray  # unit mean of member vectors
    members: List[LineRef] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.members)


@dataclass
class Tag:
    tag: int
    member_ids: List[int]  # indexes into ClusterModel.distinct_lines
    centroid: np.ndarray
    label: str


@dataclass
class Variant:
    tag: int
    index: int  # within the tag
    member_ids: List[int]
    display_text: str

    @property
    def variant_id(self) -> str:
        return f"t{self.tag}v{self.index}"


@dataclass
class ClusterModel:
    distinct_lines: List[DistinctLine]
    tags: List[Tag]
    variants: List[Variant]  # all tags, tag-major order
    distinct_of: Dict[LineRef, int]
    tag_of_distinct: List[int]
    variant_of_distinct: List[Tuple[int, int]]

    def line_tag(self, ref: LineRef) -> int:
        return self.tag_of_distinct[self.distinct_of[ref]]

    def line_variant(self, ref: LineRef) -> Tuple[int, int]:
        return self.variant_of_distinct[self.distinct_of[ref]]

    def variant_by_id(self, variant_id: str) -> Variant:
        for variant in self.variants:
            if variant.variant_id == variant_id:
                return variant
        raise KeyError(variant_id)


def dedupe(
    lines: Sequence[NormalizedLine], vectors: Sequence[LineVector]
) -> Tuple[List[DistinctLine], Dict[LineRef, int]]:
    """Group lines by exact (text, kind); one representative vector each.

    Duplicate lines embedded in different contexts get the mean of their
    member vectors, renormalized.
    """
    by_key: Dict[Tuple[str, str], int] = {}
    distinct: List[DistinctLine] = []
    sums: List[np.ndarray] = []
    distinct_of: Dict[LineRef, int] = {}
    for line, vec in zip(lines, vectors):
        key = (line.text, line.kind)
        idx = by_key.get(key)
        if idx is None:
            idx = len(distinct)
            by_key[key] = idx
            distinct.append(DistinctLine(line.text, line.kind, vec.values))
            sums.append(np.array(vec.values, dtype=np.float64))
        else:
            sums[idx] += vec.values
        distinct[idx].members.append((line.submission_id, line.index))
        distinct_of[(line.submission_id, line.index)] = idx
    for idx, entry in enumerate(distinct):
        norm = float(np.linalg.norm(sums[idx]))
        entry.vector = sums[idx] / norm if norm > 0.0 else entry.vector
    return distinct, distinct_of


def _visit_order(distinct: Sequence[DistinctLine], subset: Sequence[int]) -> List[int]:
    return sorted(subset, key=lambda i: (-distinct[i].count, distinct[i].text))


def _leader(
    distinct: Sequence[DistinctLine], subset: List[int], threshold: float
) -> Tuple[Dict[int, int], np.ndarray]:
    """Run the leader kernel over a subset of distinct lines.

    Returns ({distinct index -> cluster id}, unit centroids (k, dim)).
    """
    order = _visit_order(distinct, subset)
    dim = distinct[order[0]].vector.shape[0]
    matrix = np.empty((len(order), dim), dtype=np.float64)
    weights = np.empty(len(order), dtype=np.float64)
    for row, idx in enumerate(order):
        matrix[row] = distinct[idx].vector
        weights[row] = float(distinct[idx].count)
    assignments, centroids, _totals = kernels.leader_cluster(
        matrix, weights, threshold
    )
    return {idx: int(assignments[row]) for row, idx in enumerate(order)}, centroids


def _display_label(distinct: Sequence[DistinctLine], member_ids: Sequence[int]) -> str:
    best = min(member_ids, key=lambda i: (-distinct[i].count, distinct[i].text))
    return distinct[best].text


def cluster_coarse(
    distinct: Sequence[DistinctLine], theta_coarse: float
) -> Tuple[List[int], List[Tag]]:
    """Assign every distinct line a tag. Returns (tag per distinct, tags)."""
    if not distinct:
        return [], []
    subset = list(range(len(distinct)))
    assignment, centroids = _leader(distinct, subset, theta_coarse)
    tag_of = [assignment[i] for i in subset]
    tags: List[Tag] = []
    for tag_id in range(centroids.shape[0]):
        member_ids = [i for i in subset if assignment[i] == tag_id]
        tags.append(
            Tag(tag_id, member_ids, centroids[tag_id], _display_label(distinct, member_ids))
        )
    return tag_of, tags


def cluster_fine(
    distinct: Sequence[DistinctLine],
    tag: Tag,
    theta_fine: float,
    theta_coarse: float,
) -> List[Variant]:
    """Sub-cluster one tag's members with the tighter threshold."""
    if theta_fine >= theta_coarse:
        raise ConfigError(
            f"theta_fine ({theta_fine}) must be smaller than theta_coarse ({theta_coarse})"
        )
    assignment, centroids = _leader(distinct, list(tag.member_ids), theta_fine)
    variants: List[Variant] = []
    for v_idx in range(centroids.shape[0]):
        member_ids = [i for i in tag.member_ids if assignment[i] == v_idx]
        variants.append(
            Variant(tag.tag, v_idx, member_ids, _display_label(distinct, member_ids))
        )
    return variants


def build_model(
    lines: Sequence[NormalizedLine],
    vectors: Sequence[LineVector],
    theta_coarse: float,
    theta_fine: float,
) -> ClusterModel:
    distinct, distinct_of = dedupe(lines, vectors)
    tag_of_distinct, tags = cluster_coarse(distinct, theta_coarse)
    variants: List[Variant] = []
    variant_of_distinct: List[Tuple[int, int]] = [(-1, -1)] * len(distinct)
    for tag in tags:
        for variant in cluster_fine(distinct, tag, theta_fine, theta_coarse):
            variants.append(variant)
            for member in variant.member_ids:
                variant_of_distinct[member] = (variant.tag, variant.index)
    return ClusterModel(
        list(distinct), tags, variants, distinct_of, tag_of_distinct, variant_of_distinct
    )
