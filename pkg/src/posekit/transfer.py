"""Whole-sequence matching: thresholded frame selection, pair manifests, interpolation plans."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from .errors import EmptyCandidates, EmptySequence
from .pose import CandidatePolicy, MatchParams, PoseFrame, PoseSequence, frame_vector, sequence_matrix, smallest_k


@dataclass(frozen=True)
class MappingEntry:
    """One output frame choice: A's frame ``a_index`` is shown B's frame ``b_index``."""

    a_index: int
    b_index: int
    distance: float
    switched: bool


@dataclass(frozen=True)
class FrameMapping:
    """Per-frame selection for a whole input sequence, in temporal order."""

    entries: tuple[MappingEntry, ...]

    def __post_init__(self) -> None:
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        for t, entry in enumerate(entries):
            if entry.a_index != t:
                raise ValueError(f"entry {t} has a_index {entry.a_index}; entries must be sequential")
            if entry.b_index < 0:
                raise ValueError(f"entry {t} has negative b_index {entry.b_index}")

    def __len__(self) -> int:
        return len(self.entries)

    def b_indices(self) -> list[int]:
        return [e.b_index for e in self.entries]

    def switch_count(self) -> int:
        """Number of consecutive entries whose b_index changes."""
        b = self.b_indices()
        return sum(1 for prev, cur in zip(b, b[1:]) if prev != cur)


@dataclass(frozen=True)
class Pair:
    a_index: int
    b_index: int
    distance: float


@dataclass(frozen=True)
class PairManifest:
    """Matched (A frame, B frame, distance) records for training-set assembly."""

    pairs: tuple[Pair, ...]
    params: MatchParams
    max_distance: Optional[float] = None

    def __post_init__(self) -> None:
        pairs = tuple(self.pairs)
        object.__setattr__(self, "pairs", pairs)
        seen = set()
        for pair in pairs:
            key = (pair.a_index, pair.b_index)
            if key in seen:
                raise ValueError(f"duplicate pair {key}")
            seen.add(key)
            if self.max_distance is not None and pair.distance > self.max_distance:
                raise ValueError(f"pair {key} distance {pair.distance} exceeds cutoff {self.max_distance}")

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class RenderInstruction:
    """One output frame of an interpolated assembly: a real B frame or a crossfade."""

    kind: Literal["real", "blend"]
    b_left: int
    b_right: int
    alpha: float = 0.0

    def __post_init__(self) -> None:
        if self.kind == "real":
            if self.b_left != self.b_right or self.alpha != 0.0:
                raise ValueError("real instructions reference a single frame with alpha 0")
        elif self.kind == "blend":
            if not 0.0 < self.alpha < 1.0:
                raise ValueError(f"blend alpha must lie in (0, 1), got {self.alpha}")
        else:
            raise ValueError(f"unknown instruction kind {self.kind!r}")

    @classmethod
    def real(cls, b_index: int) -> "RenderInstruction":
        return cls("real", b_index, b_index, 0.0)

    @classmethod
    def blend(cls, b_left: int, b_right: int, alpha: float) -> "RenderInstruction":
        return cls("blend", b_left, b_right, alpha)


def _pick_candidate(neighbors: list[tuple[int, float]], prev_b: int, policy: CandidatePolicy) -> tuple[int, float]:
    if policy is CandidatePolicy.MIN_DISTANCE:
        return neighbors[0]
    # nearest_prev_index: favor temporal continuity among the k nearest.
    return min(neighbors, key=lambda nd: (abs(nd[0] - prev_b), nd[1], nd[0]))


def _select_from_distances(
    distances: np.ndarray, prev_b: int, params: MatchParams, k: int
) -> tuple[int, float, bool]:
    neighbors = smallest_k(distances, k)
    cand_index, cand_dist = _pick_candidate(neighbors, prev_b, params.candidate_policy)
    prev_dist = float(distances[prev_b])
    if cand_dist < prev_dist - params.min_improvement:
        return cand_index, cand_dist, cand_index != prev_b
    return prev_b, prev_dist, False


def select_frame(
    prev_b: int,
    query: PoseFrame,
    candidates: PoseSequence,
    params: MatchParams = MatchParams(),
    query_dims: Sequence[float] | None = None,
) -> tuple[int, float, bool]:
    """Thresholded per-step frame choice.

    The best candidate (per ``params.k`` and ``params.candidate_policy``)
    replaces ``prev_b`` only when it improves the pose distance by strictly
    more than ``params.min_improvement``; otherwise the held frame is kept.
    Returns (chosen index, distance to chosen frame, switched).
    """
    if not candidates.frames:
        raise EmptyCandidates("candidate sequence has no frames")
    if not 0 <= prev_b < len(candidates.frames):
        raise ValueError(f"prev_b {prev_b} is not a valid candidate index")
    dims = query_dims if query_dims is not None else candidates.dims
    qv = frame_vector(query, params.normalize, dims)
    mat = sequence_matrix(candidates, params.normalize)
    distances = np.sqrt(((mat - qv) ** 2).sum(axis=1))
    k = min(params.k, len(candidates.frames))
    return _select_from_distances(distances, prev_b, params, k)


def match_sequence(a: PoseSequence, b: PoseSequence, params: MatchParams = MatchParams()) -> FrameMapping:
    """Map every frame of A onto a frame of B with thresholded selection.

    Entry 0 is the plain nearest neighbor of A's first frame; every later
    entry runs the switch rule against the previously selected frame.
    Both sequences must be fully imputed.
    """
    if not a.frames:
        raise EmptySequence("sequence A has no frames")
    if not b.frames:
        raise EmptySequence("sequence B has no frames")
    amat = sequence_matrix(a, params.normalize)
    bmat = sequence_matrix(b, params.normalize)
    k = min(params.k, len(b.frames))
    entries: list[MappingEntry] = []
    prev = -1
    for t in range(amat.shape[0]):
        distances = np.sqrt(((bmat - amat[t]) ** 2).sum(axis=1))
        if t == 0:
            # No held frame yet: take the unthresholded nearest neighbor.
            j = int(np.argmin(distances))
            entries.append(MappingEntry(0, j, float(distances[j]), False))
        else:
            j, dist, switched = _select_from_distances(distances, prev, params, k)
            entries.append(MappingEntry(t, j, dist, switched))
        prev = entries[-1].b_index
    return FrameMapping(tuple(entries))


def build_pairs_manifest(
    a: PoseSequence,
    b: PoseSequence,
    params: MatchParams = MatchParams(),
    max_distance: Optional[float] = None,
    workers: int = 1,
) -> PairManifest:
    """Nearest-neighbor training pairs: for each A frame, its closest B frame.

    Uses plain nearest-neighbor semantics (k=1) regardless of ``params.k``.
    Pairs with distance above ``max_distance`` are dropped when a cutoff is
    set.  Frame lookups are independent, so they may run on ``workers``
    threads; the result is identical either way.
    """
    if not a.frames:
        raise EmptySequence("sequence A has no frames")
    if not b.frames:
        raise EmptySequence("sequence B has no frames")
    if max_distance is not None and max_distance < 0:
        raise ValueError(f"max_distance must be >= 0, got {max_distance}")
    amat = sequence_matrix(a, params.normalize)
    bmat = sequence_matrix(b, params.normalize)

    def nearest(t: int) -> tuple[int, float]:
        distances = np.sqrt(((bmat - amat[t]) ** 2).sum(axis=1))
        j = int(np.argmin(distances))
        return j, float(distances[j])

    indices = range(amat.shape[0])
    if workers > 1 and amat.shape[0] > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(nearest, indices))
    else:
        results = [nearest(t) for t in indices]

    pairs: list[Pair] = []
    seen: set[tuple[int, int]] = set()
    for i, (j, dist) in enumerate(results):
        if max_distance is not None and dist > max_distance:
            continue
        if (i, j) in seen:
            continue
        seen.add((i, j))
        pairs.append(Pair(i, j, dist))
    return PairManifest(tuple(pairs), params, max_distance)


def interpolate_plan(mapping: FrameMapping, factor: int) -> list[RenderInstruction]:
    """Expand a mapping into render instructions with crossfades at switches.

    Each mapped frame becomes a ``real`` instruction; between consecutive
    entries whose b_index differs, ``factor - 1`` blends are inserted with
    alpha m/factor for m = 1..factor-1.  Output length is therefore
    T + (factor - 1) * switches.
    """
    if factor < 1:
        raise ValueError(f"interpolation factor must be >= 1, got {factor}")
    if not mapping.entries:
        raise ValueError("mapping has no entries")
    plan: list[RenderInstruction] = []
    prev_b: Optional[int] = None
    for entry in mapping.entries:
        if prev_b is not None and entry.b_index != prev_b:
            for m in range(1, factor):
                plan.append(RenderInstruction.blend(prev_b, entry.b_index, m / factor))
        plan.append(RenderInstruction.real(entry.b_index))
        prev_b = entry.b_index
    return plan
