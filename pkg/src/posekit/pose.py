"""Pose data model: COCO-18 keypoint frames, median imputation, L2 distance, brute-force k-NN."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyCandidates, JointNeverObserved, MissingJoint

JOINT_COUNT = 18

# COCO-18 keypoint ids, as emitted by 18-joint body-pose detectors.
JOINT_NAMES = (
    "nose",
    "neck",
    "right_shoulder",
    "right_elbow",
    "right_wrist",
    "left_shoulder",
    "left_elbow",
    "left_wrist",
    "right_hip",
    "right_knee",
    "right_ankle",
    "left_hip",
    "left_knee",
    "left_ankle",
    "right_eye",
    "left_eye",
    "right_ear",
    "left_ear",
)


@dataclass(frozen=True)
class Joint:
    """One keypoint in pixel coordinates (origin top-left, y grows downward).

    A confidence of 0.0 marks a value synthesized by imputation.  Detector
    output with confidence 0 is dropped at ingestion and never becomes a
    Joint, so zero-confidence detections cannot leak into distances.
    """

    x: float
    y: float
    confidence: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence!r}")


@dataclass(frozen=True)
class PoseFrame:
    """The 18 optional joints of one video frame, indexed by COCO-18 id."""

    joints: tuple[Optional[Joint], ...]

    def __post_init__(self) -> None:
        joints = tuple(self.joints)
        if len(joints) != JOINT_COUNT:
            raise ValueError(f"a pose frame holds exactly {JOINT_COUNT} joints, got {len(joints)}")
        object.__setattr__(self, "joints", joints)

    @property
    def is_complete(self) -> bool:
        return all(j is not None for j in self.joints)

    def missing_indices(self) -> tuple[int, ...]:
        return tuple(i for i, j in enumerate(self.joints) if j is None)


@dataclass(frozen=True)
class PoseSequence:
    """Ordered pose frames of one source video plus its frame dimensions."""

    frames: tuple[PoseFrame, ...]
    width: float
    height: float
    source_id: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", tuple(self.frames))
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"frame dimensions must be positive, got {self.width}x{self.height}")

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def dims(self) -> tuple[float, float]:
        return (self.width, self.height)


class CandidatePolicy(str, Enum):
    """How one frame is chosen from the k nearest candidates."""

    MIN_DISTANCE = "min_distance"
    NEAREST_PREV_INDEX = "nearest_prev_index"


@dataclass(frozen=True)
class MatchParams:
    """Knobs for the matching engine.

    ``min_improvement`` is the switch threshold: a new nearest neighbor
    replaces the held frame only when it improves the pose distance by
    strictly more than this amount.
    """

    k: int = 1
    min_improvement: float = 0.0
    normalize: bool = True
    candidate_policy: CandidatePolicy = CandidatePolicy.NEAREST_PREV_INDEX

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.min_improvement < 0:
            raise ValueError(f"min_improvement must be >= 0, got {self.min_improvement}")
        object.__setattr__(self, "candidate_policy", CandidatePolicy(self.candidate_policy))


def frame_vector(frame: PoseFrame, normalize: bool = True, dims: Sequence[float] | None = None) -> np.ndarray:
    """Flatten a fully-populated frame into a 36-vector (x0, y0, x1, y1, ...).

    With ``normalize`` set, x is divided by the frame width and y by the
    frame height so distances are comparable across resolutions.
    """
    if normalize:
        if dims is None:
            raise ValueError("dims is required when normalize is true")
        width, height = float(dims[0]), float(dims[1])
        if width <= 0 or height <= 0:
            raise ValueError(f"dims must be positive, got {dims!r}")
    out = np.empty(JOINT_COUNT * 2, dtype=np.float64)
    for i, joint in enumerate(frame.joints):
        if joint is None:
            raise MissingJoint(f"joint {i} ({JOINT_NAMES[i]}) is absent; impute before measuring distance")
        if normalize:
            out[2 * i] = joint.x / width
            out[2 * i + 1] = joint.y / height
        else:
            out[2 * i] = joint.x
            out[2 * i + 1] = joint.y
    return out


def sequence_matrix(seq: PoseSequence, normalize: bool = True) -> np.ndarray:
    """Stack a sequence into a (frames, 36) coordinate matrix."""
    out = np.empty((len(seq.frames), JOINT_COUNT * 2), dtype=np.float64)
    for t, frame in enumerate(seq.frames):
        try:
            out[t] = frame_vector(frame, normalize, seq.dims)
        except MissingJoint as exc:
            raise MissingJoint(f"frame {t}: {exc}") from None
    return out


def _median(values: list[float]) -> float:
    # Even counts average the two middle values, per coordinate.
    ordered = sorted(values)
    n = len(ordered)
    mid = n // 2
    if n % 2:
        return ordered[mid]
    return (ordered[mid - 1] + ordered[mid]) / 2.0


def impute_missing_joints(seq: PoseSequence) -> PoseSequence:
    """Fill every absent joint with the per-joint componentwise median.

    The median is taken independently over x and over y across all frames
    where the joint was observed.  Imputed joints carry confidence 0 so
    downstream stages can tell them from detections.  Raises
    JointNeverObserved if some joint is absent from every frame.
    """
    if not seq.frames:
        raise ValueError("cannot impute an empty sequence")
    medians: list[tuple[float, float]] = []
    for j in range(JOINT_COUNT):
        xs = [f.joints[j].x for f in seq.frames if f.joints[j] is not None]
        ys = [f.joints[j].y for f in seq.frames if f.joints[j] is not None]
        if not xs:
            raise JointNeverObserved(j)
        medians.append((_median(xs), _median(ys)))
    frames = []
    for frame in seq.frames:
        if frame.is_complete:
            frames.append(frame)
            continue
        joints = list(frame.joints)
        for j, joint in enumerate(joints):
            if joint is None:
                joints[j] = Joint(medians[j][0], medians[j][1], confidence=0.0)
        frames.append(PoseFrame(tuple(joints)))
    return PoseSequence(tuple(frames), seq.width, seq.height, seq.source_id)


def pose_distance(
    a: PoseFrame,
    b: PoseFrame,
    normalize: bool = True,
    dims_a: Sequence[float] | None = None,
    dims_b: Sequence[float] | None = None,
) -> float:
    """L2 distance between two fully-populated frames over all 18 joints.

    sqrt(sum over joints of (xa - xb)^2 + (ya - yb)^2), on coordinates
    normalized per-frame by (width, height) when ``normalize`` is set.
    """
    va = frame_vector(a, normalize, dims_a)
    vb = frame_vector(b, normalize, dims_b)
    return float(np.sqrt(((va - vb) ** 2).sum()))


def smallest_k(distances: np.ndarray, k: int) -> list[tuple[int, float]]:
    """Indices of the k smallest distances, ascending, ties to the smaller index."""
    order = np.argsort(distances, kind="stable")[:k]
    return [(int(i), float(distances[i])) for i in order]


def knn_query(
    query: PoseFrame,
    candidates: PoseSequence,
    k: int,
    normalize: bool = True,
    query_dims: Sequence[float] | None = None,
) -> list[tuple[int, float]]:
    """Exact brute-force k nearest candidate frames to ``query``.

    Returns (frame index, distance) pairs ascending by distance; equal
    distances are ordered by smaller frame index.  ``query_dims`` defaults
    to the candidate sequence's dimensions.
    """
    if not candidates.frames:
        raise EmptyCandidates("candidate sequence has no frames")
    if not 1 <= k <= len(candidates.frames):
        raise ValueError(f"k must be in [1, {len(candidates.frames)}], got {k}")
    dims = query_dims if query_dims is not None else candidates.dims
    qv = frame_vector(query, normalize, dims)
    mat = sequence_matrix(candidates, normalize)
    distances = np.sqrt(((mat - qv) ** 2).sum(axis=1))
    return smallest_k(distances, k)


def lerp_pose(a: PoseFrame, b: PoseFrame, alpha: float) -> PoseFrame:
    """Linear pose-space interpolation; joints absent in either frame stay absent."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    joints: list[Optional[Joint]] = []
    for ja, jb in zip(a.joints, b.joints):
        if ja is None or jb is None:
            joints.append(None)
        else:
            joints.append(
                Joint(
                    ja.x + (jb.x - ja.x) * alpha,
                    ja.y + (jb.y - ja.y) * alpha,
                    min(ja.confidence, jb.confidence),
                )
            )
    return PoseFrame(tuple(joints))
