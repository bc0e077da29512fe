"""Shared random fixtures for the test suite (seeded, deterministic)."""

from __future__ import annotations

import random

from posekit import JOINT_COUNT, Joint, PoseFrame, PoseSequence


def random_joint(rng: random.Random, width: float, height: float) -> Joint:
    return Joint(rng.uniform(0, width), rng.uniform(0, height), rng.uniform(0.1, 1.0))


def random_frame(rng: random.Random, width: float = 100, height: float = 100, missing=()) -> PoseFrame:
    joints = [None if j in missing else random_joint(rng, width, height) for j in range(JOINT_COUNT)]
    return PoseFrame(tuple(joints))


def random_sequence(
    rng: random.Random,
    n_frames: int,
    width: float = 100,
    height: float = 100,
    missing_rate: float = 0.0,
    source_id: str = "test",
) -> PoseSequence:
    """Random sequence; with missing_rate > 0, every joint still shows up in
    at least one frame so imputation stays well-defined."""
    missing = [[rng.random() < missing_rate for _ in range(JOINT_COUNT)] for _ in range(n_frames)]
    for j in range(JOINT_COUNT):
        if all(missing[t][j] for t in range(n_frames)):
            missing[rng.randrange(n_frames)][j] = False
    frames = [
        random_frame(rng, width, height, missing={j for j in range(JOINT_COUNT) if missing[t][j]})
        for t in range(n_frames)
    ]
    return PoseSequence(tuple(frames), width, height, source_id)


def frame_with_x(x: float, base: PoseFrame) -> PoseFrame:
    """Copy of ``base`` with joint 0 moved to (x, base y).

    With all other joints shared, pose distances reduce to |x - x'| which
    makes distance matrices easy to stage.
    """
    j0 = base.joints[0]
    assert j0 is not None
    return PoseFrame((Joint(x, j0.y, j0.confidence),) + base.joints[1:])
