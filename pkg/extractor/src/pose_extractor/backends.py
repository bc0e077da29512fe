"""Detector backends.

Every backend maps one frame image to 18 COCO-18 [x, y, confidence]
triples (confidence 0 and coordinates (0, 0) for anything undetected) and
an optional face payload.  The ``stub`` backend reads detections from a
sidecar fixture file so the serialization pipeline is testable without any
ML model installed; the ``openpose`` backend wraps the tf-pose estimator
when that package is present.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

JOINT_COUNT = 18
STUB_SIDECAR = "annotations.stub.json"

Keypoints = list[list[float]]
FacePayload = Optional[dict]


class BackendUnavailable(Exception):
    """The requested detector model is not installed or cannot start."""


class FrameReadError(Exception):
    """A frame image could not be read or does not match the others."""


@dataclass(frozen=True)
class ExtractorBackend:
    """Capability descriptor for a detector backend."""

    name: str
    pose: bool
    face: bool

    def __post_init__(self) -> None:
        if not (self.pose or self.face):
            raise ValueError("a backend must provide pose or face detections")


def _zero_keypoints() -> Keypoints:
    return [[0.0, 0.0, 0.0] for _ in range(JOINT_COUNT)]


class StubBackend:
    """Deterministic fixture-driven backend.

    Reads ``annotations.stub.json`` from the frame directory: an object
    mapping frame basenames to {"keypoints": [[x, y, c] * 18],
    "face": {...}?}.  Frames without an entry count as undetected.
    """

    descriptor = ExtractorBackend("stub", pose=True, face=True)

    def __init__(self, frame_dir: Path) -> None:
        sidecar = frame_dir / STUB_SIDECAR
        if not sidecar.is_file():
            raise BackendUnavailable(f"stub backend needs {STUB_SIDECAR} in {frame_dir}")
        with open(sidecar, encoding="utf-8") as fh:
            self._fixtures = json.load(fh)
        if not isinstance(self._fixtures, dict):
            raise BackendUnavailable(f"{sidecar} must hold an object keyed by frame name")

    def detect(self, path: Path, size: tuple[int, int]) -> tuple[Keypoints, FacePayload]:
        entry = self._fixtures.get(path.name)
        if entry is None:
            return _zero_keypoints(), None
        keypoints = entry.get("keypoints")
        if not isinstance(keypoints, list) or len(keypoints) != JOINT_COUNT:
            raise FrameReadError(f"stub entry for {path.name} must carry {JOINT_COUNT} keypoint triples")
        return [[float(v) for v in triple] for triple in keypoints], entry.get("face")


class OpenPoseBackend:
    """tf-pose (compressed OpenPose) adapter; 18 joints in COCO order."""

    descriptor = ExtractorBackend("openpose", pose=True, face=False)

    def __init__(self, frame_dir: Path) -> None:
        try:
            from tf_pose.estimator import TfPoseEstimator
            from tf_pose.networks import get_graph_path
        except ImportError as exc:
            raise BackendUnavailable("openpose backend needs the tf-pose package") from exc
        self._estimator = TfPoseEstimator(get_graph_path("mobilenet_thin"), target_size=(432, 368))

    def detect(self, path: Path, size: tuple[int, int]) -> tuple[Keypoints, FacePayload]:
        import numpy as np
        from PIL import Image

        with Image.open(path) as im:
            bgr = np.asarray(im.convert("RGB"))[:, :, ::-1].copy()
        humans = self._estimator.inference(bgr, resize_to_default=True, upsample_size=4.0)
        keypoints = _zero_keypoints()
        if humans:
            width, height = size
            for idx in range(JOINT_COUNT):
                part = humans[0].body_parts.get(idx)
                if part is not None:
                    keypoints[idx] = [part.x * width, part.y * height, min(max(float(part.score), 0.0), 1.0)]
        return keypoints, None


class FaceDetectorChain:
    """HoG face detector first; CNN only when allowed and HoG finds nothing."""

    def __init__(self, mode: str) -> None:
        if mode not in ("hog", "cnn"):
            raise ValueError(f"face mode must be hog or cnn, got {mode!r}")
        try:
            import face_recognition
        except ImportError as exc:
            raise BackendUnavailable("face detection needs the face_recognition package") from exc
        self._fr = face_recognition
        self._mode = mode

    def detect(self, path: Path) -> FacePayload:
        import numpy as np
        from PIL import Image

        with Image.open(path) as im:
            rgb = np.asarray(im.convert("RGB"))
        boxes = self._fr.face_locations(rgb, model="hog")
        if not boxes and self._mode == "cnn":
            boxes = self._fr.face_locations(rgb, model="cnn")
        if not boxes:
            return None
        top, right, bottom, left = boxes[0]
        contours = []
        for landmarks in self._fr.face_landmarks(rgb, face_locations=boxes[:1]):
            for name, points in landmarks.items():
                contours.append({"name": name, "points": [[float(x), float(y)] for x, y in points]})
        return {
            "bbox": {"left": float(left), "top": float(top), "right": float(right), "bottom": float(bottom)},
            "contours": contours,
        }


BACKENDS = {
    "stub": StubBackend,
    "openpose": OpenPoseBackend,
}


def open_backend(name: str, frame_dir: Path):
    try:
        factory = BACKENDS[name]
    except KeyError:
        raise BackendUnavailable(f"unknown backend {name!r}; choose from {sorted(BACKENDS)}") from None
    return factory(frame_dir)
