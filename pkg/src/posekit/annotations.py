"""The annotation document: schema validation, ingestion to pose sequences, serialization.

A document carries one source video's keypoints: a version marker, the
frame dimensions, and per-frame lists of exactly 18 [x, y, confidence]
triples plus an optional face payload.  Keypoints a detector could not see
are conventionally [0, 0, 0].
"""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any, Optional

from .errors import SchemaError
from .pose import JOINT_COUNT, Joint, PoseFrame, PoseSequence
from .raster import Contour, FaceAnnotation

SCHEMA_VERSION = "posekit/1"

_log = logging.getLogger("posekit")


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _require(doc: dict, path: str, key: str) -> Any:
    if key not in doc:
        raise SchemaError(f"{path}.{key}", "missing required field")
    return doc[key]


def _require_dimension(doc: dict, path: str, key: str) -> int:
    value = _require(doc, path, key)
    if not _is_number(value) or value <= 0 or value != int(value):
        raise SchemaError(f"{path}.{key}", f"expected a positive integer pixel count, got {value!r}")
    return int(value)


def _check_point(point: Any, path: str) -> None:
    if not isinstance(point, (list, tuple)) or len(point) != 2 or not all(_is_number(v) for v in point):
        raise SchemaError(path, f"expected an [x, y] pair of finite numbers, got {point!r}")


def _check_face(face: Any, path: str) -> None:
    if not isinstance(face, dict):
        raise SchemaError(path, "face payload must be an object")
    bbox = _require(face, path, "bbox")
    if not isinstance(bbox, dict):
        raise SchemaError(f"{path}.bbox", "bbox must be an object")
    for key in ("left", "top", "right", "bottom"):
        if not _is_number(bbox.get(key)):
            raise SchemaError(f"{path}.bbox.{key}", f"expected a finite number, got {bbox.get(key)!r}")
    if not (bbox["left"] < bbox["right"] and bbox["top"] < bbox["bottom"]):
        raise SchemaError(f"{path}.bbox", "bbox must satisfy left < right and top < bottom")
    contours = face.get("contours", [])
    if not isinstance(contours, list):
        raise SchemaError(f"{path}.contours", "contours must be a list")
    for c, contour in enumerate(contours):
        cpath = f"{path}.contours[{c}]"
        if not isinstance(contour, dict) or not isinstance(contour.get("name"), str):
            raise SchemaError(cpath, "each contour is an object with a string name")
        points = contour.get("points")
        if not isinstance(points, list):
            raise SchemaError(f"{cpath}.points", "points must be a list")
        for p, point in enumerate(points):
            _check_point(point, f"{cpath}.points[{p}]")


def validate_document(doc: Any) -> None:
    """Raise SchemaError (with the path of the offending element) on any violation.

    Unknown extra keys are tolerated so detector adapters can attach their
    own metadata.
    """
    if not isinstance(doc, dict):
        raise SchemaError("$", f"document must be a JSON object, got {type(doc).__name__}")
    version = _require(doc, "$", "version")
    if version != SCHEMA_VERSION:
        raise SchemaError("$.version", f"expected {SCHEMA_VERSION!r}, got {version!r}")
    if not isinstance(_require(doc, "$", "source_id"), str):
        raise SchemaError("$.source_id", "expected a string label")
    _require_dimension(doc, "$", "width")
    _require_dimension(doc, "$", "height")
    frames = _require(doc, "$", "frames")
    if not isinstance(frames, list):
        raise SchemaError("$.frames", "expected a list of frame records")
    if not frames:
        raise SchemaError("$.frames", "document has no frames")
    prev_index = None
    for n, frame in enumerate(frames):
        path = f"$.frames[{n}]"
        if not isinstance(frame, dict):
            raise SchemaError(path, "frame record must be an object")
        index = _require(frame, path, "frame_index")
        if not isinstance(index, int) or isinstance(index, bool) or index < 0:
            raise SchemaError(f"{path}.frame_index", f"expected a non-negative integer, got {index!r}")
        if prev_index is not None and index <= prev_index:
            raise SchemaError(f"{path}.frame_index", f"frame_index {index} does not increase past {prev_index}")
        prev_index = index
        keypoints = _require(frame, path, "keypoints")
        if not isinstance(keypoints, list) or len(keypoints) != JOINT_COUNT:
            got = len(keypoints) if isinstance(keypoints, list) else type(keypoints).__name__
            raise SchemaError(f"{path}.keypoints", f"expected exactly {JOINT_COUNT} keypoint triples, got {got}")
        for j, triple in enumerate(keypoints):
            kpath = f"{path}.keypoints[{j}]"
            if not isinstance(triple, (list, tuple)) or len(triple) != 3 or not all(_is_number(v) for v in triple):
                raise SchemaError(kpath, f"expected an [x, y, confidence] triple of finite numbers, got {triple!r}")
            if not 0.0 <= triple[2] <= 1.0:
                raise SchemaError(kpath, f"confidence must be in [0, 1], got {triple[2]!r}")
        if frame.get("face") is not None:
            _check_face(frame["face"], f"{path}.face")


def _clamp(value: float, hi: float, clamp_counter: list[int]) -> float:
    clamped = min(max(float(value), 0.0), hi)
    if clamped != value:
        clamp_counter[0] += 1
    return clamped


def _face_from_payload(face: dict, path: str, width: int, height: int, clamp_counter: list[int]) -> FaceAnnotation:
    bbox = face["bbox"]
    left = _clamp(bbox["left"], width, clamp_counter)
    top = _clamp(bbox["top"], height, clamp_counter)
    right = _clamp(bbox["right"], width, clamp_counter)
    bottom = _clamp(bbox["bottom"], height, clamp_counter)
    if not (left < right and top < bottom):
        raise SchemaError(f"{path}.bbox", "bbox lies outside the frame")
    contours = []
    for contour in face.get("contours", []):
        points = tuple(
            (_clamp(x, width, clamp_counter), _clamp(y, height, clamp_counter)) for x, y in contour["points"]
        )
        contours.append(Contour(contour["name"], points))
    return FaceAnnotation((left, top, right, bottom), tuple(contours))


def load_pose_sequence(doc: dict) -> tuple[PoseSequence, list[Optional[FaceAnnotation]]]:
    """Validate and ingest a document into a PoseSequence plus per-frame faces.

    Keypoints with confidence 0 or sitting exactly at (0, 0) become absent
    joints.  Out-of-bounds coordinates are clamped to the frame; the total
    clamp count is reported as a warning.
    """
    validate_document(doc)
    width = int(doc["width"])
    height = int(doc["height"])
    clamp_counter = [0]
    frames: list[PoseFrame] = []
    faces: list[Optional[FaceAnnotation]] = []
    for n, record in enumerate(doc["frames"]):
        joints: list[Optional[Joint]] = []
        for x, y, confidence in record["keypoints"]:
            if confidence == 0 or (x == 0 and y == 0):
                joints.append(None)
                continue
            joints.append(
                Joint(
                    _clamp(x, width, clamp_counter),
                    _clamp(y, height, clamp_counter),
                    float(confidence),
                )
            )
        frames.append(PoseFrame(tuple(joints)))
        face = record.get("face")
        if face is None:
            faces.append(None)
        else:
            faces.append(_face_from_payload(face, f"$.frames[{n}].face", width, height, clamp_counter))
    if clamp_counter[0]:
        _log.warning("clamped %d out-of-bounds coordinate(s) during ingestion", clamp_counter[0])
    return PoseSequence(tuple(frames), width, height, doc["source_id"]), faces


def face_payload(face: FaceAnnotation) -> dict:
    left, top, right, bottom = face.bbox
    return {
        "bbox": {"left": left, "top": top, "right": right, "bottom": bottom},
        "contours": [{"name": c.name, "points": [[x, y] for x, y in c.points]} for c in face.contours],
    }


def document_from_sequence(seq: PoseSequence, faces: Optional[list[Optional[FaceAnnotation]]] = None) -> dict:
    """Serialize a sequence back to document form.

    Absent joints are written as the conventional [0, 0, 0] triple, so a
    confidence-0 (imputed) joint round-trips to absent by design.
    """
    records = []
    for n, frame in enumerate(seq.frames):
        keypoints = [
            [0.0, 0.0, 0.0] if j is None else [float(j.x), float(j.y), float(j.confidence)] for j in frame.joints
        ]
        record: dict = {"frame_index": n, "keypoints": keypoints}
        if faces is not None and faces[n] is not None:
            record["face"] = face_payload(faces[n])
        records.append(record)
    return {
        "version": SCHEMA_VERSION,
        "source_id": seq.source_id,
        "width": seq.width,
        "height": seq.height,
        "frames": records,
    }


def load_document(path: Path | str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(str(path), f"not valid JSON: {exc}") from exc


def write_document(doc: dict, path: Path | str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, separators=(",", ":"))
        fh.write("\n")
