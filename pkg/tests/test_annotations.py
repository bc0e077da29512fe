import json
import logging
import random

import pytest

from posekit import (
    SCHEMA_VERSION,
    Contour,
    FaceAnnotation,
    SchemaError,
    document_from_sequence,
    load_document,
    load_pose_sequence,
    validate_document,
    write_document,
)
from helpers import random_sequence


def make_doc(n_frames=2, width=100, height=100, with_face=False):
    frames = []
    for t in range(n_frames):
        keypoints = [[float(10 + j), float(20 + j), 0.9] for j in range(18)]
        record = {"frame_index": t, "keypoints": keypoints}
        if with_face:
            record["face"] = {
                "bbox": {"left": 30.0, "top": 20.0, "right": 60.0, "bottom": 55.0},
                "contours": [{"name": "jawline", "points": [[32.0, 40.0], [45.0, 52.0], [58.0, 40.0]]}],
            }
        frames.append(record)
    return {
        "version": SCHEMA_VERSION,
        "source_id": "cam-a",
        "width": width,
        "height": height,
        "frames": frames,
    }


# ---------------- validation ----------------


def test_valid_document_passes():
    validate_document(make_doc(with_face=True))


def test_unknown_extra_keys_are_tolerated():
    doc = make_doc()
    doc["detector"] = "whatever"
    doc["frames"][0]["timestamp"] = 0.04
    validate_document(doc)


def test_wrong_version_rejected():
    doc = make_doc()
    doc["version"] = "posekit/2"
    with pytest.raises(SchemaError) as exc:
        validate_document(doc)
    assert exc.value.path == "$.version"


def test_missing_field_names_path():
    doc = make_doc()
    del doc["width"]
    with pytest.raises(SchemaError) as exc:
        validate_document(doc)
    assert exc.value.path == "$.width"


def test_seventeen_keypoints_names_offending_frame():
    doc = make_doc(n_frames=3)
    doc["frames"][1]["keypoints"].pop()
    with pytest.raises(SchemaError) as exc:
        validate_document(doc)
    assert exc.value.path == "$.frames[1].keypoints"


def test_non_increasing_frame_index_rejected():
    doc = make_doc(n_frames=2)
    doc["frames"][1]["frame_index"] = 0
    with pytest.raises(SchemaError) as exc:
        validate_document(doc)
    assert "frame_index" in exc.value.path


def test_empty_frames_rejected():
    doc = make_doc()
    doc["frames"] = []
    with pytest.raises(SchemaError) as exc:
        validate_document(doc)
    assert exc.value.path == "$.frames"


def test_confidence_out_of_range_rejected():
    doc = make_doc()
    doc["frames"][0]["keypoints"][5][2] = 1.5
    with pytest.raises(SchemaError) as exc:
        validate_document(doc)
    assert exc.value.path == "$.frames[0].keypoints[5]"


def test_non_finite_coordinate_rejected():
    doc = make_doc()
    doc["frames"][0]["keypoints"][2][0] = float("nan")
    with pytest.raises(SchemaError):
        validate_document(doc)


def test_negative_frame_index_rejected():
    doc = make_doc(n_frames=1)
    doc["frames"][0]["frame_index"] = -1
    with pytest.raises(SchemaError):
        validate_document(doc)


def test_degenerate_bbox_rejected():
    doc = make_doc(with_face=True)
    doc["frames"][0]["face"]["bbox"]["right"] = 30.0  # == left
    with pytest.raises(SchemaError) as exc:
        validate_document(doc)
    assert exc.value.path == "$.frames[0].face.bbox"


def test_non_integer_dims_rejected():
    doc = make_doc()
    doc["width"] = 100.5
    with pytest.raises(SchemaError):
        validate_document(doc)


# ---------------- ingestion ----------------


def test_zero_triple_becomes_absent_joint():
    doc = make_doc(n_frames=1)
    doc["frames"][0]["keypoints"][4] = [0.0, 0.0, 0.0]
    seq, _ = load_pose_sequence(doc)
    assert seq.frames[0].joints[4] is None


def test_zero_confidence_becomes_absent_even_with_coords():
    doc = make_doc(n_frames=1)
    doc["frames"][0]["keypoints"][4] = [33.0, 44.0, 0.0]
    seq, _ = load_pose_sequence(doc)
    assert seq.frames[0].joints[4] is None


def test_origin_coordinates_become_absent_even_with_confidence():
    doc = make_doc(n_frames=1)
    doc["frames"][0]["keypoints"][4] = [0.0, 0.0, 0.7]
    seq, _ = load_pose_sequence(doc)
    assert seq.frames[0].joints[4] is None


def test_fractional_keypoint_passes_through():
    doc = make_doc(n_frames=1)
    doc["frames"][0]["keypoints"][0] = [10.5, 20.25, 0.9]
    seq, _ = load_pose_sequence(doc)
    joint = seq.frames[0].joints[0]
    assert (joint.x, joint.y, joint.confidence) == (10.5, 20.25, 0.9)


def test_out_of_bounds_coordinates_clamp_with_warning(caplog):
    doc = make_doc(n_frames=1)
    doc["frames"][0]["keypoints"][3] = [120.0, -5.0, 0.9]
    with caplog.at_level(logging.WARNING, logger="posekit"):
        seq, _ = load_pose_sequence(doc)
    joint = seq.frames[0].joints[3]
    assert (joint.x, joint.y) == (100.0, 0.0)
    assert any("clamped 2" in r.getMessage() for r in caplog.records)


def test_face_payload_ingested_and_clamped():
    doc = make_doc(n_frames=1, with_face=True)
    doc["frames"][0]["face"]["contours"][0]["points"][0] = [-4.0, 300.0]
    seq, faces = load_pose_sequence(doc)
    assert faces[0] is not None
    assert faces[0].bbox == (30.0, 20.0, 60.0, 55.0)
    assert faces[0].contours[0].points[0] == (0.0, 100.0)


def test_face_fully_outside_frame_rejected():
    doc = make_doc(n_frames=1, with_face=True)
    doc["frames"][0]["face"]["bbox"] = {"left": 150.0, "top": 10.0, "right": 180.0, "bottom": 40.0}
    with pytest.raises(SchemaError) as exc:
        load_pose_sequence(doc)
    assert exc.value.path == "$.frames[0].face.bbox"


def test_missing_face_loads_as_none():
    seq, faces = load_pose_sequence(make_doc(n_frames=2))
    assert faces == [None, None]


# ---------------- round trips ----------------


def test_document_round_trip_through_file(tmp_path):
    rng = random.Random(24)
    seq = random_sequence(rng, 12, 320, 240, missing_rate=0.2, source_id="rt")
    faces = [
        None
        if t % 3 == 0
        else FaceAnnotation(
            bbox=(10.0 + t, 12.0, 60.0 + t, 70.0),
            contours=(Contour("jawline", ((15.0 + t, 30.0), (25.0 + t, 40.0))),),
        )
        for t in range(12)
    ]
    doc = document_from_sequence(seq, faces)
    path = tmp_path / "doc.json"
    write_document(doc, path)
    loaded_doc = load_document(path)
    assert loaded_doc == doc
    seq2, faces2 = load_pose_sequence(loaded_doc)
    assert seq2 == seq
    assert faces2 == faces


def test_write_document_is_byte_deterministic(tmp_path):
    rng = random.Random(25)
    seq = random_sequence(rng, 5)
    doc = document_from_sequence(seq)
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    write_document(doc, p1)
    write_document(doc, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_load_document_rejects_malformed_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(SchemaError):
        load_document(bad)
