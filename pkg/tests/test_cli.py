import json
import random

import numpy as np
import pytest

from posekit import (
    RasterImage,
    document_from_sequence,
    frame_path,
    list_frames,
    load_frame,
    read_frame_mapping,
    read_pair_manifest,
    save_frame,
    write_document,
)
from posekit.cli import cli_run
from helpers import random_sequence


def make_doc_file(tmp_path, name, seq, faces=None):
    path = tmp_path / name
    write_document(document_from_sequence(seq, faces), path)
    return path


@pytest.fixture
def two_docs(tmp_path):
    rng = random.Random(27)
    a = make_doc_file(tmp_path, "a.json", random_sequence(rng, 8, source_id="a"))
    b = make_doc_file(tmp_path, "b.json", random_sequence(rng, 6, source_id="b"))
    return a, b


def frames_dir(tmp_path, name, count, width=32, height=24, seed=0):
    rng = np.random.default_rng(seed)
    d = tmp_path / name
    d.mkdir()
    for i in range(count):
        save_frame(RasterImage(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)), frame_path(d, i))
    return d


# ---------------- validate ----------------


def test_validate_ok(two_docs, capsys):
    a, _ = two_docs
    assert cli_run(["validate", str(a)]) == 0
    assert "OK" in capsys.readouterr().out


def test_validate_malformed_json_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops", encoding="utf-8")
    assert cli_run(["validate", str(bad)]) == 2
    assert capsys.readouterr().err.startswith("ERROR:schema:")


def test_validate_schema_violation_exits_2(tmp_path, capsys):
    doc = {"version": "posekit/1", "source_id": "x", "width": 10, "height": 10, "frames": []}
    path = tmp_path / "empty.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    assert cli_run(["validate", str(path)]) == 2
    assert capsys.readouterr().err.startswith("ERROR:schema:")


def test_validate_missing_file_exits_2(tmp_path, capsys):
    assert cli_run(["validate", str(tmp_path / "nope.json")]) == 2
    assert capsys.readouterr().err.startswith("ERROR:io:")


# ---------------- usage errors ----------------


def test_unknown_subcommand_exits_1(capsys):
    assert cli_run(["frobnicate"]) == 1
    assert capsys.readouterr().err.startswith("ERROR:usage:")


def test_missing_output_flag_exits_1(two_docs, capsys):
    a, b = two_docs
    assert cli_run(["match", str(a), str(b)]) == 1
    assert capsys.readouterr().err.startswith("ERROR:usage:")


def test_bad_k_value_exits_1(two_docs, tmp_path, capsys):
    a, b = two_docs
    assert cli_run(["match", str(a), str(b), "--k", "0", "-o", str(tmp_path / "m.jsonl")]) == 1
    assert capsys.readouterr().err.startswith("ERROR:usage:")


def test_bad_policy_token_exits_1(two_docs, tmp_path, capsys):
    a, b = two_docs
    assert cli_run(["match", str(a), str(b), "--policy", "bogus", "-o", str(tmp_path / "m.jsonl")]) == 1


def test_help_exits_0(capsys):
    assert cli_run(["--help"]) == 0


# ---------------- match ----------------


def test_match_writes_mapping(two_docs, tmp_path, capsys):
    a, b = two_docs
    out = tmp_path / "map.jsonl"
    assert cli_run(["match", str(a), str(b), "--k", "7", "--lambda", "0.05", "-o", str(out)]) == 0
    mapping = read_frame_mapping(out)
    assert len(mapping) == 8
    assert all(0 <= e.b_index < 6 for e in mapping.entries)


def test_match_is_byte_deterministic(two_docs, tmp_path):
    a, b = two_docs
    o1, o2 = tmp_path / "m1.jsonl", tmp_path / "m2.jsonl"
    assert cli_run(["match", str(a), str(b), "-o", str(o1)]) == 0
    assert cli_run(["match", str(a), str(b), "-o", str(o2)]) == 0
    assert o1.read_bytes() == o2.read_bytes()


def test_match_huge_lambda_holds_first_frame(two_docs, tmp_path):
    a, b = two_docs
    out = tmp_path / "map.jsonl"
    assert cli_run(["match", str(a), str(b), "--lambda", "1e9", "-o", str(out)]) == 0
    mapping = read_frame_mapping(out)
    assert mapping.switch_count() == 0


def test_match_never_observed_joint_exits_2(tmp_path, capsys):
    rng = random.Random(28)
    seq = random_sequence(rng, 4)
    doc = document_from_sequence(seq)
    for frame in doc["frames"]:
        frame["keypoints"][9] = [0.0, 0.0, 0.0]  # joint 9 gone everywhere
    path = tmp_path / "gap.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    b = make_doc_file(tmp_path, "b.json", random_sequence(rng, 4))
    assert cli_run(["match", str(path), str(b), "-o", str(tmp_path / "m.jsonl")]) == 2
    assert capsys.readouterr().err.startswith("ERROR:data:")


def test_match_config_file_with_flag_override(two_docs, tmp_path):
    a, b = two_docs
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lambda": 1e9, "k": 3}), encoding="utf-8")
    out_cfg = tmp_path / "m_cfg.jsonl"
    out_flag = tmp_path / "m_flag.jsonl"
    assert cli_run(["match", str(a), str(b), "--config", str(cfg), "-o", str(out_cfg)]) == 0
    assert read_frame_mapping(out_cfg).switch_count() == 0
    assert cli_run(["match", str(a), str(b), "--config", str(cfg), "--lambda", "0", "-o", str(out_flag)]) == 0
    # the flag overrides the huge config lambda, so switches reappear
    assert read_frame_mapping(out_flag).switch_count() > 0


# ---------------- pairs ----------------


def test_pairs_writes_manifest_with_header(two_docs, tmp_path):
    a, b = two_docs
    out = tmp_path / "pairs.jsonl"
    assert cli_run(["pairs", str(a), str(b), "--max-distance", "0.8", "-o", str(out)]) == 0
    manifest = read_pair_manifest(out)
    assert manifest.max_distance == 0.8
    assert all(p.distance <= 0.8 for p in manifest.pairs)


def test_pairs_thread_count_does_not_change_bytes(two_docs, tmp_path, monkeypatch):
    a, b = two_docs
    o1, o2 = tmp_path / "p1.jsonl", tmp_path / "p2.jsonl"
    monkeypatch.setenv("POSEKIT_THREADS", "1")
    assert cli_run(["pairs", str(a), str(b), "-o", str(o1)]) == 0
    monkeypatch.setenv("POSEKIT_THREADS", "4")
    assert cli_run(["pairs", str(a), str(b), "-o", str(o2)]) == 0
    assert o1.read_bytes() == o2.read_bytes()


def test_bad_threads_env_exits_2(two_docs, tmp_path, monkeypatch, capsys):
    a, b = two_docs
    monkeypatch.setenv("POSEKIT_THREADS", "lots")
    assert cli_run(["pairs", str(a), str(b), "-o", str(tmp_path / "p.jsonl")]) == 2
    assert capsys.readouterr().err.startswith("ERROR:config:")


# ---------------- render-skeleton ----------------


def test_render_skeleton_writes_frames(two_docs, tmp_path):
    a, _ = two_docs
    out = tmp_path / "skel"
    assert cli_run(["render-skeleton", str(a), "-o", str(out)]) == 0
    files = list_frames(out)
    assert [f.name for f in files] == [f"frame_{i:06d}.png" for i in range(8)]
    img = load_frame(files[0])
    assert img.pixels[:, :, 0].any()
    assert img.pixels[:, :, 2].sum() == 0


def test_render_skeleton_byte_deterministic(two_docs, tmp_path):
    a, _ = two_docs
    o1, o2 = tmp_path / "s1", tmp_path / "s2"
    assert cli_run(["render-skeleton", str(a), "-o", str(o1)]) == 0
    assert cli_run(["render-skeleton", str(a), "-o", str(o2)]) == 0
    for f1, f2 in zip(list_frames(o1), list_frames(o2)):
        assert f1.read_bytes() == f2.read_bytes()


# ---------------- align ----------------


def make_face_doc(tmp_path, name, n, dims=(32, 24), face_at=None):
    rng = random.Random(29)
    seq = random_sequence(rng, n, dims[0], dims[1], source_id="faces")
    faces = []
    for t in range(n):
        left, top = face_at(t) if face_at else (8.0, 6.0)
        faces.append({"bbox": {"left": left, "top": top, "right": left + 10.0, "bottom": top + 8.0}, "contours": []})
    doc = document_from_sequence(seq)
    for record, face in zip(doc["frames"], faces):
        record["face"] = face
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def test_align_outputs_same_count(tmp_path):
    frames = frames_dir(tmp_path, "frames", 4)
    doc = make_face_doc(tmp_path, "faces.json", 4, face_at=lambda t: (8.0 + t, 6.0 - 0.5 * t))
    out = tmp_path / "aligned"
    assert cli_run(["align", str(frames), str(doc), "-o", str(out)]) == 0
    assert len(list_frames(out)) == 4
    # frame 0 passes through untouched
    assert (out / "frame_000000.png").read_bytes() == (frames / "frame_000000.png").read_bytes() or np.array_equal(
        load_frame(out / "frame_000000.png").pixels, load_frame(frames / "frame_000000.png").pixels
    )


def test_align_missing_face_exits_2(tmp_path, capsys):
    frames = frames_dir(tmp_path, "frames", 3)
    rng = random.Random(30)
    doc = make_doc_file(tmp_path, "nofaces.json", random_sequence(rng, 3, 32, 24))
    assert cli_run(["align", str(frames), str(doc), "-o", str(tmp_path / "out")]) == 2
    assert capsys.readouterr().err.startswith("ERROR:data:")


def test_align_count_mismatch_exits_2(tmp_path, capsys):
    frames = frames_dir(tmp_path, "frames", 2)
    doc = make_face_doc(tmp_path, "faces.json", 5)
    assert cli_run(["align", str(frames), str(doc), "-o", str(tmp_path / "out")]) == 2


# ---------------- assemble ----------------


def write_mapping_file(tmp_path, b_indices):
    lines = []
    prev = None
    for t, b in enumerate(b_indices):
        switched = prev is not None and b != prev
        lines.append(json.dumps({"a": t, "b": b, "d": 0.5, "switched": switched}))
        prev = b
    path = tmp_path / "map.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_assemble_counts_and_blends(tmp_path):
    frames = frames_dir(tmp_path, "framesB", 10, seed=31)
    mapping = write_mapping_file(tmp_path, [5, 5, 9])
    out = tmp_path / "out"
    assert cli_run(["assemble", str(mapping), str(frames), "-o", str(out), "--interp", "2"]) == 0
    files = list_frames(out)
    assert len(files) == 4  # T=3 plus one switch
    # real frames are byte copies of their sources
    assert files[0].read_bytes() == (frames / "frame_000005.png").read_bytes()
    assert files[3].read_bytes() == (frames / "frame_000009.png").read_bytes()
    # the inserted frame is the midpoint crossfade
    left = load_frame(frames / "frame_000005.png").pixels.astype(np.float64)
    right = load_frame(frames / "frame_000009.png").pixels.astype(np.float64)
    expected = np.rint(0.5 * left + 0.5 * right).astype(np.uint8)
    assert np.array_equal(load_frame(files[2]).pixels, expected)


def test_assemble_no_interp_copies_everything(tmp_path):
    frames = frames_dir(tmp_path, "framesB", 4, seed=32)
    mapping = write_mapping_file(tmp_path, [0, 2, 2, 3])
    out = tmp_path / "out"
    assert cli_run(["assemble", str(mapping), str(frames), "-o", str(out)]) == 0
    assert len(list_frames(out)) == 4


def test_assemble_missing_source_frame_exits_2(tmp_path, capsys):
    frames = frames_dir(tmp_path, "framesB", 3, seed=33)
    mapping = write_mapping_file(tmp_path, [0, 7])
    assert cli_run(["assemble", str(mapping), str(frames), "-o", str(tmp_path / "out")]) == 2
    assert capsys.readouterr().err.startswith("ERROR:data:")


def test_assemble_empty_mapping_exits_2(tmp_path, capsys):
    frames = frames_dir(tmp_path, "framesB", 2, seed=34)
    empty = tmp_path / "map.jsonl"
    empty.write_text("", encoding="utf-8")
    assert cli_run(["assemble", str(empty), str(frames), "-o", str(tmp_path / "out")]) == 2
