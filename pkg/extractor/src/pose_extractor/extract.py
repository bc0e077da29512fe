"""Run a detector backend over a frame directory and emit an annotation document.

The document targets the posekit/1 annotation schema and is checked with
the primary toolkit's ``validate`` command after writing, so schema
conformance is enforced at the interface rather than by construction.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
from pathlib import Path

from PIL import Image, UnidentifiedImageError

from .backends import FaceDetectorChain, FrameReadError, open_backend

SCHEMA_VERSION = "posekit/1"


def list_frames(frame_dir: Path) -> list[Path]:
    return sorted(Path(frame_dir).glob("frame_*.png"))


def _frame_size(path: Path) -> tuple[int, int]:
    try:
        with Image.open(path) as im:
            return im.size
    except (OSError, UnidentifiedImageError) as exc:
        raise FrameReadError(f"cannot read {path}: {exc}") from exc


def build_document(frame_dir: Path, backend_name: str, face_mode: str = "hog") -> dict:
    """Detect every frame and assemble the document dict.

    An empty frame directory still yields a (zero-frame) document with
    placeholder 1x1 dimensions; downstream validation rejects it because
    frames are required.
    """
    frame_dir = Path(frame_dir)
    files = list_frames(frame_dir)
    backend = open_backend(backend_name, frame_dir)
    face_chain = None
    if face_mode != "off" and not backend.descriptor.face:
        face_chain = FaceDetectorChain(face_mode)

    width, height = (1, 1)
    frames = []
    for t, path in enumerate(files):
        size = _frame_size(path)
        if t == 0:
            width, height = size
        elif size != (width, height):
            raise FrameReadError(f"{path.name} is {size[0]}x{size[1]}, expected {width}x{height}")
        keypoints, face = backend.detect(path, size)
        record: dict = {"frame_index": t, "keypoints": keypoints}
        if face_mode != "off":
            if face_chain is not None:
                face = face_chain.detect(path)
            if face is not None:
                record["face"] = face
        frames.append(record)

    return {
        "version": SCHEMA_VERSION,
        "source_id": frame_dir.name,
        "width": width,
        "height": height,
        "frames": frames,
    }


def write_document_atomic(doc: dict, out: Path) -> None:
    """Write to a temp file in the target directory, then rename into place."""
    out = Path(out)
    tmp = out.with_name(out.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, separators=(",", ":"))
        fh.write("\n")
    os.replace(tmp, out)


def validate_with_primary(path: Path) -> int:
    """Schema-check through the primary toolkit's own CLI."""
    proc = subprocess.run(
        [sys.executable, "-m", "posekit", "validate", str(path)],
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        sys.stderr.write(proc.stderr)
    return proc.returncode
