"""Skeleton rasterization, face-center alignment, edge-replication shifts, crossfades, PNG frame I/O."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from PIL import Image

from .errors import DimensionMismatch, ShiftTooLarge
from .pose import JOINT_COUNT, PoseFrame

FRAME_NAME_FORMAT = "frame_%06d.png"

# The 17 standard COCO-18 bones: head, both arms off the neck, torso down to
# the hips, both legs, and the nose-eye-ear face links.
COCO_LIMBS: tuple[tuple[int, int], ...] = (
    (0, 1),
    (1, 2),
    (1, 5),
    (2, 3),
    (3, 4),
    (5, 6),
    (6, 7),
    (1, 8),
    (1, 11),
    (8, 9),
    (9, 10),
    (11, 12),
    (12, 13),
    (0, 14),
    (0, 15),
    (14, 16),
    (15, 17),
)


@dataclass(frozen=True, eq=False)
class RasterImage:
    """An 8-bit RGB raster, shape (height, width, 3), origin top-left."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        p = self.pixels
        if not isinstance(p, np.ndarray) or p.ndim != 3 or p.shape[2] != 3 or p.dtype != np.uint8:
            raise ValueError("pixels must be a (height, width, 3) uint8 array")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def zeros(cls, width: int, height: int) -> "RasterImage":
        return cls(np.zeros((height, width, 3), dtype=np.uint8))


@dataclass(frozen=True)
class Contour:
    """A named facial polyline (jawline, eyebrow, lips, ...) in pixel coordinates."""

    name: str
    points: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class FaceAnnotation:
    """Face bounding box plus feature contours for one frame."""

    bbox: tuple[float, float, float, float]  # left, top, right, bottom
    contours: tuple[Contour, ...] = ()

    def __post_init__(self) -> None:
        left, top, right, bottom = self.bbox
        if not (left < right and top < bottom):
            raise ValueError(f"degenerate face bbox {self.bbox}")


@dataclass(frozen=True)
class SkeletonStyle:
    """Stroke geometry and channel assignment for skeleton rendering.

    Channels: the skeleton is drawn into ``skeleton_channel``, face contours
    into ``face_channel``, and ``reserved_channel`` is always left black.
    """

    limb_pairs: tuple[tuple[int, int], ...] = COCO_LIMBS
    joint_radius: int = 4
    line_thickness: int = 4
    skeleton_channel: int = 0
    face_channel: int = 1
    reserved_channel: int = 2

    def __post_init__(self) -> None:
        channels = (self.skeleton_channel, self.face_channel, self.reserved_channel)
        if sorted(channels) != [0, 1, 2]:
            raise ValueError(f"channel assignments must be a permutation of 0,1,2, got {channels}")
        for pair in self.limb_pairs:
            if not all(0 <= i < JOINT_COUNT for i in pair):
                raise ValueError(f"limb pair {pair} references a joint outside [0, {JOINT_COUNT - 1}]")
        if self.joint_radius < 1 or self.line_thickness < 1:
            raise ValueError("joint_radius and line_thickness must be >= 1")

    @classmethod
    def scaled_to(cls, height: float, **overrides) -> "SkeletonStyle":
        """Default 4 px strokes at a 512 px frame height, scaled proportionally."""
        size = max(1, round(4 * height / 512))
        params = {"joint_radius": size, "line_thickness": size}
        params.update(overrides)
        return cls(**params)


# ---------------- drawing primitives ----------------


@lru_cache(maxsize=None)
def _disc_offsets(radius: int) -> np.ndarray:
    span = np.arange(-radius, radius + 1)
    dx, dy = np.meshgrid(span, span)
    keep = dx * dx + dy * dy <= radius * radius
    return np.stack([dx[keep], dy[keep]], axis=1)


def _stamp(mask: np.ndarray, centers: np.ndarray, radius: int) -> None:
    """Mark a disc of ``radius`` around each (x, y) center, clipped to the mask."""
    if centers.size == 0:
        return
    points = (centers[:, None, :] + _disc_offsets(radius)[None, :, :]).reshape(-1, 2)
    h, w = mask.shape
    ok = (points[:, 0] >= 0) & (points[:, 0] < w) & (points[:, 1] >= 0) & (points[:, 1] < h)
    points = points[ok]
    mask[points[:, 1], points[:, 0]] = True


def _line_points(x0: int, y0: int, x1: int, y1: int) -> np.ndarray:
    # Integer midpoint (Bresenham) walk; deterministic across platforms.
    points = []
    dx = abs(x1 - x0)
    sx = 1 if x0 < x1 else -1
    dy = -abs(y1 - y0)
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        points.append((x, y))
        if x == x1 and y == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy
    return np.array(points, dtype=np.int64)


def _px(value: float) -> int:
    return int(round(float(value)))


def render_skeleton(
    pose: PoseFrame,
    face: Optional[FaceAnnotation] = None,
    dims: Sequence[float] = (512, 512),
    style: Optional[SkeletonStyle] = None,
) -> RasterImage:
    """Rasterize a pose (and optional face contours) onto a black canvas.

    Joints become filled discs and limbs become thick lines at 255 in the
    skeleton channel; face polylines go to the face channel; the reserved
    channel stays all-zero.  Limbs with a missing endpoint are omitted, and
    out-of-frame geometry is clipped silently.
    """
    width, height = int(dims[0]), int(dims[1])
    if width <= 0 or height <= 0:
        raise ValueError(f"dims must be positive, got {dims!r}")
    if style is None:
        style = SkeletonStyle.scaled_to(height)
    skeleton = np.zeros((height, width), dtype=bool)
    face_mask = np.zeros((height, width), dtype=bool)
    stroke = max(0, style.line_thickness // 2)

    for i, j in style.limb_pairs:
        a, b = pose.joints[i], pose.joints[j]
        if a is None or b is None:
            continue
        _stamp(skeleton, _line_points(_px(a.x), _px(a.y), _px(b.x), _px(b.y)), stroke)
    for joint in pose.joints:
        if joint is None:
            continue
        _stamp(skeleton, np.array([[_px(joint.x), _px(joint.y)]], dtype=np.int64), style.joint_radius)

    if face is not None:
        for contour in face.contours:
            points = [(_px(x), _px(y)) for x, y in contour.points]
            if len(points) == 1:
                _stamp(face_mask, np.array(points, dtype=np.int64), stroke)
            for (x0, y0), (x1, y1) in zip(points, points[1:]):
                _stamp(face_mask, _line_points(x0, y0, x1, y1), stroke)

    img = np.zeros((height, width, 3), dtype=np.uint8)
    img[:, :, style.skeleton_channel][skeleton] = 255
    img[:, :, style.face_channel][face_mask] = 255
    return RasterImage(img)


# ---------------- alignment and blending ----------------


def face_center(face: FaceAnnotation) -> tuple[float, float]:
    """Center of the face bounding box, real-valued."""
    left, top, right, bottom = face.bbox
    return ((left + right) / 2.0, (top + bottom) / 2.0)


def translate_edge_replicate(img: RasterImage, dx: int, dy: int) -> RasterImage:
    """Shift content by (dx, dy), replicating the nearest edge row/column into
    the exposed margin.  Output pixel (x, y) reads input pixel
    (clamp(x - dx), clamp(y - dy))."""
    w, h = img.width, img.height
    if abs(dx) >= w or abs(dy) >= h:
        raise ShiftTooLarge(f"shift ({dx}, {dy}) meets or exceeds image dims {w}x{h}")
    xs = np.clip(np.arange(w) - dx, 0, w - 1)
    ys = np.clip(np.arange(h) - dy, 0, h - 1)
    return RasterImage(img.pixels[np.ix_(ys, xs)])


def align_sequence(frames: Sequence[RasterImage], faces: Sequence[FaceAnnotation]) -> list[RasterImage]:
    """Shift every frame so its face center lands on the first frame's.

    Offsets are rounded to whole pixels, so each aligned face center sits
    within 0.5 px per axis of the first frame's center.
    """
    if len(frames) != len(faces):
        raise ValueError(f"{len(frames)} frames but {len(faces)} face annotations")
    if not frames:
        return []
    dims = (frames[0].width, frames[0].height)
    for n, frame in enumerate(frames):
        if (frame.width, frame.height) != dims:
            raise DimensionMismatch(f"frame {n} is {frame.width}x{frame.height}, expected {dims[0]}x{dims[1]}")
    cx0, cy0 = face_center(faces[0])
    out = [frames[0]]
    for frame, face in zip(frames[1:], faces[1:]):
        cx, cy = face_center(face)
        out.append(translate_edge_replicate(frame, _px(cx0 - cx), _px(cy0 - cy)))
    return out


def blend_frames(a: RasterImage, b: RasterImage, alpha: float) -> RasterImage:
    """Per-pixel crossfade round((1-alpha)*a + alpha*b); exact copy at alpha 0 or 1."""
    if a.pixels.shape != b.pixels.shape:
        raise DimensionMismatch(f"cannot blend {a.width}x{a.height} with {b.width}x{b.height}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if alpha == 0.0:
        return RasterImage(a.pixels.copy())
    if alpha == 1.0:
        return RasterImage(b.pixels.copy())
    mixed = (1.0 - alpha) * a.pixels.astype(np.float64) + alpha * b.pixels.astype(np.float64)
    return RasterImage(np.rint(mixed).astype(np.uint8))


# ---------------- PNG frame directories ----------------


def frame_path(directory: Path | str, index: int) -> Path:
    return Path(directory) / (FRAME_NAME_FORMAT % index)


def list_frames(directory: Path | str) -> list[Path]:
    """PNG frames in a directory, in naming-convention order."""
    return sorted(Path(directory).glob("frame_*.png"))


def save_frame(img: RasterImage, path: Path | str) -> None:
    Image.fromarray(img.pixels, mode="RGB").save(path, format="PNG")


def load_frame(path: Path | str) -> RasterImage:
    with Image.open(path) as im:
        return RasterImage(np.asarray(im.convert("RGB"), dtype=np.uint8))
