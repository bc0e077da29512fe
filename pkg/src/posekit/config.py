"""Pipeline configuration: a single flat JSON object, strictly parsed.

CLI flags override config values, which override the built-in defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .pose import CandidatePolicy, MatchParams
from .raster import SkeletonStyle

# JSON key -> dataclass field.  "lambda" is the external name of the switch
# threshold (it is a keyword in Python).
_KEY_TO_FIELD = {
    "k": "k",
    "lambda": "min_improvement",
    "normalize": "normalize",
    "candidate_policy": "candidate_policy",
    "max_distance": "max_distance",
    "interpolation_factor": "interpolation_factor",
    "joint_radius": "joint_radius",
    "line_thickness": "line_thickness",
    "skeleton_channel": "skeleton_channel",
    "face_channel": "face_channel",
    "reserved_channel": "reserved_channel",
}

_POLICY_TOKENS = {
    "min_distance": CandidatePolicy.MIN_DISTANCE,
    "min-distance": CandidatePolicy.MIN_DISTANCE,
    "nearest_prev_index": CandidatePolicy.NEAREST_PREV_INDEX,
    "nearest-prev": CandidatePolicy.NEAREST_PREV_INDEX,
}


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


@dataclass(frozen=True)
class PipelineConfig:
    k: int = 1
    min_improvement: float = 0.0
    normalize: bool = True
    candidate_policy: CandidatePolicy = CandidatePolicy.NEAREST_PREV_INDEX
    max_distance: Optional[float] = None
    interpolation_factor: int = 1
    joint_radius: Optional[int] = None
    line_thickness: Optional[int] = None
    skeleton_channel: int = 0
    face_channel: int = 1
    reserved_channel: int = 2

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.min_improvement < 0:
            raise ValueError(f"lambda must be >= 0, got {self.min_improvement}")
        if self.max_distance is not None and self.max_distance < 0:
            raise ValueError(f"max_distance must be >= 0, got {self.max_distance}")
        if self.interpolation_factor < 1:
            raise ValueError(f"interpolation_factor must be >= 1, got {self.interpolation_factor}")
        for name in ("joint_radius", "line_thickness"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")
        channels = (self.skeleton_channel, self.face_channel, self.reserved_channel)
        if sorted(channels) != [0, 1, 2]:
            raise ValueError(f"channel assignments must be a permutation of 0,1,2, got {channels}")
        object.__setattr__(self, "candidate_policy", CandidatePolicy(self.candidate_policy))

    def match_params(self) -> MatchParams:
        return MatchParams(
            k=self.k,
            min_improvement=self.min_improvement,
            normalize=self.normalize,
            candidate_policy=self.candidate_policy,
        )

    def style_for(self, height: float) -> SkeletonStyle:
        """Skeleton style at the given frame height, honoring explicit overrides."""
        base = SkeletonStyle.scaled_to(height)
        return SkeletonStyle(
            joint_radius=self.joint_radius if self.joint_radius is not None else base.joint_radius,
            line_thickness=self.line_thickness if self.line_thickness is not None else base.line_thickness,
            skeleton_channel=self.skeleton_channel,
            face_channel=self.face_channel,
            reserved_channel=self.reserved_channel,
        )


def config_from_mapping(data: dict, where: str = "config") -> PipelineConfig:
    if not isinstance(data, dict):
        raise ConfigError(where, "config must be a single JSON object")
    unknown = sorted(set(data) - set(_KEY_TO_FIELD))
    if unknown:
        raise ConfigError(where, f"unknown key(s): {', '.join(unknown)}")
    kwargs = {}
    for key, value in data.items():
        field = _KEY_TO_FIELD[key]
        path = f"{where}.{key}"
        if key in ("k", "interpolation_factor", "skeleton_channel", "face_channel", "reserved_channel"):
            if not _is_int(value):
                raise ConfigError(path, f"expected an integer, got {value!r}")
        elif key in ("lambda", "max_distance"):
            if value is not None and (isinstance(value, bool) or not isinstance(value, (int, float))):
                raise ConfigError(path, f"expected a number, got {value!r}")
            if value is not None:
                value = float(value)
        elif key == "normalize":
            if not isinstance(value, bool):
                raise ConfigError(path, f"expected a boolean, got {value!r}")
        elif key == "candidate_policy":
            if value not in _POLICY_TOKENS:
                raise ConfigError(path, f"expected one of {sorted(_POLICY_TOKENS)}, got {value!r}")
            value = _POLICY_TOKENS[value]
        elif key in ("joint_radius", "line_thickness"):
            if value is not None and not _is_int(value):
                raise ConfigError(path, f"expected an integer or null, got {value!r}")
        kwargs[field] = value
    try:
        return PipelineConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None


def load_config(path: Path | str) -> PipelineConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"not valid JSON: {exc}") from exc
    return config_from_mapping(data, where=str(path))
