"""posekit: pose-matrix nearest-neighbor matching and training-pair dataset tooling.

Pairs two annotated video sessions by body pose: brute-force L2 k-NN over
COCO-18 keypoint frames, hysteresis-thresholded frame selection, crossfade
interpolation planning, skeleton rasterization, and face-center alignment.
"""

from .annotations import (
    SCHEMA_VERSION,
    document_from_sequence,
    load_document,
    load_pose_sequence,
    validate_document,
    write_document,
)
from .config import PipelineConfig, config_from_mapping, load_config
from .errors import (
    ConfigError,
    DimensionMismatch,
    EmptyCandidates,
    EmptySequence,
    JointNeverObserved,
    MissingJoint,
    PosekitError,
    SchemaError,
    ShiftTooLarge,
)
from .manifests import read_frame_mapping, read_pair_manifest, write_frame_mapping, write_pair_manifest
from .pose import (
    JOINT_COUNT,
    JOINT_NAMES,
    CandidatePolicy,
    Joint,
    MatchParams,
    PoseFrame,
    PoseSequence,
    frame_vector,
    impute_missing_joints,
    knn_query,
    lerp_pose,
    pose_distance,
    sequence_matrix,
)
from .raster import (
    COCO_LIMBS,
    Contour,
    FaceAnnotation,
    RasterImage,
    SkeletonStyle,
    align_sequence,
    blend_frames,
    face_center,
    frame_path,
    list_frames,
    load_frame,
    render_skeleton,
    save_frame,
    translate_edge_replicate,
)
from .transfer import (
    FrameMapping,
    MappingEntry,
    Pair,
    PairManifest,
    RenderInstruction,
    build_pairs_manifest,
    interpolate_plan,
    match_sequence,
    select_frame,
)

__version__ = "0.1.0"
