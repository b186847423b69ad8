"""armsig: anthropomorphic arm features and verifiers for on-line signatures.

A six-joint virtual arm maps 2D pen trajectories to joint-angle and
3D joint-position sequences; DTW- and histogram/Manhattan-based verifiers
score them, with feature- and score-level fusion and an EER evaluation
harness.
"""

from .errors import (
    ArmsigError,
    ChannelMismatchError,
    DegenerateError,
    EmptyScoresError,
    EmptyTemplateError,
    InsufficientGenuineError,
    LayoutMismatchError,
    LengthMismatchError,
    MissingAnglesError,
    MissingManifestError,
    ParseError,
    SingularError,
    TooShortError,
    UnreachableError,
)
from .evaluation import (
    Dataset,
    EERReport,
    SignerRecord,
    compute_eer,
    roc_points,
    roundtrip_validation,
    run_benchmark,
    snr,
    split_protocol,
)
from .features import (
    AnthroSequence,
    ExtractionConfig,
    FeatureMatrix,
    anchor_to_workspace,
    apply_penup_lift,
    apply_scale,
    assign_gender,
    build_feature_matrix,
    extract,
    extract_anthro,
    fuse_feature_matrices,
    preprocess,
    resolve_pen_angles,
    rotate_writing_plane,
    sample_realistic_geometry,
)
from .kinematics import (
    INITIAL_PEN_POSITION,
    INITIAL_POSTURE,
    ArmGeometry,
    DHRow,
    JointAngles,
    JointPositions,
    default_geometry,
    dh_table,
    dh_transform,
    forward_pose,
    forward_positions,
    forward_transforms,
    inverse_kinematics,
    pen_pose_matrix,
)
from .io import load_dataset, save_dataset
from .synthetic import make_synthetic_dataset
from .trajectory import PenSample, SignatureTrajectory
from .transforms import Transform4, compose, invert
from .verifiers import (
    HistogramVector,
    Score,
    ScoreStats,
    angle_histograms,
    build_dtw_template,
    build_manhattan_template,
    dtw_distance,
    dtw_verify,
    fuse_histograms,
    fuse_scores,
    manhattan_distance,
    manhattan_score,
    position_histograms,
    tanh_normalize,
)

__version__ = "0.1.0"
