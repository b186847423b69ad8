"""Experimental protocol: enrollment splits, EER computation, round-trip
SNR validation and the full verification benchmark.

The enrollment protocol uses the first five genuine signatures of each
signer for training and the rest for the false-rejection trials.  Random
forgeries (RF) are the first genuine signature of every other signer;
skilled forgeries (SF) are the signer's own forgery set.  EERs are
computed over the score pools of all signers.
"""

import hashlib
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import EmptyScoresError, InsufficientGenuineError
from .features import (
    ExtractionConfig,
    build_feature_matrix,
    extract,
    extract_anthro,
    preprocess,
    sample_realistic_geometry,
)
from .kinematics import ArmGeometry, default_geometry
from .trajectory import SignatureTrajectory
from .verifiers import (
    angle_histograms,
    build_dtw_template,
    build_manhattan_template,
    dtw_verify,
    fuse_histograms,
    fuse_scores,
    manhattan_score,
    position_histograms,
)

N_ENROLL = 5
SNR_CAP_DB = 300.0


@dataclass
class SignerRecord:
    """One signer's signatures; genuine are in acquisition order."""

    signer_id: str
    genuine: list
    forgeries: list = field(default_factory=list)


@dataclass
class Dataset:
    signers: list
    metadata: dict = field(default_factory=dict)

    @property
    def signer_ids(self):
        return [s.signer_id for s in self.signers]

    @property
    def has_forgeries(self):
        return any(s.forgeries for s in self.signers)

    def get(self, signer_id) -> SignerRecord:
        for s in self.signers:
            if s.signer_id == signer_id:
                return s
        raise KeyError(signer_id)


@dataclass
class ProtocolSplit:
    enroll: list
    test_genuine: list
    rf_impostors: list
    sf_impostors: list


def split_protocol(ds: Dataset):
    """Per-signer splits: 5 enroll, remaining genuine for FRR, other users'
    first genuine for RF, own skilled forgeries for SF."""
    for s in ds.signers:
        if len(s.genuine) < N_ENROLL + 1:
            raise InsufficientGenuineError(
                f"signer {s.signer_id} has {len(s.genuine)} genuine signatures; "
                f"the protocol needs at least {N_ENROLL + 1}"
            )
    first = {s.signer_id: s.genuine[0] for s in ds.signers}
    splits = {}
    for s in ds.signers:
        splits[s.signer_id] = ProtocolSplit(
            enroll=list(s.genuine[:N_ENROLL]),
            test_genuine=list(s.genuine[N_ENROLL:]),
            rf_impostors=[first[o] for o in ds.signer_ids if o != s.signer_id],
            sf_impostors=list(s.forgeries),
        )
    return splits


def _rates(genuine, impostor, thresholds):
    """FRR (reject genuine < t) and FAR (accept impostor >= t) per threshold."""
    g = np.sort(np.asarray(genuine, dtype=float))
    i = np.sort(np.asarray(impostor, dtype=float))
    frr = np.searchsorted(g, thresholds, side="left") / len(g)
    far = (len(i) - np.searchsorted(i, thresholds, side="left")) / len(i)
    return far, frr


def roc_points(genuine_scores, impostor_scores):
    """(thresholds, far, frr) over the pooled score set; accept iff score >= t."""
    g = np.asarray(genuine_scores, dtype=float)
    i = np.asarray(impostor_scores, dtype=float)
    if g.size == 0 or i.size == 0:
        raise EmptyScoresError("both score lists must be non-empty")
    thresholds = np.unique(np.concatenate([g, i]))
    thresholds = np.append(thresholds, thresholds[-1] + 1.0)
    far, frr = _rates(g, i, thresholds)
    return thresholds, far, frr


def compute_eer(genuine_scores, impostor_scores) -> float:
    """Equal error rate in percent: the FAR/FRR crossing over a threshold
    sweep, linearly interpolated between adjacent ROC points."""
    _, far, frr = roc_points(genuine_scores, impostor_scores)
    d = far - frr  # non-increasing from +1-ish to -1-ish
    k = int(np.flatnonzero(d >= 0)[-1])
    if k == len(d) - 1:
        return float(100.0 * frr[k])
    lam = d[k] / (d[k] - d[k + 1])
    return float(100.0 * (frr[k] + lam * (frr[k + 1] - frr[k])))


def _xy(traj):
    if isinstance(traj, SignatureTrajectory):
        return np.column_stack([traj.x, traj.y])
    p = np.asarray(traj, dtype=float)
    return p[:, :2]


def _resample_arclength(p, n):
    """Resample a polyline to n points, uniform in arc length."""
    seg = np.linalg.norm(np.diff(p, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] < 1e-12:
        s = np.linspace(0.0, 1.0, len(p))
    else:
        s = s / s[-1]
    keep = np.concatenate([[True], np.diff(s) > 0])
    s, p = s[keep], p[keep]
    u = np.linspace(0.0, 1.0, n)
    return np.column_stack([np.interp(u, s, p[:, k]) for k in range(p.shape[1])])


def snr(a, b, cap=SNR_CAP_DB) -> float:
    """Signal-to-noise ratio (dB) of trajectory ``b`` reconstructing ``a``:
    10*log10 of centered-signal energy over residual energy, computed on the
    planar coordinates.  Unequal lengths are resampled (linear, arc-length
    uniform) to the longer one; a zero residual returns the ``cap``."""
    pa, pb = _xy(a), _xy(b)
    if len(pa) != len(pb):
        n = max(len(pa), len(pb))
        pa = _resample_arclength(pa, n)
        pb = _resample_arclength(pb, n)
    centered = pa - pa.mean(axis=0)
    num = float((centered**2).sum())
    den = float(((pa - pb) ** 2).sum())
    if den <= 0.0:
        return cap
    if num <= 0.0:
        return -cap
    return float(np.clip(10.0 * np.log10(num / den), -cap, cap))


def derive_signer_seed(seed, signer_id) -> int:
    """Stable per-signer RNG seed from the global seed and the signer id."""
    digest = hashlib.sha256(f"{seed}:{signer_id}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def signer_geometry(geometry_mode, seed, signer_id) -> ArmGeometry:
    if geometry_mode == "fixed":
        return default_geometry()
    if geometry_mode == "realistic":
        return sample_realistic_geometry(derive_signer_seed(seed, signer_id))
    raise ValueError(f"unknown geometry mode '{geometry_mode}'")


def roundtrip_validation(ds: Dataset, g: ArmGeometry = None, config: ExtractionConfig = None):
    """Reconstruction check for every signature: extract angles, rebuild the
    pen path through the forward kinematics, report the SNR.  Returns a list
    of dicts with signer_id, signature_id, label and snr_db."""
    g = g if g is not None else default_geometry()
    config = config if config is not None else ExtractionConfig()
    out = []
    for signer in ds.signers:
        for traj in list(signer.genuine) + list(signer.forgeries):
            pre = preprocess(traj, g, config)
            seq = extract_anthro(pre, g, config)
            value = snr(pre.positions, seq.finger)
            out.append(
                {
                    "signer_id": signer.signer_id,
                    "signature_id": traj.signature_id,
                    "label": traj.label,
                    "snr_db": value,
                }
            )
    return out


@dataclass
class EERReport:
    """Benchmark result: configuration echo, EERs, score pools, ROC points."""

    verifier: str
    features: str
    fusion: str
    omega: float
    geometry_mode: str
    seed: int
    eer_rf: float
    eer_sf: Optional[float]
    score_counts: dict
    runtime_s: float
    scores: dict
    roc_rf: dict
    roc_sf: Optional[dict]

    def to_dict(self):
        return {
            "verifier": self.verifier,
            "features": self.features,
            "fusion": self.fusion,
            "omega": self.omega,
            "geometry_mode": self.geometry_mode,
            "seed": self.seed,
            "eer_rf_percent": self.eer_rf,
            "eer_sf_percent": self.eer_sf,
            "score_counts": self.score_counts,
            "runtime_s": self.runtime_s,
            "scores": self.scores,
        }


def _signer_scores(signer_id, split, kinds, verifier, g, config):
    """Normalized scores per feature kind for one signer's trials."""
    cache = {}

    def seq_of(traj):
        key = id(traj)
        if key not in cache:
            cache[key] = extract(traj, g, config)
        return cache[key]

    def rep(traj, kind):
        seq = seq_of(traj)
        if verifier == "dtw":
            return build_feature_matrix(seq, kind)
        if kind == "position":
            return position_histograms(seq, config.plane_normal)
        if kind == "angle":
            return angle_histograms(seq)
        return fuse_histograms(
            position_histograms(seq, config.plane_normal), angle_histograms(seq)
        )

    out = {}
    for kind in kinds:
        refs = [rep(t, kind) for t in split.enroll]
        if verifier == "dtw":
            template = build_dtw_template(signer_id, refs)
            score = lambda t: dtw_verify(template, rep(t, kind)).value
        else:
            template = build_manhattan_template(signer_id, refs)
            score = lambda t: manhattan_score(template, rep(t, kind)).value
        out[kind] = {
            "genuine": [score(t) for t in split.test_genuine],
            "rf": [score(t) for t in split.rf_impostors],
            "sf": [score(t) for t in split.sf_impostors],
        }
    return out


def run_benchmark(
    ds: Dataset,
    verifier="dtw",
    features="fused",
    fusion="score",
    omega=None,
    geometry_mode="fixed",
    seed=0,
    config: ExtractionConfig = None,
    n_jobs=1,
) -> EERReport:
    """Full verification experiment on a dataset.

    ``fusion='score'`` runs position and angle verifiers separately and
    fuses their normalized scores with weight ``omega``; ``fusion='feature'``
    verifies the concatenated representation; ``fusion='none'`` uses the
    single ``features`` kind.  Deterministic for a given (dataset, config,
    seed), independent of ``n_jobs``.
    """
    if verifier not in ("dtw", "man"):
        raise ValueError(f"unknown verifier '{verifier}'")
    if fusion not in ("none", "feature", "score"):
        raise ValueError(f"unknown fusion mode '{fusion}'")
    config = config if config is not None else ExtractionConfig()
    omega = config.fuse_omega if omega is None else float(omega)
    t0 = time.perf_counter()
    splits = split_protocol(ds)
    if fusion == "score":
        kinds = ("position", "angle")
    elif fusion == "feature":
        kinds, features = ("fused",), "fused"
    else:
        kinds = (features,)

    def work(signer_id):
        g = signer_geometry(geometry_mode, seed, signer_id)
        return _signer_scores(signer_id, splits[signer_id], kinds, verifier, g, config)

    ids = sorted(splits)
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            per_signer = dict(zip(ids, pool.map(work, ids)))
    else:
        per_signer = {sid: work(sid) for sid in ids}

    pools = {"genuine": [], "rf": [], "sf": []}
    for sid in ids:
        result = per_signer[sid]
        for group in pools:
            if fusion == "score":
                fused = [
                    fuse_scores(sp, sa, omega)
                    for sp, sa in zip(result["position"][group], result["angle"][group])
                ]
            else:
                fused = list(result[kinds[0]][group])
            pools[group].extend(fused)

    eer_rf = compute_eer(pools["genuine"], pools["rf"])
    thr_rf, far_rf, frr_rf = roc_points(pools["genuine"], pools["rf"])
    if pools["sf"]:
        eer_sf = compute_eer(pools["genuine"], pools["sf"])
        thr_sf, far_sf, frr_sf = roc_points(pools["genuine"], pools["sf"])
        roc_sf = {"threshold": thr_sf.tolist(), "far": far_sf.tolist(), "frr": frr_sf.tolist()}
    else:
        eer_sf, roc_sf = None, None
    return EERReport(
        verifier=verifier,
        features=features if fusion != "score" else "position+angle",
        fusion=fusion,
        omega=omega,
        geometry_mode=geometry_mode,
        seed=seed,
        eer_rf=eer_rf,
        eer_sf=eer_sf,
        score_counts={k: len(v) for k, v in pools.items()},
        runtime_s=time.perf_counter() - t0,
        scores={k: list(map(float, v)) for k, v in pools.items()},
        roc_rf={"threshold": thr_rf.tolist(), "far": far_rf.tolist(), "frr": frr_rf.tolist()},
        roc_sf=roc_sf,
    )
