"""Signature verifiers: function-based DTW and histogram-based Manhattan,
plus tanh score normalization and feature/score fusion.

Scores are oriented as similarities (higher = more genuine); every verifier
also reports the underlying non-negative raw distance.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    ChannelMismatchError,
    DegenerateError,
    EmptyTemplateError,
    LayoutMismatchError,
    TooShortError,
)
from .features import FeatureMatrix

ABS_EPSILON = 0.4  # dead zone for absolute-frequency histogram bins
REL_EPSILON = 0.004  # dead zone for relative-frequency histogram bins
TANH_SLOPE = 0.01

ANGLE_H1_BINS = 16
ANGLE_H2_BINS = 24
ANGLE_H3_BINS = 16  # per axis of the 2D histogram
POSITION_BINS = 16
SIGMA_SPAN = 2.0  # histogram range is [mean - 2*sigma, mean + 2*sigma]


# --------------------------------------------------------------------------
# dynamic time warping

def _dtw_core(dist):
    """Cumulative DP over a local-distance matrix with diagonal/horizontal/
    vertical unit-weight steps.  Minimizes (total cost, path length)
    lexicographically; returns both for the optimal alignment."""
    n, m = dist.shape
    cost = np.empty((n, m))
    plen = np.empty((n, m), dtype=np.int64)
    cost[0, 0] = dist[0, 0]
    plen[0, 0] = 1
    for i in range(1, n):
        cost[i, 0] = cost[i - 1, 0] + dist[i, 0]
        plen[i, 0] = i + 1
    for j in range(1, m):
        cost[0, j] = cost[0, j - 1] + dist[0, j]
        plen[0, j] = j + 1
    for i in range(1, n):
        for j in range(1, m):
            c, p = cost[i - 1, j - 1], plen[i - 1, j - 1]
            if cost[i - 1, j] < c or (cost[i - 1, j] == c and plen[i - 1, j] < p):
                c, p = cost[i - 1, j], plen[i - 1, j]
            if cost[i, j - 1] < c or (cost[i, j - 1] == c and plen[i, j - 1] < p):
                c, p = cost[i, j - 1], plen[i, j - 1]
            cost[i, j] = c + dist[i, j]
            plen[i, j] = p + 1
    return cost[n - 1, m - 1], plen[n - 1, m - 1]


try:  # the DP is a plain Python function; numba only makes it fast
    from numba import njit

    _dtw_core = njit(cache=True)(_dtw_core)
except ImportError:  # pragma: no cover
    pass


def _as_rows(x):
    if isinstance(x, FeatureMatrix):
        return x.rows
    x = np.asarray(x, dtype=float)
    return x.reshape(len(x), -1)


def dtw_distance(a, b) -> float:
    """Minimum-cost monotone alignment (Euclidean local distance), divided
    by the optimal path's length."""
    ra, rb = _as_rows(a), _as_rows(b)
    if ra.shape[1] != rb.shape[1]:
        raise ChannelMismatchError(f"channel counts differ: {ra.shape[1]} vs {rb.shape[1]}")
    cost, plen = _dtw_core(cdist(ra, rb))
    return float(cost) / float(plen)


@dataclass(frozen=True)
class ScoreStats:
    """Mean and spread of a signer's reference-vs-reference scores."""

    mu: float
    sigma: float


@dataclass(frozen=True)
class Score:
    """Similarity value (higher = more genuine) and the raw distance behind it."""

    value: float
    raw_distance: float


def tanh_normalize(raw_scores, stats: ScoreStats):
    """Map raw similarity scores into (0, 1): 0.5*(tanh(0.01*(s - mu)/sigma) + 1)."""
    s = np.asarray(raw_scores, dtype=float)
    sigma = max(stats.sigma, 1e-9)
    out = 0.5 * (np.tanh(TANH_SLOPE * (s - stats.mu) / sigma) + 1.0)
    return float(out) if out.ndim == 0 else out


def fuse_scores(s_p, s_a, omega) -> float:
    """Weighted sum of two tanh-normalized scores: omega*s_p + (1-omega)*s_a."""
    if not 0.0 <= omega <= 1.0:
        raise ValueError("omega must lie in [0, 1]")
    return omega * s_p + (1.0 - omega) * s_a


@dataclass(frozen=True)
class DtwTemplate:
    """Enrolled references plus the signer's score-normalization statistics."""

    signer_id: str
    references: tuple
    ref_mean_distance: float
    stats: ScoreStats


def build_dtw_template(signer_id, references) -> DtwTemplate:
    """Template from >= 2 reference matrices.  The normalization denominator
    is the mean pairwise reference distance; tanh statistics come from each
    reference scored against the remaining ones."""
    refs = tuple(_as_rows(r) for r in references)
    if len(refs) < 2:
        raise EmptyTemplateError("need at least 2 references")
    k = len(refs)
    pair = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            pair[i, j] = pair[j, i] = dtw_distance(refs[i], refs[j])
    mean_ref = max(pair[np.triu_indices(k, 1)].mean(), 1e-9)
    cross = np.array(
        [-min(pair[i, j] for j in range(k) if j != i) / mean_ref for i in range(k)]
    )
    return DtwTemplate(
        signer_id=signer_id,
        references=refs,
        ref_mean_distance=mean_ref,
        stats=ScoreStats(float(cross.mean()), float(cross.std())),
    )


def dtw_verify(template: DtwTemplate, questioned) -> Score:
    """Score a questioned matrix against a DTW template."""
    if not template.references:
        raise EmptyTemplateError("template has no references")
    q = _as_rows(questioned)
    raw = min(dtw_distance(r, q) for r in template.references)
    similarity = -raw / template.ref_mean_distance
    return Score(value=tanh_normalize(similarity, template.stats), raw_distance=raw)


# --------------------------------------------------------------------------
# histograms + Manhattan

@dataclass(frozen=True)
class Segment:
    """One named histogram block; ``relative`` selects the epsilon dead zone."""

    name: str
    length: int
    relative: bool


@dataclass(frozen=True)
class HistogramVector:
    """Concatenated histogram bins with their segment layout."""

    values: np.ndarray
    layout: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if len(self.values) != sum(s.length for s in self.layout):
            raise ValueError("layout lengths do not cover the value vector")

    def __len__(self):
        return len(self.values)

    def segments(self):
        """Yield (segment, values-slice) pairs in layout order."""
        start = 0
        for seg in self.layout:
            yield seg, self.values[start : start + seg.length]
            start += seg.length


def fuse_histograms(a: HistogramVector, b: HistogramVector) -> HistogramVector:
    """Bin concatenation preserving both layouts."""
    return HistogramVector(np.concatenate([a.values, b.values]), a.layout + b.layout)


def _bin_counts(values, n_bins, lo, hi):
    """Counts with out-of-range values clipped into the edge bins; a
    degenerate range puts everything in the middle bin."""
    values = np.asarray(values, dtype=float)
    counts = np.zeros(n_bins)
    if hi - lo < 1e-12:
        counts[n_bins // 2] = len(values)
        return counts
    idx = np.clip(((values - lo) / (hi - lo) * n_bins).astype(int), 0, n_bins - 1)
    np.add.at(counts, idx, 1.0)
    return counts


def _sigma_range(values):
    mu = values.mean()
    sd = values.std()
    return mu - SIGMA_SPAN * sd, mu + SIGMA_SPAN * sd


def angle_histograms(angles) -> HistogramVector:
    """Histogram vector of a joint-angle sequence: 16-bin histograms of the
    first differences (h1), 24-bin histograms of the second differences (h2)
    and per-joint 16x16 histograms of consecutive first-difference pairs
    (h3), each over [mean +/- 2*std] and normalized to unit mass."""
    angles = angles.angle_channels() if hasattr(angles, "angle_channels") else np.asarray(angles, dtype=float)
    if len(angles) < 3:
        raise TooShortError(f"need at least 3 samples, got {len(angles)}")
    chunks, layout = [], []
    diffs = np.diff(angles, axis=0)
    ddiffs = np.diff(diffs, axis=0)
    for k in range(angles.shape[1]):
        dq = diffs[:, k]
        lo, hi = _sigma_range(dq)
        chunks.append(_bin_counts(dq, ANGLE_H1_BINS, lo, hi) / len(dq))
        layout.append(Segment(f"h1_dq{k + 1}", ANGLE_H1_BINS, True))
    for k in range(angles.shape[1]):
        ddq = ddiffs[:, k]
        lo, hi = _sigma_range(ddq)
        chunks.append(_bin_counts(ddq, ANGLE_H2_BINS, lo, hi) / len(ddq))
        layout.append(Segment(f"h2_ddq{k + 1}", ANGLE_H2_BINS, True))
    for k in range(angles.shape[1]):
        dq = diffs[:, k]
        lo, hi = _sigma_range(dq)
        pairs = np.column_stack([dq[:-1], dq[1:]])
        if hi - lo < 1e-12:
            counts2 = np.zeros((ANGLE_H3_BINS, ANGLE_H3_BINS))
            counts2[ANGLE_H3_BINS // 2, ANGLE_H3_BINS // 2] = len(pairs)
        else:
            idx = np.clip(
                ((pairs - lo) / (hi - lo) * ANGLE_H3_BINS).astype(int), 0, ANGLE_H3_BINS - 1
            )
            counts2 = np.zeros((ANGLE_H3_BINS, ANGLE_H3_BINS))
            np.add.at(counts2, (idx[:, 0], idx[:, 1]), 1.0)
        chunks.append(counts2.ravel() / len(pairs))
        layout.append(Segment(f"h3_dq{k + 1}", ANGLE_H3_BINS * ANGLE_H3_BINS, True))
    return HistogramVector(np.concatenate(chunks), tuple(layout))


def _plane_basis(normal):
    """Right-handed in-plane basis (e1, e2) for a plane with ``normal``."""
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    axis = np.zeros(3)
    axis[np.argmin(np.abs(n))] = 1.0
    e1 = axis - (axis @ n) * n
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1)


def position_histograms(seq, normal) -> HistogramVector:
    """Histogram vector of the elbow/wrist/finger paths: each joint path is
    projected onto the plane orthogonal to ``normal``, converted to polar
    coordinates about its projected centroid, and binned radially (over
    [mean +/- 2*std]) and angularly (over [-pi, pi]), in absolute and
    relative frequencies."""
    e1, e2 = _plane_basis(normal)
    chunks, layout = [], []
    for name, path in (("e", seq.elbow), ("w", seq.wrist), ("f", seq.finger)):
        path = np.asarray(path, dtype=float)
        if np.ptp(path, axis=0).max() < 1e-9:
            raise DegenerateError(f"joint path '{name}' collapses to a point")
        u = path @ e1
        v = path @ e2
        u = u - u.mean()
        v = v - v.mean()
        radius = np.hypot(u, v)
        angle = np.arctan2(v, u)
        lo, hi = _sigma_range(radius)
        rad = _bin_counts(radius, POSITION_BINS, lo, hi)
        ang = _bin_counts(angle, POSITION_BINS, -np.pi, np.pi)
        n = len(path)
        chunks += [rad, rad / n, ang, ang / n]
        layout += [
            Segment(f"{name}_rad_abs", POSITION_BINS, False),
            Segment(f"{name}_rad_rel", POSITION_BINS, True),
            Segment(f"{name}_ang_abs", POSITION_BINS, False),
            Segment(f"{name}_ang_rel", POSITION_BINS, True),
        ]
    return HistogramVector(np.concatenate(chunks), tuple(layout))


def manhattan_distance(a: HistogramVector, b: HistogramVector,
                       abs_eps=ABS_EPSILON, rel_eps=REL_EPSILON) -> float:
    """Per-bin L1 distance where only differences above the segment's
    epsilon (absolute- vs relative-frequency dead zone) contribute."""
    if a.layout != b.layout:
        raise LayoutMismatchError("histogram layouts differ")
    total = 0.0
    for (seg, va), (_, vb) in zip(a.segments(), b.segments()):
        d = np.abs(va - vb)
        eps = rel_eps if seg.relative else abs_eps
        total += d[d > eps].sum()
    return float(total)


@dataclass(frozen=True)
class ManhattanTemplate:
    """Per-bin mean of the reference histograms plus normalization stats."""

    signer_id: str
    mean_hist: HistogramVector
    stats: ScoreStats


def build_manhattan_template(signer_id, references) -> ManhattanTemplate:
    """Template from >= 2 reference histograms; tanh statistics come from the
    pairwise reference-vs-reference gated distances."""
    refs = list(references)
    if len(refs) < 2:
        raise EmptyTemplateError("need at least 2 references")
    layout = refs[0].layout
    for r in refs[1:]:
        if r.layout != layout:
            raise LayoutMismatchError("reference layouts differ")
    mean_hist = HistogramVector(np.mean([r.values for r in refs], axis=0), layout)
    cross = np.array(
        [
            -manhattan_distance(refs[i], refs[j])
            for i in range(len(refs))
            for j in range(i + 1, len(refs))
        ]
    )
    return ManhattanTemplate(
        signer_id=signer_id,
        mean_hist=mean_hist,
        stats=ScoreStats(float(cross.mean()), float(cross.std())),
    )


def manhattan_score(template: ManhattanTemplate, questioned: HistogramVector) -> Score:
    """Score a questioned histogram vector against a Manhattan template."""
    raw = manhattan_distance(template.mean_hist, questioned)
    return Score(value=tanh_normalize(-raw, template.stats), raw_distance=raw)
