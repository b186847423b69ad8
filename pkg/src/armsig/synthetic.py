"""Deterministic synthetic signature corpus.

Licensed signature corpora cannot ship with the repository, so tests and
demos run on generated signers: smooth spline strokes with per-sample
jitter and per-signature affine wobble for genuine signatures, and
time-warped, amplitude-scaled, shape-perturbed copies as skilled
forgeries.  Everything derives from ``numpy`` seed sequences, so the same
seed always yields the identical corpus.
"""

import numpy as np
from scipy.interpolate import CubicSpline

from .evaluation import Dataset, SignerRecord
from .trajectory import SignatureTrajectory

CORPUS_SEED = 2024
SAMPLE_PERIOD_MS = 10.0  # 100 Hz
JITTER_MM = 0.3
FORGERY_AMPLITUDE = 0.15  # per-axis scale in [1 - a, 1 + a]


def _spline(rng, n_ctrl, width, height):
    """Control points of a pseudo-signature sweeping left to right."""
    dx = rng.uniform(0.5, 1.5, n_ctrl - 1)
    cx = np.concatenate([[0.0], np.cumsum(dx)])
    cx *= width / cx[-1]
    cy = rng.uniform(-height, height, n_ctrl)
    u = np.linspace(0.0, 1.0, n_ctrl)
    return CubicSpline(u, np.column_stack([cx, cy]), axis=0)


def _pen_gaps(rng, n_gaps):
    """Pen-up intervals in normalized time."""
    gaps = []
    for _ in range(n_gaps):
        start = rng.uniform(0.2, 0.8)
        gaps.append((start, min(start + rng.uniform(0.02, 0.05), 0.95)))
    return gaps


def _render(spline, gaps, m, rng, warp_amp, rot_deg, scale_xy, shift, jitter):
    """Sample one signature instance from a signer prototype."""
    u = np.linspace(0.0, 1.0, m)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    warped = np.clip(u + warp_amp * np.sin(2.0 * np.pi * u + phase), 0.0, 1.0)
    xy = spline(warped)
    rot = np.deg2rad(rot_deg)
    c, s = np.cos(rot), np.sin(rot)
    xy = (xy * scale_xy) @ np.array([[c, s], [-s, c]]) + shift
    xy += rng.normal(0.0, jitter, xy.shape)
    pen_down = np.ones(m, dtype=bool)
    for lo, hi in gaps:
        pen_down[(warped >= lo) & (warped < hi)] = False
    if not pen_down.any():
        pen_down[0] = True
    pressure = np.where(pen_down, 512.0 + rng.normal(0.0, 20.0, m), 0.0)
    t = np.arange(m) * SAMPLE_PERIOD_MS
    return t, xy, pressure, pen_down


def _make_signature(signer_rng, proto, forgery, signer_id, signature_id):
    spline, gaps, m0 = proto
    m = m0 + int(signer_rng.integers(-10, 11))
    if forgery:
        warp = signer_rng.uniform(0.04, 0.09)
        rot = signer_rng.uniform(-5.0, 5.0)
        scale = signer_rng.uniform(1.0 - FORGERY_AMPLITUDE, 1.0 + FORGERY_AMPLITUDE, 2)
    else:
        warp = signer_rng.uniform(0.005, 0.02)
        rot = signer_rng.uniform(-2.0, 2.0)
        scale = signer_rng.uniform(0.96, 1.04, 2)
    shift = signer_rng.uniform(-1.5, 1.5, 2)
    t, xy, pressure, pen_down = _render(
        spline, gaps, m, signer_rng, warp, rot, scale, shift, JITTER_MM
    )
    return SignatureTrajectory(
        t=t,
        x=xy[:, 0],
        y=xy[:, 1],
        z=np.zeros(m),
        pressure=pressure,
        pen_down=pen_down,
        signer_id=signer_id,
        signature_id=signature_id,
        label="skilled_forgery" if forgery else "genuine",
    )


def make_synthetic_dataset(n_signers=20, n_genuine=10, n_forgeries=10, seed=CORPUS_SEED) -> Dataset:
    """The bundled synthetic corpus (defaults reproduce the test fixture)."""
    signers = []
    for i in range(n_signers):
        rng = np.random.default_rng([seed, i])
        proto = (
            _spline(rng, int(rng.integers(9, 14)), rng.uniform(70.0, 95.0), rng.uniform(12.0, 18.0)),
            _pen_gaps(rng, int(rng.integers(1, 3))),
            int(rng.integers(150, 210)),
        )
        signer_id = f"s{i:02d}"
        genuine = [
            _make_signature(rng, proto, False, signer_id, f"g{j:02d}") for j in range(n_genuine)
        ]
        forgeries = [
            _make_signature(rng, proto, True, signer_id, f"f{j:02d}") for j in range(n_forgeries)
        ]
        signers.append(SignerRecord(signer_id=signer_id, genuine=genuine, forgeries=forgeries))
    return Dataset(
        signers=signers,
        metadata={"device": "synthetic", "units": "mm", "sample_rate_hz": 100.0, "seed": seed},
    )
