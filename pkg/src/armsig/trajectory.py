"""Pen trajectories as recorded by a digitizing tablet.

A :class:`SignatureTrajectory` stores the samples as parallel numpy arrays
(fast path for the extraction pipeline); :class:`PenSample` is the scalar
view of one row.  Coordinates are millimetres, timestamps milliseconds,
angles radians.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class PenSample:
    """One tablet sample: position, pressure, timing, pen orientation, state."""

    x: float
    y: float
    z: float
    pressure: float
    t: float
    theta: Optional[float]
    phi: Optional[float]
    pen_down: bool


@dataclass
class SignatureTrajectory:
    """Ordered pen samples plus identity metadata.

    ``theta``/``phi`` are None until a pen-angle mode resolves them (most
    public corpora do not provide pen orientation).  Pressure is carried
    through in device units; no downstream feature consumes it.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    pressure: np.ndarray
    pen_down: np.ndarray
    theta: Optional[np.ndarray] = None
    phi: Optional[np.ndarray] = None
    signer_id: str = ""
    signature_id: str = ""
    label: str = "genuine"  # genuine | skilled_forgery

    def __post_init__(self):
        for name in ("t", "x", "y", "z", "pressure"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        self.pen_down = np.asarray(self.pen_down, dtype=bool)
        for name in ("theta", "phi"):
            v = getattr(self, name)
            if v is not None:
                setattr(self, name, np.asarray(v, dtype=float))
        n = len(self.t)
        if n == 0:
            raise ValueError("empty trajectory")
        for name in ("x", "y", "z", "pressure", "pen_down"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"field {name} length mismatch")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        if not self.pen_down.any():
            raise ValueError("trajectory has no pen-down sample")

    def __len__(self):
        return len(self.t)

    @property
    def positions(self):
        """(n, 3) array of pen positions."""
        return np.column_stack([self.x, self.y, self.z])

    @property
    def has_angles(self):
        return self.theta is not None and self.phi is not None

    def sample(self, i) -> PenSample:
        return PenSample(
            x=float(self.x[i]),
            y=float(self.y[i]),
            z=float(self.z[i]),
            pressure=float(self.pressure[i]),
            t=float(self.t[i]),
            theta=None if self.theta is None else float(self.theta[i]),
            phi=None if self.phi is None else float(self.phi[i]),
            pen_down=bool(self.pen_down[i]),
        )

    @property
    def samples(self):
        """Samples as a list of :class:`PenSample`."""
        return [self.sample(i) for i in range(len(self))]

    def copy(self, **overrides):
        """Shallow metadata copy with fresh arrays; keyword fields replace."""
        base = dict(
            t=self.t.copy(),
            x=self.x.copy(),
            y=self.y.copy(),
            z=self.z.copy(),
            pressure=self.pressure.copy(),
            pen_down=self.pen_down.copy(),
            theta=None if self.theta is None else self.theta.copy(),
            phi=None if self.phi is None else self.phi.copy(),
            signer_id=self.signer_id,
            signature_id=self.signature_id,
            label=self.label,
        )
        base.update(overrides)
        return SignatureTrajectory(**base)

    @classmethod
    def from_samples(cls, samples, signer_id="", signature_id="", label="genuine"):
        """Build from an iterable of :class:`PenSample`."""
        samples = list(samples)
        has_angles = samples and samples[0].theta is not None
        return cls(
            t=[s.t for s in samples],
            x=[s.x for s in samples],
            y=[s.y for s in samples],
            z=[s.z for s in samples],
            pressure=[s.pressure for s in samples],
            pen_down=[s.pen_down for s in samples],
            theta=[s.theta for s in samples] if has_angles else None,
            phi=[s.phi for s in samples] if has_angles else None,
            signer_id=signer_id,
            signature_id=signature_id,
            label=label,
        )
