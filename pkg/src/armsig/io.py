"""Dataset ingestion and serialization.

Canonical on-disk layout::

    dataset_root/
      manifest.txt               # key=value: format, units or lines_per_mm, ...
      <signer_id>/genuine/*.tsv  # sorted filenames = acquisition order
      <signer_id>/forgery/*.tsv  # optional

Canonical files are tab-separated with a mandatory ``#columns:`` header:
``t_ms x y pressure pen_state [azimuth_rad inclination_rad]``.  SVC-style
exports (``x y t_ms pen_state [azimuth altitude pressure]`` with a leading
sample count) load through the same manifest; x/y are converted to mm via
``lines_per_mm`` when the units are device counts.
"""

from pathlib import Path

import numpy as np

from .errors import MissingManifestError, ParseError
from .evaluation import Dataset, SignerRecord
from .trajectory import SignatureTrajectory

MANIFEST_NAME = "manifest.txt"
FORMATS = ("canonical_tsv", "svc_style")
CANONICAL_COLUMNS = ("t_ms", "x", "y", "pressure", "pen_state")
ANGLE_COLUMNS = ("azimuth_rad", "inclination_rad")


def parse_keyvalue(path) -> dict:
    """Plain-text key=value file; '#' starts a comment."""
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(path, 0, f"expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def write_keyvalue(path, mapping):
    lines = [f"{k}={v}" for k, v in mapping.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def _to_mm(x, y, units, lines_per_mm, path):
    if units == "mm":
        return x, y
    if lines_per_mm is None:
        raise ParseError(path, 0, "device units need lines_per_mm in the manifest or header")
    return x / lines_per_mm, y / lines_per_mm


def _check_monotonic(t_list, path, line_nos):
    for k in range(1, len(t_list)):
        if t_list[k] <= t_list[k - 1]:
            raise ParseError(path, line_nos[k], "timestamp not strictly increasing")


def _build_trajectory(path, rows, has_angles, meta):
    if not rows:
        raise ParseError(path, 0, "file has no samples")
    arr = np.array([r[:-1] for r in rows], dtype=float)
    line_nos = [r[-1] for r in rows]
    _check_monotonic(arr[:, 0].tolist(), path, line_nos)
    x, y = _to_mm(arr[:, 1], arr[:, 2], meta["units"], meta["lines_per_mm"], path)
    try:
        return SignatureTrajectory(
            t=arr[:, 0],
            x=x,
            y=y,
            z=np.zeros(len(arr)),
            pressure=arr[:, 3],
            pen_down=arr[:, 4] > 0,
            theta=arr[:, 5] if has_angles else None,
            phi=arr[:, 6] if has_angles else None,
        )
    except ValueError as e:
        raise ParseError(path, 0, str(e)) from e


def _load_canonical(path, meta):
    header = {}
    rows = []
    columns = None
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if ":" in line:
                key, value = line[1:].split(":", 1)
                header[key.strip()] = value.strip()
            continue
        if columns is None:
            if "columns" not in header:
                raise ParseError(path, line_no, "missing #columns header")
            columns = tuple(header["columns"].split())
            if len(columns) not in (5, 7) or columns[:5] != CANONICAL_COLUMNS:
                raise ParseError(path, line_no, f"unsupported column layout {columns}")
        fields = line.split("\t")
        if len(fields) != len(columns):
            raise ParseError(path, line_no, f"expected {len(columns)} fields, got {len(fields)}")
        try:
            rows.append([float(f) for f in fields] + [line_no])
        except ValueError as e:
            raise ParseError(path, line_no, str(e)) from e
    if columns is None:
        raise ParseError(path, 0, "file has no samples")
    file_meta = dict(meta)
    if "units" in header:
        file_meta["units"] = header["units"]
    if "lines_per_mm" in header:
        file_meta["lines_per_mm"] = float(header["lines_per_mm"])
    return _build_trajectory(path, rows, len(columns) == 7, file_meta)


def _load_svc(path, meta):
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ParseError(path, 0, "empty file")
    try:
        declared = int(lines[0].split()[0])
    except (ValueError, IndexError) as e:
        raise ParseError(path, 1, f"expected sample count, got {lines[0]!r}") from e
    unit = meta.get("angle_unit", "deg")
    to_rad = {"rad": 1.0, "deg": np.pi / 180.0, "0.1deg": np.pi / 1800.0}.get(unit)
    if to_rad is None:
        raise ParseError(path, 0, f"unknown angle_unit '{unit}'")
    rows = []
    has_angles = False
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (4, 7):
            raise ParseError(path, line_no, f"expected 4 or 7 fields, got {len(fields)}")
        try:
            vals = [float(f) for f in fields]
        except ValueError as e:
            raise ParseError(path, line_no, str(e)) from e
        x, y, t, pen = vals[:4]
        if len(vals) == 7:
            has_angles = True
            az, alt, pressure = vals[4] * to_rad, vals[5] * to_rad, vals[6]
        else:
            az = alt = 0.0
            pressure = 1.0 if pen > 0 else 0.0
        rows.append([t, x, y, pressure, pen, az, alt, line_no])
    if len(rows) != declared:
        raise ParseError(path, 1, f"declared {declared} samples, found {len(rows)}")
    return _build_trajectory(path, rows, has_angles, meta)


_LOADERS = {"canonical_tsv": _load_canonical, "svc_style": _load_svc}


def load_dataset(path, fmt=None) -> Dataset:
    """Load a dataset directory; ``fmt`` overrides the manifest's format."""
    root = Path(path)
    manifest = root / MANIFEST_NAME
    if not manifest.is_file():
        raise MissingManifestError(f"no {MANIFEST_NAME} in {root}")
    meta = parse_keyvalue(manifest)
    fmt = fmt or meta.get("format", "canonical_tsv")
    if fmt not in FORMATS:
        raise ValueError(f"unknown dataset format '{fmt}'")
    load_meta = {
        "units": meta.get("units", "mm"),
        "lines_per_mm": float(meta["lines_per_mm"]) if "lines_per_mm" in meta else None,
        "angle_unit": meta.get("angle_unit", "deg"),
    }
    loader = _LOADERS[fmt]
    signers = []
    for signer_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        record = SignerRecord(signer_id=signer_dir.name, genuine=[], forgeries=[])
        for label, attr in (("genuine", "genuine"), ("forgery", "forgeries")):
            sub = signer_dir / label
            if not sub.is_dir():
                continue
            for f in sorted(sub.iterdir()):
                if not f.is_file():
                    continue
                traj = loader(f, load_meta)
                traj.signer_id = record.signer_id
                traj.signature_id = f.stem
                traj.label = "genuine" if label == "genuine" else "skilled_forgery"
                getattr(record, attr).append(traj)
        if record.genuine or record.forgeries:
            signers.append(record)
    meta_out = dict(meta)
    meta_out["format"] = fmt
    return Dataset(signers=signers, metadata=meta_out)


def save_dataset(ds: Dataset, path):
    """Write a dataset in the canonical layout (mm units).  Numeric fields
    use shortest round-trip formatting, so load/save cycles are lossless."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    manifest = {"format": "canonical_tsv", "units": "mm"}
    for key in ("device", "sample_rate_hz"):
        if key in ds.metadata:
            manifest[key] = ds.metadata[key]
    write_keyvalue(root / MANIFEST_NAME, manifest)
    for signer in ds.signers:
        for label, trajs in (("genuine", signer.genuine), ("forgery", signer.forgeries)):
            if not trajs:
                continue
            sub = root / signer.signer_id / label
            sub.mkdir(parents=True, exist_ok=True)
            for idx, traj in enumerate(trajs):
                stem = traj.signature_id or f"{label[0]}{idx:02d}"
                _write_canonical(sub / f"{stem}.tsv", traj)


def _write_canonical(path, traj):
    cols = list(CANONICAL_COLUMNS) + (list(ANGLE_COLUMNS) if traj.has_angles else [])
    lines = [f"#columns: {' '.join(cols)}", "#units: mm"]
    for i in range(len(traj)):
        fields = [
            repr(float(traj.t[i])),
            repr(float(traj.x[i])),
            repr(float(traj.y[i])),
            repr(float(traj.pressure[i])),
            "1" if traj.pen_down[i] else "0",
        ]
        if traj.has_angles:
            fields += [repr(float(traj.theta[i])), repr(float(traj.phi[i]))]
        lines.append("\t".join(fields))
    Path(path).write_text("\n".join(lines) + "\n")
