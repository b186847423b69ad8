"""Command-line entry points.

Subcommands: ``extract`` (per-signature feature files), ``validate``
(round-trip SNR table), ``benchmark`` (EER report + ROC points),
``sample-geometry`` (per-signer bone lengths) and ``make-corpus`` (write
the bundled synthetic corpus to disk).  Options can also come from a
plain-text key=value config file; command-line flags win.  Every run
writes a ``run_manifest.txt`` with the fully resolved configuration.
Failures print a machine-readable JSON record to stderr and exit nonzero.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

from .errors import ArmsigError
from .evaluation import (
    derive_signer_seed,
    roundtrip_validation,
    run_benchmark,
    signer_geometry,
)
from .features import ExtractionConfig, assign_gender, build_feature_matrix, extract
from .io import load_dataset, parse_keyvalue, save_dataset, write_keyvalue
from .kinematics import default_geometry
from .synthetic import make_synthetic_dataset

_PIPELINE_KEYS = (
    "dataset", "format", "features", "verifier", "fusion", "omega",
    "pen_angles", "penup", "scale", "gamma", "geometry", "seed", "out",
)
_PENUP_FLAG_TO_MODE = {"lift5mm": "lift5mm", "flat": "flat", "flat-q6": "flat_q6_bump"}


def _add_common(parser):
    parser.add_argument("--dataset", required=False, help="dataset root directory")
    parser.add_argument("--format", choices=["canonical_tsv", "svc_style"], default=None)
    parser.add_argument("--pen-angles", dest="pen_angles", choices=["raw", "smoothed", "fixed"])
    parser.add_argument("--penup", choices=list(_PENUP_FLAG_TO_MODE))
    parser.add_argument("--scale", type=float, choices=[0.1, 1.0, 10.0])
    parser.add_argument("--gamma", help="writing-plane rotation rx,ry,rz in rad")
    parser.add_argument("--omega", type=float, help="score-fusion weight in [0, 1]")
    parser.add_argument("--geometry", choices=["fixed", "realistic"])
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--config", help="key=value config file; flags override it")


def _resolve(args):
    """Merge defaults, config file and flags (flags win)."""
    resolved = {
        "dataset": None, "format": None, "features": "fused", "verifier": "dtw",
        "fusion": "score", "omega": 0.4, "pen_angles": "fixed", "penup": "lift5mm",
        "scale": 1.0, "gamma": "0,0,0", "geometry": "fixed", "seed": 0, "out": None,
    }
    if getattr(args, "config", None):
        cfg = parse_keyvalue(args.config)
        unknown = set(cfg) - set(_PIPELINE_KEYS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        resolved.update(cfg)
    for key in _PIPELINE_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    resolved["omega"] = float(resolved["omega"])
    resolved["scale"] = float(resolved["scale"])
    resolved["seed"] = int(resolved["seed"])
    resolved["gamma"] = tuple(float(v) for v in str(resolved["gamma"]).replace(" ", "").split(","))
    if len(resolved["gamma"]) != 3:
        raise ValueError("--gamma needs exactly three comma-separated values")
    return resolved


def _extraction_config(resolved):
    return ExtractionConfig(
        pen_angle_mode=resolved["pen_angles"],
        scale=resolved["scale"],
        penup_mode=_PENUP_FLAG_TO_MODE[resolved["penup"]],
        gamma=resolved["gamma"],
        fuse_omega=resolved["omega"],
    )


def _outdir(resolved):
    out = Path(resolved["out"])
    out.mkdir(parents=True, exist_ok=True)
    manifest = {k: v for k, v in resolved.items() if v is not None}
    manifest["gamma"] = ",".join(repr(v) for v in resolved["gamma"])
    write_keyvalue(out / "run_manifest.txt", manifest)
    return out


def _load(resolved):
    if not resolved["dataset"]:
        raise ValueError("--dataset is required")
    return load_dataset(resolved["dataset"], resolved["format"])


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def cmd_extract(args):
    resolved = _resolve(args)
    out = _outdir(resolved)
    ds = _load(resolved)
    config = _extraction_config(resolved)
    kind = resolved["features"]
    for signer in ds.signers:
        signer_dir = out / "features" / signer.signer_id
        signer_dir.mkdir(parents=True, exist_ok=True)
        g = signer_geometry(resolved["geometry"], resolved["seed"], signer.signer_id)
        for traj in signer.genuine + signer.forgeries:
            seq = extract(traj, g, config)
            matrix = build_feature_matrix(seq, kind)
            _write_csv(
                signer_dir / f"{traj.signature_id}.csv",
                matrix.channel_names,
                matrix.rows.tolist(),
            )
    return 0


def cmd_validate(args):
    resolved = _resolve(args)
    out = _outdir(resolved)
    ds = _load(resolved)
    config = _extraction_config(resolved)
    if resolved["geometry"] == "fixed":
        records = roundtrip_validation(ds, default_geometry(), config)
    else:
        records = []
        for signer in ds.signers:
            g = signer_geometry("realistic", resolved["seed"], signer.signer_id)
            sub = type(ds)(signers=[signer], metadata=ds.metadata)
            records.extend(roundtrip_validation(sub, g, config))
    _write_csv(
        out / "snr.csv",
        ["signer_id", "signature_id", "label", "snr_db"],
        [[r["signer_id"], r["signature_id"], r["label"], repr(r["snr_db"])] for r in records],
    )
    worst = min(r["snr_db"] for r in records)
    print(f"validated {len(records)} signatures; minimum SNR {worst:.2f} dB")
    return 0


def cmd_benchmark(args):
    resolved = _resolve(args)
    out = _outdir(resolved)
    ds = _load(resolved)
    config = _extraction_config(resolved)
    report = run_benchmark(
        ds,
        verifier=resolved["verifier"],
        features=resolved["features"],
        fusion=resolved["fusion"],
        omega=resolved["omega"],
        geometry_mode=resolved["geometry"],
        seed=resolved["seed"],
        config=config,
    )
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    _write_csv(
        out / "report.csv",
        ["verifier", "features", "fusion", "omega", "geometry", "seed",
         "eer_rf_percent", "eer_sf_percent", "n_genuine", "n_rf", "n_sf"],
        [[report.verifier, report.features, report.fusion, report.omega,
          report.geometry_mode, report.seed, repr(report.eer_rf),
          "" if report.eer_sf is None else repr(report.eer_sf),
          report.score_counts["genuine"], report.score_counts["rf"],
          report.score_counts["sf"]]],
    )
    _write_csv(
        out / "roc_rf.csv",
        ["threshold", "far", "frr"],
        zip(report.roc_rf["threshold"], report.roc_rf["far"], report.roc_rf["frr"]),
    )
    if report.roc_sf is not None:
        _write_csv(
            out / "roc_sf.csv",
            ["threshold", "far", "frr"],
            zip(report.roc_sf["threshold"], report.roc_sf["far"], report.roc_sf["frr"]),
        )
    sf = "-" if report.eer_sf is None else f"{report.eer_sf:.2f}%"
    print(f"EER RF {report.eer_rf:.2f}%  SF {sf}  ({report.runtime_s:.1f}s)")
    return 0


def cmd_sample_geometry(args):
    resolved = _resolve(args)
    out = _outdir(resolved)
    if resolved["dataset"]:
        signer_ids = load_dataset(resolved["dataset"], resolved["format"]).signer_ids
    else:
        signer_ids = [f"s{i:02d}" for i in range(args.count)]
    rows = []
    for sid in signer_ids:
        gender = assign_gender(derive_signer_seed(resolved["seed"], sid))
        g = signer_geometry("realistic", resolved["seed"], sid)
        rows.append([sid, gender] + [repr(v) for v in g.lengths])
    _write_csv(out / "geometry.csv", ["signer_id", "gender", "l1", "l2", "l3", "l4", "l5"], rows)
    return 0


def cmd_make_corpus(args):
    ds = make_synthetic_dataset(
        n_signers=args.signers,
        n_genuine=args.genuine,
        n_forgeries=args.forgeries,
        seed=args.seed if args.seed is not None else 2024,
    )
    save_dataset(ds, args.out)
    print(f"wrote {len(ds.signers)} signers to {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="armsig", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="write per-signature feature matrices")
    _add_common(p)
    p.add_argument("--features", choices=["position", "angle", "fused"])
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("validate", help="round-trip reconstruction SNR table")
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("benchmark", help="run the verification benchmark")
    _add_common(p)
    p.add_argument("--features", choices=["position", "angle", "fused"])
    p.add_argument("--verifier", choices=["dtw", "man"])
    p.add_argument("--fusion", choices=["none", "feature", "score"])
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("sample-geometry", help="per-signer realistic bone lengths")
    _add_common(p)
    p.add_argument("--count", type=int, default=20, help="signer count when no dataset is given")
    p.set_defaults(func=cmd_sample_geometry)

    p = sub.add_parser("make-corpus", help="write the synthetic corpus to disk")
    p.add_argument("--out", required=True)
    p.add_argument("--signers", type=int, default=20)
    p.add_argument("--genuine", type=int, default=10)
    p.add_argument("--forgeries", type=int, default=10)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_make_corpus)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ArmsigError, ValueError, OSError) as e:
        record = {"error": type(e).__name__, "message": str(e)}
        print(json.dumps(record), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
