import json

import numpy as np
import pytest

from armsig.cli import main
from armsig.errors import MissingManifestError, ParseError
from armsig.io import load_dataset, save_dataset
from armsig.synthetic import make_synthetic_dataset


@pytest.fixture()
def corpus_dir(tmp_path):
    ds = make_synthetic_dataset(n_signers=4, n_genuine=6, n_forgeries=3)
    root = tmp_path / "corpus"
    save_dataset(ds, root)
    return root


# --------------------------------------------------------------------------
# canonical format

def test_save_load_roundtrip_lossless(tmp_path, corpus_dir):
    ds = load_dataset(corpus_dir)
    again = tmp_path / "again"
    save_dataset(ds, again)
    for f in sorted(corpus_dir.rglob("*.tsv")):
        other = again / f.relative_to(corpus_dir)
        assert other.read_bytes() == f.read_bytes()


def test_load_preserves_acquisition_order(corpus_dir):
    ds = load_dataset(corpus_dir)
    for signer in ds.signers:
        ids = [t.signature_id for t in signer.genuine]
        assert ids == sorted(ids)
        assert all(t.label == "genuine" for t in signer.genuine)
        assert all(t.label == "skilled_forgery" for t in signer.forgeries)


def test_load_three_line_canonical_with_unit_conversion(tmp_path):
    root = tmp_path / "ds"
    (root / "a" / "genuine").mkdir(parents=True)
    (root / "manifest.txt").write_text("format=canonical_tsv\nunits=device\nlines_per_mm=10\n")
    (root / "a" / "genuine" / "g0.tsv").write_text(
        "#columns: t_ms x y pressure pen_state\n"
        "0.0\t100\t50\t512\t1\n"
        "10.0\t110\t60\t512\t1\n"
        "20.0\t120\t70\t0\t0\n"
    )
    ds = load_dataset(root)
    traj = ds.signers[0].genuine[0]
    assert len(traj) == 3
    assert np.allclose(traj.x, [10.0, 11.0, 12.0])  # device counts / 10 lines per mm
    assert np.allclose(traj.y, [5.0, 6.0, 7.0])
    assert traj.pen_down.tolist() == [True, True, False]


def test_decreasing_timestamps_name_the_line(tmp_path):
    root = tmp_path / "ds"
    (root / "a" / "genuine").mkdir(parents=True)
    (root / "manifest.txt").write_text("format=canonical_tsv\nunits=mm\n")
    (root / "a" / "genuine" / "bad.tsv").write_text(
        "#columns: t_ms x y pressure pen_state\n"
        "0.0\t1\t1\t512\t1\n"
        "10.0\t2\t1\t512\t1\n"
        "5.0\t3\t1\t512\t1\n"
    )
    with pytest.raises(ParseError) as err:
        load_dataset(root)
    assert err.value.line_no == 4
    assert "increasing" in err.value.reason


def test_missing_manifest(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    with pytest.raises(MissingManifestError):
        load_dataset(empty)


def test_malformed_number_is_reported(tmp_path):
    root = tmp_path / "ds"
    (root / "a" / "genuine").mkdir(parents=True)
    (root / "manifest.txt").write_text("format=canonical_tsv\nunits=mm\n")
    (root / "a" / "genuine" / "bad.tsv").write_text(
        "#columns: t_ms x y pressure pen_state\n0.0\toops\t1\t512\t1\n"
    )
    with pytest.raises(ParseError) as err:
        load_dataset(root)
    assert err.value.line_no == 2


# --------------------------------------------------------------------------
# SVC-style exports

def test_load_svc_style(tmp_path):
    root = tmp_path / "svc"
    (root / "u1" / "genuine").mkdir(parents=True)
    (root / "manifest.txt").write_text(
        "format=svc_style\nunits=device\nlines_per_mm=100\nangle_unit=0.1deg\n"
    )
    (root / "u1" / "genuine" / "g0.txt").write_text(
        "3\n"
        "1000 2000 0 1 900 450 512\n"
        "1100 2100 10 1 900 450 512\n"
        "1200 2200 20 0 900 450 0\n"
    )
    ds = load_dataset(root)
    traj = ds.signers[0].genuine[0]
    assert np.allclose(traj.x, [10.0, 11.0, 12.0])
    assert traj.has_angles
    assert traj.theta[0] == pytest.approx(np.deg2rad(90.0))
    assert traj.phi[0] == pytest.approx(np.deg2rad(45.0))


def test_svc_declared_count_mismatch(tmp_path):
    root = tmp_path / "svc"
    (root / "u1" / "genuine").mkdir(parents=True)
    (root / "manifest.txt").write_text("format=svc_style\nunits=mm\n")
    (root / "u1" / "genuine" / "g0.txt").write_text("2\n1 2 0 1\n")
    with pytest.raises(ParseError):
        load_dataset(root)


# --------------------------------------------------------------------------
# CLI

def test_cli_make_corpus_and_validate(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    assert main(["make-corpus", "--out", str(corpus), "--signers", "3",
                 "--genuine", "6", "--forgeries", "2"]) == 0
    out = tmp_path / "val"
    assert main(["validate", "--dataset", str(corpus), "--out", str(out)]) == 0
    assert (out / "run_manifest.txt").is_file()
    lines = (out / "snr.csv").read_text().strip().splitlines()
    assert lines[0] == "signer_id,signature_id,label,snr_db"
    snrs = [float(row.rsplit(",", 1)[1]) for row in lines[1:]]
    assert len(snrs) == 3 * 8
    assert min(snrs) >= 60.0


def test_cli_benchmark_fusion_degeneracy(tmp_path):
    corpus = tmp_path / "corpus"
    main(["make-corpus", "--out", str(corpus), "--signers", "3", "--genuine", "6",
          "--forgeries", "2"])
    out1 = tmp_path / "omega1"
    out2 = tmp_path / "positononly"
    assert main(["benchmark", "--dataset", str(corpus), "--out", str(out1),
                 "--fusion", "score", "--omega", "1.0"]) == 0
    assert main(["benchmark", "--dataset", str(corpus), "--out", str(out2),
                 "--fusion", "none", "--features", "position"]) == 0
    rep1 = json.loads((out1 / "report.json").read_text())
    rep2 = json.loads((out2 / "report.json").read_text())
    assert rep1["eer_rf_percent"] == rep2["eer_rf_percent"]
    assert rep1["eer_sf_percent"] == rep2["eer_sf_percent"]
    assert rep1["scores"] == rep2["scores"]
    assert (out1 / "roc_rf.csv").is_file() and (out1 / "roc_sf.csv").is_file()
    summary = (out1 / "report.csv").read_text().splitlines()
    assert summary[0].startswith("verifier,features,fusion,omega")
    assert summary[1].split(",")[0] == "dtw"


def test_cli_sample_geometry_deterministic(tmp_path):
    out1, out2 = tmp_path / "g1", tmp_path / "g2"
    assert main(["sample-geometry", "--seed", "7", "--count", "10", "--out", str(out1)]) == 0
    assert main(["sample-geometry", "--seed", "7", "--count", "10", "--out", str(out2)]) == 0
    assert (out1 / "geometry.csv").read_bytes() == (out2 / "geometry.csv").read_bytes()
    header, first = (out1 / "geometry.csv").read_text().splitlines()[:2]
    assert header == "signer_id,gender,l1,l2,l3,l4,l5"
    assert first.split(",")[4] == "1.0"  # epsilon elbow offset


def test_cli_extract_writes_feature_files(tmp_path):
    corpus = tmp_path / "corpus"
    main(["make-corpus", "--out", str(corpus), "--signers", "2", "--genuine", "6",
          "--forgeries", "1"])
    out = tmp_path / "features"
    assert main(["extract", "--dataset", str(corpus), "--out", str(out),
                 "--features", "fused"]) == 0
    files = sorted((out / "features").rglob("*.csv"))
    assert len(files) == 2 * 7
    header = files[0].read_text().splitlines()[0]
    assert len(header.split(",")) == 45


def test_cli_config_file_flags_win(tmp_path):
    corpus = tmp_path / "corpus"
    main(["make-corpus", "--out", str(corpus), "--signers", "3", "--genuine", "6",
          "--forgeries", "1"])
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"dataset={corpus}\nomega=0.9\nfusion=score\n")
    out = tmp_path / "run"
    assert main(["benchmark", "--config", str(cfg), "--omega", "0.4",
                 "--out", str(out)]) == 0
    manifest = dict(
        line.split("=", 1) for line in (out / "run_manifest.txt").read_text().splitlines()
    )
    assert manifest["omega"] == "0.4"  # flag beats config file
    assert manifest["fusion"] == "score"


def test_cli_error_is_machine_readable(tmp_path, capsys):
    code = main(["benchmark", "--dataset", str(tmp_path / "nope"), "--out",
                 str(tmp_path / "out")])
    assert code == 1
    record = json.loads(capsys.readouterr().err.strip())
    assert record["error"] == "MissingManifestError"
    assert "message" in record
