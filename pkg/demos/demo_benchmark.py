"""Run the full verification benchmark on the synthetic corpus: both
verifiers, fixed vs per-signer realistic bone lengths, and an omega sweep
for score fusion.

Run: python demos/demo_benchmark.py   (takes ~1 minute)
"""

from armsig.evaluation import run_benchmark
from armsig.synthetic import make_synthetic_dataset

ds = make_synthetic_dataset()
print(f"Corpus: {len(ds.signers)} signers, "
      f"{sum(len(s.genuine) for s in ds.signers)} genuine, "
      f"{sum(len(s.forgeries) for s in ds.signers)} skilled forgeries\n")

print(f"{'verifier':<10}{'fusion':<10}{'geometry':<11}{'EER RF %':>9}{'EER SF %':>9}")
for verifier in ("dtw", "man"):
    for geometry in ("fixed", "realistic"):
        rep = run_benchmark(ds, verifier=verifier, fusion="score", omega=0.4,
                            geometry_mode=geometry, seed=0)
        print(f"{verifier:<10}{'score':<10}{geometry:<11}{rep.eer_rf:9.2f}{rep.eer_sf:9.2f}")

print("\nScore-fusion weight sweep (DTW, fixed geometry):")
print(f"{'omega':>6}{'EER RF %':>10}{'EER SF %':>10}")
for omega in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
    rep = run_benchmark(ds, verifier="dtw", fusion="score", omega=omega, seed=0)
    print(f"{omega:6.1f}{rep.eer_rf:10.2f}{rep.eer_sf:10.2f}")
