"""Score genuine signatures and forgeries against an enrolled template with
both verifiers, and fuse the scores.

Run: python demos/demo_verification.py
"""


from armsig.features import ExtractionConfig, build_feature_matrix, extract
from armsig.kinematics import default_geometry
from armsig.synthetic import make_synthetic_dataset
from armsig.verifiers import (
    angle_histograms,
    build_dtw_template,
    build_manhattan_template,
    dtw_verify,
    fuse_scores,
    manhattan_score,
)

g = default_geometry()
config = ExtractionConfig()
ds = make_synthetic_dataset(n_signers=2, n_genuine=8, n_forgeries=4)
signer = ds.signers[0]

impostor = ds.signers[1].genuine[0]
sequences = {
    (t.signer_id, t.signature_id): extract(t, g, config)
    for t in signer.genuine + signer.forgeries + [impostor]
}

# enroll on the first five genuine signatures
enroll = [sequences[(t.signer_id, t.signature_id)] for t in signer.genuine[:5]]
dtw_templates = {
    kind: build_dtw_template(signer.signer_id, [build_feature_matrix(s, kind) for s in enroll])
    for kind in ("position", "angle")
}
man_template = build_manhattan_template(signer.signer_id, [angle_histograms(s) for s in enroll])

trials = (
    [(t, "genuine") for t in signer.genuine[5:]]
    + [(t, "forgery") for t in signer.forgeries]
    + [(impostor, "random impostor")]
)

print(f"{'trial':<26}{'DTW pos':>9}{'DTW ang':>9}{'fused':>8}{'MAN ang':>9}")
for traj, label in trials:
    sig_id = f"{traj.signer_id}/{traj.signature_id}"
    seq = sequences[(traj.signer_id, traj.signature_id)]
    s_p = dtw_verify(dtw_templates["position"], build_feature_matrix(seq, "position")).value
    s_a = dtw_verify(dtw_templates["angle"], build_feature_matrix(seq, "angle")).value
    s_f = fuse_scores(s_p, s_a, omega=0.4)
    s_m = manhattan_score(man_template, angle_histograms(seq)).value
    print(f"{sig_id} ({label:<16}){s_p:9.4f}{s_a:9.4f}{s_f:8.4f}{s_m:9.4f}")

print("\nHigher = more genuine. DTW separates all three groups; the")
print("histogram/Manhattan verifier is noisier per signer and earns its")
print("keep over the whole corpus (see demo_benchmark.py).")
