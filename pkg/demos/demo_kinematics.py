"""Walk through the arm model: geometry calibration, forward kinematics of
the reference writing posture, and a closed-form inverse solve.

Run: python demos/demo_kinematics.py
"""

import numpy as np

from armsig.kinematics import (
    INITIAL_PEN_POSITION,
    INITIAL_POSTURE,
    default_geometry,
    dh_table,
    forward_pose,
    forward_positions,
    inverse_kinematics,
)

np.set_printoptions(precision=3, suppress=True)

g = default_geometry()
print("Calibrated geometry (mm):")
for name, value in zip(("l1", "l2", "l3", "l4", "l5"), g.lengths):
    print(f"  {name} = {value:8.3f}")

print("\nDH table at the reference posture (delta, d, a, alpha):")
for k, row in enumerate(dh_table(INITIAL_POSTURE, g), start=1):
    print(f"  joint {k}: ({row.delta:+.4f}, {row.d:6.1f}, {row.a:5.1f}, {row.alpha:+.4f})")

pos = forward_positions(INITIAL_POSTURE, g)
print("\nJoint positions at the reference posture (base frame, mm):")
for k in range(7):
    print(f"  p{k} = {pos.points[k]}")
print(f"\nPen tip p6 = {pos.finger}  (expected {INITIAL_PEN_POSITION})")

pose = forward_pose(INITIAL_POSTURE, g)
q = inverse_kinematics(pose, g)
print("\nInverse kinematics of that pose recovers the posture:")
print(f"  q = {q.as_array()}")
print(f"  reference {INITIAL_POSTURE}")

# move the pen 30 mm to the right and 10 mm forward, same orientation
target = type(pose)(pose.r, pose.p + np.array([10.0, 30.0, 0.0]))
q2 = inverse_kinematics(target, g)
back = forward_pose(q2, g)
print("\nShifted target solved and verified:")
print(f"  q      = {q2.as_array()}")
print(f"  pen at = {back.p}, position error {np.linalg.norm(back.p - target.p):.2e} mm")
