"""Damped least squares on a two-link finger.

The finger has links of 4 cm and 3 cm turning about +z. A small target
patch is reachable; a point 20 cm away is not, and the finger straightens
toward it. A full step near the straight-arm singularity overshoots, so
the unreachable case uses half steps.

    python3 demos/planar_ik.py
"""

import numpy as np

from contactkit.handkin import HandConfiguration, IkConfig, builtin_chain, forward_kinematics, solve_ik

chain = builtin_chain("planar_finger")
h0 = HandConfiguration(np.zeros(3), np.zeros(3), [0.2, 0.4])
print("start tip:", np.round(forward_kinematics(chain, h0)[0], 4))

rng = np.random.default_rng(0)
patch = np.array([0.03, 0.045, 0.0]) + rng.normal(0, 0.002, (30, 3)) * [1, 1, 0]

res = solve_ik(chain, h0, {"finger": patch})
print("\nfree wrist, defaults")
print("  trace:", np.array2string(res.trace[:5], precision=3), "...")
print("  tip:", np.round(forward_kinematics(chain, res.h)[0], 4))

res = solve_ik(chain, h0, {"finger": patch}, IkConfig(iters=60, fixed_wrist=True))
print("\nfixed wrist, 60 iterations")
print("  final objective:", f"{res.trace[-1]:.2e}", "joints:", np.round(res.h.theta, 3))

far = np.array([[0.2, 0.0, 0.0]])
for step in (1.0, 0.5):
    res = solve_ik(chain, HandConfiguration(np.zeros(3), np.zeros(3), [0.5, 0.5]), {"finger": far},
                   IkConfig(iters=100, step=step, fixed_wrist=True))
    print(f"\nunreachable, step {step}: distance {np.sqrt(res.trace[-1]):.4f} m, joints {np.round(res.h.theta, 3)}")
