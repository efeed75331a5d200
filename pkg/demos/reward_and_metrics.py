"""Shaped reward along a scripted episode, then episode metrics.

The object rises from the table toward a goal 30 cm up while the hand
tracks its reference with a slowly growing wrist error.

    python3 demos/reward_and_metrics.py
"""

import math

import numpy as np

from contactkit.metrics import EpisodeLog, evaluate
from contactkit.reward import SimStateSnapshot, kappa, total_reward

goal = np.array([0.0, 0.0, 0.3])
contact_points = np.array([[0.02, 0.0, 0.0], [-0.02, 0.0, 0.0]])
ref = {"w": np.array([0.0, 0.0, 0.1]), "phi": np.zeros(3), "theta": np.zeros(4)}

snaps = []
for t in range(120):
    z = min(0.3, 0.004 * t)
    obj = np.array([0.0, 0.0, z])
    tips = contact_points + obj
    wrist = ref["w"] + obj + [0.0005 * t, 0, 0]
    snaps.append(SimStateSnapshot(t, wrist, np.zeros(3), np.full(4, 0.05), tips, obj, goal, ref,
                                  np.array([True, True]), 0))

# the map rides with the object, so score each step against the moved map
rows = [total_reward(s, contact_points + s.object) for s in snaps]
for s, row in list(zip(snaps, rows))[::20]:
    print(f"t={s.t:3d} kappa={kappa(s.t):.3f} track={row.r_track:.3f} "
          f"pose={row.r_pose:.3f} contact={row.r_contact:.3f} total={row.total:.3f}")
print(f"return {math.fsum(r.total for r in rows):.3f}")

log = EpisodeLog(snaps, 0, "scripted")
report = evaluate([log, log], {0: contact_points + snaps[-1].object})
print({k: report[k] for k in ("gsr", "msad", "isr", "sd")})
