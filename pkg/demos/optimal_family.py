"""Six time-optimal trajectories of a damped qubit, started from r0 = (0, 0, 0.8).

Each run starts with a different angle between the state and the costate.
The frame rotating with the optimal Hamiltonian strips off the precession,
leaving the dissipative motion toward the south pole.
"""

import numpy as np

from qbrach import brachistochrone as bc

cfg = bc.BrachConfig(gammas=(1.0, 0.0, 0.0), dt=1e-3, t_max=5.0)
family = bc.angle_family(cfg, (0.0, 0.0, 0.8))

print(" k   angle   lab endpoint                  rotating endpoint             drift")
for k, rec in enumerate(family):
    rot = bc.rotating_frame(rec)[-1]
    print(f"{k:2d}  {rec.diagnostics['initial_angle']:6.3f}  "
          f"{np.array2string(rec.r[-1], precision=4):28s}  "
          f"{np.array2string(rot, precision=4):28s}  {rec.diagnostics['max_conservation_drift']:.1e}")

angle, rec, dist = bc.shoot(cfg, (0.0, 0.0, 0.8), (0.0, 0.0, -1.0))
print(f"\nshooting for the south pole: angle {angle:.4f}, final distance {dist:.2e}")
