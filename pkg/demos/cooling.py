"""Cooling a qubit by repeated collisions with freshly prepared ancillas.

Each collision lasts tau under a flip-flop coupling of strength p. With
the ancilla fully polarized down (b = 1) the qubit relaxes to the down
state at rate 4 p^2 tau. The exact map deviates from that exponential by
an amount that shrinks quickly with tau.
"""

import numpy as np

from qbrach import ancilla

p, b = 1.0, 1.0
print("  tau      max |r_z - closed form|")
for tau in (1e-2, 5e-3, 2.5e-3):
    c, bvec = ancilla.special_case_build(p, 0.0, b)
    rec = ancilla.run_micro(ancilla.MicroConfig(tau, int(round(5 / tau)), c, bvec), (0.0, 0.0, 1.0))
    print(f"  {tau:.4f}   {rec.diagnostics['damping_max_deviation']:.3e}")

c, bvec = ancilla.special_case_build(5.0, 0.0, 1.0)
rec = ancilla.run_micro(ancilla.MicroConfig(1e-2, 500, c, bvec), (0.0, 0.0, 0.0))
print(f"\nfrom the maximally mixed state, fidelity with down after t=5: {rec.fidelity[-1]:.5f}")
print(f"closed form 1 - exp(-5)/2:                                    {1 - 0.5 * np.exp(-5):.5f}")
