"""One final measurement on n qubits versus repeated measurement by ancillas.

The closed model swaps |up, up...> with |down, up...> in time
T = pi / (2 sqrt(2^(n-1)) omega), so adding two qubits halves T. The
repeated-measurement model approaches the target only exponentially.
"""

import numpy as np

from qbrach import nqubit
from qbrach.cli import compare_models

for n in range(1, 7):
    cfg = nqubit.NQubitConfig(n)
    rho = nqubit.reduced_state(cfg, nqubit.optimal_time(cfg))
    print(f"n={n}: T = {nqubit.optimal_time(cfg):.6f}, fidelity at T = {rho[1, 1].real:.15f}")

report = compare_models((1, 2, 3), omega=1.0, rate=1.0, threshold=0.99, t_max=np.pi, dt=1e-3)
print(f"\nrepeated measurement reaches 0.99 at t = {report['dashed_threshold_time']:.3f}")
for n, item in report["solid"].items():
    print(f"n={n}: reaches 0.99 at t = {item['threshold_time']:.3f}, "
          f"curves cross at t = {item['crossing_time']:.3f}")
