"""Coherence decay of the single-collision chain.

Each step one fresh molecule hits the system through an XOR collision and
is thrown away. Populations never move; the off-diagonal element shrinks
by sin(2 phi) per step. The same trajectory is computed three ways below:
the closed-form power, the explicit step, and the two-operator Kraus
channel obtained by reading the molecule out after the collision.
"""

import numpy as np

from nmchain import DensityMatrix, apply_kraus
from nmchain.chains import markov_xor_fixed_point, markov_xor_kraus, markov_xor_step

PHI = 0.4
STEPS = 12

rho0 = DensityMatrix(
    np.array([[0.7, 0.25 + 0.10j], [0.25 - 0.10j, 0.3]]), ("sys",)
)
k = np.sin(2 * PHI)
kraus = markov_xor_kraus(PHI)

print(f"phi = {PHI},  per-step factor sin(2 phi) = {k:.6f}")
print(f"{'t':>3}  {'closed form':>14}  {'explicit step':>14}  {'kraus route':>14}")

a = rho0
b = rho0
for t in range(STEPS + 1):
    closed = abs(rho0.matrix[0, 1]) * k**t
    print(
        f"{t:3d}  {closed:14.10f}  {abs(a.matrix[0, 1]):14.10f}"
        f"  {abs(b.matrix[0, 1]):14.10f}"
    )
    a = markov_xor_step(a, PHI)
    b = apply_kraus(kraus, b)

fixed = markov_xor_fixed_point(rho0, PHI)
print()
print("populations after the run :", np.real(np.diag(a.matrix)).round(12))
print("dephased fixed point diag :", np.real(np.diag(fixed.matrix)).round(12))
print("routes agree to", f"{abs(a.matrix[0, 1] - b.matrix[0, 1]):.2e}")
