"""Repeated projective measurements freeze a Rabi oscillation.

A two-level system flops between |1> and |2> at frequency omega.  Checking
"is it still in |1>?" N times within a horizon t multiplies the survival
amplitudes: p = cos(omega t / N)^(2N), which climbs back to one as N grows.
The same chain, run on a rank-2 subspace, does not freeze completely: it
converges to coherent motion generated by the projected Hamiltonian.
"""

import math

import numpy as np

from zenosim import (
    DensityMatrix,
    Projector,
    basis_projector,
    effective_rate,
    pulsed_limit,
    pulsed_propagator,
    snorm,
    survival_probability,
    three_level,
    zeno_sectors,
    zeno_time,
)

omega, t = 1.0, 2.0
h2 = omega * np.array([[0, 1], [1, 0]], dtype=complex)
p1 = basis_projector(2, 0)
rho0 = DensityMatrix.pure([1, 0])

print("== survival of |1> under N in-horizon measurements (omega t = 2) ==")
print(f"{'N':>6} {'simulated':>12} {'cos^2N law':>12}")
for n in (1, 4, 16, 64, 256, 1024):
    v = pulsed_propagator(h2, p1, n, t)
    p = survival_probability(rho0, v, p1)
    print(f"{n:>6} {p:>12.6f} {math.cos(omega * t / n) ** (2 * n):>12.6f}")

print()
print("== measurement interval sets an effective exponential rate ==")
tz = zeno_time(h2, [1, 0])
print(f"quadratic decay scale: {tz:.3f} (= 1/omega)")
for tau in (0.5, 0.1, 0.02):
    r = effective_rate(h2, [1, 0], tau)
    print(f"tau = {tau:<5}  gamma = {r.gamma:.5f}   (short-time law tau/tz^2 = {tau / tz ** 2:.5f})")

print()
print("== a rank-2 measured subspace keeps moving inside itself ==")
hk = three_level(1.0, 1.0)
sec = zeno_sectors(hk)
by_eta = {round(s.eigenvalue.real): s.projector for s in sec}
p = Projector(by_eta[0].matrix + by_eta[1].matrix, rank=2)
lim = pulsed_limit(hk.total(), p, 1.0)
print("limit propagator on Ran P (unitary there, zero outside):")
np.set_printoptions(precision=4, suppress=True)
print(lim.matrix)
for n in (64, 256, 1024):
    err = snorm(pulsed_propagator(hk.total(), p, n, 1.0).matrix - lim.matrix)
    print(f"N = {n:>5}:  distance to limit {err:.2e}  (~ 1/N)")
