"""Strong coupling splits the Hilbert space into frozen sectors.

The eigenspaces of the measurement coupling are the subspaces the
apparatus can tell apart.  In the strong-coupling limit the propagator
commutes with each sector projector, so sector populations become
constants of motion, and unread measurements erase coherence between the
sectors while preserving the weight inside each one.
"""

import math

import numpy as np

from zenosim import (
    DensityMatrix,
    nonselective_evolve,
    nonselective_limit,
    offblock_norm,
    three_level,
    zeno_propagator,
    zeno_sectors,
)

hk = three_level(1.0, 8.0)
sec = zeno_sectors(hk)

print("== sectors of the measurement coupling (3-level model) ==")
for n, s in enumerate(sec):
    print(f"sector {n}: eta = {s.eigenvalue.real:+.0f}, rank {s.multiplicity}")

print()
print("== sector populations under the limit propagator ==")
rho0 = DensityMatrix.pure(np.array([1, 1, 1]) / math.sqrt(3))
p_start = [rho0.population(s.projector) for s in sec]
print("t = 0   :", [f"{p:.6f}" for p in p_start])
for t in (2.0, 10.0):
    u = zeno_propagator(hk, t, sectors=sec).matrix
    rho_t = u @ rho0.matrix @ u.conj().T
    pt = [float((s.projector.matrix @ rho_t).trace().real) for s in sec]
    print(f"t = {t:<4}:", [f"{p:.6f}" for p in pt], " (constant)")

print()
print("== unread measurements kill the off-sector coherence like 1/N ==")
h = hk.total()
print(f"{'N':>6} {'offblock before next readout':>30}")
for n in (8, 32, 128, 512):
    rho = nonselective_evolve(h, sec, n, 3.0, rho0, project_final=False)
    print(f"{n:>6} {offblock_norm(rho, sec):>30.6f}")

lim = nonselective_limit(h, sec, 3.0, rho0)
print()
print("limit state off-block content:", offblock_norm(lim, sec))
print("limit sector weights:         ",
      [f"{lim.population(s.projector):.6f}" for s in sec])
print("(identical to the initial weights: no leakage between sectors)")
