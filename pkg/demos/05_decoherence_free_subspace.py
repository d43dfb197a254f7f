"""A leaky cavity carves out a five-dimensional safe subspace.

Two three-level atoms share a cavity mode that decays through the mirrors,
so the coupling is non-Hermitian: most of its eigenvalues have negative
imaginary part and their directions dissipate.  The real (here: zero)
eigenvalue survives.  Its eigenspace, four atom-only ground states plus one
photon-dressed singlet, is decoherence free: dynamics restricted to it
stays unitary, and a strong cavity coupling confines any weak extra
Hamiltonian to exactly this subspace.
"""

import numpy as np

from zenosim import cavity, dfs_extract, expm

model = cavity(g=1.0, kappa=1.0, n_max=2)
print(f"truncated space dimension: {model.dim}")
print(f"coupling is Hermitian: {model.hk.h_meas.hermitian}")

dec = dfs_extract(model.hk)
print()
print(f"== protected sectors (real eigenvalues only) ==")
for s in dec:
    print(f"eta = {s.eigenvalue.real:+.3e}{s.eigenvalue.imag:+.3e}j, "
          f"dimension {s.multiplicity}")

proj = dec.sectors[0].projector.matrix
print()
print("== dominant basis labels |photons, atom1, atom2> of the safe subspace ==")
weights = np.real(np.diag(proj))
for idx in np.argsort(weights)[::-1][:6]:
    if weights[idx] > 1e-6:
        print(f"  {model.sectors.labels[idx]}  weight {weights[idx]:.3f}")

print()
print("== inside: unitary; outside: gone ==")
u = expm(model.hk.h_meas, 3.0).matrix
inside = proj[:, [model.sectors.index((0, 1, 1))]]
inside /= np.linalg.norm(inside)
outside = np.zeros((model.dim, 1), dtype=complex)
outside[model.sectors.index((1, 0, 0))] = 1.0
print(f"norm after t=3, state in the subspace:  {np.linalg.norm(u @ inside):.9f}")
print(f"norm after t=3, one cavity photon:      {np.linalg.norm(u @ outside):.9f}")

print()
print("== the singlet survives inside the single-excitation block ==")
order = [(0, 2, 0), (0, 0, 2), (1, 0, 0), (1, 1, 0),
         (1, 0, 1), (0, 2, 1), (0, 1, 2), (1, 1, 1)]
block = model.sectors.restriction(model.hk.h_meas.matrix, 1, order=order)
w = np.linalg.eigvals(block)
print("single-excitation eigenvalues (imaginary parts):",
      np.round(np.sort(w.imag), 3))
singlet = np.zeros(8, dtype=complex)
singlet[5], singlet[6] = 1 / np.sqrt(2), -1 / np.sqrt(2)
print(f"coupling norm on the atom singlet: {np.linalg.norm(block @ singlet):.2e}")
