"""Strong-coupling (continuous-measurement) dynamics.

The measured system evolves under ``H_K = H + K * H_meas``.  As the
coupling K grows, the propagator commutes ever better with the spectral
projectors of ``H_meas``: the Hilbert space splits into sectors that the
apparatus can distinguish, transitions between them switch off like 1/K,
and within each sector the motion is generated by the blocked Hamiltonian
``P_n H P_n``.  This module provides the exact propagator, its limit form,
the sector machinery, second-order perturbative corrections in 1/K, and
the defect that measures how far a finite coupling is from the limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .operators import (
    Operator,
    Projector,
    Sector,
    SectorDecomposition,
    as_operator,
    block_diagonal_part,
    cluster_values,
    default_cluster_tol,
    eig,
    expm,
    projector_from_columns,
    real_eigenvalue_tol,
    snorm,
)


@dataclass(frozen=True)
class CoupledHamiltonian:
    """System Hamiltonian plus a measurement coupling of strength K.

    ``h_meas`` is the unit-strength coupling matrix; K scales it and plays
    the role of the inverse response time of the apparatus.  Either part
    may be non-Hermitian when it carries an effective decay width, which
    the Operator flags record.
    """

    h: Operator
    h_meas: Operator
    coupling: float

    def __post_init__(self):
        h = as_operator(self.h)
        hm = as_operator(self.h_meas)
        if h.dim != hm.dim:
            raise ValidationError("system and measurement dimensions differ")
        if not math.isfinite(self.coupling) or self.coupling < 0:
            raise ValidationError("coupling strength K must be finite and >= 0")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "h_meas", hm)

    @property
    def dim(self) -> int:
        return self.h.dim

    def with_coupling(self, coupling: float) -> "CoupledHamiltonian":
        return CoupledHamiltonian(self.h, self.h_meas, coupling)

    def total(self) -> Operator:
        """The full generator ``H + K * H_meas``."""
        return as_operator(self.h.matrix + self.coupling * self.h_meas.matrix,
                           hermitian=self.h.hermitian and self.h_meas.hermitian)


def zeno_sectors(hk: CoupledHamiltonian, cluster_tol: float | None = None) -> SectorDecomposition:
    """Distinct-eigenvalue sectors of the measurement coupling.

    Hermitian couplings give a complete resolution of the identity.  For a
    dissipative (non-Hermitian) coupling only the real-eigenvalue clusters
    define sectors in which probability is preserved; complex-eigenvalue
    weight leaks out of the space and is reported as a trace deficit by the
    density-matrix evolutions.
    """
    hm = hk.h_meas
    if hm.hermitian:
        return eig(hm, cluster_tol=cluster_tol)
    return real_sectors(hm, cluster_tol=cluster_tol)


def real_sectors(h_meas, cluster_tol: float | None = None,
                 real_tol: float | None = None) -> SectorDecomposition:
    """Real-eigenvalue sectors of a possibly dissipative coupling.

    Eigenvalues with ``|Im eta|`` below the threshold are clustered and
    each cluster contributes the orthogonal projector onto the span of its
    right eigenvectors.  No real eigenvalue at all yields an empty (valid)
    decomposition.  Complex eigenvalues are never clustered here, so a
    smeared dissipative spectrum cannot poison the decomposition.
    """
    hm = as_operator(h_meas)
    if hm.hermitian:
        return eig(hm, cluster_tol=cluster_tol)
    tol = default_cluster_tol(hm) if cluster_tol is None else float(cluster_tol)
    rtol = real_eigenvalue_tol(hm) if real_tol is None else float(real_tol)
    w, vr = np.linalg.eig(hm.matrix)
    real_idx = np.flatnonzero(np.abs(w.imag) <= rtol)
    sectors = []
    if real_idx.size:
        clusters = cluster_values(w[real_idx], tol)
        for group in clusters:
            idx = real_idx[group]
            eta = complex(np.mean(w[idx].real))
            proj = projector_from_columns(vr[:, idx])
            sectors.append(Sector(eta, proj, condition=1.0))
    return SectorDecomposition(tuple(sectors), tol, hm.dim, complete=False)


def diag_part(h, sectors: SectorDecomposition) -> Operator:
    """Blocked part ``sum_n P_n H P_n`` of the system Hamiltonian.

    Hermitian if ``h`` is, commutes with every sector projector, and is a
    fixed point of the blocking (applying it twice changes nothing).
    """
    hop = as_operator(h)
    blocked = block_diagonal_part(hop.matrix, sectors)
    return as_operator(blocked, hermitian=hop.hermitian if sectors.complete else None)


def exact_propagator(hk: CoupledHamiltonian, t: float) -> Operator:
    """Finite-coupling propagator ``exp(-i (H + K H_meas) t)``."""
    return expm(hk.total(), t)


def zeno_propagator(hk: CoupledHamiltonian, t: float,
                    sectors: SectorDecomposition | None = None) -> Operator:
    """Infinite-coupling limit form ``exp(-i (H^diag + K H_meas) t)``.

    Commutes with every sector projector, so sector populations computed
    with it are exactly constant in time.
    """
    if sectors is None:
        sectors = zeno_sectors(hk)
    hdiag = diag_part(hk.h, sectors)
    gen = hdiag.matrix + hk.coupling * hk.h_meas.matrix
    return expm(as_operator(gen, hermitian=hdiag.hermitian and hk.h_meas.hermitian), t)


def nonadiabatic_defect(hk: CoupledHamiltonian, t: float,
                        sectors: SectorDecomposition | None = None) -> float:
    """Spectral-norm distance between the exact and the limit propagator.

    Decays like C/K in the coupling, with C set by the system norm, the
    sector gaps and the horizon; acceptance checks fit the slope of a
    K-doubling sweep rather than any absolute constant.
    """
    exact = exact_propagator(hk, t)
    limit = zeno_propagator(hk, t, sectors=sectors)
    return snorm(exact.matrix - limit.matrix)


# ---------------------------------------------------------------------------
# perturbative spectrum in the inverse coupling
#
# With lam = 1/K and tau = K t the propagator is exp(-i H_lam tau) for
# H_lam = H_meas + lam H, and ordinary matrix perturbation theory in lam
# gives the corrections to the sector structure at large but finite K.

_DEGENERACY_RTOL = 1e-9


@dataclass(frozen=True)
class PerturbativeBranch:
    """One eigenvalue branch ``eta(lam) = eta0 + lam eta1 + lam^2 eta2``.

    ``projector`` projects on the zeroth-order eigenspace slice of the
    branch; ``projector_correction`` is its first-order correction built
    from the reduced resolvent.  ``resolved`` is False when first- and
    second-order data both failed to split a degenerate slice, in which
    case the branch keeps the whole lump (multiplicity > 1).
    """

    sector_index: int
    eta0: complex
    eta1: float
    eta2: float
    multiplicity: int
    projector: Projector
    projector_correction: np.ndarray
    resolved: bool = True

    def eigenvalue(self, lam: float, order: int = 2) -> complex:
        out = complex(self.eta0) + lam * self.eta1
        if order >= 2:
            out += lam * lam * self.eta2
        return out


@dataclass(frozen=True)
class PerturbativeExpansion:
    """Second-order perturbative data of ``H_meas + lam H``."""

    hk: CoupledHamiltonian
    sectors: SectorDecomposition
    order: int
    branches: tuple[PerturbativeBranch, ...]
    reduced_resolvents: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def unresolved(self) -> tuple[PerturbativeBranch, ...]:
        return tuple(b for b in self.branches if not b.resolved)

    def reduced_resolvent(self, n: int) -> np.ndarray:
        """``sum_{m != n} P_m / (eta_n - eta_m)``."""
        return self.reduced_resolvents[n]

    def predicted_eigenvalues(self, lam: float) -> np.ndarray:
        """All eigenvalue branches at ``lam``, repeated by multiplicity."""
        vals = []
        for b in self.branches:
            vals.extend([b.eigenvalue(lam, self.order)] * b.multiplicity)
        return np.array(vals)

    def generator(self, lam: float) -> Operator:
        """Blocked generator ``H_meas + lam H^diag + lam^2 sum_n P_n H S_n H P_n``
        reproducing the exact spectrum through second order."""
        hm = self.hk.h_meas.matrix
        h = self.hk.h.matrix
        out = hm.astype(complex).copy()
        for n, s in enumerate(self.sectors):
            p = s.projector.matrix
            out += lam * (p @ h @ p)
            if self.order >= 2:
                out += lam * lam * (p @ h @ self.reduced_resolvents[n] @ h @ p)
        return as_operator(out)


def perturbative_spectrum(hk: CoupledHamiltonian, order: int = 2,
                          sectors: SectorDecomposition | None = None) -> PerturbativeExpansion:
    """Eigenvalue and projector corrections of ``H_meas + lam H`` in lam.

    Within each sector the first-order splitting diagonalizes
    ``P_n H P_n``; slices still degenerate there are split by the
    second-order block through the reduced resolvent.  A slice degenerate
    at both orders is kept as one lump and reported via ``resolved=False``
    (its eigenvalue data is still correct for every state in the lump).
    """
    if order not in (1, 2):
        raise ValidationError("perturbative order must be 1 or 2")
    if not hk.h_meas.hermitian:
        raise ValidationError("perturbative corrections require a Hermitian coupling")
    if sectors is None:
        sectors = zeno_sectors(hk)
    sectors.validate_resolution()

    h = hk.h.matrix
    etas = sectors.eigenvalues
    scale = max(1.0, snorm(hk.h))

    resolvents = []
    for n, s in enumerate(sectors):
        res = np.zeros((sectors.dim, sectors.dim), dtype=complex)
        for m, sm in enumerate(sectors):
            if m != n:
                res += sm.projector.matrix / (etas[n] - etas[m])
        resolvents.append(res)

    branches: list[PerturbativeBranch] = []
    for n, s in enumerate(sectors):
        basis = _orthonormal_basis(s.projector)
        b1 = basis.conj().T @ h @ basis                      # first-order block
        w1, v1 = np.linalg.eigh((b1 + b1.conj().T) / 2)
        slices = cluster_values(w1, _DEGENERACY_RTOL * scale)
        for idx in slices:
            cols = basis @ v1[:, idx]
            eta1 = float(np.mean(w1[idx]))
            if order == 1:
                branches.append(_branch(n, etas[n], eta1, 0.0, cols,
                                        resolvents[n], h, resolved=len(idx) == 1))
                continue
            b2 = cols.conj().T @ h @ resolvents[n] @ h @ cols
            w2, v2 = np.linalg.eigh((b2 + b2.conj().T) / 2)
            if len(idx) == 1:
                branches.append(_branch(n, etas[n], eta1, float(w2[0]), cols,
                                        resolvents[n], h, resolved=True))
                continue
            sub_slices = cluster_values(w2, _DEGENERACY_RTOL * max(1.0, scale ** 2))
            for sub in sub_slices:
                sub_cols = cols @ v2[:, sub]
                eta2 = float(np.mean(w2[sub]))
                branches.append(_branch(n, etas[n], eta1, eta2, sub_cols,
                                        resolvents[n], h, resolved=len(sub) == 1))
    return PerturbativeExpansion(hk=hk, sectors=sectors, order=order,
                                 branches=tuple(branches),
                                 reduced_resolvents=tuple(resolvents))


def _orthonormal_basis(p: Projector) -> np.ndarray:
    w, v = np.linalg.eigh(p.matrix)
    cols = v[:, w > 0.5]
    if cols.shape[1] != p.rank:
        raise ValidationError("projector rank does not match its spectrum")
    return cols


def _branch(n: int, eta0: complex, eta1: float, eta2: float, cols: np.ndarray,
            resolvent: np.ndarray, h: np.ndarray, resolved: bool) -> PerturbativeBranch:
    proj = projector_from_columns(cols)
    correction = resolvent @ h @ proj.matrix + proj.matrix @ h @ resolvent
    return PerturbativeBranch(
        sector_index=n, eta0=complex(eta0), eta1=eta1, eta2=eta2,
        multiplicity=cols.shape[1], projector=proj,
        projector_correction=correction, resolved=resolved,
    )
