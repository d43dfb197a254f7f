"""Dense complex operator engine.

Everything downstream (pulsed and continuous measurement dynamics, the
bundled models, the scenario runner) is built on the four primitives in
this module: matrix exponentials, spectral decompositions clustered into
distinct-eigenvalue sectors, projector algebra, and block-structure
diagnostics.

Conventions
-----------
* ``expm(a, t)`` returns ``exp(-1j * t * a)``: the *generator* is passed,
  never a pre-multiplied exponent.  Hermitian generators are exponentiated
  through their eigendecomposition, which keeps the result unitary to
  machine precision; everything else goes through the scaling-and-squaring
  rational (Pade) kernel of :func:`scipy.linalg.expm`.
* Norms: the spectral norm (largest singular value) backs convergence and
  unitarity statements; the Frobenius norm backs block-structure
  diagnostics such as :func:`offblock_norm`.
* A matrix counts as Hermitian when ``max|A - A^dag|`` does not exceed
  ``HERMITIAN_RTOL`` times its spectral norm.

Intended scale is "desk" size, dimensions up to a couple hundred; there is
deliberately no sparse or structured path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import AmbiguousSpectrumError, ValidationError

# Tolerances used by the type invariants.  Dimensionful checks scale with
# the matrix norm or dimension as noted at each use site.
HERMITIAN_RTOL = 1e-12
IDEMPOTENCY_TOL = 1e-10   # times dim
COMPLETENESS_TOL = 1e-10  # times dim
ORTHOGONALITY_TOL = 1e-10
TRACE_RANK_TOL = 1e-10
UNITARITY_TOL = 1e-12     # times dim
REAL_EIGENVALUE_RTOL = 1e-9
DEFAULT_CLUSTER_RTOL = 1e-8
DEFAULT_MAX_SECTOR_CONDITION = 1e8


def snorm(a) -> float:
    """Spectral norm (largest singular value)."""
    return float(np.linalg.norm(as_matrix(a), 2))


def fnorm(a) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(as_matrix(a)))


def as_matrix(a) -> np.ndarray:
    """Coerce an Operator, Projector, DensityMatrix or array-like to a
    complex square ndarray (no copy when already suitable)."""
    if isinstance(a, (Operator, Projector, DensityMatrix)):
        return a.matrix
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    return m


def _check_finite(m: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(m.view(float))):
        raise ValidationError(f"{what} contains NaN or Inf entries")


def is_hermitian(a) -> bool:
    """Hermiticity test at the module tolerance (1e-12 relative to the
    spectral norm; the zero matrix is Hermitian)."""
    m = as_matrix(a)
    dev = np.max(np.abs(m - m.conj().T))
    return bool(dev <= HERMITIAN_RTOL * max(snorm(m), np.finfo(float).tiny))


@dataclass(frozen=True)
class Operator:
    """Dense complex square matrix with a Hermiticity flag.

    The flag is asserted by the caller and verified on construction; use
    :func:`as_operator` to auto-detect it instead.  The stored array is
    made read-only, so instances are safe to share across threads.
    """

    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex, order="C")
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValidationError(f"operator must be square, got shape {m.shape}")
        _check_finite(m, "operator")
        if self.hermitian:
            dev = np.max(np.abs(m - m.conj().T))
            scale = max(snorm(m), np.finfo(float).tiny)
            if dev > HERMITIAN_RTOL * scale:
                raise ValidationError(
                    f"matrix flagged Hermitian deviates by {dev:.3e} "
                    f"(allowed {HERMITIAN_RTOL * scale:.3e})"
                )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def adjoint(self) -> "Operator":
        return Operator(self.matrix.conj().T, hermitian=self.hermitian)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __matmul__(self, other):
        return self.matrix @ as_matrix(other)

    def __rmatmul__(self, other):
        return as_matrix(other) @ self.matrix


def as_operator(a, hermitian: bool | None = None) -> Operator:
    """Wrap ``a`` as an :class:`Operator`.

    With ``hermitian=None`` the flag is detected numerically; passing an
    explicit flag re-asserts (and re-verifies) it.
    """
    if isinstance(a, Operator) and hermitian in (None, a.hermitian):
        return a
    m = as_matrix(a)
    _check_finite(m, "operator")
    if hermitian is None:
        hermitian = is_hermitian(m)
    return Operator(m, hermitian=hermitian)


@dataclass(frozen=True)
class Projector:
    """Orthogonal projector: Hermitian, idempotent, integer trace."""

    matrix: np.ndarray
    rank: int

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex, order="C")
        _check_finite(m, "projector")
        n = m.shape[0]
        if m.ndim != 2 or m.shape[1] != n:
            raise ValidationError(f"projector must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_RTOL * max(1.0, snorm(m)):
            raise ValidationError("projector is not Hermitian")
        if snorm(m @ m - m) > IDEMPOTENCY_TOL * n:
            raise ValidationError("projector is not idempotent")
        tr = m.trace().real
        if abs(tr - self.rank) > TRACE_RANK_TOL * max(1, n):
            raise ValidationError(
                f"projector trace {tr:.12g} does not match rank {self.rank}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __matmul__(self, other):
        return self.matrix @ as_matrix(other)

    def __rmatmul__(self, other):
        return as_matrix(other) @ self.matrix


def projector_from_columns(columns: np.ndarray) -> Projector:
    """Orthogonal projector onto the column span (orthonormalized by QR)."""
    cols = np.atleast_2d(np.asarray(columns, dtype=complex))
    if cols.shape[1] == 0:
        raise ValidationError("cannot build a projector from zero columns")
    q, _ = np.linalg.qr(cols)
    return Projector(q @ q.conj().T, rank=cols.shape[1])


def basis_projector(dim: int, *indices: int) -> Projector:
    """Projector onto the span of the given canonical basis vectors."""
    cols = np.zeros((dim, len(indices)), dtype=complex)
    for k, i in enumerate(indices):
        cols[i, k] = 1.0
    return Projector(cols @ cols.conj().T, rank=len(indices))


@dataclass(frozen=True)
class Sector:
    """One distinct-eigenvalue sector: the eigenvalue, the orthogonal
    projector onto its invariant subspace, and (for non-normal inputs) the
    condition number of the underlying spectral projector."""

    eigenvalue: complex
    projector: Projector
    condition: float = 1.0

    @property
    def multiplicity(self) -> int:
        return self.projector.rank


@dataclass(frozen=True)
class SectorDecomposition:
    """Ordered list of distinct-eigenvalue sectors.

    For a Hermitian input the sectors resolve the identity; restrictions
    (for instance to real eigenvalues of a dissipative coupling) may be
    incomplete, which the ``complete`` flag records.  ``dropped`` lists
    ``(eigenvalue, condition)`` pairs of clusters that were excluded for
    exceeding the conditioning threshold.
    """

    sectors: tuple[Sector, ...]
    cluster_tol: float
    dim: int
    complete: bool = True
    dropped: tuple[tuple[complex, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        for s in self.sectors:
            if s.projector.dim != self.dim:
                raise ValidationError("sector projector dimension mismatch")
        values = [s.eigenvalue for s in self.sectors]
        for i in range(len(values)):
            for j in range(i + 1, len(values)):
                if abs(values[i] - values[j]) <= self.cluster_tol:
                    raise ValidationError(
                        "sector eigenvalues are not distinct at the cluster tolerance"
                    )

    def __iter__(self):
        return iter(self.sectors)

    def __len__(self) -> int:
        return len(self.sectors)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([s.eigenvalue for s in self.sectors])

    @property
    def projectors(self) -> list[Projector]:
        return [s.projector for s in self.sectors]

    def total_rank(self) -> int:
        return sum(s.multiplicity for s in self.sectors)

    def completeness_defect(self) -> float:
        total = sum((s.projector.matrix for s in self.sectors),
                    np.zeros((self.dim, self.dim), dtype=complex))
        return snorm(total - np.eye(self.dim))

    def orthogonality_defect(self) -> float:
        worst = 0.0
        for i, si in enumerate(self.sectors):
            for sj in self.sectors[i + 1:]:
                worst = max(worst, snorm(si.projector.matrix @ sj.projector.matrix))
        return worst

    def validate_resolution(self) -> None:
        """Assert completeness and mutual orthogonality (Hermitian case)."""
        if not self.complete:
            raise ValidationError("decomposition is marked incomplete")
        d = self.completeness_defect()
        if d > COMPLETENESS_TOL * self.dim:
            raise ValidationError(f"projectors do not resolve the identity ({d:.3e})")
        o = self.orthogonality_defect()
        if o > ORTHOGONALITY_TOL:
            raise ValidationError(f"projectors are not mutually orthogonal ({o:.3e})")


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive-semidefinite matrix with trace at most one
    (exactly one under unitary dynamics; dissipative models leak trace)."""

    matrix: np.ndarray

    _PSD_TOL = 1e-10
    _TRACE_TOL = 1e-10

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex, order="C")
        _check_finite(m, "density matrix")
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"density matrix must be square, got {m.shape}")
        scale = max(1.0, snorm(m))
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_RTOL * scale * m.shape[0]:
            raise ValidationError("density matrix is not Hermitian")
        evals = np.linalg.eigvalsh((m + m.conj().T) / 2)
        if evals.min() < -self._PSD_TOL * scale:
            raise ValidationError(
                f"density matrix has negative eigenvalue {evals.min():.3e}"
            )
        tr = m.trace().real
        if tr > 1.0 + self._TRACE_TOL:
            raise ValidationError(f"density matrix trace {tr:.12g} exceeds one")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def pure(cls, state: np.ndarray) -> "DensityMatrix":
        """Rank-one density matrix of a normalized state vector."""
        v = np.asarray(state, dtype=complex).reshape(-1)
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise ValidationError("cannot normalize the zero vector")
        v = v / nrm
        return cls(np.outer(v, v.conj()))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(self.matrix.trace().real)

    def population(self, projector: Projector) -> float:
        """Probability weight inside the projector's range."""
        return float((projector.matrix @ self.matrix).trace().real)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


# ---------------------------------------------------------------------------
# matrix exponential


def expm(a, t: float | complex = 1.0) -> Operator:
    """Propagator ``exp(-1j * t * a)`` of the generator ``a``.

    Hermitian generators go through the eigendecomposition (result unitary
    to ``UNITARITY_TOL * dim`` for real ``t``); other generators through
    scipy's scaling-and-squaring Pade kernel.
    """
    op = as_operator(a)
    if not np.all(np.isfinite([t.real if isinstance(t, complex) else t,
                               t.imag if isinstance(t, complex) else 0.0])):
        raise ValidationError("time scale must be finite")
    if op.hermitian:
        w, v = np.linalg.eigh(op.matrix)
        phases = np.exp(-1j * t * w)
        return Operator((v * phases) @ v.conj().T)
    return Operator(scipy.linalg.expm(-1j * t * op.matrix))


# ---------------------------------------------------------------------------
# spectral clustering into sectors


def default_cluster_tol(a) -> float:
    """Default clustering tolerance, 1e-8 * max(1, ||A||)."""
    return DEFAULT_CLUSTER_RTOL * max(1.0, snorm(a))


def real_eigenvalue_tol(a) -> float:
    """Threshold on |Im eta| below which an eigenvalue counts as real."""
    return REAL_EIGENVALUE_RTOL * max(1.0, snorm(a))


def cluster_values(values: np.ndarray, tol: float) -> list[list[int]]:
    """Group indices of ``values`` into clusters of pairwise distance <= tol.

    Clusters are connected components of the proximity graph.  If chaining
    produces a component whose diameter exceeds ``tol`` the clustering is
    ambiguous (a different tolerance would split it differently) and an
    :class:`AmbiguousSpectrumError` carrying the gap histogram is raised.
    """
    vals = np.asarray(values)
    n = len(vals)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    dist = np.abs(vals[:, None] - vals[None, :])
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    clusters = sorted(groups.values(), key=lambda idx: (vals[idx[0]].real, vals[idx[0]].imag))

    for idx in clusters:
        if len(idx) > 1:
            diameter = dist[np.ix_(idx, idx)].max()
            if diameter > tol:
                gaps = np.sort(dist[np.triu_indices(n, k=1)])
                histogram = np.histogram(gaps, bins=min(16, max(4, n)))
                raise AmbiguousSpectrumError(
                    f"eigenvalue gaps straddle the cluster tolerance {tol:.3e} "
                    f"(cluster diameter {diameter:.3e}); adjust cluster_tol",
                    gaps=gaps,
                    histogram=histogram,
                )
    return clusters


def eig(a, cluster_tol: float | None = None,
        max_condition: float = DEFAULT_MAX_SECTOR_CONDITION) -> SectorDecomposition:
    """Spectral decomposition into distinct-eigenvalue sectors.

    Eigenvalues within ``cluster_tol`` of each other are merged into one
    sector whose projector has rank equal to the multiplicity.  Hermitian
    input yields an exact resolution of the identity.  For non-Hermitian
    input the projector of each cluster is the orthogonal projector onto
    the span of its right eigenvectors; clusters whose spectral projector
    has condition number above ``max_condition`` (poorly separated
    invariant subspace) are excluded and recorded in ``dropped``.
    """
    op = as_operator(a)
    tol = default_cluster_tol(op) if cluster_tol is None else float(cluster_tol)

    if op.hermitian:
        w, v = np.linalg.eigh(op.matrix)
        clusters = cluster_values(w, tol)
        sectors = []
        for idx in clusters:
            cols = v[:, idx]
            proj = Projector(cols @ cols.conj().T, rank=len(idx))
            sectors.append(Sector(complex(np.mean(w[idx])), proj, condition=1.0))
        return SectorDecomposition(tuple(sectors), tol, op.dim, complete=True)

    w, vr = scipy.linalg.eig(op.matrix)
    clusters = cluster_values(w, tol)
    vr_inv = np.linalg.inv(vr)
    sectors = []
    dropped = []
    for idx in clusters:
        eta = complex(np.mean(w[idx]))
        spectral = vr[:, idx] @ vr_inv[idx, :]
        condition = snorm(spectral)
        if condition > max_condition:
            dropped.append((eta, condition))
            continue
        q, _ = np.linalg.qr(vr[:, idx])
        proj = Projector(q @ q.conj().T, rank=len(idx))
        sectors.append(Sector(eta, proj, condition=condition))
    return SectorDecomposition(tuple(sectors), tol, op.dim,
                               complete=not dropped and _ranks_fill(sectors, op.dim),
                               dropped=tuple(dropped))


def _ranks_fill(sectors, dim) -> bool:
    return sum(s.multiplicity for s in sectors) == dim


def offblock_norm(a, sectors: SectorDecomposition) -> float:
    """Frobenius norm of the part of ``a`` outside the sector blocks,
    ``||A - sum_n P_n A P_n||_F``.  Zero iff ``a`` is block diagonal."""
    m = as_matrix(a)
    if m.shape[0] != sectors.dim:
        raise ValidationError(
            f"operator dimension {m.shape[0]} does not match sectors ({sectors.dim})"
        )
    block = np.zeros_like(m)
    for s in sectors:
        p = s.projector.matrix
        block += p @ m @ p
    return fnorm(m - block)


def block_diagonal_part(a, sectors: SectorDecomposition) -> np.ndarray:
    """``sum_n P_n A P_n`` as a plain array."""
    m = as_matrix(a)
    if m.shape[0] != sectors.dim:
        raise ValidationError(
            f"operator dimension {m.shape[0]} does not match sectors ({sectors.dim})"
        )
    out = np.zeros_like(m)
    for s in sectors:
        p = s.projector.matrix
        out += p @ m @ p
    return out


# ---------------------------------------------------------------------------
# matrix literal files
#
# Plain-text format: first line "dim d", then d*d lines "row col re im"
# with 0-indexed coordinates.  Every entry must appear exactly once.


def save_matrix(path, a) -> None:
    """Write a matrix literal file."""
    m = as_matrix(a)
    d = m.shape[0]
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"dim {d}\n")
        for i in range(d):
            for j in range(d):
                fh.write(f"{i} {j} {float(m[i, j].real)!r} {float(m[i, j].imag)!r}\n")


def load_matrix(path) -> Operator:
    """Read a matrix literal file; the Hermiticity flag is auto-detected."""
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    body = [(k, ln.strip()) for k, ln in enumerate(lines, start=1) if ln.strip()]
    if not body:
        raise ValidationError(f"{path}: empty matrix file")
    k0, header = body[0]
    parts = header.split()
    if len(parts) != 2 or parts[0] != "dim":
        raise ValidationError(f"{path}:{k0}: expected 'dim d' header, got {header!r}")
    try:
        d = int(parts[1])
    except ValueError:
        raise ValidationError(f"{path}:{k0}: dimension is not an integer") from None
    if d < 1:
        raise ValidationError(f"{path}:{k0}: dimension must be >= 1")
    m = np.zeros((d, d), dtype=complex)
    seen = np.zeros((d, d), dtype=bool)
    for k, ln in body[1:]:
        fields = ln.split()
        if len(fields) != 4:
            raise ValidationError(f"{path}:{k}: expected 'row col re im', got {ln!r}")
        try:
            i, j = int(fields[0]), int(fields[1])
            re, im = float(fields[2]), float(fields[3])
        except ValueError:
            raise ValidationError(f"{path}:{k}: could not parse entry {ln!r}") from None
        if not (0 <= i < d and 0 <= j < d):
            raise ValidationError(f"{path}:{k}: index ({i},{j}) out of range for dim {d}")
        if seen[i, j]:
            raise ValidationError(f"{path}:{k}: duplicate entry ({i},{j})")
        if not (math.isfinite(re) and math.isfinite(im)):
            raise ValidationError(f"{path}:{k}: non-finite entry")
        seen[i, j] = True
        m[i, j] = complex(re, im)
    if not seen.all():
        missing = int((~seen).sum())
        raise ValidationError(f"{path}: {missing} of {d * d} entries missing")
    return as_operator(m)
