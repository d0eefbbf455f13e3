"""Transfer (RG) operator, two-site merging, and fixed-point Schmidt spectra.

The transfer operator is ``E = sum_p A_p (x) conj(A_p)`` acting on the doubled
bond space.  Rows are indexed by ``(alpha, mu)`` and columns by ``(beta, nu)``,
flattened row-major (``alpha * D + mu``), with ``alpha, beta`` the ket bond
indices and ``mu, nu`` the conjugated ones.  One RG step maps ``E -> E @ E``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import (
    DegenerateDominantEigenvalue,
    DimensionMismatch,
    NonDiagonalizableFixedPoint,
    NullState,
    RankDeficientFixedPoint,
)
from .mps import UniformMPS, make_uniform_mps

DEGENERACY_TOL = 1e-8
MERGE_RANK_TOL = 1e-12
HERMITIAN_TOL = 1e-8


@dataclass(frozen=True)
class TransferOperator:
    """``D^2 x D^2`` transfer operator.

    ``source`` optionally remembers an MPS whose transfer operator this is; it
    lets routines that need the site tensors (degenerate fallbacks) recover
    them.  It never takes part in equality.
    """

    matrix: NDArray[np.complex128]
    source: UniformMPS | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        n = mat.shape[0] if mat.ndim == 2 else -1
        D = int(round(np.sqrt(max(n, 0))))
        if mat.ndim != 2 or mat.shape[1] != n or D * D != n or D < 1:
            raise DimensionMismatch(f"transfer matrix must be D^2 x D^2, got {mat.shape}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def bond_dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    @property
    def tensor(self) -> NDArray[np.complex128]:
        """View with axes ``(alpha, mu, beta, nu)``."""
        D = self.bond_dim
        return self.matrix.reshape(D, D, D, D)


def transfer_operator(mps: UniformMPS) -> TransferOperator:
    A = mps.tensors
    D = mps.bond_dim
    E = np.einsum("pab,pcd->acbd", A, A.conj()).reshape(D * D, D * D)
    return TransferOperator(E, source=mps)


@dataclass(frozen=True)
class MergedSite:
    """Result of merging two sites: block tensors ``lambda_l V^l`` and the ``lambda_l``."""

    tensors: NDArray[np.complex128]
    singular_values: NDArray[np.float64]

    @property
    def mps(self) -> UniformMPS:
        return make_uniform_mps(list(self.tensors))


def merge_sites(mps: UniformMPS, rank_tol: float = MERGE_RANK_TOL) -> MergedSite:
    """Merge two neighbouring sites into one block site via an SVD.

    The ``d^2 x D^2`` matrix with rows ``(p, q)`` and columns ``(alpha, gamma)``
    holding ``[A_p A_q]_{alpha gamma}`` is decomposed as ``U S Vh``; row ``l``
    of ``Vh`` reshaped to ``D x D`` is ``V^l``.  Singular values below
    ``rank_tol * lambda_1`` are dropped.
    """
    A = mps.tensors
    d, D = mps.phys_dim, mps.bond_dim
    pairs = np.einsum("pab,qbc->pqac", A, A).reshape(d * d, D * D)
    _, s, vh = np.linalg.svd(pairs, full_matrices=False)
    if s[0] == 0.0:
        raise NullState("every two-site product vanishes")
    keep = s > rank_tol * s[0]
    s, vh = s[keep], vh[keep]
    tensors = (s[:, None] * vh).reshape(-1, D, D)
    return MergedSite(tensors, s)


def rg_step(E: TransferOperator) -> TransferOperator:
    """One RG step, ``E -> E^2``.  A remembered source MPS is merged alongside."""
    source = merge_sites(E.source).mps if E.source is not None else None
    return TransferOperator(E.matrix @ E.matrix, source=source)


def _sort_spectrum(w: NDArray[np.complex128], rel_tol: float = 1e-9) -> NDArray[np.complex128]:
    w = np.asarray(w, dtype=np.complex128)
    if w.size == 0:
        return w
    scale = max(np.abs(w).max(), np.finfo(float).tiny)
    by_mag = w[np.argsort(-np.abs(w), kind="stable")]
    out, group = [], [by_mag[0]]
    for z in by_mag[1:]:
        if abs(abs(z) - abs(group[0])) <= rel_tol * scale:
            group.append(z)
        else:
            out.extend(sorted(group, key=lambda u: (-u.real, -u.imag)))
            group = [z]
    out.extend(sorted(group, key=lambda u: (-u.real, -u.imag)))
    return np.array(out)


def dominant_spectrum(E: TransferOperator) -> NDArray[np.complex128]:
    """All eigenvalues of ``E``, descending by magnitude.

    Magnitude ties (relative ``1e-9``) are broken by descending real part,
    then descending imaginary part.
    """
    return _sort_spectrum(np.linalg.eigvals(E.matrix))


def _scale(E: TransferOperator) -> float:
    s = float(np.abs(E.matrix).max())
    if s == 0.0:
        raise NullState("transfer operator is zero")
    return s


def _phase_fix(v: NDArray[np.complex128]) -> NDArray[np.complex128]:
    k = np.argmax(np.abs(v))
    return v * (abs(v.flat[k]) / v.flat[k])


def dominant_eigenpair(
    E: TransferOperator, degeneracy_tol: float = DEGENERACY_TOL
) -> tuple[complex, NDArray[np.complex128], NDArray[np.complex128]]:
    """Dominant eigenvalue with right and left eigenvectors.

    The left eigenvector ``l`` satisfies ``l @ E = lam * l`` (no conjugation).
    Both vectors have their largest-magnitude entry made real positive.

    Raises:
        DegenerateDominantEigenvalue: ``|lam_2| >= (1 - degeneracy_tol) |lam_1|``.
    """
    s = _scale(E)
    M = E.matrix / s
    w, V = np.linalg.eig(M)
    order = np.argsort(-np.abs(w), kind="stable")
    lam = w[order[0]]
    if len(w) > 1 and abs(w[order[1]]) >= (1.0 - degeneracy_tol) * abs(lam):
        raise DegenerateDominantEigenvalue(
            f"|lambda_1| = {abs(lam) * s:.6g} and |lambda_2| = {abs(w[order[1]]) * s:.6g} coincide"
        )
    right = V[:, order[0]]
    wl, Vl = np.linalg.eig(M.T)
    left = Vl[:, np.argmin(np.abs(wl - lam))]
    return complex(lam * s), _phase_fix(right), _phase_fix(left)


def _hermitian_part(X: NDArray[np.complex128], what: str) -> NDArray[np.complex128]:
    X = _phase_fix(X)
    if np.abs(X - X.conj().T).max() > HERMITIAN_TOL * np.abs(X).max():
        raise NonDiagonalizableFixedPoint(f"{what} fixed point is not Hermitian")
    return 0.5 * (X + X.conj().T)


@dataclass(frozen=True)
class CanonicalForm:
    """Transfer operator in the gauge whose right fixed point is the identity.

    Attributes:
        operator: Gauged transfer operator ``(X^-1 (x) conj(X)^-1) E (X (x) conj(X))``.
        eigenvalue: Dominant eigenvalue (unchanged by the gauge).
        gauge: ``X`` with ``R = X X^dagger``.
        left: Gauged left fixed point ``X^T L conj(X)`` as a Hermitian ``D x D`` matrix.
    """

    operator: TransferOperator
    eigenvalue: complex
    gauge: NDArray[np.complex128]
    left: NDArray[np.complex128]


def canonical_form(E: TransferOperator, degeneracy_tol: float = DEGENERACY_TOL) -> CanonicalForm:
    """Gauge ``E`` so that its dominant right eigenvector becomes ``sum_i |ii>``.

    Raises:
        DegenerateDominantEigenvalue: see :func:`dominant_eigenpair`.
        RankDeficientFixedPoint: the right fixed point is singular.
        NonDiagonalizableFixedPoint: a fixed point fails the Hermitian check.
    """
    lam, r, l = dominant_eigenpair(E, degeneracy_tol)
    D = E.bond_dim
    R = _hermitian_part(r.reshape(D, D), "right")
    ev = np.linalg.eigvalsh(R)
    if ev[0] <= 1e-12 * ev[-1]:
        raise RankDeficientFixedPoint(f"right fixed point has spectrum {ev}")
    X = np.linalg.cholesky(R)
    Xi = np.linalg.inv(X)
    G = np.kron(Xi, Xi.conj()) @ E.matrix @ np.kron(X, X.conj())
    Lg = _hermitian_part(X.T @ l.reshape(D, D) @ X.conj(), "left")
    source = None
    if E.source is not None:
        source = make_uniform_mps([Xi @ a @ X for a in E.source.tensors])
    return CanonicalForm(TransferOperator(G, source=source), lam, X, Lg)


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Normalized fixed-point coefficients, strictly positive and descending."""

    values: tuple[float, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size == 0 or np.any(v <= 0):
            raise ValueError("Schmidt coefficients must be positive")
        if abs(v.sum() - 1.0) > 1e-10:
            raise ValueError(f"Schmidt coefficients sum to {v.sum()}, not 1")
        if np.any(np.diff(v) > 1e-15):
            raise ValueError("Schmidt coefficients must be descending")
        object.__setattr__(self, "values", tuple(float(x) for x in v))


def fixed_point_spectrum(
    E: TransferOperator, degeneracy_tol: float = DEGENERACY_TOL
) -> SchmidtSpectrum:
    """Normalized Schmidt coefficients of the RG fixed point ``E^inf``."""
    cf = canonical_form(E, degeneracy_tol)
    ev = np.linalg.eigvalsh(cf.left)[::-1]
    if ev[-1] < -HERMITIAN_TOL * ev[0]:
        raise NonDiagonalizableFixedPoint(f"left fixed point is indefinite: {ev}")
    ev = ev[ev > 1e-14 * ev[0]]
    ev = ev / ev.sum()
    return SchmidtSpectrum(tuple(ev))


def fixed_point_entanglement(spec: SchmidtSpectrum) -> float:
    """Fixed-point entanglement per block, ``-log lambda~_1``."""
    return max(0.0, -float(np.log(spec.values[0])))


def fixed_point_entropy(spec: SchmidtSpectrum) -> float:
    """Block entropy at the fixed point, ``-2 sum_i lambda~_i log lambda~_i``."""
    v = np.asarray(spec.values)
    return float(-2.0 * np.sum(v * np.log(v)))


def log_trace_power(E: TransferOperator | ArrayLike, m: int) -> float:
    """``log |Tr(E^m)|`` without overflow, by factoring out the spectral radius."""
    mat = E.matrix if isinstance(E, TransferOperator) else np.asarray(E, dtype=np.complex128)
    rho = float(np.abs(np.linalg.eigvals(mat)).max())
    if rho == 0.0:
        return -np.inf
    t = np.trace(np.linalg.matrix_power(mat / rho, m))
    return m * np.log(rho) + float(np.log(abs(t)))
