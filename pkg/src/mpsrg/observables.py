"""Nearest-neighbour reduced density matrices, concurrence, and fidelity per site."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import (
    DegenerateDominantEigenvalue,
    DimensionMismatch,
    InternalConsistencyError,
    NotQubits,
)
from .mps import UniformMPS, state_vector
from .transfer import dominant_eigenpair, transfer_operator

FALLBACK_SITES = 12
PSD_TOL = 1e-9

_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_YY = np.kron(_SY, _SY)


@dataclass(frozen=True)
class TwoSiteDensity:
    """Density matrix of two neighbouring sites, basis ``(p, q)`` row-major.

    Attributes:
        matrix: ``d^2 x d^2`` Hermitian, unit trace.
        phys_dim: Local dimension ``d``.
        chain_length: ``None`` for the infinite-chain transfer contraction,
            otherwise the ring length of the finite-chain fallback.
    """

    matrix: NDArray[np.complex128]
    phys_dim: int
    chain_length: int | None = None

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=np.complex128)
        d = self.phys_dim
        if rho.shape != (d * d, d * d):
            raise DimensionMismatch(f"expected {d * d}x{d * d}, got {rho.shape}")
        if np.abs(rho - rho.conj().T).max() > 1e-10:
            raise InternalConsistencyError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > 1e-10:
            raise InternalConsistencyError("density matrix does not have unit trace")
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    @property
    def from_finite_chain(self) -> bool:
        return self.chain_length is not None


def _finalize(rho: NDArray, d: int, chain_length: int | None) -> TwoSiteDensity:
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    return TwoSiteDensity(rho, d, chain_length)


def finite_chain_rdm(mps: UniformMPS, m: int = FALLBACK_SITES) -> TwoSiteDensity:
    """Two-site density matrix of sites 1 and 2 on an ``m``-site ring."""
    d = mps.phys_dim
    psi, _ = state_vector(mps, m)
    M = psi.reshape(d * d, -1)
    return _finalize(M @ M.conj().T, d, m)


def two_site_rdm(mps: UniformMPS, fallback_sites: int = FALLBACK_SITES) -> TwoSiteDensity:
    """Infinite-chain nearest-neighbour density matrix from the transfer fixed points.

    ``rho_{(pq),(p'q')} ~ l^T (A_p (x) conj(A_p')) (A_q (x) conj(A_q')) r``.  A
    degenerate dominant eigenvalue has no unique fixed point; the density
    matrix then comes from a ``fallback_sites`` ring, recorded in the result.
    """
    try:
        _, r, l = dominant_eigenpair(transfer_operator(mps))
    except DegenerateDominantEigenvalue:
        return finite_chain_rdm(mps, fallback_sites)
    A = mps.tensors
    d, D = mps.phys_dim, mps.bond_dim
    X = np.einsum("pab,xcd->pxacbd", A, A.conj()).reshape(d, d, D * D, D * D)
    left = np.einsum("i,pxij->pxj", l, X)
    right = np.einsum("qyjk,k->qyj", X, r)
    rho = np.einsum("pxj,qyj->pqxy", left, right).reshape(d * d, d * d)
    return _finalize(rho, d, None)


def concurrence(rho: TwoSiteDensity) -> float:
    """Two-qubit concurrence ``max(0, s1 - s2 - s3 - s4)``.

    Raises:
        NotQubits: ``d != 2``.
        InternalConsistencyError: an eigenvalue of ``rho`` is below ``-1e-9``.
    """
    if rho.phys_dim != 2:
        raise NotQubits(f"concurrence needs qubits, got d={rho.phys_dim}")
    w, V = np.linalg.eigh(rho.matrix)
    if w[0] < -PSD_TOL:
        raise InternalConsistencyError(f"density matrix has eigenvalue {w[0]:.3e}")
    m = (V * np.clip(w, 0.0, None)) @ V.conj().T
    R = m @ _YY @ m.conj() @ _YY
    s = np.sqrt(np.clip(np.linalg.eigvals(R).real, 0.0, None))
    s = np.sort(s)[::-1]
    return float(max(0.0, s[0] - s[1] - s[2] - s[3]))


@dataclass(frozen=True)
class MixedTransfer:
    """``W = sum_p A_p (x) conj(B_p)`` for two MPS with the same local dimension."""

    matrix: NDArray[np.complex128]


def mixed_transfer(mps1: UniformMPS, mps2: UniformMPS) -> MixedTransfer:
    if mps1.phys_dim != mps2.phys_dim:
        raise DimensionMismatch("states must share the local dimension")
    A, B = mps1.tensors, mps2.tensors
    W = np.einsum("pab,pcd->acbd", A, B.conj()).reshape(
        mps1.bond_dim * mps2.bond_dim, mps1.bond_dim * mps2.bond_dim
    )
    return MixedTransfer(W)


def _log_spectral_radius(M: NDArray) -> float:
    return float(np.log(np.abs(np.linalg.eigvals(M)).max()))


def fidelity_per_site(mps1: UniformMPS, mps2: UniformMPS) -> float:
    """Long-chain logarithmic fidelity per site.

    ``f = 2 log|mu_1(W)| - log|lambda_1(E_1)| - log|lambda_1(E_2)|``, the limit
    of ``(1/m) log(|Tr W^m|^2 / (Tr E_1^m Tr E_2^m))`` along even ``m``.
    """
    W = mixed_transfer(mps1, mps2).matrix
    E1 = transfer_operator(mps1).matrix
    E2 = transfer_operator(mps2).matrix
    return 2.0 * _log_spectral_radius(W) - _log_spectral_radius(E1) - _log_spectral_radius(E2)
