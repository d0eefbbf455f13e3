"""Translation-invariant matrix product states with periodic boundary conditions.

A uniform MPS on ``m`` sites is

    |psi> = sum_{p_1..p_m} Tr(A_{p_1} A_{p_2} ... A_{p_m}) |p_1 p_2 ... p_m>

with ``d`` square ``D x D`` matrices ``A_p``.  States are never normalized;
every quantity that needs a norm divides by it explicitly.

Basis ordering is lexicographic with ``p_1`` the most significant digit, so
the configuration ``(p_1, ..., p_m)`` sits at index ``sum_k p_k d**(m-k)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import BudgetExceeded, DimensionMismatch, LabelOutOfRange, NullState

DEFAULT_MAX_ENTRIES = 2**20


@dataclass(frozen=True)
class UniformMPS:
    """Site tensor family ``{A_p}`` of a translation-invariant MPS.

    Attributes:
        tensors: Array of shape ``(d, D, D)``; ``tensors[p]`` is ``A_p``.
            Stored read-only.
    """

    tensors: NDArray[np.complex128]

    @property
    def phys_dim(self) -> int:
        return self.tensors.shape[0]

    @property
    def bond_dim(self) -> int:
        return self.tensors.shape[1]

    def __iter__(self):
        return iter(self.tensors)

    def __len__(self) -> int:
        return self.phys_dim


def make_uniform_mps(matrices: Sequence[ArrayLike]) -> UniformMPS:
    """Validate a list of site matrices and wrap them as a :class:`UniformMPS`.

    Raises:
        DimensionMismatch: Empty list, non-square or unequal matrices.
        NullState: All matrices are zero.
    """
    mats = [np.asarray(a, dtype=np.complex128) for a in matrices]
    if not mats:
        raise DimensionMismatch("need at least one site matrix")
    shape = mats[0].shape
    if len(shape) != 2 or shape[0] != shape[1] or shape[0] < 1:
        raise DimensionMismatch(f"site matrices must be square, got shape {shape}")
    for k, a in enumerate(mats):
        if a.shape != shape:
            raise DimensionMismatch(f"matrix {k} has shape {a.shape}, expected {shape}")
    tensors = np.stack(mats)
    if not np.any(tensors):
        raise NullState("all site matrices are zero")
    tensors.setflags(write=False)
    return UniformMPS(tensors)


def amplitude(mps: UniformMPS, config: Sequence[int]) -> complex:
    """Unnormalized amplitude ``Tr(A_{p_1} ... A_{p_m})`` of one configuration."""
    labels = list(config)
    if not labels:
        raise LabelOutOfRange("configuration must contain at least one site")
    d = mps.phys_dim
    for p in labels:
        if not 0 <= p < d:
            raise LabelOutOfRange(f"label {p} outside [0, {d})")
    prod = mps.tensors[labels[0]]
    for p in labels[1:]:
        prod = prod @ mps.tensors[p]
    return complex(np.trace(prod))


def _check_budget(d: int, m: int, max_entries: int) -> None:
    if m < 1:
        raise ValueError("chain length must be positive")
    # compare in log space so huge d**m never gets materialized
    if m * np.log(d) > np.log(max_entries) + 1e-12:
        raise BudgetExceeded(f"{d}**{m} entries exceeds budget of {max_entries}")


def state_vector(
    mps: UniformMPS, m: int, max_entries: int = DEFAULT_MAX_ENTRIES
) -> tuple[NDArray[np.complex128], float]:
    """Dense amplitudes of the ``m``-site periodic chain.

    Returns:
        ``(psi, norm)`` where ``psi`` is unnormalized, of length ``d**m`` in
        lexicographic order, and ``norm`` is its Euclidean norm.
    """
    d, D = mps.phys_dim, mps.bond_dim
    _check_budget(d, m, max_entries)
    prods = mps.tensors
    for _ in range(m - 1):
        prods = np.einsum("xab,pbc->xpac", prods, mps.tensors).reshape(-1, D, D)
    psi = np.einsum("xaa->x", prods)
    return psi, float(np.linalg.norm(psi))


def antiferro_ghz_vector(m: int) -> tuple[NDArray[np.complex128], float]:
    """The period-2 state ``(|0101...> + |1010...>)/2`` on ``m`` qubits.

    Not translation invariant, so it has no :class:`UniformMPS` form here.
    """
    if m < 2 or m % 2:
        raise ValueError("antiferromagnetic GHZ needs an even chain length >= 2")
    _check_budget(2, m, DEFAULT_MAX_ENTRIES)
    psi = np.zeros(2**m, dtype=np.complex128)
    a = int("01" * (m // 2), 2)
    b = int("10" * (m // 2), 2)
    psi[a] = psi[b] = 0.5
    return psi, float(np.linalg.norm(psi))


def norm_sq(mps: UniformMPS, m: int) -> float:
    """``<psi|psi> = Tr(E**m)`` for the ``m``-site chain."""
    if m < 1:
        raise ValueError("chain length must be positive")
    E = np.einsum("pab,pcd->acbd", mps.tensors, mps.tensors.conj()).reshape(
        mps.bond_dim**2, mps.bond_dim**2
    )
    val = np.trace(np.linalg.matrix_power(E, m))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)) or val.real < -1e-10 * max(1.0, abs(val)):
        raise ArithmeticError(f"Tr(E^m) = {val} is not real nonnegative")
    return float(max(val.real, 0.0))
