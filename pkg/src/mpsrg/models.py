"""Catalog of MPS ground states, their parent Hamiltonians, and closed-form curves.

Model 1 is a spin-1/2 chain with a critical point at ``g = 0`` (GHZ-like) that
becomes a cluster state at ``g = -1`` and an x-polarized product state at
``g = 1``.  Model 2 is a spin-1 chain, critical at ``g = 0``, that passes
through the AKLT state at ``g = +-2``.

Spin-1 labels map to ``S^z`` eigenvalues as ``0 -> 0``, ``1 -> +1``,
``2 -> -1``, so the printed tensors ``{-sigma_z, sigma^+, g sigma^-}`` are
listed in label order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh
from numpy.typing import NDArray

from .errors import BudgetExceeded, UnsupportedModel, UnsupportedParameter
from .mps import UniformMPS, antiferro_ghz_vector, make_uniform_mps, state_vector

HAMILTONIAN_MAX_DIM = 2**14
BRANCH_GUARD = 1e-12
LOG2 = math.log(2.0)


class Model(str, enum.Enum):
    AKLT = "aklt"
    GHZ = "ghz"
    ANTIFERRO_GHZ = "antiferro-ghz"
    CLUSTER = "cluster"
    MODEL1 = "model1"
    MODEL2 = "model2"

    @property
    def parametrized(self) -> bool:
        return self in (Model.MODEL1, Model.MODEL2)

    @property
    def phys_dim(self) -> int:
        return 3 if self in (Model.AKLT, Model.MODEL2) else 2


@dataclass(frozen=True)
class ModelPoint:
    """A catalog model, with its coupling ``g`` when it has one.

    Raises:
        UnsupportedParameter: ``g`` missing or non-finite for a parametrized
            model, or given for a parameter-free one.
    """

    model: Model
    g: float | None = None

    def __post_init__(self):
        model = Model(self.model)
        object.__setattr__(self, "model", model)
        if model.parametrized:
            if self.g is None or not math.isfinite(self.g):
                raise UnsupportedParameter(f"{model.value} needs a finite coupling g")
            object.__setattr__(self, "g", float(self.g))
        elif self.g is not None:
            raise UnsupportedParameter(f"{model.value} takes no coupling")


_SZ = np.diag([1.0, -1.0])
_SP = np.array([[0.0, 1.0], [0.0, 0.0]])
_SM = _SP.T


def catalog_mps(point: ModelPoint) -> UniformMPS:
    """Site tensors of a catalog model.

    Raises:
        UnsupportedModel: The antiferromagnetic GHZ state is not translation
            invariant; use :func:`catalog_state_vector`.
    """
    g = point.g
    match point.model:
        case Model.AKLT:
            mats = [_SZ, math.sqrt(2) * _SP, -math.sqrt(2) * _SM]
        case Model.GHZ:
            mats = [np.eye(2) + _SZ, np.eye(2) - _SZ]
        case Model.CLUSTER:
            mats = [[[0, 0], [1, 1]], [[1, -1], [0, 0]]]
        case Model.MODEL1:
            mats = [[[0, 0], [1, 1]], [[1, g], [0, 0]]]
        case Model.MODEL2:
            mats = [-_SZ, _SP, g * _SM]
        case _:
            raise UnsupportedModel(f"{point.model.value} has no uniform MPS form")
    return make_uniform_mps(mats)


def catalog_state_vector(point: ModelPoint, m: int) -> tuple[NDArray[np.complex128], float]:
    """Dense ``m``-site state of any catalog model, with its norm."""
    if point.model is Model.ANTIFERRO_GHZ:
        return antiferro_ghz_vector(m)
    return state_vector(catalog_mps(point), m)


# closed forms


def _model1_negative(a: float, L: int, c: float) -> float:
    # 1/2 (1 + sqrt(1 + c a/(1-a)^2)) |1-a|^L (1+a)^-L, written without the pole at a = 1
    b = abs(1.0 - a)
    t = 0.5 * (b**L + math.sqrt(b * b + c * a) * b ** (L - 1)) / (1.0 + a) ** L
    return LOG2 - math.log1p(t)


def model1_per_block(g: float, L: int) -> float:
    """Printed three-branch per-block entanglement of model 1 (intended for even ``L``).

    For ``g > 0`` the branch is chosen by comparing ``(1+g)^L |1-g|^-L sqrt(g)``
    with ``1+g`` in log space with a small guard band; both branches agree on
    the boundary.  The negative branch is continued to its finite limit at
    ``g = -1``.
    """
    if L < 1:
        raise ValueError("block size must be positive")
    if g == 0.0:
        return 0.0
    if g < 0.0:
        return _model1_negative(-g, L, 1.0)
    if g == 1.0:
        return model1_fixed_point(g)
    lhs = L * math.log1p(g) - L * math.log(abs(1.0 - g)) + 0.5 * math.log(g)
    if lhs > math.log1p(g) + BRANCH_GUARD:
        return model1_fixed_point(g)
    t = ((1.0 - g) / (1.0 + g)) ** L + g * (1.0 + g) ** (L - 2) / abs(1.0 - g) ** L
    return LOG2 - math.log1p(t)


def model1_per_block_rederived(g: float, L: int) -> float:
    """Model-1 per-block entanglement with the negative branch re-derived.

    Identical to :func:`model1_per_block` for ``g >= 0``.  For ``g < 0`` the
    square root reads ``sqrt(1 + 4|g|/(1-|g|)^2)``, which is what the
    transfer-operator evaluation produces.
    """
    if g < 0.0:
        if L < 1:
            raise ValueError("block size must be positive")
        return _model1_negative(-g, L, 4.0)
    return model1_per_block(g, L)


def model1_fixed_point(g: float) -> float:
    """Model-1 fixed-point entanglement per block."""
    if g > 0.0:
        return LOG2 + math.log1p(g) - 2.0 * math.log1p(math.sqrt(g))
    return 0.0 if g == 0.0 else LOG2


def model2_per_block(g: float, L: int) -> float:
    """Model-2 per-block entanglement, symmetric in ``g`` (intended for even ``L``)."""
    if L < 1:
        raise ValueError("block size must be positive")
    a = abs(g)
    if a <= 2.0:
        return LOG2 - math.log1p((1.0 + a) ** (-L))
    return LOG2 - math.log1p(((a - 1.0) / (1.0 + a)) ** L)


def model2_fixed_point(g: float) -> float:
    return 0.0 if g == 0.0 else LOG2


def fidelity_closed_form(g1: float, g2: float) -> float:
    """Logarithmic fidelity per site shared by both models."""
    den = (1.0 + abs(g1)) * (1.0 + abs(g2))
    p = g1 * g2
    if p >= 0.0:
        return math.log((1.0 + math.sqrt(p)) ** 2 / den)
    return math.log((1.0 + abs(p)) / den)


# parent Hamiltonians


def _site_op(op: sp.spmatrix, site: int, m: int, d: int) -> sp.csr_matrix:
    left = sp.identity(d**site, format="csr")
    right = sp.identity(d ** (m - site - 1), format="csr")
    return sp.kron(sp.kron(left, op), right, format="csr")


def _product(ops: dict[int, NDArray], m: int, d: int) -> sp.csr_matrix:
    out = sp.identity(d**m, format="csr")
    for site, op in ops.items():
        out = out @ _site_op(sp.csr_matrix(op), site, m, d)
    return out


def _spin1() -> tuple[NDArray, NDArray, NDArray]:
    # label order (0, +1, -1)
    sz = np.diag([0.0, 1.0, -1.0])
    splus = np.zeros((3, 3))
    splus[1, 0] = splus[0, 2] = math.sqrt(2)
    return sz, splus, splus.T


def _model1_hamiltonian(g: float, m: int) -> sp.csr_matrix:
    X = np.array([[0.0, 1.0], [1.0, 0.0]])
    Z = _SZ
    H = sp.csr_matrix((2**m, 2**m))
    for i in range(m):
        j, k = (i + 1) % m, (i + 2) % m
        H = H + 2 * (g * g - 1) * _product({i: Z, j: Z}, m, 2)
        H = H - (1 + g) ** 2 * _product({i: X}, m, 2)
        H = H + (g - 1) ** 2 * _product({i: Z, j: X, k: Z}, m, 2)
    return H


def _model2_hamiltonian(g: float, m: int) -> sp.csr_matrix:
    sz, splus, sminus = _spin1()
    H = sp.csr_matrix((3**m, 3**m))
    for i in range(m):
        j = (i + 1) % m
        zz = _product({i: sz, j: sz}, m, 3)
        ss = zz + 0.5 * (_product({i: splus, j: sminus}, m, 3) + _product({i: sminus, j: splus}, m, 3))
        H = H + (2 + g * g) * ss + 2 * (ss @ ss) + 2 * (4 - g * g) * _product({i: sz @ sz}, m, 3)
        H = H - (g + 2) ** 2 * (zz @ zz) + g * (g + 2) * (zz @ ss + ss @ zz)
    return H


def hamiltonian(point: ModelPoint, m: int, sparse: bool = False) -> NDArray[np.float64] | sp.csr_matrix:
    """Periodic parent Hamiltonian of model 1 or model 2 on ``m`` sites.

    Raises:
        UnsupportedModel: Not model 1 or model 2.
        BudgetExceeded: ``d**m`` above ``2**14``.
    """
    if point.model not in (Model.MODEL1, Model.MODEL2):
        raise UnsupportedModel(f"no parent Hamiltonian for {point.model.value}")
    min_sites = 3 if point.model is Model.MODEL1 else 2
    if m < min_sites:
        raise ValueError("chain too short for the interaction range")
    d = point.model.phys_dim
    if m * math.log(d) > math.log(HAMILTONIAN_MAX_DIM) + 1e-12:
        raise BudgetExceeded(f"{d}**{m} exceeds the Hamiltonian budget {HAMILTONIAN_MAX_DIM}")
    build = _model1_hamiltonian if point.model is Model.MODEL1 else _model2_hamiltonian
    H = build(point.g, m).tocsr()
    return H if sparse else H.toarray()


@dataclass(frozen=True)
class EnergyCheck:
    mps_energy: float
    ground_energy: float
    gap: float

    @property
    def passed(self) -> bool:
        return self.gap < 1e-8


def ground_state_check(point: ModelPoint, m: int) -> EnergyCheck:
    """Compare the MPS energy with the exact ground energy.

    ``gap = |E_mps - E_0| / max(1, |E_0|)``; ground-state degeneracy is allowed.
    """
    H = hamiltonian(point, m, sparse=True)
    psi, nrm = catalog_state_vector(point, m)
    psi = psi / nrm
    e_mps = float(np.vdot(psi, H @ psi).real)
    if H.shape[0] <= 4096:
        e0 = float(np.linalg.eigvalsh(H.toarray())[0])
    else:
        e0 = float(eigsh(H, k=1, which="SA", tol=1e-12)[0][0])
    return EnergyCheck(e_mps, e0, abs(e_mps - e0) / max(1.0, abs(e0)))
