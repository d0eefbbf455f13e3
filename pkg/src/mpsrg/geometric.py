"""Geometric entanglement of uniform MPS and of explicit finite-chain states.

Transfer route: the per-block entanglement is

    E_L = L log lambda_dom - log d_max^2,
    d_max^2 = max_{|r|=1} |(r (x) r*)^dagger E^L (r (x) r*)|,

with the quartic form evaluated in the gauge where the dominant right fixed
point is the identity (the only gauge in which the bound ``d_max^2 <=
lambda_dom^L`` holds).  Brute-force route: direct maximization of the overlap
with product states over a chosen ansatz family.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import minimize

from .errors import (
    BlockMismatch,
    DegenerateDominantEigenvalue,
    InternalConsistencyError,
    NoConvergence,
    NullState,
    RankDeficientFixedPoint,
)
from .mps import UniformMPS, _check_budget
from .transfer import TransferOperator, canonical_form, log_trace_power

CLAMP_TOL = 1e-10
DEFAULT_RESTARTS = 20
DEFAULT_TOL = 1e-12
MAX_ITER = 10_000
ASCENT_ITER = 200
BRUTE_RESTARTS = 50
BRUTE_TOL = 1e-11
BRUTE_MAX_ITER = 20_000
DAMPING = 0.5
LOCAL_SWEEPS = 500
N_POLISH = 3


class Method(str, enum.Enum):
    """How a transfer-route value was obtained."""

    CANONICAL = "canonical"  # quartic form in the identity-right-fixed-point gauge
    AS_GIVEN = "as-given"  # quartic form in the gauge the operator came in
    SPECTRAL_RADIUS = "spectral-radius"  # degenerate fallback on the source tensors
    BRUTE_FORCE = "brute-force"


@dataclass(frozen=True)
class EntanglementReport:
    """Outcome of a geometric-entanglement computation (natural log units).

    Attributes:
        block_size: Block length ``L``.
        dmax_sq: Maximized quartic form (transfer route) or maximal overlap
            per block (brute force), in the units of the input operator.
        per_block: Entanglement per block, ``>= 0``.
        total: Total entanglement of a finite chain, when requested.
        overlap_sq: Normalized maximal overlap ``Lambda^2`` for finite chains.
        maximizer: Optimal bond vector ``r`` or the optimal product factors
            with shape ``(n_factors, d**L)``.
        odd_block: Set for odd ``L``, where per-block values are less reliable.
        method: Which evaluation route produced the numbers.
    """

    block_size: int
    dmax_sq: float
    per_block: float
    total: float | None = None
    overlap_sq: float | None = None
    maximizer: NDArray[np.complex128] | None = None
    odd_block: bool = False
    method: Method = Method.CANONICAL


def _normalize_rows(X: NDArray) -> NDArray:
    return X / np.linalg.norm(X, axis=-1, keepdims=True)


def _quartic(F: NDArray, R: NDArray) -> tuple[NDArray, NDArray, NDArray]:
    S, D = R.shape
    V = (R[:, :, None] * R.conj()[:, None, :]).reshape(S, D * D)
    FV = V @ F.T
    return V, FV, np.einsum("si,si->s", V.conj(), FV)


def _ascent_direction(F: NDArray, R: NDArray, V: NDArray, FV: NDArray, q: NDArray) -> NDArray:
    S, D = R.shape
    Mv = FV.reshape(S, D, D)
    Nw = (V.conj() @ F).reshape(S, D, D)
    d_rbar = np.einsum("skm,sm->sk", Mv, R) + np.einsum("sbk,sb->sk", Nw, R)
    d_r = np.einsum("sak,sa->sk", Mv, R.conj()) + np.einsum("skn,sn->sk", Nw, R.conj())
    mag = np.abs(q)
    c = np.where(mag > 0, q / np.where(mag > 0, mag, 1.0), 1.0)
    return c.conj()[:, None] * d_rbar + c[:, None] * d_r.conj()


def _ascent(
    F: NDArray, starts: NDArray, tol: float, max_iter: int
) -> tuple[NDArray, NDArray, NDArray]:
    """Shifted symmetric power ascent on ``|<r r*| F |r r*>|``, batched over starts."""
    R = _normalize_rows(starts.astype(np.complex128))
    V, FV, q = _quartic(F, R)
    fnorm = float(np.linalg.norm(F, 2)) or 1.0
    sigma = np.zeros(len(R))
    done = np.zeros(len(R), dtype=bool)
    converged = np.zeros(len(R), dtype=bool)
    for _ in range(max_iter):
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        g = _ascent_direction(F, R[act], V[act], FV[act], q[act])
        pending = np.arange(act.size)
        new_R = R[act].copy()
        for _ in range(60):
            cand = _normalize_rows(g[pending] + sigma[act[pending], None] * R[act[pending]])
            _, _, qc = _quartic(F, cand)
            ok = np.abs(qc) >= np.abs(q[act[pending]]) * (1 - 1e-15)
            new_R[pending[ok]] = cand[ok]
            bad = pending[~ok]
            sigma[act[bad]] = np.maximum(2 * sigma[act[bad]], 0.5 * fnorm)
            pending = bad
            if pending.size == 0:
                break
        old_q = np.abs(q[act])
        R[act] = new_R
        V[act], FV[act], q[act] = _quartic(F, new_R)
        sigma[act] *= 0.5
        stalled = np.zeros(act.size, dtype=bool)
        stalled[pending] = True
        gain = np.abs(np.abs(q[act]) - old_q)
        hit = gain <= tol * np.maximum(np.abs(q[act]), 1e-300)
        converged[act[hit]] = True
        done[act[hit | stalled]] = True
    return R, np.abs(q), converged


def _polish(F: NDArray, r0: NDArray, max_iter: int) -> tuple[float, NDArray, bool]:
    """Quasi-Newton refinement of ``|q(r)| / |r|^4`` over real coordinates of ``r``."""
    D = r0.size

    def neg(x):
        r = x[:D] + 1j * x[D:]
        n2 = float(np.vdot(r, r).real)
        V, FV, q = _quartic(F, r[None])
        mag = float(abs(q[0]))
        asc = _ascent_direction(F, r[None], V, FV, q)[0]
        grad = 0.5 * asc / n2**2 - 2.0 * mag * r / n2**3
        return -mag / n2**2, -2.0 * np.concatenate([grad.real, grad.imag])

    x0 = np.concatenate([r0.real, r0.imag])
    res = minimize(neg, x0, jac=True, method="BFGS", options={"gtol": 1e-13, "maxiter": max_iter})
    r = res.x[:D] + 1j * res.x[D:]
    val = -float(res.fun)
    ok = bool(res.success) or float(np.linalg.norm(res.jac)) <= 1e-7 * max(val, 1e-300)
    return val, r / np.linalg.norm(r), ok


def _maximize_quartic(
    F: NDArray, starts: NDArray, tol: float, max_iter: int, n_polish: int = 4
) -> tuple[float, NDArray, bool]:
    R, vals, converged = _ascent(F, starts, tol, min(max_iter, ASCENT_ITER))
    best_val, best_r, any_ok = -1.0, None, bool(converged.any())
    for k in np.argsort(-vals)[:n_polish]:
        val, r, ok = _polish(F, R[k], max_iter)
        any_ok |= ok
        if val < vals[k]:
            val, r = float(vals[k]), R[k]
        if val > best_val:
            best_val, best_r = val, r
    j = np.argmax(np.abs(best_r))
    return best_val, best_r * (abs(best_r[j]) / best_r[j]), any_ok


def _starts(D: int, restarts: int, seed: int) -> NDArray:
    rng = np.random.default_rng(seed)
    rand = rng.standard_normal((restarts, D)) + 1j * rng.standard_normal((restarts, D))
    return np.vstack([np.eye(D, dtype=np.complex128), rand])


def _quartic_max(
    F: NDArray, restarts: int, tol: float, seed: int, max_iter: int
) -> tuple[float, NDArray]:
    D = int(round(np.sqrt(F.shape[0])))
    val, r, ok = _maximize_quartic(F, _starts(D, restarts, seed), tol, max_iter)
    if not ok:
        raise NoConvergence(f"quartic maximization did not reach tol={tol} in {max_iter} steps")
    return val, r


def dmax_sq(
    E: TransferOperator,
    L: int,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    max_iter: int = MAX_ITER,
) -> tuple[float, NDArray[np.complex128]]:
    """Maximize ``|(r (x) r*)^dagger E^L (r (x) r*)|`` over unit ``r`` in the given gauge.

    Starts from the ``D`` basis vectors plus ``restarts`` seeded random vectors.

    Returns:
        ``(value, r)`` with ``r`` unit norm, largest entry real positive.

    Raises:
        NoConvergence: No start met ``tol`` within ``max_iter`` steps.
    """
    if L < 1:
        raise ValueError("block size must be positive")
    s = float(np.abs(E.matrix).max())
    if s == 0.0:
        raise NullState("transfer operator is zero")
    F = np.linalg.matrix_power(E.matrix / s, L)
    val, r = _quartic_max(F, restarts, tol, seed, max_iter)
    return val * s**L, r


def block_tensors(mps: UniformMPS, L: int) -> NDArray[np.complex128]:
    """Products ``A_{p_1} ... A_{p_L}`` for all ``d**L`` block labels, lexicographic."""
    _check_budget(mps.phys_dim, L, 2**20)
    D = mps.bond_dim
    prods = mps.tensors
    for _ in range(L - 1):
        prods = np.einsum("xab,pbc->xpac", prods, mps.tensors).reshape(-1, D, D)
    return prods


def _dominant_mode(B: NDArray) -> tuple[complex, NDArray, NDArray]:
    w, V = np.linalg.eig(B)
    k = int(np.argmax(np.abs(w)))
    wl, Vl = np.linalg.eig(B.T)
    j = int(np.argmin(np.abs(wl - w[k])))
    return w[k], V[:, k], Vl[:, j]


def max_block_spectral_radius(
    mps: UniformMPS,
    L: int,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    max_iter: int = MAX_ITER,
) -> tuple[float, NDArray[np.complex128]]:
    """Maximize ``rho(sum_P conj(phi_P) A_P)^2`` over unit block states ``phi``.

    This is the gauge-invariant per-block overlap of an identical block
    product state in the long-chain limit, used when the dominant transfer
    eigenvalue is degenerate and no canonical gauge exists.
    """
    AP = block_tensors(mps, L)
    scale = float(np.abs(AP).max())
    AP = AP / scale
    K = AP.shape[0]
    rng = np.random.default_rng(seed)
    starts = []
    for i in range(min(K, mps.bond_dim**2)):
        e = np.zeros(K, dtype=np.complex128)
        e[i] = 1.0
        starts.append(e)
    starts += list(rng.standard_normal((restarts, K)) + 1j * rng.standard_normal((restarts, K)))
    best, best_phi, any_ok = -1.0, None, False
    for phi in starts:
        phi = phi / np.linalg.norm(phi)
        val = -1.0
        for _ in range(max_iter):
            mu, r, l = _dominant_mode(np.tensordot(phi.conj(), AP, axes=1))
            new_val = abs(mu) ** 2
            den = l @ r
            if abs(den) < 1e-14 or new_val == 0.0:
                break
            c = np.einsum("a,pab,b->p", l, AP, r) / den
            nc = np.linalg.norm(c)
            if nc == 0.0:
                break
            target = c / nc
            ov = np.vdot(target, phi)
            phase = ov / abs(ov) if abs(ov) > 0 else 1.0
            phi = phi + phase * target
            phi = phi / np.linalg.norm(phi)
            if abs(new_val - val) <= tol * new_val:
                any_ok = True
                val = new_val
                break
            val = new_val
        if val > best:
            best, best_phi = val, phi
    if not any_ok:
        raise NoConvergence("block spectral-radius maximization did not converge")
    return best * scale**2, best_phi


def _check_nonneg(value: float) -> float:
    if value < -CLAMP_TOL:
        raise InternalConsistencyError(f"negative entanglement {value:.3e}")
    return value if value > 0.0 else 0.0


@dataclass(frozen=True)
class _BlockOverlap:
    # normalized per-block overlap d_max^2 / lambda^L and bookkeeping
    ratio: float
    log_lambda: float
    maximizer: NDArray
    method: Method


def _block_overlap(
    E: TransferOperator, L: int, restarts: int, tol: float, seed: int, max_iter: int
) -> _BlockOverlap:
    if L < 1:
        raise ValueError("block size must be positive")
    try:
        cf = canonical_form(E)
    except (DegenerateDominantEigenvalue, RankDeficientFixedPoint):
        cf = None
    if cf is not None:
        lam = abs(cf.eigenvalue)
        F = np.linalg.matrix_power(cf.operator.matrix / lam, L)
        val, r = _quartic_max(F, restarts, tol, seed, max_iter)
        return _BlockOverlap(val, float(np.log(lam)), r, Method.CANONICAL)
    lam = float(np.abs(np.linalg.eigvals(E.matrix)).max())
    if lam == 0.0:
        raise NullState("transfer operator is nilpotent")
    if E.source is not None:
        val, phi = max_block_spectral_radius(E.source, L, restarts, tol, seed, max_iter)
        return _BlockOverlap(val / lam**L, float(np.log(lam)), phi, Method.SPECTRAL_RADIUS)
    F = np.linalg.matrix_power(E.matrix / lam, L)
    val, r = _quartic_max(F, restarts, tol, seed, max_iter)
    if val > 1.0 + CLAMP_TOL:
        raise DegenerateDominantEigenvalue(
            "degenerate operator without source tensors: the quartic form is gauge dependent "
            "and exceeds lambda^L in the given gauge"
        )
    return _BlockOverlap(val, float(np.log(lam)), r, Method.AS_GIVEN)


def entanglement_per_block(
    E: TransferOperator,
    L: int,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    max_iter: int = MAX_ITER,
) -> EntanglementReport:
    """Long-chain entanglement per block of ``L`` sites, ``L log lambda_dom - log d_max^2``.

    Degenerate dominant eigenvalues have no canonical gauge; if ``E`` remembers
    its source MPS the gauge-invariant block spectral radius is used instead,
    otherwise the operator is taken in the gauge it came in.
    """
    ov = _block_overlap(E, L, restarts, tol, seed, max_iter)
    per_block = _check_nonneg(-float(np.log(ov.ratio)))
    return EntanglementReport(
        block_size=L,
        dmax_sq=float(ov.ratio * np.exp(L * ov.log_lambda)),
        per_block=per_block,
        maximizer=ov.maximizer,
        odd_block=bool(L % 2),
        method=ov.method,
    )


def total_block_entanglement(
    E: TransferOperator,
    L: int,
    n: int,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    max_iter: int = MAX_ITER,
) -> EntanglementReport:
    """Entanglement of an ``n L``-site ring against block-``L`` product states.

    ``total = -log(d_max^{2n} / Tr(E^{nL}))`` with the exact finite trace.
    """
    if n < 1:
        raise ValueError("block count must be positive")
    ov = _block_overlap(E, L, restarts, tol, seed, max_iter)
    log_tr = log_trace_power(E, n * L) - n * L * ov.log_lambda
    log_overlap = n * float(np.log(ov.ratio)) - log_tr
    total = _check_nonneg(-log_overlap)
    return EntanglementReport(
        block_size=L,
        dmax_sq=float(ov.ratio * np.exp(L * ov.log_lambda)),
        per_block=_check_nonneg(-float(np.log(ov.ratio))),
        total=total,
        overlap_sq=float(np.exp(log_overlap)),
        maximizer=ov.maximizer,
        odd_block=bool(L % 2),
        method=ov.method,
    )


class AnsatzKind(str, enum.Enum):
    """Product-state families for the brute-force optimizer.

    ``IDENTICAL`` repeats one factor, ``ALTERNATING`` repeats a pair of factors
    on even and odd positions and ``ARBITRARY`` lets every factor differ.  The
    block variants are the same families over blocks of ``block_size`` sites.
    """

    IDENTICAL = "identical"
    ALTERNATING = "alternating"
    ARBITRARY = "arbitrary"
    BLOCK_IDENTICAL = "block-identical"
    BLOCK_ARBITRARY = "block-arbitrary"

    @property
    def base(self) -> "AnsatzKind":
        return {
            AnsatzKind.BLOCK_IDENTICAL: AnsatzKind.IDENTICAL,
            AnsatzKind.BLOCK_ARBITRARY: AnsatzKind.ARBITRARY,
        }.get(self, self)


def _environments(T: NDArray, phis: NDArray, update=None) -> NDArray:
    """Partial contractions ``v_k`` of the state against all factors but ``k``.

    ``T`` has shape ``(S, K**n)`` and ``phis`` shape ``(S, n, K)``.  If
    ``update`` is given it is called as ``update(k, v_k)`` and its return value
    replaces factor ``k`` before the sweep moves on (Gauss-Seidel).
    """
    S, n, K = phis.shape
    rights = [np.ones((S, 1), dtype=np.complex128)]
    for k in range(n - 1, 0, -1):
        rights.append(np.einsum("sa,sr->sar", phis[:, k].conj(), rights[-1]).reshape(S, -1))
    rights.reverse()
    out = np.empty_like(phis)
    left = T
    for k in range(n):
        lk = left.reshape(S, K, -1)
        v = np.einsum("sar,sr->sa", lk, rights[k])
        out[:, k] = v
        if update is not None:
            phis[:, k] = update(k, v)
        left = np.einsum("sa,sar->sr", phis[:, k].conj(), lk)
    return out


def _overlap(T: NDArray, phis: NDArray) -> NDArray:
    S, n, K = phis.shape
    left = T
    for k in range(n):
        left = np.einsum("sa,sar->sr", phis[:, k].conj(), left.reshape(S, K, -1))
    return left[:, 0]


def _polish_product(
    T: NDArray, free: NDArray, owner: NDArray, max_iter: int
) -> tuple[float, NDArray, bool]:
    """BFGS on the scale-invariant overlap ``|<Phi|psi>|^2 / prod |phi_k|^2``."""
    n_free, K = free.shape
    counts = np.bincount(owner, minlength=n_free)
    size = n_free * K

    def neg(x):
        f = (x[:size] + 1j * x[size:]).reshape(n_free, K)
        n2 = np.einsum("ja,ja->j", f.conj(), f).real
        ph = f[owner][None]
        env = _environments(T[None], ph)[0]
        ov = _overlap(T[None], ph)[0]
        val = abs(ov) ** 2 / np.prod(n2[owner])
        sums = np.zeros_like(f)
        np.add.at(sums, owner, env)
        grad = ov.conj() * sums / np.prod(n2[owner]) - val * (counts / n2)[:, None] * f
        grad = grad.ravel()
        return -val, -2.0 * np.concatenate([grad.real, grad.imag])

    x0 = np.concatenate([free.ravel().real, free.ravel().imag])
    res = minimize(neg, x0, jac=True, method="BFGS", options={"gtol": 1e-12, "maxiter": max_iter})
    f = _normalize_rows((res.x[:size] + 1j * res.x[size:]).reshape(n_free, K))
    ok = bool(res.success) or float(np.linalg.norm(res.jac)) <= 1e-8
    return -float(res.fun), f, ok


def brute_force_geometric(
    state: ArrayLike,
    d: int,
    ansatz: AnsatzKind | str = AnsatzKind.ARBITRARY,
    block_size: int = 1,
    restarts: int = BRUTE_RESTARTS,
    tol: float = BRUTE_TOL,
    seed: int = 0,
    max_iter: int = BRUTE_MAX_ITER,
) -> EntanglementReport:
    """Maximal product-state overlap ``|<Phi|psi>|^2 / <psi|psi>`` by local updates.

    Free factors are set to the normalized partial contraction of ``psi``
    against all other factors.  Tied factors (identical, alternating) take a
    damped step towards the normalized sum of their partial contractions.

    Args:
        state: Dense amplitudes of length ``d**m`` in lexicographic order.
        d: Local dimension.
        ansatz: Product family.
        block_size: Sites per factor; must divide ``m``.

    Raises:
        BlockMismatch: ``block_size`` does not divide the chain length.
        NoConvergence: No restart met ``tol`` within ``max_iter`` sweeps.
    """
    psi = np.asarray(state, dtype=np.complex128).ravel()
    m = int(round(np.log(psi.size) / np.log(d))) if d > 1 else 1
    if d < 1 or d**m != psi.size:
        raise ValueError(f"state length {psi.size} is not a power of {d}")
    nrm = np.linalg.norm(psi)
    if nrm == 0.0:
        raise NullState("state vector is zero")
    kind = AnsatzKind(ansatz).base
    if block_size < 1 or m % block_size:
        raise BlockMismatch(f"block size {block_size} does not divide chain length {m}")
    n, K = m // block_size, d**block_size
    if kind is AnsatzKind.ALTERNATING and n % 2:
        raise BlockMismatch("alternating ansatz needs an even number of blocks")
    S = restarts
    T = np.broadcast_to(psi / nrm, (S, psi.size))
    rng = np.random.default_rng(seed)
    n_free = {AnsatzKind.IDENTICAL: 1, AnsatzKind.ALTERNATING: 2}.get(kind, n)
    free = _normalize_rows(rng.standard_normal((S, n_free, K)) + 1j * rng.standard_normal((S, n_free, K)))
    owner = np.arange(n) % n_free

    def expand(f):
        return f[:, owner].copy()

    phis = expand(free)
    lam = np.abs(_overlap(T, phis)) ** 2
    converged = np.zeros(S, dtype=bool)
    active = np.ones(S, dtype=bool)

    def damped(cur, target):
        target = _normalize_rows(target)
        return _normalize_rows((1 - DAMPING) * cur + DAMPING * target)

    for _ in range(min(max_iter, LOCAL_SWEEPS)):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        Ta, ph = T[idx], phis[idx]
        if kind is AnsatzKind.ARBITRARY:
            _environments(Ta, ph, update=lambda k, v: _normalize_rows(v))
            free[idx] = ph
        else:
            fr = free[idx]
            for j in range(n_free):
                ph = expand(fr)
                env = _environments(Ta, ph)
                ov = _overlap(Ta, ph)
                target = ov.conj()[:, None] * env[:, owner == j].sum(axis=1)
                fr[:, j] = damped(fr[:, j], target)
            free[idx] = fr
            ph = expand(fr)
        phis[idx] = ph
        new = np.abs(_overlap(Ta, ph)) ** 2
        hit = np.abs(new - lam[idx]) < tol
        lam[idx] = new
        converged[idx[hit]] = True
        active[idx[hit]] = False
    best_val, best_free, any_ok = -1.0, None, bool(converged.any())
    for k in np.argsort(-lam)[:N_POLISH]:
        val, f, ok = _polish_product(T[0], free[k], owner, max_iter)
        any_ok |= ok
        if val < lam[k]:
            val, f = float(lam[k]), free[k]
        if val > best_val:
            best_val, best_free = val, f
    if not any_ok:
        raise NoConvergence(f"no restart reached tol={tol} in {max_iter} sweeps")
    overlap = float(min(best_val, 1.0))
    total = _check_nonneg(-np.log(overlap)) if overlap > 0 else np.inf
    return EntanglementReport(
        block_size=block_size,
        dmax_sq=overlap ** (1.0 / n),
        per_block=total / n,
        total=total,
        overlap_sq=overlap,
        maximizer=best_free,
        odd_block=bool(block_size % 2),
        method=Method.BRUTE_FORCE,
    )
