"""Acceptance suite: one PASS/FAIL line per criterion, printed at the end of the run.

Run with ``pytest tests/test_acceptance.py -s`` or directly as a script.
"""

from __future__ import annotations

import math
import sys
import time
from contextlib import contextmanager

import numpy as np
from scipy.stats import unitary_group

from mpsrg import (
    ModelPoint,
    brute_force_geometric,
    catalog_mps,
    catalog_state_vector,
    cli,
    concurrence,
    derivative_jump,
    entanglement_per_block,
    fidelity_closed_form,
    fidelity_per_site,
    finite_chain_rdm,
    fixed_point_entanglement,
    fixed_point_entropy,
    fixed_point_spectrum,
    ground_state_check,
    make_uniform_mps,
    merge_sites,
    model1_fixed_point,
    model1_per_block,
    model1_per_block_rederived,
    model2_fixed_point,
    model2_per_block,
    one_sided_derivative,
    rg_step,
    total_block_entanglement,
    transfer_operator,
    two_site_rdm,
)
if __package__ in (None, ""):
    sys.path.insert(0, str(__import__("pathlib").Path(__file__).resolve().parents[1]))
from tests.acceptance_log import record  # noqa: E402

LOG2 = math.log(2.0)


def _E(model, g=None):
    return transfer_operator(catalog_mps(ModelPoint(model, g)))


class _Check:
    def __init__(self):
        self.ok = True
        self.notes: list[str] = []

    def __call__(self, cond: bool, note: str) -> None:
        if not cond:
            self.ok = False
        self.notes.append(("" if cond else "!") + note)


@contextmanager
def criterion(number: int, budget: float):
    chk = _Check()
    t0 = time.perf_counter()
    yield chk
    dt = time.perf_counter() - t0
    chk(dt < budget, f"runtime {dt:.1f}s < {budget:g}s")
    record(number, chk.ok, "; ".join(chk.notes), dt)
    assert chk.ok, "; ".join(n for n in chk.notes if n.startswith("!"))


def test_criterion_01_aklt_closed_form():
    with criterion(1, 1.0) as check:
        E = _E("aklt")
        err = max(
            abs(entanglement_per_block(E, L).per_block - (LOG2 - math.log1p((-1.0 / 3.0) ** L))) for L in range(1, 13)
        )
        check(err < 1e-10, f"max error L=1..12 {err:.1e}")


def test_criterion_02_ghz():
    with criterion(2, 1.0) as check:
        E = _E("ghz")
        err_tot = err_blk = 0.0
        for L in (2, 4, 8):
            for n in (3, 5):
                rep = total_block_entanglement(E, L, n)
                err_tot = max(err_tot, abs(rep.total - LOG2))
                err_blk = max(err_blk, abs(rep.per_block))
        check(err_tot < 1e-10, f"total error {err_tot:.1e}")
        check(err_blk < 1e-10, f"per-block error {err_blk:.1e}")


def test_criterion_03_cluster():
    with criterion(3, 30.0) as check:
        E = _E("cluster")
        err = max(abs(entanglement_per_block(E, L).per_block - LOG2) for L in (2, 4, 6, 8, 10, 12))
        check(err < 1e-10, f"even-L per-block error {err:.1e}")
        psi, _ = catalog_state_vector(ModelPoint("cluster"), 6)
        bf = brute_force_geometric(psi, 2, "arbitrary").total
        check(abs(bf - 3 * LOG2) < 1e-6, f"brute force m=6 error {abs(bf - 3 * LOG2):.1e}")


def test_criterion_04_model1_closed_form():
    with criterion(4, 60.0) as check:
        grid = [g for g in np.linspace(-2, 2, 201) if abs(g + 1) > 1e-12]
        err = {"g>=0": 0.0, "g<0": 0.0}
        err_rederived = 0.0
        for L in (2, 4, 8):
            for g in grid:
                v = entanglement_per_block(_E("model1", g), L).per_block
                key = "g>=0" if g >= 0 else "g<0"
                err[key] = max(err[key], abs(v - model1_per_block(g, L)))
                err_rederived = max(err_rederived, abs(v - model1_per_block_rederived(g, L)))
        check(err["g>=0"] < 1e-8, f"g>=0 branches error {err['g>=0']:.1e}")
        check(err["g<0"] < 1e-8, f"printed g<0 branch error {err['g<0']:.1e}")
        at_m1 = max(abs(entanglement_per_block(_E("model1", -1.0), L).per_block - LOG2) for L in (2, 4, 8))
        check(at_m1 < 1e-8, f"g=-1 error {at_m1:.1e}")
        check(True, f"info: four-fold root form error {err_rederived:.1e}")


def test_criterion_05_model1_criticality():
    with criterion(5, 30.0) as check:
        worst_r = worst_l = 0.0
        for L in (2, 4, 8):
            curve = lambda g, L=L: model1_per_block(g, L)  # noqa: E731
            worst_r = max(worst_r, abs(one_sided_derivative(curve, 0.0, "right").value - (L - 0.5)))
            worst_l = max(worst_l, abs(one_sided_derivative(curve, 0.0, "left").value + (L - 0.125)))
        check(worst_r < 1e-3, f"right slope error {worst_r:.1e}")
        check(worst_l < 1e-3, f"left slope error {worst_l:.1e}")
        est = one_sided_derivative(model1_fixed_point, 0.0, "right")
        check(est.diverged and abs(est.divergence_exponent + 0.5) < 0.05, f"fixed-point exponent {est.divergence_exponent:.3f}")
        numeric_left = one_sided_derivative(lambda g: entanglement_per_block(_E("model1", g), 2).per_block, 0.0, "left")
        check(True, f"info: transfer-route left slope at L=2 {numeric_left.value:.4f}")


def test_criterion_06_model2():
    with criterion(6, 60.0) as check:
        err = 0.0
        for L in (2, 4, 8):
            for g in np.linspace(-4, 4, 201):
                err = max(err, abs(entanglement_per_block(_E("model2", g), L).per_block - model2_per_block(g, L)))
        check(err < 1e-8, f"closed form error {err:.1e}")
        jumps = [derivative_jump(lambda g, L=L: model2_per_block(g, L), 0.0) for L in (2, 4, 8)]
        jerr = max(abs(abs(j) - L) for j, L in zip(jumps, (2, 4, 8)))
        check(jerr < 1e-3, f"|jump| error {jerr:.1e}, sign {'+' if jumps[0] > 0 else '-'}")
        cusp = max(
            abs(entanglement_per_block(_E("model2", g), L).per_block - entanglement_per_block(_E("aklt"), L).per_block)
            for g in (-2.0, 2.0)
            for L in (2, 4)
        )
        check(cusp < 1e-9, f"AKLT cusp error {cusp:.1e}")


def test_criterion_07_fixed_points():
    with criterion(7, 5.0) as check:
        err, chain = 0.0, True
        cases = [("model1", g, model1_fixed_point) for g in (0.25, 0.5, 1, 2, 4, -0.5, -2)]
        cases += [("model2", g, model2_fixed_point) for g in (0.5, -0.5, 1, -1, 3, -3)]
        for model, g, ref in cases:
            spec = fixed_point_spectrum(_E(model, g))
            e_inf = fixed_point_entanglement(spec)
            err = max(err, abs(e_inf - ref(g)))
            s = fixed_point_entropy(spec)
            chain &= e_inf <= s / 2 + 1e-12 and s / 2 <= math.log(2) + 1e-12
        check(err < 1e-8, f"fixed-point error {err:.1e}")
        check(chain, "E_inf <= S/2 <= log D")


def test_criterion_08_hamiltonians():
    with criterion(8, 60.0) as check:
        rng = np.random.default_rng(2024)
        worst = 0.0
        for model, m in (("model1", 8), ("model2", 6)):
            for g in rng.uniform(-3, 3, 5):
                worst = max(worst, ground_state_check(ModelPoint(model, g), m).gap)
        check(worst < 1e-8, f"max relative gap {worst:.1e}")


def test_criterion_09_fidelity():
    with criterion(9, 10.0) as check:
        grid = np.linspace(-2, 2, 11)
        err = diag = asym = 0.0
        for model in ("model1", "model2"):
            states = [catalog_mps(ModelPoint(model, g)) for g in grid]
            for i, g1 in enumerate(grid):
                for j, g2 in enumerate(grid):
                    f = fidelity_per_site(states[i], states[j])
                    err = max(err, abs(f - fidelity_closed_form(g1, g2)))
                    asym = max(asym, abs(f - fidelity_per_site(states[j], states[i])))
                    if i == j:
                        diag = max(diag, abs(f))
        check(err < 1e-8, f"closed form error {err:.1e}")
        check(diag < 1e-8, f"f(g,g) {diag:.1e}")
        check(asym < 1e-12, f"asymmetry {asym:.1e}")


def test_criterion_10_concurrence():
    with criterion(10, 60.0) as check:
        c = max(concurrence(two_site_rdm(catalog_mps(ModelPoint("model1", g)))) for g in (0.0, 1.0))
        check(c < 1e-8, f"C at g=0,1 {c:.1e}")
        rng = np.random.default_rng(10)
        worst, best, worst_g = 0.0, math.inf, None
        for g in rng.uniform(-2, 2, 10):
            mps = catalog_mps(ModelPoint("model1", g))
            diff = np.abs(two_site_rdm(mps).matrix - finite_chain_rdm(mps, 12).matrix).max()
            best = min(best, diff)
            if diff > worst:
                worst, worst_g = diff, g
        check(worst < 1e-8, f"infinite vs m=12 RDM {worst:.1e} (g={worst_g:.3f}), best {best:.1e}")


def test_criterion_11_ansatz_study(tmp_path):
    with criterion(11, 180.0) as check:
        out = tmp_path / "ansatz.csv"
        code = cli.main(
            ["ansatz-compare", "--model", "model1", "--n-sites", "10", "--L", "1",
             "--g-min", "-2", "--g-max", "2", "--steps", "41", "--out", str(out)]
        )
        check(code == 0, f"exit code {code}")
        table = np.loadtxt(out, delimiter=",", skiprows=1)
        g, ident, alt, arb = table.T
        below = (g <= -0.6 + 1e-9)
        above = (g >= -0.5 - 1e-9)
        dev_below = float(np.max(ident[below] - arb[below]))
        dev_above = float(np.max(np.abs(ident[above] - arb[above])))
        alt_err = float(np.max(np.abs(alt - arb)))
        check(dev_below > 1e-3, f"identical deviation below -0.5 {dev_below:.3f}")
        check(dev_above < 1e-6, f"identical deviation at g>=-0.5 {dev_above:.1e}")
        check(alt_err < 1e-6, f"alternating vs arbitrary {alt_err:.1e}")


def test_criterion_12_rg_properties():
    with criterion(12, 30.0) as check:
        n_sites = 8
        violations = []
        points = [ModelPoint(m) for m in ("aklt", "ghz", "cluster")]
        points += [ModelPoint(m, g) for m in ("model1", "model2") for g in np.linspace(-2, 2, 41)]
        for p in points:
            E = transfer_operator(catalog_mps(p))
            tot = [total_block_entanglement(E, L, n_sites // L).total for L in (2, 4, 8)]
            if any(b > a + 1e-9 for a, b in zip(tot, tot[1:])):
                violations.append(f"{p.model.value} g={p.g:.2f}" if p.g is not None else p.model.value)
        check(not violations, f"monotone total (N=8, L=2,4,8), violations: {violations or 'none'}")

        merge_err = mix_err = 0.0
        rng = np.random.default_rng(12)
        for p in points[::4]:
            mps = catalog_mps(p)
            E = transfer_operator(mps)
            sq = rg_step(E).matrix
            merged = transfer_operator(merge_sites(mps).mps).matrix
            merge_err = max(merge_err, np.abs(merged - sq).max() / max(1.0, np.abs(sq).max()))
            U = unitary_group.rvs(mps.phys_dim, random_state=rng)
            mixed = make_uniform_mps(np.einsum("pq,qab->pab", U, mps.tensors))
            mix_err = max(mix_err, np.abs(transfer_operator(mixed).matrix - E.matrix).max())
        check(merge_err < 1e-10, f"merge vs square {merge_err:.1e}")
        check(mix_err < 1e-12, f"unitary mixing {mix_err:.1e}")


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as d:
                        fn(Path(d))
                else:
                    fn()
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)
