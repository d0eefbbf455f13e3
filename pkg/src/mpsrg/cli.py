"""Command-line front end writing CSV tables.

Subcommands: ``sweep`` (per-block entanglement against closed forms),
``fidelity`` (fidelity per site on a square grid), ``ansatz-compare``
(brute-force product-state families on a finite ring) and ``verify`` (MPS
energy against exact diagonalization).

Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DegenerateDominantEigenvalue, MPSError, NonDiagonalizableFixedPoint
from .geometric import AnsatzKind, brute_force_geometric, entanglement_per_block
from .models import (
    Model,
    ModelPoint,
    catalog_mps,
    catalog_state_vector,
    fidelity_closed_form,
    ground_state_check,
    model1_fixed_point,
    model1_per_block,
    model2_fixed_point,
    model2_per_block,
)
from .observables import fidelity_per_site
from .transfer import fixed_point_entanglement, fixed_point_spectrum, transfer_operator

SWEEP_HEADER = ("g", "L", "per_block", "closed_form", "abs_diff")
FIDELITY_HEADER = ("g1", "g2", "f_numeric", "f_closed_form", "abs_diff")
ANSATZ_HEADER = ("g", "E_identical", "E_alternating", "E_arbitrary")
LOG2 = math.log(2.0)


class UsageError(Exception):
    """Invalid combination of command-line options."""


def _fmt(x: float | int | str) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return "%.12g" % (x + 0.0)  # drops the sign of -0.0


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def parse_block_sizes(text: str) -> list[float]:
    """Parse ``"2,4,inf"`` into ``[2, 4, inf]``."""
    out: list[float] = []
    for item in text.split(","):
        item = item.strip().lower()
        if item in ("inf", "infinity"):
            out.append(math.inf)
            continue
        try:
            L = int(item)
        except ValueError:
            raise UsageError(f"bad block size {item!r}") from None
        if L < 1:
            raise UsageError("block sizes must be positive")
        out.append(L)
    if not out:
        raise UsageError("need at least one block size")
    return out


def _grid(args) -> np.ndarray:
    if args.steps < 2:
        raise UsageError("--steps must be at least 2")
    if not args.g_min < args.g_max:
        raise UsageError("--g-min must be smaller than --g-max")
    return np.linspace(args.g_min, args.g_max, args.steps)


def _log_scale(args) -> float:
    return 1.0 if args.log_base == "e" else LOG2


def _point(model: Model, g: float) -> ModelPoint:
    return ModelPoint(model, g if model.parametrized else None)


# closed-form references, nan where none is available


def closed_form(model: Model, g: float, L: float) -> float:
    even = not math.isinf(L) and int(L) % 2 == 0
    match model:
        case Model.AKLT:
            return LOG2 if math.isinf(L) else LOG2 - math.log1p((-1.0 / 3.0) ** int(L))
        case Model.GHZ:
            return 0.0
        case Model.CLUSTER:
            return LOG2 if (even or math.isinf(L)) else math.nan
        case Model.MODEL1:
            if math.isinf(L):
                return model1_fixed_point(g)
            return model1_per_block(g, int(L)) if even else math.nan
        case Model.MODEL2:
            if math.isinf(L):
                return model2_fixed_point(g)
            return model2_per_block(g, int(L)) if even else math.nan
    return math.nan


def _sweep_task(task) -> list[tuple]:
    model, g, sizes, restarts, tol, seed = task
    E = transfer_operator(catalog_mps(_point(model, g)))
    kw = {"seed": seed}
    if restarts is not None:
        kw["restarts"] = restarts
    if tol is not None:
        kw["tol"] = tol
    rows, notes = [], []
    for L in sizes:
        if math.isinf(L):
            try:
                val = fixed_point_entanglement(fixed_point_spectrum(E))
            except (DegenerateDominantEigenvalue, NonDiagonalizableFixedPoint) as exc:
                notes.append(f"g={g:.12g}: no fixed point ({exc})")
                val = math.nan
        else:
            val = entanglement_per_block(E, int(L), **kw).per_block
        rows.append((g, L, val, closed_form(model, g, L)))
    return rows, notes


def _fidelity_task(task) -> list[tuple]:
    model, g1, grid = task
    a = catalog_mps(ModelPoint(model, g1))
    return [
        (g1, g2, fidelity_per_site(a, catalog_mps(ModelPoint(model, g2))), fidelity_closed_form(g1, g2))
        for g2 in grid
    ]


def _ansatz_task(task) -> tuple:
    model, g, m, L, restarts, tol, seed = task
    point = _point(model, g)
    psi, _ = catalog_state_vector(point, m)
    d = model.phys_dim
    kw = {"seed": seed, "block_size": L}
    if restarts is not None:
        kw["restarts"] = restarts
    if tol is not None:
        kw["tol"] = tol
    ident = AnsatzKind.IDENTICAL if L == 1 else AnsatzKind.BLOCK_IDENTICAL
    arb = AnsatzKind.ARBITRARY if L == 1 else AnsatzKind.BLOCK_ARBITRARY
    vals = [brute_force_geometric(psi, d, ident, **kw).total]
    vals.append(brute_force_geometric(psi, d, AnsatzKind.ALTERNATING, **kw).total if (m // L) % 2 == 0 else math.nan)
    vals.append(brute_force_geometric(psi, d, arb, **kw).total)
    return (g, *vals)


def _run(func: Callable, tasks: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, tasks))


def _write_csv(path: str | None, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write rows atomically: a failed run never leaves a partial file behind."""
    if path is None:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows([_fmt(x) for x in r] for r in rows)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".partial-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows([_fmt(x) for x in r] for r in rows)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_sweep(args) -> int:
    model = Model(args.model)
    if model is Model.ANTIFERRO_GHZ:
        raise UsageError("antiferro-ghz has no uniform MPS; use ansatz-compare")
    sizes = parse_block_sizes(args.L)
    for L in sizes:
        if not math.isinf(L) and L % 2:
            _warn(f"odd block size L={L}: per-block values are flagged as less reliable")
    grid = _grid(args)
    tasks = [(model, float(g), sizes, args.restarts, args.tol, args.seed) for g in grid]
    scale = _log_scale(args)
    rows = []
    for chunk, notes in _run(_sweep_task, tasks, args.jobs):
        for note in notes:
            _warn(note)
        for g, L, val, ref in chunk:
            diff = abs(val - ref) if not (math.isnan(val) or math.isnan(ref)) else math.nan
            rows.append((g, "inf" if math.isinf(L) else int(L), val / scale, ref / scale, diff / scale))
    _write_csv(args.out, SWEEP_HEADER, rows)
    return 0


def cmd_fidelity(args) -> int:
    model = Model(args.model)
    if model not in (Model.MODEL1, Model.MODEL2):
        raise UsageError("fidelity is available for model1 and model2")
    grid = _grid(args)
    tasks = [(model, float(g1), [float(g) for g in grid]) for g1 in grid]
    scale = _log_scale(args)
    rows = []
    for chunk in _run(_fidelity_task, tasks, args.jobs):
        rows.extend((g1, g2, f / scale, c / scale, abs(f - c) / scale) for g1, g2, f, c in chunk)
    _write_csv(args.out, FIDELITY_HEADER, rows)
    return 0


def cmd_ansatz_compare(args) -> int:
    model = Model(args.model)
    if model is Model.ANTIFERRO_GHZ:
        raise UsageError("antiferro-ghz is a fixed state; sweep a parametrized model")
    sizes = parse_block_sizes(args.L)
    if len(sizes) != 1 or math.isinf(sizes[0]):
        raise UsageError("ansatz-compare takes a single finite block size")
    L = int(sizes[0])
    m = args.n_sites
    if m < 2 or m % L:
        raise UsageError(f"block size {L} must divide --n-sites {m}")
    if (m // L) % 2:
        _warn("odd number of blocks: the alternating column is nan")
    grid = _grid(args)
    tasks = [(model, float(g), m, L, args.restarts, args.tol, args.seed) for g in grid]
    scale = _log_scale(args)
    rows = [(g, *(v / scale for v in vals)) for g, *vals in _run(_ansatz_task, tasks, args.jobs)]
    _write_csv(args.out, ANSATZ_HEADER, rows)
    return 0


def cmd_verify(args) -> int:
    model = Model(args.model)
    if model not in (Model.MODEL1, Model.MODEL2):
        raise UsageError("verify is available for model1 and model2")
    if args.g is None:
        raise UsageError("verify needs --g")
    chk = ground_state_check(ModelPoint(model, args.g), args.n_sites)
    print(f"model: {model.value}  g: {args.g:.12g}  sites: {args.n_sites}")
    print(f"MPS energy:    {chk.mps_energy:.12g}")
    print(f"ground energy: {chk.ground_energy:.12g}")
    print(f"relative gap:  {chk.gap:.3e}")
    print(f"RESULT: {'PASS' if chk.passed else 'FAIL'} gap={chk.gap:.3e}")
    return 0 if chk.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpsrg", description="Geometric entanglement of matrix product states under RG."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    models = [m.value for m in Model]

    def common(p, model_choices=models, L_default="2,4,8"):
        p.add_argument("--model", required=True, choices=model_choices)
        p.add_argument("--g-min", type=float, default=-2.0)
        p.add_argument("--g-max", type=float, default=2.0)
        p.add_argument("--steps", type=int, default=41)
        p.add_argument("--L", default=L_default, help="comma-separated block sizes, 'inf' allowed")
        p.add_argument("--restarts", type=int, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--log-base", choices=("e", "2"), default="e")
        p.add_argument("--out", default=None, help="CSV path (default: stdout)")
        p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("sweep", help="per-block entanglement over a g grid")
    common(p, L_default="2,4,8,inf")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fidelity", help="fidelity per site on a g1 x g2 grid")
    common(p, model_choices=["model1", "model2"])
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("ansatz-compare", help="brute-force product-state families on a finite ring")
    common(p, L_default="1")
    p.add_argument("--n-sites", type=int, default=10)
    p.set_defaults(func=cmd_ansatz_compare)

    p = sub.add_parser("verify", help="MPS energy against exact diagonalization")
    p.add_argument("--model", required=True, choices=["model1", "model2"])
    p.add_argument("--g", type=float, default=None)
    p.add_argument("--n-sites", type=int, default=8)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MPSError, ArithmeticError, ValueError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
