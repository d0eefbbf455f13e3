from __future__ import annotations

import csv
import io
import math

import numpy as np
import pytest

from mpsrg import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_sweep_header_and_ghz_zero(capsys):
    code, out, _ = run(capsys, "sweep", "--model", "ghz", "--steps", "3", "--L", "2,4,8")
    assert code == 0
    table = rows(out)
    assert table[0] == list(cli.SWEEP_HEADER)
    assert len(table) == 1 + 3 * 3
    assert all(float(r[2]) == 0.0 for r in table[1:])


def test_sweep_model1_landmarks(capsys):
    code, out, _ = run(capsys, "sweep", "--model", "model1", "--g-min", "-2", "--g-max", "2", "--steps", "41", "--L", "2,4,8,inf")
    assert code == 0
    table = rows(out)[1:]
    vals = {(float(r[0]), r[1]): float(r[2]) for r in table}
    for L in ("2", "4", "8"):
        assert vals[(0.0, L)] == pytest.approx(0, abs=1e-10)
        assert vals[(1.0, L)] == pytest.approx(0, abs=1e-10)
        inner = [vals[(g, L)] for g in np.round(np.linspace(0.1, 0.9, 9), 12)]
        assert max(inner) > 0
    # cusp near g = -1 at L = 2
    assert vals[(-1.0, "2")] == pytest.approx(math.log(2), abs=1e-9)
    assert vals[(-1.0, "2")] > vals[(-0.9, "2")]
    assert vals[(-1.0, "2")] > vals[(-1.1, "2")]


def test_sweep_model2_cusps(capsys):
    code, out, _ = run(capsys, "sweep", "--model", "model2", "--g-min", "-4", "--g-max", "4", "--steps", "81", "--L", "2,4")
    assert code == 0
    table = rows(out)[1:]
    for r in table:
        assert float(r[4]) < 1e-8
    vals = {(round(float(r[0]), 6), r[1]): float(r[2]) for r in table}
    for L in ("2", "4"):
        for g in (-2.0, 2.0):
            assert vals[(g, L)] > vals[(g - 0.1, L)] and vals[(g, L)] > vals[(g + 0.1, L)]


def test_sweep_log_base_two(capsys):
    _, nat, _ = run(capsys, "sweep", "--model", "aklt", "--steps", "2", "--L", "2")
    _, bits, _ = run(capsys, "sweep", "--model", "aklt", "--steps", "2", "--L", "2", "--log-base", "2")
    a, b = float(rows(nat)[1][2]), float(rows(bits)[1][2])
    assert b == pytest.approx(a / math.log(2))


def test_sweep_odd_block_warns(capsys):
    code, out, err = run(capsys, "sweep", "--model", "aklt", "--steps", "2", "--L", "3")
    assert code == 0
    assert "odd" in err


def test_sweep_deterministic(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert cli.main(["sweep", "--model", "model1", "--steps", "11", "--L", "2,inf", "--seed", "3", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert b"\r" not in paths[0].read_bytes()


def test_parallel_matches_serial(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["fidelity", "--model", "model2", "--steps", "5"]
    assert cli.main(base + ["--out", str(a)]) == 0
    assert cli.main(base + ["--out", str(b), "--jobs", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_fidelity_grid(capsys):
    code, out, _ = run(capsys, "fidelity", "--model", "model1", "--steps", "41")
    assert code == 0
    table = rows(out)
    assert table[0] == list(cli.FIDELITY_HEADER)
    body = [[float(x) for x in r] for r in table[1:]]
    assert len(body) == 41 * 41
    assert max(r[4] for r in body) < 1e-8
    for g1, g2, f, c, _ in body:
        if g1 == g2:
            assert f == pytest.approx(0, abs=1e-12)
        if (g1, g2) == (1.0, 0.0):
            assert c == pytest.approx(math.log(0.5))


def test_fidelity_closed_form_shared(capsys):
    _, a, _ = run(capsys, "fidelity", "--model", "model1", "--steps", "9")
    _, b, _ = run(capsys, "fidelity", "--model", "model2", "--steps", "9")
    assert [r[3] for r in rows(a)] == [r[3] for r in rows(b)]


def test_ansatz_compare_model2(capsys):
    code, out, _ = run(capsys, "ansatz-compare", "--model", "model2", "--n-sites", "4", "--steps", "9", "--g-min", "-3", "--g-max", "3")
    assert code == 0
    table = rows(out)
    assert table[0] == list(cli.ANSATZ_HEADER)
    for r in table[1:]:
        _, ident, alt, arb = map(float, r)
        assert alt == pytest.approx(arb, abs=1e-6)
        assert ident >= arb - 1e-9


def test_ansatz_compare_blocks(capsys):
    code, out, _ = run(capsys, "ansatz-compare", "--model", "model1", "--n-sites", "10", "--L", "2", "--steps", "5")
    assert code == 0
    for r in rows(out)[1:]:
        _, ident, alt, arb = map(float, r)
        assert math.isnan(alt)
        assert ident == pytest.approx(arb, abs=1e-6)


def test_verify_pass(capsys):
    code, out, _ = run(capsys, "verify", "--model", "model1", "--g", "0.5", "--n-sites", "8")
    assert code == 0
    assert out.strip().splitlines()[-1].startswith("RESULT: PASS gap=")
    code, out, _ = run(capsys, "verify", "--model", "model2", "--g", "1.0", "--n-sites", "6")
    assert code == 0


def test_verify_paramagnetic(capsys):
    code, out, _ = run(capsys, "verify", "--model", "model1", "--g", "1", "--n-sites", "4")
    assert code == 0
    assert "ground energy: -16" in out


def test_usage_errors(capsys):
    assert run(capsys, "verify", "--model", "model1")[0] == 2
    assert run(capsys, "sweep", "--model", "aklt", "--g-min", "1", "--g-max", "0")[0] == 2
    assert run(capsys, "sweep", "--model", "aklt", "--steps", "1")[0] == 2
    assert run(capsys, "sweep", "--model", "aklt", "--L", "0")[0] == 2
    assert run(capsys, "sweep", "--model", "antiferro-ghz")[0] == 2
    assert run(capsys, "ansatz-compare", "--model", "model1", "--n-sites", "9", "--L", "2")[0] == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["sweep", "--model", "nope"])
    assert exc.value.code == 2


def test_numeric_failure_exit_code(capsys):
    code, _, err = run(capsys, "verify", "--model", "model2", "--g", "1", "--n-sites", "10")
    assert code == 1
    assert "budget" in err


def test_partial_file_removed(tmp_path, monkeypatch):
    calls = {"n": 0}
    original = cli._sweep_task

    def flaky(task):
        calls["n"] += 1
        if calls["n"] == 3:
            raise ArithmeticError("injected failure")
        return original(task)

    monkeypatch.setattr(cli, "_sweep_task", flaky)
    out = tmp_path / "sweep.csv"
    assert cli.main(["sweep", "--model", "aklt", "--steps", "5", "--L", "2", "--out", str(out)]) == 1
    assert list(tmp_path.iterdir()) == []
