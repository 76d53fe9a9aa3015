"""Cache round-trips and the command-line surface."""

import json
import math

import pytest
from click.testing import CliRunner

from mfres import cli, halfint, lfun, modforms
from mfres.errors import DomainError


@pytest.fixture()
def runner():
    return CliRunner()


def test_ensure_forms_roundtrip(tmp_path):
    forms, built, files = cli.ensure_forms(tmp_path, 12, 150)
    assert built and files == ["eigenform_w12_1.txt"]
    assert forms[0].a2 == -24

    again, built2, _ = cli.ensure_forms(tmp_path, 12, 150)
    assert not built2
    assert again[0].exact
    direct = modforms.hecke_eigenforms(12, 150)[0]
    for p in [2, 3, 5, 7, 149]:
        assert again[0].prime_coeffs[p] == direct.prime_coeffs[p]

    # stale precision triggers a rebuild, larger caches are reused as-is
    _, built3, _ = cli.ensure_forms(tmp_path, 12, 400)
    assert built3
    _, built4, _ = cli.ensure_forms(tmp_path, 12, 200)
    assert not built4


def test_ensure_forms_corruption(tmp_path):
    cli.ensure_forms(tmp_path, 12, 100)
    target = tmp_path / "eigenform_w12_1.txt"
    target.write_text("# weight=12 prec_primes=100\n2,-999\n")
    reforms, rebuilt, _ = cli.ensure_forms(tmp_path, 12, 100)
    assert rebuilt
    assert reforms[0].a2 == -24


def test_ensure_forms_numeric_roundtrip(tmp_path):
    forms, _, _ = cli.ensure_forms(tmp_path, 24, 80, bits=128)
    loaded, built, _ = cli.ensure_forms(tmp_path, 24, 80, bits=128)
    assert not built
    assert not loaded[0].exact
    for f, g in zip(forms, loaded):
        for p in [2, 3, 79]:
            assert abs(float(f.prime_coeffs[p] - g.prime_coeffs[p])) \
                <= 1e-30 * abs(float(f.prime_coeffs[p]))


def test_ensure_plus_roundtrip(tmp_path):
    basis, built, files = cli.ensure_plus(tmp_path, 6, 300)
    assert built and files == ["plusform_k6_0.txt"]
    assert basis.dim == 1
    assert basis.forms[0].coeff(1) == 1
    assert basis.forms[0].coeff(4) == -56

    loaded, built2, _ = cli.ensure_plus(tmp_path, 6, 300)
    assert not built2
    direct = halfint.plus_space_basis(6, 300)
    for n in range(300):
        assert loaded.forms[0].coeff(n) == direct.forms[0].coeff(n)
    assert loaded.lifts[0].a2 == -24


def test_forms_build_command(runner, tmp_path):
    args = ["forms", "build", "--weight", "12", "--prec", "120",
            "--cache", str(tmp_path)]
    first = runner.invoke(cli.main, args)
    assert first.exit_code == 0, first.output
    rep = json.loads(first.output)
    assert rep["built"] is True and rep["a2"] == ["-24"]

    second = runner.invoke(cli.main, args)
    assert json.loads(second.output)["built"] is False

    usage = runner.invoke(cli.main, ["forms", "build", "--weight", "13",
                                     "--prec", "50", "--cache", str(tmp_path)])
    assert usage.exit_code == 2


def test_plus_build_command(runner, tmp_path):
    res = runner.invoke(cli.main, ["plus", "build", "--k", "6", "--prec",
                                   "200", "--cache", str(tmp_path)])
    assert res.exit_code == 0, res.output
    rep = json.loads(res.output)
    assert rep["dim"] == 1 and rep["built"] is True

    bad = runner.invoke(cli.main, ["plus", "build", "--k", "1", "--prec",
                                   "200", "--cache", str(tmp_path)])
    assert bad.exit_code == 2


def test_lvalue_single(runner, tmp_path):
    res = runner.invoke(cli.main, ["lvalue", "--k", "6", "--d", "5",
                                   "--bits", "64", "--cache", str(tmp_path)])
    assert res.exit_code == 0, res.output
    rep = json.loads(res.output)
    assert rep["parity"] == 1 and rep["bits"] == 64

    f = modforms.hecke_eigenforms(12, 200)[0]
    oracle = lfun.central_lvalue(f, 5, bits=64)
    assert abs(float(rep["L"]) - float(oracle.value)) \
        <= 1e-12 * float(oracle.value)
    assert rep["T"] == oracle.truncation

    odd = runner.invoke(cli.main, ["lvalue", "--k", "6", "--d", "-3",
                                   "--cache", str(tmp_path)])
    odd_rep = json.loads(odd.output)
    assert odd_rep["parity"] == -1 and float(odd_rep["L"]) == 0.0

    bad = runner.invoke(cli.main, ["lvalue", "--k", "6", "--d", "9",
                                   "--cache", str(tmp_path)])
    assert bad.exit_code == 2
    conflict = runner.invoke(cli.main, ["lvalue", "--k", "6",
                                        "--cache", str(tmp_path)])
    assert conflict.exit_code == 2


def test_lvalue_batch(runner, tmp_path):
    out = tmp_path / "batch.csv"
    args = ["lvalue", "--k", "6", "--range", "1:40", "--bits", "46",
            "--cache", str(tmp_path / "c"), "--out", str(out)]
    res = runner.invoke(cli.main, args)
    assert res.exit_code == 0, res.output
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "D,parity,L,tail_bound,T"

    rows = {int(line.split(",")[0]): line.split(",") for line in lines[1:]}
    assert rows[5][1] == "1" and float(rows[5][2]) > 0
    assert rows[-3][1] == "-1" and rows[-3][2] == "0.0"
    assert set(abs(d) for d in rows) <= set(range(1, 41))

    first_bytes = out.read_bytes()
    res2 = runner.invoke(cli.main, args)
    assert res2.exit_code == 0
    assert out.read_bytes() == first_bytes


def test_charsum_command(runner):
    res = runner.invoke(cli.main, ["charsum", "--u", "9", "--x", "50000"])
    assert res.exit_code == 0, res.output
    rep = json.loads(res.output)
    assert rep["rel_gap"] < 0.05

    brute3 = runner.invoke(cli.main, ["charsum", "--u", "3", "--x", "50000"])
    rep3 = json.loads(brute3.output)
    assert rep3["main"] == 0.0 and rep3["rel_gap"] is None

    bad = runner.invoke(cli.main, ["charsum", "--u", "4", "--x", "50000"])
    assert bad.exit_code == 2


def test_dseries_command(runner, tmp_path):
    res = runner.invoke(cli.main, ["dseries", "--k", "6", "--s", "6.0",
                                   "--prec", "800", "--cache", str(tmp_path)])
    assert res.exit_code == 0, res.output
    rep = json.loads(res.output)
    assert rep["passed"] is True
    for pair in rep["pairwise"]:
        assert pair["diff"] <= pair["bound"]

    shallow = runner.invoke(cli.main, ["dseries", "--k", "6", "--s", "3.0",
                                       "--prec", "800",
                                       "--cache", str(tmp_path)])
    assert shallow.exit_code == 2  # below the convergence floor


def test_resonate_command(runner, tmp_path):
    args = ["resonate", "--k", "6", "--x", "600", "--window", "5:19",
            "--nmax", "500", "--strength", "5", "--top", "5", "--bits", "40",
            "--cache", str(tmp_path)]
    res = runner.invoke(cli.main, args)
    assert res.exit_code == 0, res.output
    rep = json.loads(res.output)
    assert list(rep)[:8] == ["params", "calR", "moment2", "moment6",
                             "diagonal_main", "shift", "top", "lemma1"]
    assert rep["params"]["X"] == 600 and rep["params"]["N"] == 500
    assert rep["params"]["window"] == [5.0, 19.0]
    assert len(rep["top"]) == 5
    for entry in rep["top"]:
        assert list(entry) == ["D", "R2", "L", "waldspurger_c_lower"]
        assert len(entry["L"]) == 1
    assert [row["u"] for row in rep["lemma1"]] == [1, 9]
    assert rep["shift"]["predicted"] > 1

    rerun = runner.invoke(cli.main, args)
    assert rerun.output == res.output

    csv_res = runner.invoke(cli.main, args + ["--csv"])
    assert csv_res.output.startswith("D,R2,L,waldspurger_c_lower\n")
    assert len(csv_res.output.strip().split("\n")) == 6


def test_verify_charsum(runner):
    res = runner.invoke(cli.main, ["verify", "--suite", "charsum",
                                   "--u", "9", "--x", "200000"])
    assert res.exit_code == 0, res.output
    rep = json.loads(res.output)
    assert rep["passed"] is True and rep["first_failure"] is None


def test_verify_plus_and_resonance(runner, tmp_path):
    res = runner.invoke(cli.main, ["verify", "--suite", "plus", "--k", "6",
                                   "--cache", str(tmp_path)])
    assert res.exit_code == 0, res.output
    rep = json.loads(res.output)
    names = [c["name"] for c in rep["checks"]]
    assert names == ["plus-dimension", "plus-vanishing", "shimura-relation"]
    assert all(c["passed"] for c in rep["checks"])

    reso = runner.invoke(cli.main, ["verify", "--suite", "resonance",
                                    "--x", "30000", "--cache", str(tmp_path)])
    assert reso.exit_code == 0, reso.output
    assert json.loads(reso.output)["passed"] is True
