import json

import numpy as np
import pytest
from click.testing import CliRunner

from trilinvar.cli import main
from trilinvar.io import (
    load_polynomial,
    read_orbit_table,
    sha256,
    write_expanded,
    write_orbit_table,
)
from trilinvar.polynomial import Polynomial


@pytest.fixture
def run(monkeypatch):
    monkeypatch.delenv("TRILINVAR_THREADS", raising=False)
    runner = CliRunner()

    def _run(*args, env=None):
        return runner.invoke(main, [str(a) for a in args], env=env)
    return _run


def manifest(out):
    return json.loads((out / "manifest.json").read_text())


def write_array(path, X):
    path.write_text(json.dumps(np.asarray(X).tolist()))
    return path


# ---------------------------------------------------------------------------
# file formats

def test_orbit_table_roundtrip(tmp_path, I6):
    path = tmp_path / "I6.orbits"
    write_orbit_table(path, I6)
    fields, rows, poly = read_orbit_table(path)
    assert fields == {"name": "I6", "degree": "6", "kind": "symmetric"}
    assert len(rows) == 8
    assert poly == I6.expanded


def test_expanded_roundtrip(tmp_path, I9):
    path = tmp_path / "I9.expanded"
    write_expanded(path, I9)
    fields, poly = load_polynomial(path)
    assert fields["terms"] == "9216"
    assert poly == I9.expanded


def test_reference_degree9_file_loads_as_I9(tmp_path, I9):
    # the reference table lists non-minimal representatives with +1 each
    from conftest import DATA

    text = "# name=I9 degree=9 kind=alternating\n" + (DATA / "table_deg9.tsv").read_text()
    path = tmp_path / "ref9.orbits"
    path.write_text(text)
    assert load_polynomial(path)[1] == I9.expanded


def test_nonzero_only_orbit_file(tmp_path, I9):
    path = tmp_path / "I9.orbits"
    write_orbit_table(path, I9, nonzero_only=True)
    _fields, rows, poly = read_orbit_table(path)
    assert len(rows) == 14 and poly == I9.expanded


# ---------------------------------------------------------------------------
# commands

def test_basis(run, tmp_path):
    res = run("basis", "--degree", 6, "--out", tmp_path)
    assert res.exit_code == 0, res.output
    assert "weight_zero=1152" in res.output and "l1m1=792" in res.output
    assert len((tmp_path / "basis_deg6_w0.txt").read_text().splitlines()) == 1152
    m = manifest(tmp_path)
    assert m["command"] == "basis" and len(m["artifacts"]) == 7


def test_basis_warns_off_multiple_of_three(run, tmp_path):
    res = run("basis", "--degree", 4, "--out", tmp_path)
    assert res.exit_code == 0
    assert "weight_zero=0" in res.output


def test_orbits(run, tmp_path):
    res = run("orbits", "--degree", 9, "--out", tmp_path)
    assert res.exit_code == 0
    assert "orbits=44 monomials=22620" in res.output
    assert run("orbits", "--degree", 4, "--out", tmp_path).exit_code == 2


def test_compute_degree3(run, tmp_path):
    res = run("compute", "--degree", 3, "--out", tmp_path)
    assert res.exit_code == 0
    assert "nullspace dimension 0" in res.output


def test_compute_is_deterministic(run, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run("compute", "--degree", 6, "--out", out).exit_code == 0
    ma, mb = manifest(a), manifest(b)
    assert ma["artifacts"] == mb["artifacts"]
    assert ma["results"] == mb["results"]
    assert sorted(ma["artifacts"]) == ["I6.expanded", "I6.orbits"]
    assert ma["artifacts"]["I6.orbits"]["sha256"] == sha256(a / "I6.orbits")


def test_compute_prime_does_not_change_artifacts(run, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run("compute", "--degree", 9, "--format", "orbit", "--out", a)
    run("compute", "--degree", 9, "--format", "orbit", "--prime", 103, "--out", b)
    assert manifest(a)["artifacts"] == manifest(b)["artifacts"]
    assert len(manifest(a)["artifacts"]) == 1


def test_usage_errors(run, tmp_path):
    assert run("compute", "--degree", 5, "--out", tmp_path).exit_code == 2
    assert run("compute", "--degree", 6, "--prime", 100, "--out", tmp_path).exit_code == 2
    assert run("compute", "--degree", 6, "--prime", 2, "--out", tmp_path).exit_code == 2
    assert run("compute", "--degree", 9, "--mode", "fast", "--out", tmp_path).exit_code == 2
    assert run("verify", tmp_path / "missing").exit_code == 2
    assert run("nonsense").exit_code == 2


def test_thread_cap(run, tmp_path):
    res = run("compute", "--degree", 3, "--out", tmp_path, env={"TRILINVAR_THREADS": "2"})
    assert res.exit_code == 0
    assert manifest(tmp_path)["environment"]["threads"] == "2"
    assert run("compute", "--degree", 3, "--out", tmp_path, env={"TRILINVAR_THREADS": "x"}).exit_code == 2
    assert run("compute", "--degree", 3, "--out", tmp_path, env={"TRILINVAR_THREADS": "0"}).exit_code == 2


def test_verify(run, tmp_path, I6):
    good = tmp_path / "I6.expanded"
    write_expanded(good, I6)
    res = run("verify", good)
    assert res.exit_code == 0, res.output
    bad = tmp_path / "bad.expanded"
    # x111^6 is itself killed by every raising operator; x333^6 is not
    write_expanded(bad, I6.expanded + Polynomial.variable(3, 3, 3) ** 6, name="bad")
    assert run("verify", bad).exit_code == 1
    junk = tmp_path / "junk.expanded"
    junk.write_text("1 2 3\n")
    assert run("verify", junk).exit_code == 2


def test_eval(run, tmp_path, I6):
    inv = tmp_path / "I6.orbits"
    write_orbit_table(inv, I6)
    diag = np.zeros((3, 3, 3), dtype=int)
    for t in range(3):
        diag[t, t, t] = 1
    res = run("eval", inv, write_array(tmp_path / "x.json", diag))
    assert res.exit_code == 0 and res.output.strip() == "1"
    res = run("eval", inv, write_array(tmp_path / "y.json", [[1, 2], [3, 4]]))
    assert res.exit_code == 2


def test_invariance(run, tmp_path, I9):
    inv = tmp_path / "I9.expanded"
    write_expanded(inv, I9)
    res = run("invariance", inv, "--trials", 5, "--seed", 3)
    assert res.exit_code == 0 and "5/5 trials passed" in res.output
    bad = tmp_path / "m.expanded"
    write_expanded(bad, Polynomial.variable(1, 1, 1) * Polynomial.variable(2, 2, 2) * Polynomial.variable(3, 3, 3))
    assert run("invariance", bad, "--trials", 3).exit_code == 1


@pytest.mark.slow
def test_relation_from_directory(run, tmp_path, I6, I12_pair):
    write_orbit_table(tmp_path / "I6.orbits", I6)
    for rec in I12_pair:
        write_expanded(tmp_path / f"{rec.name}.expanded", rec)
    out = tmp_path / "rel"
    res = run("relation", "--from", tmp_path, "--out", out)
    assert res.exit_code == 0, res.output
    assert res.output.strip() == "I6^2 = I'12 - 21*I12"
    assert manifest(out)["results"]["residual_terms"] == 0
    # swapping the roles of I12 and I12' gives a different but valid relation
    (tmp_path / "I12.expanded").rename(tmp_path / "tmp")
    (tmp_path / "I12prime.expanded").rename(tmp_path / "I12.expanded")
    (tmp_path / "tmp").rename(tmp_path / "I12prime.expanded")
    res = run("relation", "--from", tmp_path)
    assert res.exit_code == 0
    assert res.output.strip() == "I6^2 = -21*I'12 + I12"
    (tmp_path / "I12prime.expanded").unlink()
    assert run("relation", "--from", tmp_path).exit_code == 2
