import json

import pytest

from bidual.cli import main

Z9 = {"p": "3", "n": "2"}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


def test_ideal_cyclic(capsys):
    code, rep, _ = run(capsys, "ideal", "--input", json.dumps({"ring": Z9, "gens": "1", "relations": [["3"]]}))
    assert code == 0
    assert {k: rep[k] for k in ("fitt0", "char", "ann")} == {"fitt0": "(3)", "char": "(3)", "ann": "(3)"}


def test_ideal_strict(capsys):
    code, rep, _ = run(capsys, "ideal", "--oracle", "--input", json.dumps({"ring": Z9, "gens": "2", "relations": [["3", "0"], ["0", "3"]]}))
    assert code == 0 and rep["fitt0"] == "(0)" and rep["char"] == "(3)" and rep["verdict"] == "strict"
    assert rep["oracle"]["annihilator_matches"]


def test_ideal_free(capsys):
    code, rep, _ = run(capsys, "ideal", "--input", json.dumps({"ring": Z9, "gens": "1", "relations": []}))
    assert code == 0 and rep["char"] == "(0)"


@pytest.mark.parametrize("payload", ["{bad", json.dumps({"ring": Z9}), json.dumps({"ring": {"p": "4", "n": "1"}, "gens": "1"})])
def test_ideal_malformed(capsys, payload):
    assert run(capsys, "ideal", "--input", payload)[0] == 2


def test_missing_file(capsys):
    assert run(capsys, "ideal", "--input", "/nonexistent/x.json")[0] == 2


def test_stickelberger_theta5(capsys):
    code, rep, _ = run(capsys, "stickelberger", "--m", "5")
    assert code == 0
    assert rep["theta"]["coeffs"] == {"1": "3/10", "2": "1/10", "3": "-1/10", "4": "-3/10"}
    assert all(e["agrees"] for e in rep["evaluations"])


def test_stickelberger_quadratic_mod_7(capsys):
    code, rep, _ = run(capsys, "stickelberger", "--input", '{"m": 7, "character": [3]}')
    assert code == 0 and rep["evaluations"][0]["value"] == "1"


def test_stickelberger_m1(capsys):
    assert run(capsys, "stickelberger", "--m", "1")[0] == 2


def test_stickelberger_odd_chi_is_hypothesis_violation(capsys):
    code, rep, _ = run(capsys, "stickelberger", "--p", "3", "--n", "1", "--input", '{"m": 5, "chi": {"modulus": 7, "order": 2, "exponents": [1]}}')
    assert code == 3 and "even" in rep["error"]


def test_stickelberger_L_element(capsys):
    code, rep, _ = run(capsys, "stickelberger", "--p", "3", "--n", "1", "--input", '{"m": 15, "labels": [19]}')
    assert code == 0 and len(rep["L"]["value"]) == 27 and "flat" in rep


def test_kolyvagin_non_admissible(capsys):
    code, rep, _ = run(capsys, "kolyvagin", "--n", "1")
    assert code == 3 and rep["invariance_failure"]["n"] == ["7"]


def test_kolyvagin_admissible(capsys):
    code, rep, _ = run(capsys, "kolyvagin", "--n", "1", "--input", '{"labels": [19, 109, 181], "cap": 1, "squares": true}')
    assert code == 0 and all(rep["checks"].values())


def test_stark_toy(capsys):
    code, rep, _ = run(capsys, "stark", "--input", '{"kind": "toy", "labels": [7, 13], "rank": 1}')
    assert code == 0 and rep["system"]["values"]["7,13"] == [["1"]]


def test_stark_corrupted(tmp_path, capsys):
    from bidual.stark import corrupt_datum, synthetic_datum
    from bidual.serialize import dumps
    from bidual.ring import RingDescriptor

    d = corrupt_datum(synthetic_datum(3, RingDescriptor(3, 2), (7, 13), 0), (7,))
    f = tmp_path / "bad.json"
    f.write_text(dumps(d.to_json()))
    code, rep, _ = run(capsys, "stark", "--input", str(f))
    assert code == 3 and not rep["validation"]["valid"]
    code, rep, _ = run(capsys, "suite", "stark", "--input", str(f))
    assert code == 1 and rep["sections"][0]["failures"][0]["validation"][0]["check"] == "cartesian square"


def test_unknown_suite(capsys):
    assert run(capsys, "suite", "nosuch")[0] == 2


def test_bad_flag(capsys):
    assert run(capsys, "ideal", "--frobnicate")[0] == 2


def test_suite_output_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run(capsys, "suite", "stickelberger", "--output", str(out))[0] == 0
    rep = json.loads(out.read_text())
    assert rep["passed"] and rep["suite"] == "stickelberger"


def test_oracle_regenerates_frozen_fixtures(tmp_path, capsys):
    out = tmp_path / "derived.json"
    assert run(capsys, "suite", "--oracle", "--output", str(out))[0] == 0
    from conftest import FIXTURES

    assert out.read_text() == (FIXTURES / "derived.json").read_text()
