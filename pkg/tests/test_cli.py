import json
import subprocess
import sys

import pytest

from sopml.cli import main

IRREFLEXIVITY = "!q. (!p. (p -> <>p | q) -> q)"
EXAMPLE_1 = "!p. (<>[]p & !q. (<>[]q -> []([]q | []p)) -> []<>[]p)"


def cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify(capsys):
    code, out, _ = cli(capsys, "classify", "!p. (p -> <>p)")
    assert code == 0 and out.startswith("Pi_1-Sahlqvist")
    code, out, _ = cli(capsys, "classify", "!p.([]p & !q.(q -> <><>q | p) -> p)")
    assert code == 0 and out.startswith("Pi_2-Sahlqvist")
    code, out, _ = cli(capsys, "classify", "?p. p")
    assert code == 1 and out.startswith("rejected")


def test_classify_json(capsys):
    code, out, _ = cli(capsys, "classify", "?p. p", "--format", "json")
    obj = json.loads(out)
    assert code == 1 and obj["accepted"] is False and "reason" in obj
    code, out, _ = cli(capsys, "classify", "!p. (p -> <>p)", "--format", "json")
    assert json.loads(out)["level"] == 1


def test_parse_error_exit_code(capsys):
    code, _, err = cli(capsys, "classify", "!p. (p ->")
    assert code == 2 and "error" in err
    code, _, _ = cli(capsys, "frobnicate")
    assert code == 2


def test_correspond(capsys):
    code, out, _ = cli(capsys, "correspond", IRREFLEXIVITY)
    assert code == 0 and "verified on 530 frames" in out
    code, out, _ = cli(capsys, "correspond", EXAMPLE_1)
    assert code == 0 and "verified on 530 frames" in out


def test_correspond_json_and_trace(capsys, tmp_path):
    path = tmp_path / "t.txt"
    path.write_text("!p. (p -> <>p)")
    code, out, _ = cli(capsys, "correspond", "--file", str(path), "--trace", "--format", "json", "--max-size", "2")
    obj = json.loads(out)
    assert code == 0 and obj["verified"] is True and obj["frames_checked"] == 18
    assert obj["trace"] and {"rule", "locus", "before", "after", "args"} <= set(obj["trace"][0])
    code, out, _ = cli(capsys, "check-equiv", obj["correspondent"], "forall x. R(x,x)")
    assert code == 0 and "equivalent on all 530 frames" in out


def test_correspond_no_verify_and_warning(capsys):
    code, out, err = cli(capsys, "correspond", "!p. (p -> <>p)", "--no-verify", "--max-size", "5")
    assert code == 0 and "skipped" in out and "warning" in err


def test_correspond_rejection(capsys):
    code, out, _ = cli(capsys, "correspond", "!p. ([]<>p -> <>[]p)")
    assert code == 1 and "rejected" in out


def test_self_check_failure_exit_code(capsys, monkeypatch):
    from sopml import cli as cli_module
    from sopml.syntax import parse_complex

    class Broken:
        output = parse_complex("!@i. @i <= ~<>@i")
        trace = ()
        level = 1

    monkeypatch.setattr(cli_module, "run", lambda phi: Broken)
    code, out, _ = cli(capsys, "correspond", "!p. (p -> <>p)", "--max-size", "1")
    assert code == 3 and "FAILED" in out


def test_check_equiv(capsys):
    code, out, _ = cli(capsys, "check-equiv", "forall x. R(x,x)", "forall x. ~R(x,x)", "--max-size", "1")
    assert code == 0 and "not equivalent" in out
    assert json.loads(out.splitlines()[-1]) == {"worlds": ["w0"], "edges": []}
    code, _, _ = cli(capsys, "check-equiv", "R(x,x)", "true")
    assert code == 2


@pytest.mark.parametrize("rule", [{"kind": "gabbay"}, {"kind": "nonxi", "xi": "p -> <>p"}])
def test_translate_rule(capsys, tmp_path, rule):
    path = tmp_path / "rule.json"
    path.write_text(json.dumps(rule))
    code, out, _ = cli(capsys, "translate-rule", str(path), "--format", "json")
    obj = json.loads(out)
    assert code == 0 and obj["verified"] is True and obj["frames_checked"] == 530
    code, out, _ = cli(capsys, "check-equiv", obj["correspondent"], "forall x. ~R(x,x)")
    assert "equivalent on all" in out


def test_translate_rule_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert cli(capsys, "translate-rule", str(bad))[0] == 2
    assert cli(capsys, "translate-rule", str(tmp_path / "missing.json"))[0] == 2
    unsupported = tmp_path / "u.json"
    unsupported.write_text(json.dumps({"kind": "pi2", "F": "r & ~p", "G": "true", "fresh": ["r"]}))
    code, out, _ = cli(capsys, "translate-rule", str(unsupported))
    assert code == 1 and "rejected" in out


def test_eval(capsys, tmp_path):
    path = tmp_path / "f.json"
    path.write_text(json.dumps({"worlds": ["a"], "edges": [["a", "a"]]}))
    code, out, _ = cli(capsys, "eval", "!p. (p -> <>p)", str(path))
    assert code == 0 and out.strip() == "valid"
    path.write_text(json.dumps({"worlds": ["a", "b"], "edges": [["a", "b"]], "valuation": {"p": ["b"]}}))
    code, out, _ = cli(capsys, "eval", "<>p", str(path), "--world", "b", "--format", "json")
    assert code == 0 and json.loads(out) == {"extension": ["a"], "holds": False}
    assert cli(capsys, "eval", "<>q", str(path))[0] == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "sopml", "classify", "!p. (p -> <>p)"], capture_output=True, text=True
    )
    assert proc.returncode == 0 and "Pi_1-Sahlqvist" in proc.stdout
