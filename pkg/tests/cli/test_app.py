import json

import pytest

from tests.utils import cases
from zsf.cli.app import run
from zsf.settings import Settings


@pytest.fixture
def run_report(capsys: pytest.CaptureFixture[str], settings: Settings):
    def _run(*argv: str) -> tuple[int, dict]:
        exit_code = run(list(argv), settings=settings)
        return exit_code, json.loads(capsys.readouterr().out)

    return _run


class TestCommands:
    def test_atoms(self, run_report):
        exit_code, report = run_report("atoms", "--ground=[-2,-1,1,2]")
        assert exit_code == 0
        assert report["command"] == "atoms"
        assert report["results"]["davenport"] == 3
        assert len(report["results"]["atoms"]) == 4
        assert report["inputs"] == {"ground": "[-2,-1,1,2]"}
        assert report["budget"]["nodes_used"] > 0

    def test_factorize_lengths_only(self, run_report):
        exit_code, report = run_report(
            "factorize",
            "--element=3^2 2^3 -2^3 -1^6",
            "--ground={-2,-1,2,3}",
            "--lengths-only",
        )
        assert exit_code == 0
        assert report["results"]["lengths"] == [4, 5]

    def test_elasticity(self, run_report):
        spec = '{"finite":[-2,-1],"aps":[{"start":1,"step":2}]}'
        exit_code, report = run_report("elasticity", f"--spec={spec}")
        assert exit_code == 0
        assert report["results"]["rho"] == "2/1"

    def test_transfer(self, run_report):
        exit_code, report = run_report("transfer", "cyclic", "--element=1^4 3^4 -4^4", "--n=4")
        assert exit_code == 0
        assert report["results"]["passed"] is True

    def test_family(self, run_report):
        exit_code, report = run_report("family", "prop2", "--params=d=2,k=1")
        assert exit_code == 0
        assert report["results"]["lengths"] == [4, 5]

    def test_chains(self, run_report):
        exit_code, report = run_report("chains", "rel-davenport", "--negatives=-2,-1")
        assert exit_code == 0
        assert report["results"]["relative_davenport"]["value"] == 2

    def test_aamp(self, run_report):
        exit_code, report = run_report("aamp", "--lengths=3,5,7", "--deltas=2")
        assert exit_code == 0
        assert report["results"]["witness"]["y"] == 3


class TestExitCodes:
    def test_budget_exceeded(self, run_report):
        exit_code, report = run_report("atoms", "--ground=[-3,-1,2]", "--budget-nodes=5")
        assert exit_code == 2
        assert report["exit_code"] == 2
        assert report["complete"] is False
        assert "atoms_found" in report["results"]["partial"]

    @cases(
        "argv,match",
        ["not zero-sum", [["factorize", "--element=2 -1", "--ground=[-2,-1,1,2]"], "zero-sum"]],
        ["bad sequence", [["factorize", "--element=2 x", "--ground=[-2,-1,1,2]"], "Unable to parse"]],
        ["missing ground", [["factorize", "--element=1 -1"], "needs --ground"]],
        ["transfer without n", [["transfer", "cyclic", "--element=2^2 -4"], "needs --n"]],
    )
    def test_invalid_input(self, run_report, argv, match):
        exit_code, report = run_report(*argv)
        assert exit_code == 3
        assert match in report["error"]

    def test_usage_error(self, capsys, settings):
        assert run(["atoms", "--bogus"], settings=settings) == 3
        captured = capsys.readouterr()
        assert "unrecognized arguments" in captured.err
        assert captured.out == ""

    def test_missing_command(self, capsys, settings):
        assert run([], settings=settings) == 3
        assert "required" in capsys.readouterr().err


def test_csv_output(capsys, settings):
    assert run(["rhok", "--ground=[-2,-1,1,2]", "--k=2", "--csv"], settings=settings) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[0] == "key,value"
    assert "results.rho_k,3" in rows
    assert "complete,true" in rows
    assert 'results.union,"[2, 3]"' in rows


def test_debug_flag(capsys):
    assert run(["aamp", "--lengths=1", "--deltas=1", "--debug"], settings=Settings()) == 0
    assert json.loads(capsys.readouterr().out)["exit_code"] == 0
