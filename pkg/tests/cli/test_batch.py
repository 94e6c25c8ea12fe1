import json
from pathlib import Path

import pytest
import yaml

from zsf.cli.app import run
from zsf.cli.batch import job_argv, load_manifest, run_batch
from zsf.core.error import ZsfParsingError, ZsfValidationError

GROUND = "[-2,-1,1,2]"


def write_manifest(tmp_path: Path, data) -> Path:
    path = tmp_path / "manifest.yaml"
    path.write_text(yaml.safe_dump(data))
    return path


class TestJobArgv:
    def test_positional_and_mapping(self):
        job = {"command": "family", "name": "prop2", "params": {"d": 2, "k": 1}}
        assert job_argv(job) == ["family", "prop2", "--params=d=2,k=1"]

    def test_flags(self):
        job = {"command": "factorize", "lengths_only": True, "k": None, "element": "1 -1"}
        assert job_argv(job) == ["factorize", "--lengths-only", "--element=1 -1"]

    def test_lists(self):
        job = {"command": "aamp", "lengths": [3, 5, 7], "deltas": [2]}
        assert job_argv(job) == ["aamp", "--lengths=3,5,7", "--deltas=2"]

    def test_needs_command(self):
        with pytest.raises(ZsfValidationError, match="has no command"):
            job_argv({"ground": GROUND})


class TestLoadManifest:
    def test_list(self, tmp_path):
        path = write_manifest(tmp_path, [{"command": "rhok", "ground": GROUND, "k": 2}])
        assert load_manifest(path) == [{"command": "rhok", "ground": GROUND, "k": 2}]

    def test_jobs_mapping(self, tmp_path):
        path = write_manifest(tmp_path, {"jobs": [{"command": "atoms", "ground": GROUND}]})
        assert len(load_manifest(path)) == 1

    def test_empty(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert load_manifest(path) == []

    def test_json_is_yaml(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps([{"command": "atoms", "ground": GROUND}]))
        assert load_manifest(path)[0]["command"] == "atoms"

    def test_not_a_list(self, tmp_path):
        path = tmp_path / "scalar.yaml"
        path.write_text("42")
        with pytest.raises(ZsfParsingError, match="expected a list of jobs"):
            load_manifest(path)

    def test_broken_yaml(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("jobs: [")
        with pytest.raises(ZsfParsingError, match="Unable to parse manifest"):
            load_manifest(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ZsfValidationError, match="Unable to read manifest"):
            load_manifest(tmp_path / "missing.yaml")


class TestRunBatch:
    def test_empty_manifest(self, core, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        report = run_batch(core, path)
        assert report.exit_code == 0
        assert report.results == {"jobs": []}
        assert report.complete

    def test_failures_stay_isolated(self, core, tmp_path):
        path = write_manifest(
            tmp_path,
            [
                {"command": "rhok", "ground": GROUND, "k": 2},
                {"command": "factorize", "element": "2 -1", "ground": GROUND},
                {"command": "aamp", "lengths": [3, 5, 7], "deltas": [2]},
                {"ground": GROUND},
            ],
        )
        report = run_batch(core, path)
        jobs = report.results["jobs"]
        assert [job["index"] for job in jobs] == [0, 1, 2, 3]
        assert [job["exit_code"] for job in jobs] == [0, 3, 0, 3]
        assert jobs[0]["results"]["rho_k"] == 3
        assert jobs[2]["results"]["witness"]["y"] == 3
        assert "has no command" in jobs[3]["error"]
        assert report.exit_code == 3

    def test_budget_marks_incomplete(self, core, tmp_path):
        path = write_manifest(
            tmp_path, [{"command": "atoms", "ground": "[-3,-1,2]", "budget_nodes": 5}]
        )
        report = run_batch(core, path)
        assert report.exit_code == 2
        assert not report.complete

    def test_no_nested_batches(self, core, tmp_path):
        path = write_manifest(tmp_path, [{"command": "batch", "manifest": "other.yaml"}])
        job = run_batch(core, path).results["jobs"][0]
        assert job["exit_code"] == 3
        assert "cannot run inside a batch" in job["error"]

    def test_unreadable_manifest(self, core, tmp_path):
        report = run_batch(core, tmp_path / "missing.yaml")
        assert report.exit_code == 3
        assert report.results == {}


def test_batch_command(capsys, settings, tmp_path):
    path = write_manifest(tmp_path, [{"command": "atoms", "modulus": 3}])
    assert run(["batch", str(path)], settings=settings) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["command"] == "batch"
    assert report["results"]["jobs"][0]["results"]["davenport"] == 3
