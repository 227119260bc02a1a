import json
import shutil

import pytest

from artifacts import read_json, write_artifact
from creeper.errors import EXIT_NO_MUTANTS, EXIT_NOT_PASSED, EXIT_UNCOVERABLE, EXIT_VALIDATION
from extensions import db
from helpers import FIXTURES, PLAY_TRAILER
from models import CampaignRecord, CrawlRecord


def fixture(name):
    return str(FIXTURES / name)


def run(runner, tmp_path, *args):
    """Komenda CLI; ``{tmp}`` w argumentach wskazuje katalog tymczasowy testu."""
    return runner.invoke(args=[a.format(tmp=tmp_path) for a in args])


def test_full_pipeline_on_cinemup(runner, tmp_path, app):
    spec = fixture("cinemup.json")

    result = run(runner, tmp_path, "crawl", spec, "--out", "{tmp}/model.json", "--dot", "{tmp}/model.dot")
    assert result.exit_code == 0, result.output
    assert "13 węzłów, 31 krawędzi" in result.output
    assert (tmp_path / "model.dot").read_text(encoding="utf-8").startswith('digraph "CineMup"')

    result = run(runner, tmp_path, "submodel", "{tmp}/model.json", "--dest", "Play Trailer [play-trailer]",
                 "--out", "{tmp}/sub.json")
    assert result.exit_code == 0, result.output
    sub = read_json(tmp_path / "sub.json")
    assert (len(sub["nodes"]), len(sub["edges"])) == (12, 30)
    assert sub["destinations"] == [PLAY_TRAILER]

    result = run(runner, tmp_path, "gen", "{tmp}/sub.json", "--out", "{tmp}/suite.json", "--keys", "{tmp}/suite.keys")
    assert result.exit_code == 0, result.output
    suite = read_json(tmp_path / "suite.json")
    assert suite["focus"] == "upcoming"
    assert set(suite["lineage"]) == {"spec", "model", "submodel"}
    assert (tmp_path / "suite.keys").read_text(encoding="utf-8").startswith("# test 1 -> " + PLAY_TRAILER)

    result = run(runner, tmp_path, "run", spec, "{tmp}/suite.json", "--out", "{tmp}/verdicts.json", "--jobs", "2")
    assert result.exit_code == 0, result.output
    verdicts = read_json(tmp_path / "verdicts.json")
    assert verdicts["summary"]["failed"] == 0

    result = run(runner, tmp_path, "mutate", spec, "{tmp}/suite.json", "--scope", "{tmp}/sub.json", "--fatal",
                 "--mutants", "{tmp}/mutants.json", "--out", "{tmp}/report.json", "--table", "{tmp}/table.txt")
    assert result.exit_code == 0, result.output
    report = read_json(tmp_path / "report.json")
    assert (len(report["killed"]), report["alive"], report["score"]) == (
        23, ["BAV:details:add-favourite:0", "NVR:details:add-favourite:0"], 92.0)
    assert "92.0" in (tmp_path / "table.txt").read_text(encoding="utf-8")

    files = ["model.json", "sub.json", "suite.json", "verdicts.json", "mutants.json", "report.json"]
    result = runner.invoke(args=["verify", spec] + [str(tmp_path / f) for f in files])
    assert result.exit_code == 0, result.output

    with app.app_context():
        assert db.session.query(CrawlRecord).count() == 1
        campaign = db.session.query(CampaignRecord).one()
        assert (campaign.killed, campaign.alive, campaign.score) == (23, 2, 92.0)

    result = runner.invoke(args=["report"])
    assert result.exit_code == 0
    assert "CineMup" in result.output
    assert "Total Number" in result.output


def test_unknown_destination_is_a_validation_error(runner, tmp_path):
    assert run(runner, tmp_path, "crawl", fixture("cinemup.json"), "--out", "{tmp}/model.json").exit_code == 0
    result = run(runner, tmp_path, "submodel", "{tmp}/model.json", "--dest", "Nowhere", "--out", "{tmp}/sub.json")
    assert result.exit_code == EXIT_VALIDATION
    assert not (tmp_path / "sub.json").exists()


def test_edited_spec_makes_suite_stale(runner, tmp_path):
    spec = tmp_path / "cinemup.json"
    shutil.copy(FIXTURES / "cinemup.json", spec)
    run(runner, tmp_path, "crawl", str(spec), "--out", "{tmp}/model.json")
    run(runner, tmp_path, "gen", "{tmp}/model.json", "--out", "{tmp}/suite.json")

    document = json.loads(spec.read_text(encoding="utf-8"))
    document["screens"][0]["widgets"][0]["label"] = "SOON"
    spec.write_text(json.dumps(document), encoding="utf-8")

    result = run(runner, tmp_path, "run", str(spec), "{tmp}/suite.json", "--out", "{tmp}/verdicts.json")
    assert result.exit_code == EXIT_VALIDATION
    assert not (tmp_path / "verdicts.json").exists()


@pytest.mark.parametrize("drop_hash", [False, True])
def test_tampered_artifact_is_rejected(runner, tmp_path, drop_hash):
    run(runner, tmp_path, "crawl", fixture("cinemup.json"), "--out", "{tmp}/model.json")
    path = tmp_path / "model.json"
    document = json.loads(path.read_text(encoding="utf-8"))
    document["edges"] = document["edges"][:-1]
    if drop_hash:
        del document["contentHash"]
    path.write_text(json.dumps(document), encoding="utf-8")

    assert run(runner, tmp_path, "gen", "{tmp}/model.json", "--out", "{tmp}/suite.json").exit_code == EXIT_VALIDATION
    result = runner.invoke(args=["verify", fixture("cinemup.json"), str(path)])
    assert result.exit_code == EXIT_VALIDATION


def test_memory_attribute_mutants(runner, tmp_path):
    spec = fixture("memory.json")
    run(runner, tmp_path, "crawl", spec, "--out", "{tmp}/model.json")
    run(runner, tmp_path, "submodel", "{tmp}/model.json", "--dest", "result:score!show-score", "--out", "{tmp}/sub.json")
    run(runner, tmp_path, "gen", "{tmp}/sub.json", "--out", "{tmp}/suite.json")
    result = run(runner, tmp_path, "mutate", spec, "{tmp}/suite.json", "--ops", "NEA", "--no-record",
                 "--mutants", "{tmp}/mutants.json", "--out", "{tmp}/report.json")
    assert result.exit_code == 0, result.output
    assert len(read_json(tmp_path / "mutants.json")["mutants"]) == 15
    report = read_json(tmp_path / "report.json")
    assert report["score"] == 80.0
    assert [row["firstKills"] for row in report["perTest"]] == [9, 3]


def test_model_without_end_nodes_is_uncoverable(runner, tmp_path):
    run(runner, tmp_path, "crawl", fixture("grid.json"), "--focus", "v1", "--out", "{tmp}/model.json")
    result = run(runner, tmp_path, "gen", "{tmp}/model.json", "--out", "{tmp}/suite.json")
    assert result.exit_code == EXIT_UNCOVERABLE
    assert len(read_json(tmp_path / "suite.json")["uncoverable"]) == 14


def test_grid_without_focus_is_rejected(runner, tmp_path):
    result = run(runner, tmp_path, "crawl", fixture("grid.json"), "--out", "{tmp}/model.json")
    assert result.exit_code == EXIT_VALIDATION


def test_campaign_without_mutants(runner, tmp_path):
    spec = fixture("cinemup.json")
    run(runner, tmp_path, "crawl", spec, "--out", "{tmp}/model.json")
    run(runner, tmp_path, "gen", "{tmp}/model.json", "--out", "{tmp}/suite.json")
    result = run(runner, tmp_path, "mutate", spec, "{tmp}/suite.json", "--ops", "NEA",
                 "--mutants", "{tmp}/mutants.json", "--out", "{tmp}/report.json")
    assert result.exit_code == EXIT_NO_MUTANTS
    report = read_json(tmp_path / "report.json")
    assert (report["status"], report["score"]) == ("no-mutants", None)


def test_failing_suite_exits_with_not_passed(runner, tmp_path):
    spec = fixture("cinemup.json")
    suite = {
        "schema": "tvcreeper/suite",
        "version": 1,
        "start": "home:upcoming",
        "focus": None,
        "tests": [{"nodes": ["home:upcoming", "home:top-tv"], "edges": ["home:upcoming|Right"], "keys": ["Right"]}],
        "coveredEdges": ["home:upcoming|Right"],
        "uncoverable": [],
    }
    write_artifact(tmp_path / "suite.json", suite, upstream=read_json(spec))
    result = run(runner, tmp_path, "run", spec, "{tmp}/suite.json", "--out", "{tmp}/verdicts.json")
    assert result.exit_code == EXIT_NOT_PASSED
    verdict = read_json(tmp_path / "verdicts.json")["verdicts"][0]
    assert (verdict["outcome"], verdict["failedStep"], verdict["observed"]) == ("fail-mismatch", 0, ["home:top-rate"])


@pytest.mark.parametrize("args, code", [
    (["crawl", "{spec}", "--max-actions", "-1", "--out", "{tmp}/m.json"], EXIT_VALIDATION),
    (["mutate", "{spec}", "{spec}", "--ops", "XYZ"], 2),
])
def test_invalid_options(runner, tmp_path, args, code):
    spec = fixture("cinemup.json")
    result = runner.invoke(args=[a.format(tmp=tmp_path, spec=spec) for a in args])
    assert result.exit_code == code


def test_malformed_spec_file(runner, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text('{"name": "X", "rootScreen": ', encoding="utf-8")
    assert run(runner, tmp_path, "crawl", str(broken), "--out", "{tmp}/m.json").exit_code == EXIT_VALIDATION


def test_pipeline_writes_json_logs(runner, tmp_path):
    run(runner, tmp_path, "crawl", fixture("cinemup.json"), "--out", "{tmp}/model.json")
    lines = (tmp_path / "logs" / "application.log").read_text(encoding="utf-8").splitlines()
    records = [json.loads(line) for line in lines]
    finished = next(r for r in records if r["message"] == "CRAWL_FINISHED")
    assert (finished["event"], finished["nodes"], finished["edges"], finished["level"]) == ("CRAWL", 13, 31, "INFO")
    assert any(r["message"] == "ARTIFACT_WRITTEN" for r in records)


@pytest.fixture
def memory_pipeline(runner, tmp_path):
    spec = fixture("memory.json")
    run(runner, tmp_path, "crawl", spec, "--out", "{tmp}/model.json", "--no-record")
    run(runner, tmp_path, "submodel", "{tmp}/model.json", "--dest", "result:score!show-score", "--out", "{tmp}/sub.json")
    run(runner, tmp_path, "gen", "{tmp}/sub.json", "--out", "{tmp}/suite.json", "--keys", "{tmp}/suite.keys")
    result = run(runner, tmp_path, "mutate", spec, "{tmp}/suite.json", "--ops", "NEA", "--no-record",
                 "--mutants", "{tmp}/mutants.json", "--out", "{tmp}/report.json")
    assert result.exit_code == 0, result.output
    return spec


def test_keys_file_replay(runner, tmp_path, memory_pipeline):
    result = run(runner, tmp_path, "run", memory_pipeline, "--keys", "{tmp}/suite.keys", "--out", "{tmp}/replay.json")
    assert result.exit_code == 0, result.output
    replay = read_json(tmp_path / "replay.json")
    assert replay["summary"] == {"total": 2, "passed": 2, "failed": 0}
    assert replay["verdicts"][0]["observed"][-1] == "result:score!show-score"
    assert len(replay["verdicts"][1]["observed"]) == 5


def test_keys_replay_on_injected_mutant(runner, tmp_path, memory_pipeline):
    result = run(runner, tmp_path, "run", memory_pipeline, "--keys", "{tmp}/suite.keys",
                 "--mutant", "NEA:menu:play:0", "--mutants", "{tmp}/mutants.json", "--out", "{tmp}/replay.json")
    assert result.exit_code == EXIT_NOT_PASSED
    for verdict in read_json(tmp_path / "replay.json")["verdicts"]:
        assert (verdict["outcome"], verdict["failedStep"], verdict["faultIds"]) == (
            "fail-fault", 0, ["NEA:menu:play:0"])

    unknown = run(runner, tmp_path, "run", memory_pipeline, "{tmp}/suite.json",
                  "--mutant", "NEA:menu:ghost:0", "--mutants", "{tmp}/mutants.json", "--out", "{tmp}/v.json")
    assert unknown.exit_code == EXIT_VALIDATION


def test_run_needs_exactly_one_input(runner, tmp_path, memory_pipeline):
    assert run(runner, tmp_path, "run", memory_pipeline).exit_code == 2
    both = run(runner, tmp_path, "run", memory_pipeline, "{tmp}/suite.json", "--keys", "{tmp}/suite.keys")
    assert both.exit_code == 2


def test_campaign_on_reused_mutants(runner, tmp_path, memory_pipeline):
    result = run(runner, tmp_path, "mutate", memory_pipeline, "{tmp}/suite.json", "--reuse", "{tmp}/mutants.json",
                 "--no-record", "--out", "{tmp}/again.json")
    assert result.exit_code == 0, result.output
    again = read_json(tmp_path / "again.json")
    first = read_json(tmp_path / "report.json")
    assert (again["score"], again["killed"], again["alive"]) == (first["score"], first["killed"], first["alive"])

    mixed = run(runner, tmp_path, "mutate", memory_pipeline, "{tmp}/suite.json", "--reuse", "{tmp}/mutants.json",
                "--ops", "RAR")
    assert mixed.exit_code == 2
