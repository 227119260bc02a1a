import json

import pytest

from artifacts import (
    artifact_kind,
    check_lineage,
    content_hash,
    read_artifact,
    read_json,
    verify_artifacts,
    write_artifact,
)
from creeper.errors import ArtifactError, StaleArtifactError
from creeper.graph import MODEL_SCHEMA, save_model
from helpers import FIXTURES


@pytest.fixture
def chain(tmp_path, cinemup_model, cinemup_sub):
    spec = read_json(FIXTURES / "cinemup.json")
    model = write_artifact(tmp_path / "model.json", save_model(cinemup_model), upstream=spec)
    sub = write_artifact(tmp_path / "sub.json", save_model(cinemup_sub), upstream=model)
    return spec, model, sub


def test_hash_ignores_key_order_and_own_hash():
    assert content_hash({"a": 1, "b": [1, 2]}) == content_hash({"b": [1, 2], "a": 1})
    assert content_hash({"a": 1, "contentHash": "x"}) == content_hash({"a": 1})
    assert content_hash({"a": 1}) != content_hash({"a": 2})


def test_artifact_kinds(chain):
    spec, model, sub = chain
    assert [artifact_kind(d) for d in chain] == ["spec", "model", "submodel"]
    assert artifact_kind({"schema": "tvcreeper/suite"}) == "suite"
    assert artifact_kind({}) == "unknown"


def test_lineage_accumulates_along_the_chain(chain):
    spec, model, sub = chain
    assert model["lineage"] == {"spec": content_hash(spec)}
    assert sub["lineage"] == {"spec": content_hash(spec), "model": model["contentHash"]}
    assert sub["upstreamHash"] == model["contentHash"]
    check_lineage(sub, "spec", spec)
    check_lineage(sub, "model", model)


def test_changed_spec_makes_artifacts_stale(chain):
    spec, model, sub = chain
    edited = json.loads(json.dumps(spec))
    edited["screens"][0]["widgets"][0]["label"] = "SOON"
    with pytest.raises(StaleArtifactError):
        check_lineage(sub, "spec", edited)
    with pytest.raises(StaleArtifactError):
        check_lineage(model, "submodel", sub)


def test_read_artifact_checks_schema_and_hash(tmp_path, chain):
    assert read_artifact(tmp_path / "model.json", MODEL_SCHEMA)["start"] == "home:upcoming"
    with pytest.raises(ArtifactError):
        read_artifact(tmp_path / "model.json", "tvcreeper/suite")

    path = tmp_path / "model.json"
    document = json.loads(path.read_text(encoding="utf-8"))
    document["start"] = "home:top-tv"
    path.write_text(json.dumps(document), encoding="utf-8")
    with pytest.raises(ArtifactError, match="contentHash"):
        read_artifact(path, MODEL_SCHEMA)


def test_read_json_errors(tmp_path):
    with pytest.raises(ArtifactError):
        read_json(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ArtifactError, match="niepoprawny JSON"):
        read_json(broken)


def test_verify_consistent_chain(tmp_path, chain):
    paths = [FIXTURES / "cinemup.json", tmp_path / "model.json", tmp_path / "sub.json"]
    assert verify_artifacts(paths) == []


def test_verify_reports_swapped_upstream(tmp_path, chain, memory_sub):
    spec, model, sub = chain
    foreign = write_artifact(tmp_path / "model.json", dict(save_model(memory_sub), kind="mega"), upstream=spec)
    assert foreign["contentHash"] != model["contentHash"]
    issues = verify_artifacts([tmp_path / "model.json", tmp_path / "sub.json"])
    assert len(issues) == 1
    assert "lineage.model" in issues[0]


def test_verify_reports_edited_file(tmp_path, chain):
    path = tmp_path / "sub.json"
    document = json.loads(path.read_text(encoding="utf-8"))
    document["name"] = "Edited"
    path.write_text(json.dumps(document), encoding="utf-8")
    issues = verify_artifacts([path, tmp_path / "nope.json"])
    assert len(issues) == 2
    assert any("contentHash" in issue for issue in issues)


def test_artifact_without_content_hash_is_rejected(tmp_path, chain):
    path = tmp_path / "model.json"
    document = json.loads(path.read_text(encoding="utf-8"))
    document["edges"].pop()
    del document["contentHash"]
    path.write_text(json.dumps(document), encoding="utf-8")
    with pytest.raises(ArtifactError, match="brak pola contentHash"):
        read_artifact(path, MODEL_SCHEMA)
    issues = verify_artifacts([FIXTURES / "cinemup.json", path])
    assert issues == [f"{path}: brak pola contentHash"]
