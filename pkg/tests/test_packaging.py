from pathlib import Path

ROOT = Path(__file__).parent.parent


def test_pytest_is_only_a_test_extra():
    runtime = [line.strip() for line in (ROOT / "requirements.txt").read_text(encoding="utf-8").splitlines()]
    assert "pytest" not in runtime
    assert "jsonschema" in runtime
    assert 'test = ["pytest"]' in (ROOT / "pyproject.toml").read_text(encoding="utf-8")


def test_app_spec_schema_is_package_data():
    assert (ROOT / "creeper" / "app_spec.schema.json").is_file()
    assert 'creeper = ["app_spec.schema.json"]' in (ROOT / "pyproject.toml").read_text(encoding="utf-8")
