import pytest

from app import create_app
from creeper.crawler import crawl
from creeper.graph import extract_sub_model
from extensions import db
from helpers import PLAY_TRAILER, SHOW_SCORE, load_fixture


@pytest.fixture
def grid_spec():
    return load_fixture("grid.json")


@pytest.fixture
def cinemup_spec():
    return load_fixture("cinemup.json")


@pytest.fixture
def memory_spec():
    return load_fixture("memory.json")


@pytest.fixture
def cinemup_model(cinemup_spec):
    return crawl(cinemup_spec).model


@pytest.fixture
def cinemup_sub(cinemup_model):
    return extract_sub_model(cinemup_model, [PLAY_TRAILER])


@pytest.fixture
def memory_sub(memory_spec):
    return extract_sub_model(crawl(memory_spec).model, [SHOW_SCORE])


@pytest.fixture
def app(tmp_path):
    app = create_app({
        "TESTING": True,
        "SQLALCHEMY_DATABASE_URI": "sqlite:///:memory:",
        "LOG_DIR": str(tmp_path / "logs"),
        "JOBS": 1,
        "MAX_ACTIONS": None,
        "RECORD_HISTORY": True,
    })
    yield app
    with app.app_context():
        db.session.remove()
        db.drop_all()


@pytest.fixture
def client(app):
    return app.test_client()


@pytest.fixture
def runner(app):
    return app.test_cli_runner()
