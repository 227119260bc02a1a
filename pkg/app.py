"""
Główny plik startowy aplikacji (Application Factory).

Zawiera funkcję `create_app`, która:
1. Wczytuje konfigurację ze zmiennych środowiskowych (``.env``).
2. Konfiguruje kanały logów JSON.
3. Inicjalizuje bazę historii (crawlingi, kampanie mutacyjne).
4. Rejestruje blueprint raportów i komendy CLI ``tvcreeper``.
"""

import logging
import os

from dotenv import load_dotenv
from flask import Flask, jsonify, request

from cli import register_commands
from extensions import db
from logger_config import setup_logging
from routes.reports import reports_bp

load_dotenv()


def _optional_int(value):
    return int(value) if value not in (None, "") else None


def create_app(test_config=None):
    """
    Implementacja wzorca Application Factory dla frameworka Flask.

    Zmienne środowiskowe:

    - ``TVCREEPER_DATABASE_URL`` - adres bazy SQLAlchemy (domyślnie SQLite w katalogu instancji),
    - ``TVCREEPER_LOG_DIR`` - katalog logów (domyślnie ``logs``),
    - ``TVCREEPER_JOBS`` - domyślna liczba wątków dla ``run``/``mutate``,
    - ``TVCREEPER_MAX_ACTIONS`` - domyślny limit akcji crawlera,
    - ``TVCREEPER_RECORD`` - zapis historii w bazie (``true``/``false``).

    Args:
        test_config (dict): Nadpisania konfiguracji (używane w testach).

    Returns:
        Flask: Skonfigurowana aplikacja.
    """
    app = Flask(__name__, instance_relative_config=True)

    default_db = "sqlite:///" + os.path.join(app.instance_path, "tvcreeper.db")
    app.config.from_mapping(
        SQLALCHEMY_DATABASE_URI=os.getenv('TVCREEPER_DATABASE_URL', default_db),
        SQLALCHEMY_TRACK_MODIFICATIONS=False,
        LOG_DIR=os.getenv('TVCREEPER_LOG_DIR', 'logs'),
        JOBS=int(os.getenv('TVCREEPER_JOBS', '1')),
        MAX_ACTIONS=_optional_int(os.getenv('TVCREEPER_MAX_ACTIONS')),
        RECORD_HISTORY=os.getenv('TVCREEPER_RECORD', 'true').lower() == 'true',
    )
    if test_config:
        app.config.update(test_config)

    if app.config['SQLALCHEMY_DATABASE_URI'] == default_db:
        os.makedirs(app.instance_path, exist_ok=True)

    setup_logging(app.config['LOG_DIR'])

    db.init_app(app)
    with app.app_context():
        import models  # noqa: F401  (rejestracja tabel)

        db.create_all()

    app.register_blueprint(reports_bp)
    register_commands(app)

    @app.errorhandler(404)
    def not_found(e):
        logging.getLogger("application").warning("RESOURCE_NOT_FOUND", extra={
            'event': 'HTTP',
            'url': request.url,
        })
        return jsonify(error="not-found", message="Nie znaleziono zasobu."), 404

    @app.errorhandler(500)
    def internal_server_error(e):
        logging.getLogger("error").critical("INTERNAL_SERVER_ERROR", exc_info=True, extra={
            'event': 'SYSTEM_FAILURE',
            'url': request.url,
        })
        return jsonify(error="internal", message="Błąd wewnętrzny."), 500

    logging.getLogger("application").info("APP_STARTUP", extra={
        'event': 'SYSTEM_BOOT',
        'database': app.config['SQLALCHEMY_DATABASE_URI'].split(':', 1)[0],
        'jobs': app.config['JOBS'],
    })
    return app


if __name__ == '__main__':
    create_app().run(host='127.0.0.1', port=5000)
