"""
Konfiguracja logowania strukturyzowanego (JSON).

Każdy etap potoku (crawling, pod-model, generowanie, wykonanie, mutacje) zapisuje
zdarzenia jako linie JSON, gotowe do analizy narzędziami typu ``jq``.

Kanały:

- ``application.log`` - logger ``application`` (etapy potoku),
- ``campaign.log`` - logger ``campaign`` (kampanie mutacyjne, werdykt każdego mutanta),
- ``error.log`` - logger główny od poziomu ERROR (awarie z ``exc_info``).
"""

import logging
import os
from datetime import datetime, timezone

from pythonjsonlogger import jsonlogger

#: Kanał -> (plik, poziom).
CHANNELS = {
    "application": ("application.log", logging.INFO),
    "campaign": ("campaign.log", logging.INFO),
}


class CreeperJsonFormatter(jsonlogger.JsonFormatter):
    """Formatter JSON uzupełniający wpis o znacznik czasu (UTC) i poziom."""

    def add_fields(self, log_record, record, message_dict):
        super().add_fields(log_record, record, message_dict)
        log_record['timestamp'] = datetime.now(timezone.utc).isoformat()
        log_record['level'] = record.levelname


class ChannelFileHandler(logging.FileHandler):
    """Handler zakładany przez :func:`setup_logging` (rozpoznawany przy ponownej konfiguracji)."""


def _replace_handler(logger, handler):
    for old in [h for h in logger.handlers if isinstance(h, ChannelFileHandler)]:
        logger.removeHandler(old)
        old.close()
    logger.addHandler(handler)


def setup_logging(log_dir="logs"):
    """
    Inicjalizuje kanały logów w katalogu ``log_dir``.

    Funkcja jest idempotentna: ponowne wywołanie (np. z kolejnego ``create_app``
    w testach) podmienia handlery zamiast je dublować.

    Args:
        log_dir (str): Katalog plików logów (tworzony w razie potrzeby).
    """
    os.makedirs(log_dir, exist_ok=True)
    formatter = CreeperJsonFormatter('%(timestamp)s %(level)s %(name)s %(message)s')

    def create_handler(filename, level):
        handler = ChannelFileHandler(os.path.join(log_dir, filename), encoding="utf-8")
        handler.setFormatter(formatter)
        handler.setLevel(level)
        return handler

    for name, (filename, level) in CHANNELS.items():
        logger = logging.getLogger(name)
        logger.setLevel(level)
        logger.propagate = False
        _replace_handler(logger, create_handler(filename, level))

    root_logger = logging.getLogger()
    if root_logger.level == logging.NOTSET or root_logger.level > logging.INFO:
        root_logger.setLevel(logging.INFO)
    _replace_handler(root_logger, create_handler("error.log", logging.ERROR))
