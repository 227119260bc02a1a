"""
Inicjalizacja rozszerzeń Flask.

Instancje rozszerzeń tworzone są tutaj, konfigurowane w ``app.py`` i importowane
w modelach oraz trasach (bez cyklicznych importów).
"""

from flask_sqlalchemy import SQLAlchemy

#: Główny obiekt bazy danych SQLAlchemy (historia crawlingów i kampanii).
db = SQLAlchemy()
