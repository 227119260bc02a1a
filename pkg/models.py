"""
Modele bazy danych (ORM).

Historia uruchomień potoku: statystyki crawlingów (efektywność budowy modelu)
oraz wyniki kampanii mutacyjnych z podziałem na ścieżki i operatory. Pliki
artefaktów pozostają źródłem prawdy; baza służy raportom zbiorczym
(``tvcreeper report`` i blueprint ``reports``).
"""

from datetime import datetime, timezone

from extensions import db


def _utcnow():
    return datetime.now(timezone.utc)


class CrawlRecord(db.Model):
    """Jeden przebieg crawlera."""

    __tablename__ = 'crawl'

    id_crawl = db.Column(db.Integer, primary_key=True)
    #: Nazwa aplikacji ze specyfikacji
    app_name = db.Column(db.String(120), nullable=False)
    #: SHA-256 kanonicznego JSON specyfikacji
    spec_hash = db.Column(db.String(64), nullable=False)
    nodes = db.Column(db.Integer, nullable=False)
    edges = db.Column(db.Integer, nullable=False)
    #: Liczba naciśnięć sondujących
    actions_used = db.Column(db.Integer, nullable=False)
    #: Przerwany limitem akcji
    truncated = db.Column(db.Boolean, default=False, nullable=False)
    elapsed_ms = db.Column(db.Integer, default=0, nullable=False)
    created_at = db.Column(db.DateTime, default=_utcnow, nullable=False)

    @classmethod
    def from_result(cls, result, spec_hash):
        return cls(
            app_name=result.model.name,
            spec_hash=spec_hash,
            nodes=len(result.model.nodes),
            edges=len(result.model.edges),
            actions_used=result.actions_used,
            truncated=result.truncated,
            elapsed_ms=result.elapsed_ms,
        )

    def to_dict(self):
        return {
            'id': self.id_crawl,
            'app': self.app_name,
            'specHash': self.spec_hash,
            'nodes': self.nodes,
            'edges': self.edges,
            'actionsUsed': self.actions_used,
            'truncated': self.truncated,
            'elapsedMs': self.elapsed_ms,
            'createdAt': self.created_at.isoformat(),
        }


class CampaignRecord(db.Model):
    """
    Kampania mutacyjna.

    Wynik ``score`` jest pusty (NULL) dla kampanii bez mutantów.
    """

    __tablename__ = 'campaign'

    id_campaign = db.Column(db.Integer, primary_key=True)
    app_name = db.Column(db.String(120), nullable=False)
    #: Skrót zestawu testów, na którym prowadzono kampanię
    suite_hash = db.Column(db.String(64), nullable=False)
    mutants = db.Column(db.Integer, nullable=False)
    killed = db.Column(db.Integer, nullable=False)
    alive = db.Column(db.Integer, nullable=False)
    score = db.Column(db.Float, nullable=True)
    created_at = db.Column(db.DateTime, default=_utcnow, nullable=False)

    paths = db.relationship('CampaignPath', backref='campaign', cascade='all, delete-orphan',
                            order_by='CampaignPath.path_index')
    operators = db.relationship('CampaignOperator', backref='campaign', cascade='all, delete-orphan',
                                order_by='CampaignOperator.id_operator')

    @classmethod
    def from_report(cls, report, app_name, suite_hash):
        """Buduje rekord kampanii wraz z wierszami ścieżek i operatorów."""
        record = cls(
            app_name=app_name,
            suite_hash=suite_hash,
            mutants=len(report.mutants),
            killed=len(report.killed),
            alive=len(report.alive),
            score=report.score,
        )
        for index in sorted(report.per_test):
            record.paths.append(CampaignPath(
                path_index=index,
                killed_new=len(report.first_kills.get(index, ())),
                killed_total=len(report.per_test[index]),
            ))
        for operator, count in report.operator_counts.items():
            record.operators.append(CampaignOperator(operator=operator.value, mutants=count))
        return record

    def to_dict(self, detail=False):
        data = {
            'id': self.id_campaign,
            'app': self.app_name,
            'suiteHash': self.suite_hash,
            'mutants': self.mutants,
            'killed': self.killed,
            'alive': self.alive,
            'score': self.score,
            'status': 'ok' if self.mutants else 'no-mutants',
            'createdAt': self.created_at.isoformat(),
        }
        if detail:
            data['paths'] = [
                {'path': p.path_index + 1, 'killedNew': p.killed_new, 'killedTotal': p.killed_total}
                for p in self.paths
            ]
            data['operators'] = {o.operator: o.mutants for o in self.operators}
        return data


class CampaignPath(db.Model):
    """Zabicia przypisane jednej wygenerowanej ścieżce (testowi)."""

    __tablename__ = 'campaign_path'

    id_path = db.Column(db.Integer, primary_key=True)
    id_campaign = db.Column(db.Integer, db.ForeignKey('campaign.id_campaign'), nullable=False)
    #: Indeks testu w zestawie (od 0)
    path_index = db.Column(db.Integer, nullable=False)
    #: Mutanty zabite po raz pierwszy przez tę ścieżkę (bez powtórzeń)
    killed_new = db.Column(db.Integer, nullable=False)
    #: Wszystkie mutanty zabite przez tę ścieżkę
    killed_total = db.Column(db.Integer, nullable=False)


class CampaignOperator(db.Model):
    __tablename__ = 'campaign_operator'

    id_operator = db.Column(db.Integer, primary_key=True)
    id_campaign = db.Column(db.Integer, db.ForeignKey('campaign.id_campaign'), nullable=False)
    #: Akronim operatora (RAR, NEE, ...)
    operator = db.Column(db.String(3), nullable=False)
    mutants = db.Column(db.Integer, nullable=False)
