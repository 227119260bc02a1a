"""
Raporty historii kampanii mutacyjnych i crawlingów (tylko odczyt).

**Endpointy**

- ``GET /reports/campaigns`` - lista kampanii (wiersze w stylu tabeli wyników),
- ``GET /reports/campaigns/<id>`` - kampania z zabiciami per ścieżka i liczbą mutantów per operator,
- ``GET /reports/campaigns/export`` - eksport CSV wierszy ścieżek,
- ``GET /reports/crawls`` - statystyki crawlingów.

Przykład logu eksportu (JSON)::

    {
        "timestamp": "2026-10-18T09:12:44.120+00:00",
        "level": "INFO",
        "message": "EXPORT_CAMPAIGNS",
        "event": "DATA_EXPORT",
        "rows": 6
    }
"""

import csv
import io
import logging

from flask import Blueprint, Response, abort, jsonify, request
from sqlalchemy import text

from extensions import db
from models import CampaignRecord, CrawlRecord

reports_bp = Blueprint('reports', __name__, url_prefix='/reports')
app_logger = logging.getLogger("application")


@reports_bp.route('/campaigns')
def list_campaigns():
    app_logger.info("ACCESS_CAMPAIGNS", extra={'event': 'REPORT_VIEW', 'src_ip': request.remote_addr})
    campaigns = CampaignRecord.query.order_by(CampaignRecord.id_campaign).all()
    return jsonify([c.to_dict() for c in campaigns])


@reports_bp.route('/campaigns/<int:campaign_id>')
def campaign_detail(campaign_id):
    campaign = db.session.get(CampaignRecord, campaign_id)
    if campaign is None:
        abort(404)
    app_logger.info("ACCESS_CAMPAIGN", extra={'event': 'REPORT_VIEW', 'campaign': campaign_id})
    return jsonify(campaign.to_dict(detail=True))


@reports_bp.route('/campaigns/export')
def export_campaigns_csv():
    """
    Eksport wyników kampanii do CSV.

    Jeden wiersz na wygenerowaną ścieżkę: mutanty zabite po raz pierwszy przez ścieżkę
    oraz sumy kampanii (zabite, żywe, wynik). Wynik zapisywany z przecinkiem dziesiętnym.
    """
    rows = db.session.execute(text("""
        SELECT c.id_campaign, c.app_name, c.killed, c.alive, c.score,
               p.path_index, p.killed_new, p.killed_total
        FROM campaign c
                 LEFT JOIN campaign_path p ON p.id_campaign = c.id_campaign
        ORDER BY c.id_campaign, p.path_index
    """)).fetchall()

    app_logger.info("EXPORT_CAMPAIGNS", extra={'event': 'DATA_EXPORT', 'rows': len(rows)})

    output = io.StringIO()
    writer = csv.writer(output, delimiter=';')
    writer.writerow(['Kampania', 'Aplikacja', 'Ścieżka', 'Zabite (nowe)', 'Zabite (wszystkie)',
                     'Zabite razem', 'Żywe', 'Wynik %'])
    for r in rows:
        score = "n/a" if r.score is None else f"{r.score:.1f}".replace('.', ',')
        path = "-" if r.path_index is None else f"Path {r.path_index + 1}"
        writer.writerow([r.id_campaign, r.app_name, path, r.killed_new or 0, r.killed_total or 0,
                         r.killed, r.alive, score])

    return generate_csv_response(output, "kampanie_mutacyjne.csv")


@reports_bp.route('/crawls')
def list_crawls():
    crawls = CrawlRecord.query.order_by(CrawlRecord.id_crawl).all()
    return jsonify([c.to_dict() for c in crawls])


def generate_csv_response(output, filename):
    """
    Odpowiedź HTTP z plikiem CSV.

    Kodowanie UTF-8-SIG (BOM) pozwala arkuszom kalkulacyjnym poprawnie odczytać polskie znaki.
    """
    output.seek(0)
    return Response(
        output.getvalue().encode('utf-8-sig'),
        mimetype="text/csv",
        headers={"Content-Disposition": f"attachment;filename={filename}"}
    )
