"""
Artefakty potoku: zapis, odczyt i weryfikacja łańcucha skrótów.

Każdy plik pośredni (model, pod-model, zestaw testów, werdykty, mutanty, raport)
jest dokumentem JSON z wersjonowanym schematem. Przy zapisie do dokumentu trafiają:

- ``lineage`` - skróty wszystkich artefaktów nadrzędnych (spec -> model -> submodel -> suite),
- ``upstreamHash`` - skrót bezpośredniego poprzednika,
- ``contentHash`` - skrót samego dokumentu.

Skrót to SHA-256 z kanonicznego JSON (posortowane klucze, zwarte separatory)
dokumentu bez pola ``contentHash``. Zmiana dowolnego pliku w łańcuchu wykrywana
jest przez :func:`check_lineage` (przed każdym etapem) i :func:`verify_artifacts`
(komenda ``verify``).
"""

import hashlib
import json
import logging
from pathlib import Path

from creeper.errors import ArtifactError, StaleArtifactError

app_logger = logging.getLogger("application")

#: Obsługiwana wersja schematów artefaktów.
SUPPORTED_VERSION = 1


def canonical_json(document):
    return json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def content_hash(document):
    """SHA-256 kanonicznego JSON dokumentu z pominięciem jego własnego ``contentHash``."""
    body = {k: v for k, v in document.items() if k != "contentHash"}
    return hashlib.sha256(canonical_json(body).encode("utf-8")).hexdigest()


def artifact_kind(document):
    """
    Rodzaj artefaktu używany jako klucz w ``lineage``.

    Dokument bez schematu, ale z listą ekranów, to specyfikacja aplikacji.
    """
    schema = document.get("schema", "")
    if schema == "tvcreeper/model":
        return "submodel" if document.get("kind") == "sub" else "model"
    if schema.startswith("tvcreeper/"):
        return schema.split("/", 1)[1]
    if "screens" in document:
        return "spec"
    return "unknown"


def read_json(path):
    """
    Raises:
        ArtifactError: Brak pliku lub niepoprawny JSON.
    """
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ArtifactError("plik nie istnieje", str(path)) from None
    except json.JSONDecodeError as e:
        raise ArtifactError(f"niepoprawny JSON: {e.msg} (linia {e.lineno})", str(path)) from e


def dump_document(document):
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_artifact(path, document, upstream=None):
    """
    Zapisuje artefakt z nagłówkiem łańcucha skrótów.

    Args:
        path (str | Path): Plik docelowy.
        document (dict): Treść artefaktu (ze schematem i wersją).
        upstream (dict): Dokument poprzednika (specyfikacja lub artefakt), opcjonalnie.

    Returns:
        dict: Zapisany dokument (z ``lineage``, ``upstreamHash`` i ``contentHash``).
    """
    stamped = dict(document)
    if upstream is not None:
        upstream_hash = content_hash(upstream)
        lineage = dict(upstream.get("lineage", {}))
        lineage[artifact_kind(upstream)] = upstream_hash
        stamped["lineage"] = lineage
        stamped["upstreamHash"] = upstream_hash
    stamped["contentHash"] = content_hash(stamped)
    Path(path).write_text(dump_document(stamped), encoding="utf-8")
    app_logger.info("ARTIFACT_WRITTEN", extra={
        'event': 'ARTIFACT',
        'path': str(path),
        'kind': artifact_kind(stamped),
        'content_hash': stamped["contentHash"],
    })
    return stamped


def read_artifact(path, schema):
    """
    Wczytuje artefakt i sprawdza schemat, wersję oraz własny skrót.

    Raises:
        ArtifactError: Inny schemat, nieobsługiwana wersja, brak skrótu lub zmodyfikowana treść.
    """
    document = read_json(path)
    if not isinstance(document, dict) or document.get("schema") != schema:
        raise ArtifactError(f"oczekiwano artefaktu '{schema}'", str(path))
    if document.get("version") != SUPPORTED_VERSION:
        raise ArtifactError(f"nieobsługiwana wersja schematu: {document.get('version')}", str(path))
    if "contentHash" not in document:
        raise ArtifactError("brak pola contentHash", str(path))
    if document["contentHash"] != content_hash(document):
        raise ArtifactError("treść artefaktu zmieniła się po zapisie (contentHash)", str(path))
    return document


def check_lineage(document, kind, upstream):
    """
    Sprawdza, czy artefakt powstał z podanego poprzednika danego rodzaju.

    Raises:
        StaleArtifactError: Brak wpisu w ``lineage`` albo niezgodny skrót.
    """
    recorded = document.get("lineage", {}).get(kind)
    actual = content_hash(upstream)
    if recorded != actual:
        raise StaleArtifactError(
            f"artefakt nie pochodzi z bieżącego '{kind}' "
            f"(zapisano {recorded or 'brak'}, jest {actual[:12]}...)"
        )


def verify_artifacts(paths):
    """
    Weryfikuje zestaw plików potoku.

    Dla każdego artefaktu sprawdza obecność i zgodność własnego ``contentHash``, a dla każdego wpisu ``lineage``,
    którego rodzaj występuje wśród podanych plików, zgodność skrótu z którymś z nich.

    Returns:
        list[str]: Opisy wykrytych naruszeń (pusta lista = łańcuch spójny).
    """
    issues = []
    documents = {}
    for path in paths:
        try:
            documents[str(path)] = read_json(path)
        except ArtifactError as e:
            issues.append(str(e))

    provided = {}
    for path, document in documents.items():
        provided.setdefault(artifact_kind(document), set()).add(content_hash(document))
        stored = document.get("contentHash")
        if stored is None:
            # specyfikacja aplikacji jest jedynym plikiem bez własnego skrótu
            if artifact_kind(document) != "spec":
                issues.append(f"{path}: brak pola contentHash")
        elif stored != content_hash(document):
            issues.append(f"{path}: contentHash nie zgadza się z treścią")

    for path, document in documents.items():
        for kind, recorded in sorted(document.get("lineage", {}).items()):
            if kind in provided and recorded not in provided[kind]:
                issues.append(f"{path}: lineage.{kind} wskazuje inny plik niż podany")

    app_logger.info("ARTIFACTS_VERIFIED", extra={
        'event': 'ARTIFACT',
        'files': len(documents),
        'issues': len(issues),
    })
    return issues
