"""
Hierarchia wyjątków silnika.

Każdy wyjątek domenowy dziedziczy po :class:`CreeperError` i niesie kod wyjścia,
który warstwa CLI przekazuje do powłoki. Dzięki temu skrypty CI mogą rozróżnić
błąd walidacji, krawędzie nie do pokrycia i brak mutantów bez parsowania komunikatów.
"""

#: Sukces.
EXIT_OK = 0
#: Błąd walidacji wejścia, nieaktualny artefakt, nieznany cel.
EXIT_VALIDATION = 3
#: Pod-model zawiera krawędzie, których nie da się pokryć.
EXIT_UNCOVERABLE = 4
#: Co najmniej jeden werdykt inny niż ``pass``.
EXIT_NOT_PASSED = 5
#: Kampania bez mutantów (wynik niezdefiniowany).
EXIT_NO_MUTANTS = 6


class CreeperError(Exception):
    """Bazowy wyjątek silnika."""

    exit_code = 1


class ValidationError(CreeperError):
    """Dane wejściowe naruszają schemat lub niezmiennik."""

    exit_code = EXIT_VALIDATION

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class SpecError(ValidationError):
    """Błąd w specyfikacji aplikacji (app-spec)."""


class SpecSchemaError(SpecError):
    pass


class DanglingReferenceError(SpecError):
    pass


class DuplicateIdError(SpecError):
    pass


class FocusRequiredError(ValidationError):
    """Brak punktu fokusu: crawler nie ma od czego zacząć eksploracji."""


class CrawlConfigError(ValidationError):
    pass


class ModelError(ValidationError):
    """Dokument modelu narusza schemat lub niezmienniki multigrafu."""


class UnknownNodeError(ValidationError):
    pass


class DestinationsUnreachableError(ValidationError):
    pass


class EmptyModelError(ValidationError):
    """Pod-model bez krawędzi, w którym start nie jest węzłem końcowym."""


class ArtifactError(ValidationError):
    pass


class StaleArtifactError(ValidationError):
    """Skrót artefaktu nadrzędnego nie zgadza się z zapisanym w nagłówku."""


class UncoverableError(CreeperError):
    exit_code = EXIT_UNCOVERABLE


class StaleMutantError(CreeperError):
    """Miejsce mutacji nie istnieje już w specyfikacji."""


class NoMutantsError(CreeperError):
    exit_code = EXIT_NO_MUTANTS
