"""
Testowanie mutacyjne: dziewięć operatorów Smart TV, mutanty, kampanie i wynik.

Operatory uszkadzają argument kroku efektu widżetu (adres zasobu, id elementu,
nazwę atrybutu itd.). Wykonanie uszkodzonego kroku w symulatorze loguje zdarzenie
``fault`` z id mutanta - odpowiednik wyjątku rzuconego przez zmutowany program.

**Kanały zabicia mutanta**

- ``fault`` - któryś werdykt zawiera id mutanta,
- ``divergence`` - test przechodzący na oryginale kończy się ``fail-mismatch``.

W każdej rundzie aktywny jest dokładnie jeden mutant.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum

from creeper.errors import NoMutantsError, StaleMutantError, ValidationError
from creeper.executor import Outcome, execute_suite
from creeper.tvsim import EffectKind

campaign_logger = logging.getLogger("campaign")

MUTANTS_SCHEMA = "tvcreeper/mutants"
REPORT_SCHEMA = "tvcreeper/report"
SCHEMA_VERSION = 1


class MutationOperator(str, Enum):
    RAR = "RAR"
    NEE = "NEE"
    NEA = "NEA"
    NEF = "NEF"
    NVR = "NVR"
    WRC = "WRC"
    BAV = "BAV"
    IFC = "IFC"
    NXE = "NXE"

    @property
    def title(self):
        return OPERATOR_TITLES[self]


OPERATOR_TITLES = {
    MutationOperator.RAR: "Wrong Address Request",
    MutationOperator.NEE: "Non-existing Element",
    MutationOperator.NEA: "Non-existing Attribute",
    MutationOperator.NEF: "Non-existing Feature",
    MutationOperator.NVR: "Null Variable Replacement",
    MutationOperator.WRC: "Wrong Calculation",
    MutationOperator.BAV: "Badly Assigned Variable",
    MutationOperator.IFC: "Incorrect Function Call",
    MutationOperator.NXE: "Non-existent Event",
}

#: Rodzaje kroków, które może uszkodzić dany operator.
OPERATOR_SITES = {
    MutationOperator.RAR: frozenset({EffectKind.FETCH_RESOURCE}),
    MutationOperator.NEE: frozenset({EffectKind.LOOKUP_ELEMENT}),
    MutationOperator.NEA: frozenset({EffectKind.SET_ATTRIBUTE}),
    MutationOperator.NEF: frozenset({EffectKind.INVOKE_FEATURE}),
    MutationOperator.NVR: frozenset({EffectKind.ASSIGN_VARIABLE}),
    MutationOperator.WRC: frozenset({EffectKind.COMPUTE_INDEX}),
    MutationOperator.BAV: frozenset({EffectKind.ASSIGN_VARIABLE, EffectKind.COMPUTE_INDEX}),
    MutationOperator.IFC: frozenset({EffectKind.CALL_FUNCTION}),
    MutationOperator.NXE: frozenset({EffectKind.BIND_EVENT}),
}


def operators_for(kind):
    """Operatory zgodne z rodzajem kroku, w kolejności wyliczenia."""
    return tuple(op for op in MutationOperator if kind in OPERATOR_SITES[op])


def parse_operators(names):
    """
    Zamienia akronimy (np. ``"RAR,NEE"``) na operatory.

    Raises:
        ValueError: Nieznany akronim.
    """
    if isinstance(names, str):
        names = names.split(",")
    result = []
    for name in names:
        name = name.strip().upper()
        if name:
            result.append(MutationOperator(name))
    return result


def corrupt_argument(operator, argument):
    """Opis uszkodzonego argumentu (po jednym wariancie na operator)."""
    if operator is MutationOperator.RAR:
        return argument + "3/"
    if operator is MutationOperator.NEE:
        return argument[: (len(argument) + 1) // 2] if len(argument) > 1 else ""
    if operator is MutationOperator.NEA:
        return argument[:-1]
    if operator is MutationOperator.NEF:
        return argument[:-2]
    if operator is MutationOperator.NVR:
        return "null"
    if operator is MutationOperator.WRC:
        return f"{argument} * 6"
    if operator is MutationOperator.BAV:
        twin = argument.upper()
        return twin if twin != argument else argument.lower() + "_"
    if operator is MutationOperator.IFC:
        return argument[:-1]
    return ""


@dataclass(frozen=True)
class Site:
    screen: str
    widget: str
    step: int


@dataclass(frozen=True)
class Mutant:
    id: str
    operator: MutationOperator
    site: Site
    fatal: bool = False
    original: str = ""
    mutated: str = ""

    @property
    def description(self):
        return f"{self.original!r} -> {self.mutated!r}"


def enumerate_mutants(spec, operators=None, scope=None, fatal=False):
    """
    Wylicza mutanty dla każdej zgodnej pary (operator, krok).

    Args:
        spec (AppSpec): Specyfikacja aplikacji.
        operators (Iterable[MutationOperator]): Wybrane operatory; ``None`` = wszystkie.
        scope (SubModel): Gdy podany, tylko kroki widżetów obecnych w pod-modelu.
        fatal (bool): Wymusza fatalność wszystkich mutantów (krok z ``fatal`` jest fatalny zawsze).

    Returns:
        list[Mutant]: Kolejność: ekran, widżet, indeks kroku, operator.
    """
    chosen = set(operators) if operators else set(MutationOperator)
    allowed = None
    if scope is not None:
        allowed = {(n.screen, n.widget) for n in scope.nodes}

    mutants = []
    for screen in spec.screens:
        for widget in screen.widgets:
            if allowed is not None and (screen.id, widget.id) not in allowed:
                continue
            for index, step in enumerate(widget.effects):
                for op in operators_for(step.kind):
                    if op not in chosen:
                        continue
                    mutants.append(Mutant(
                        id=f"{op.value}:{screen.id}:{widget.id}:{index}",
                        operator=op,
                        site=Site(screen.id, widget.id, index),
                        fatal=fatal or step.fatal,
                        original=step.argument,
                        mutated=corrupt_argument(op, step.argument),
                    ))
    return mutants


def apply_mutant(spec, mutant):
    """
    Zwraca nową specyfikację z krokiem oznaczonym przez mutanta (oryginał bez zmian).

    Raises:
        StaleMutantError: Miejsce mutacji nie istnieje lub nie pasuje do operatora.
    """
    site = mutant.site
    screen = spec.screen(site.screen)
    widget = screen.widget(site.widget) if screen is not None else None
    if widget is None or not 0 <= site.step < len(widget.effects):
        raise StaleMutantError(f"mutant '{mutant.id}': miejsce mutacji nie istnieje")
    step = widget.effects[site.step]
    if step.kind not in OPERATOR_SITES[mutant.operator] or step.argument != mutant.original:
        raise StaleMutantError(f"mutant '{mutant.id}': krok nie pasuje do operatora lub argumentu")

    effects = list(widget.effects)
    effects[site.step] = replace(step, mutant_id=mutant.id, fatal=mutant.fatal)
    new_widget = replace(widget, effects=tuple(effects))
    new_screen = replace(screen, widgets=tuple(new_widget if w.id == widget.id else w for w in screen.widgets))
    return replace(spec, screens=tuple(new_screen if s.id == screen.id else s for s in spec.screens))


def mutation_score(killed, alive):
    """
    Wynik mutacyjny w procentach, zaokrąglony połówkowo w górę do jednego miejsca.

    Raises:
        NoMutantsError: ``killed + alive == 0``.
    """
    total = killed + alive
    if total == 0:
        raise NoMutantsError("brak mutantów - wynik niezdefiniowany")
    value = Decimal(100 * killed) / Decimal(total)
    return float(value.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class MutationReport:
    mutants: tuple[Mutant, ...]
    #: Indeks testu -> id mutantów zabitych przez ten test.
    per_test: dict
    killed: frozenset
    alive: frozenset
    #: Indeks testu -> mutanty, które ten test zabił jako pierwszy (bez powtórzeń).
    first_kills: dict = field(default_factory=dict)
    #: Id mutanta -> kanał zabicia (``fault`` / ``divergence``).
    channels: dict = field(default_factory=dict)
    #: Id mutanta -> błąd, przez który nie dało się go ocenić.
    errors: dict = field(default_factory=dict)

    @property
    def score(self):
        """Wynik mutacyjny albo ``None``, gdy kampania nie miała mutantów."""
        if not self.mutants:
            return None
        return mutation_score(len(self.killed), len(self.alive))

    @property
    def status(self):
        return "ok" if self.mutants else "no-mutants"

    @property
    def operator_counts(self):
        counts = {}
        for m in self.mutants:
            counts[m.operator] = counts.get(m.operator, 0) + 1
        return {op: counts[op] for op in MutationOperator if op in counts}


def _evaluate(spec, suite, mutant, baseline, focus):
    """Jedna runda kampanii: (indeksy testów zabijających -> kanał, błąd)."""
    try:
        mutated = apply_mutant(spec, mutant)
    except StaleMutantError as e:
        return {}, str(e)
    killers = {}
    for i, verdict in enumerate(execute_suite(mutated, suite, focus)):
        if mutant.id in verdict.fault_ids:
            killers[i] = "fault"
        elif baseline[i].passed and verdict.outcome is Outcome.FAIL_MISMATCH:
            killers[i] = "divergence"
    return killers, None


def run_campaign(spec, suite, mutants, focus=None, jobs=1):
    """
    Kampania mutacyjna: każdy mutant osobno, pełny zestaw testów, porównanie z oryginałem.

    Args:
        spec (AppSpec): Oryginalna specyfikacja.
        suite (TestSuite): Zestaw wygenerowany z modelu tej specyfikacji.
        mutants (list[Mutant]): Mutanty wyliczone z tej specyfikacji.
        focus (str): Punkt fokusu.
        jobs (int): Liczba wątków oceniających mutanty równolegle.

    Returns:
        MutationReport: Zabite/żywe mutanty, zabicia per test i kanały.
    """
    baseline = execute_suite(spec, suite, focus)

    def evaluate(mutant):
        return _evaluate(spec, suite, mutant, baseline, focus)

    if jobs > 1 and len(mutants) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(evaluate, mutants))
    else:
        outcomes = [evaluate(m) for m in mutants]

    per_test = {i: set() for i in range(len(suite.tests))}
    first_kills = {i: set() for i in range(len(suite.tests))}
    channels, errors = {}, {}
    killed, alive = set(), set()
    for mutant, (killers, error) in zip(mutants, outcomes):
        if error is not None:
            errors[mutant.id] = error
        if killers:
            killed.add(mutant.id)
            for i in killers:
                per_test[i].add(mutant.id)
            first_kills[min(killers)].add(mutant.id)
            channels[mutant.id] = "fault" if "fault" in killers.values() else "divergence"
            campaign_logger.info("MUTANT_KILLED", extra={
                'event': 'MUTANT',
                'mutant': mutant.id,
                'channel': channels[mutant.id],
                'tests': sorted(killers),
            })
        else:
            alive.add(mutant.id)
            campaign_logger.info("MUTANT_ALIVE", extra={
                'event': 'MUTANT',
                'mutant': mutant.id,
                'error': error,
            })

    report = MutationReport(
        mutants=tuple(mutants),
        per_test={i: frozenset(s) for i, s in per_test.items()},
        killed=frozenset(killed),
        alive=frozenset(alive),
        first_kills={i: frozenset(s) for i, s in first_kills.items()},
        channels=channels,
        errors=errors,
    )
    campaign_logger.info("CAMPAIGN_FINISHED", extra={
        'event': 'CAMPAIGN',
        'app': spec.name,
        'mutants': len(mutants),
        'killed': len(killed),
        'alive': len(alive),
        'score': report.score,
    })
    return report


def mutants_to_document(mutants):
    counts = {}
    for m in mutants:
        counts[m.operator.value] = counts.get(m.operator.value, 0) + 1
    return {
        "schema": MUTANTS_SCHEMA,
        "version": SCHEMA_VERSION,
        "mutants": [
            {
                "id": m.id,
                "operator": m.operator.value,
                "site": {"screen": m.site.screen, "widget": m.site.widget, "step": m.site.step},
                "fatal": m.fatal,
                "original": m.original,
                "mutated": m.mutated,
            }
            for m in mutants
        ],
        "operatorCounts": counts,
    }


def mutants_from_document(document):
    """
    Odtwarza listę mutantów zapisaną przez :func:`mutants_to_document`.

    Raises:
        ValidationError: Dokument nie ma wymaganych pól lub zawiera nieznany operator.
    """
    try:
        return [
            Mutant(
                id=raw["id"],
                operator=MutationOperator(raw["operator"]),
                site=Site(raw["site"]["screen"], raw["site"]["widget"], raw["site"]["step"]),
                fatal=raw.get("fatal", False),
                original=raw.get("original", ""),
                mutated=raw.get("mutated", ""),
            )
            for raw in document["mutants"]
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"niepoprawny dokument mutantów: {e!r}") from e


def report_to_document(report, app_name=""):
    return {
        "schema": REPORT_SCHEMA,
        "version": SCHEMA_VERSION,
        "app": app_name,
        "status": report.status,
        "total": len(report.mutants),
        "killed": sorted(report.killed),
        "alive": sorted(report.alive),
        "score": report.score,
        "perTest": [
            {
                "test": i,
                "killed": sorted(report.per_test[i]),
                "firstKills": len(report.first_kills.get(i, ())),
            }
            for i in sorted(report.per_test)
        ],
        "channels": dict(sorted(report.channels.items())),
        "errors": dict(sorted(report.errors.items())),
        "operatorCounts": {op.value: n for op, n in report.operator_counts.items()},
    }


def render_table(headers, rows):
    """Prosta tabela tekstowa z kolumnami wyrównanymi do najszerszej komórki."""
    cells = [[str(h) for h in headers]] + [["" if c is None else str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = [" | ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "-+-".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def path_rows(app_name, first_kills, killed, alive, score):
    """Wiersze tabeli wyników per ścieżka; sumy tylko w pierwszym wierszu."""
    rows = []
    for position, count in enumerate(first_kills):
        if position == 0:
            rows.append([app_name, f"Path {position + 1}", count, killed, alive,
                         "n/a" if score is None else f"{score:.1f}"])
        else:
            rows.append(["", f"Path {position + 1}", count, "", "", ""])
    if not rows:
        rows.append([app_name, "-", 0, killed, alive, "n/a" if score is None else f"{score:.1f}"])
    return rows


PATH_HEADERS = ("Case Study", "Generated Path", "Mut. Killed", "Total Mut. Killed", "Mut. Alive", "Total Mut. Score %")
OPERATOR_HEADERS = ("Case Study", "Operator", "Name", "Mutants")


def format_report(report, app_name=""):
    """Tabela wyników kampanii (zabicia per ścieżka) i liczności mutantów per operator."""
    first_kills = [len(report.first_kills.get(i, ())) for i in sorted(report.per_test)]
    text = render_table(PATH_HEADERS, path_rows(app_name, first_kills, len(report.killed),
                                                len(report.alive), report.score))
    operator_rows = [[app_name if i == 0 else "", op.value, op.title, n]
                     for i, (op, n) in enumerate(report.operator_counts.items())]
    operator_rows.append(["", "", "Total Number", len(report.mutants)])
    return text + "\n" + render_table(OPERATOR_HEADERS, operator_rows)
