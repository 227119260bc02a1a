"""
Wykonywanie testów na symulatorze i werdykty.

Każdy test startuje od świeżej sesji. Po każdym klawiszu porównywany jest
obserwowany węzeł (węzeł akcji, gdy odpalono akcję końcową, w przeciwnym razie
para ekran/fokus) z węzłem oczekiwanym w spacerze.

**Pierwszeństwo werdyktów**

1. fatalny ``fault`` zatrzymuje test z werdyktem ``fail-fault``,
2. rozbieżność węzłów zatrzymuje test z werdyktem ``fail-mismatch``,
3. niefatalne ``fault`` zebrane do końca testu dają ``fail-fault``,
4. w pozostałych przypadkach ``pass``.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

from creeper.errors import CreeperError
from creeper.graph import action_node_id, state_node_id
from creeper.tvsim import EventKind, Key, init_session, press_key

app_logger = logging.getLogger("application")

VERDICTS_SCHEMA = "tvcreeper/verdicts"
VERDICTS_SCHEMA_VERSION = 1


class Outcome(str, Enum):
    PASS = "pass"
    FAIL_MISMATCH = "fail-mismatch"
    FAIL_FAULT = "fail-fault"
    #: Test nie dał się wykonać (np. brak punktu fokusu).
    ERROR = "error"


@dataclass(frozen=True)
class TraceStep:
    key: Key
    expected: str | None
    observed: str
    events: tuple


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    #: Indeks klawisza, na którym test się zatrzymał lub pierwszy raz wystąpił fault.
    failed_step: int | None = None
    fault_ids: frozenset = frozenset()
    trace: tuple[TraceStep, ...] = ()
    error: str | None = None

    @property
    def passed(self):
        return self.outcome is Outcome.PASS


def observe(state, events):
    """Obserwowany węzeł po naciśnięciu klawisza."""
    for event in reversed(events):
        if event.kind is EventKind.ACTION_FIRED:
            return action_node_id(state.screen, state.focus, event.detail)
    return state_node_id(state.screen, state.focus)


def _collect_faults(events):
    return [e.detail for e in events if e.kind is EventKind.FAULT]


def execute_test(spec, test, focus=None):
    """
    Wykonuje jeden test.

    Args:
        spec (AppSpec): Specyfikacja (oryginalna lub zmutowana).
        test (TestCase): Spacer z oczekiwanymi węzłami.
        focus (str): Punkt fokusu dla ekranu głównego bez ``initialFocus``.

    Raises:
        FocusRequiredError: Brak punktu fokusu.
    """
    state = init_session(spec, focus)
    if test.nodes and state_node_id(state.screen, state.focus) != test.nodes[0]:
        return Verdict(outcome=Outcome.FAIL_MISMATCH)

    faults = set()
    first_fault = None
    trace = []
    for i, key in enumerate(test.keys):
        state, events = press_key(spec, state, key)
        found = _collect_faults(events)
        if found and first_fault is None:
            first_fault = i
        faults.update(found)

        observed = observe(state, events)
        expected = test.nodes[i + 1]
        trace.append(TraceStep(key=Key(key), expected=expected, observed=observed, events=tuple(events)))
        if state.halted:
            return Verdict(Outcome.FAIL_FAULT, i, frozenset(faults), tuple(trace))
        if observed != expected:
            return Verdict(Outcome.FAIL_MISMATCH, i, frozenset(faults), tuple(trace))

    if faults:
        return Verdict(Outcome.FAIL_FAULT, first_fault, frozenset(faults), tuple(trace))
    return Verdict(Outcome.PASS, None, frozenset(), tuple(trace))


def _run_safely(spec, test, focus):
    try:
        return execute_test(spec, test, focus)
    except CreeperError as e:
        return Verdict(outcome=Outcome.ERROR, error=str(e))


def execute_suite(spec, suite, focus=None, jobs=1):
    """
    Wykonuje zestaw testów; werdykty w kolejności testów.

    Testy są niezależne (każdy ma własną sesję), więc przy ``jobs > 1`` wykonywane
    są w puli wątków. Błąd pojedynczego testu daje werdykt ``error`` i nie przerywa reszty.
    """
    if jobs > 1 and len(suite.tests) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            verdicts = list(pool.map(lambda t: _run_safely(spec, t, focus), suite.tests))
    else:
        verdicts = [_run_safely(spec, t, focus) for t in suite.tests]

    app_logger.debug("SUITE_EXECUTED", extra={
        'event': 'EXECUTE',
        'app': spec.name,
        'tests': len(verdicts),
        'passed': sum(v.passed for v in verdicts),
    })
    return verdicts


def execute_keys(spec, keys, focus=None):
    """
    Odtwarza surową sekwencję klawiszy (np. z pliku ``.keys``) bez oczekiwanych węzłów.

    Werdykt to ``pass`` albo ``fail-fault``; ślad zawiera obserwowane węzły.
    """
    state = init_session(spec, focus)
    faults = set()
    first_fault = None
    trace = []
    for i, key in enumerate(keys):
        state, events = press_key(spec, state, key)
        found = _collect_faults(events)
        if found and first_fault is None:
            first_fault = i
        faults.update(found)
        trace.append(TraceStep(key=Key(key), expected=None, observed=observe(state, events), events=tuple(events)))
        if state.halted:
            break
    if faults:
        return Verdict(Outcome.FAIL_FAULT, first_fault, frozenset(faults), tuple(trace))
    return Verdict(Outcome.PASS, trace=tuple(trace))


def verdicts_to_document(verdicts):
    return {
        "schema": VERDICTS_SCHEMA,
        "version": VERDICTS_SCHEMA_VERSION,
        "verdicts": [
            {
                "test": i,
                "outcome": v.outcome.value,
                "failedStep": v.failed_step,
                "faultIds": sorted(v.fault_ids),
                "observed": [step.observed for step in v.trace],
                "error": v.error,
            }
            for i, v in enumerate(verdicts)
        ],
        "summary": {
            "total": len(verdicts),
            "passed": sum(v.passed for v in verdicts),
            "failed": sum(not v.passed for v in verdicts),
        },
    }
