"""
Generowanie przypadków testowych z kryterium All Edge Coverage.

**Algorytm**

1. Zbiór COVER zawiera trójkę (głowa, krawędź, ogon) dla każdej krawędzi pod-modelu.
2. Dla każdego elementu budowany jest kandydat: najkrótsza ścieżka ze startu do głowy,
   sama krawędź i najkrótsza ścieżka z ogona do najbliższego węzła końcowego.
   Remisy rozstrzyga leksykograficznie najmniejszy ciąg id węzłów.
3. Zachłannie wybierany jest kandydat pokrywający najwięcej jeszcze niepokrytych
   elementów; pokryte elementy są usuwane z COVER, aż zbiór będzie pusty.

Elementy, dla których spacer nie istnieje, są raportowane jako nie do pokrycia
i pomijane.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import networkx as nx

from creeper.errors import EmptyModelError, UncoverableError, ValidationError
from creeper.tvsim import Key

app_logger = logging.getLogger("application")

SUITE_SCHEMA = "tvcreeper/suite"
SUITE_SCHEMA_VERSION = 1


@dataclass(frozen=True, order=True)
class CoverElement:
    head: str
    edge: str
    tail: str


@dataclass(frozen=True)
class TestCase:
    """Spacer po pod-modelu: węzły, krawędzie i odpowiadające im klawisze."""

    __test__ = False

    nodes: tuple[str, ...]
    edges: tuple[str, ...]
    keys: tuple[Key, ...]


@dataclass(frozen=True)
class TestSuite:
    __test__ = False

    tests: tuple[TestCase, ...]
    #: Id krawędzi pokrytych przez zestaw.
    covered_edges: frozenset
    #: Id krawędzi, których nie da się pokryć spacerem start -> węzeł końcowy.
    uncoverable: frozenset = frozenset()
    start: str = ""


def build_cover(model):
    return {CoverElement(head=e.source, edge=e.id, tail=e.target) for e in model.edges}


class _Walker:
    """Najkrótsze spacery po modelu z deterministycznym rozstrzyganiem remisów."""

    def __init__(self, model):
        self.model = model
        self._to_head = {}

    @cached_property
    def _reverse(self):
        return self.model.graph.reverse(copy=False)

    def _distances_to(self, targets):
        if not targets:
            return {}
        return nx.multi_source_dijkstra_path_length(self._reverse, set(targets))

    @cached_property
    def to_end(self):
        return self._distances_to(self.model.end_nodes)

    def to_head(self, head):
        if head not in self._to_head:
            self._to_head[head] = self._distances_to({head})
        return self._to_head[head]

    def _descend(self, source, distances):
        """Leksykograficznie najmniejsza najkrótsza ścieżka do zbioru o podanych odległościach."""
        nodes, edges = [source], []
        current = source
        while distances[current] > 0:
            step = min(
                (e for e in self.model.outgoing[current] if distances.get(e.target) == distances[current] - 1),
                key=lambda e: (e.target, e.id),
            )
            nodes.append(step.target)
            edges.append(step.id)
            current = step.target
        return nodes, edges

    def walk(self, element):
        to_head = self.to_head(element.head)
        if self.model.start not in to_head:
            raise UncoverableError(f"głowa '{element.head}' nie jest osiągalna ze startu")
        if element.tail not in self.to_end:
            raise UncoverableError(f"z ogona '{element.tail}' nie da się dojść do węzła końcowego")
        prefix_nodes, prefix_edges = self._descend(self.model.start, to_head)
        suffix_nodes, suffix_edges = self._descend(element.tail, self.to_end)
        edges = tuple(prefix_edges + [element.edge] + suffix_edges)
        return TestCase(
            nodes=tuple(prefix_nodes + suffix_nodes),
            edges=edges,
            keys=tuple(self.model.edge(e).key for e in edges),
        )


def candidate_walk(model, element):
    """
    Kandydat dla elementu COVER: start -> głowa, krawędź, ogon -> najbliższy węzeł końcowy.

    Raises:
        UncoverableError: Głowa nieosiągalna ze startu albo z ogona nie da się dojść do końca.
    """
    return _Walker(model).walk(element)


def generate_tests(model):
    """
    Buduje zestaw testów pokrywający wszystkie krawędzie pod-modelu.

    Wybór zachłanny: najwięcej nowo pokrytych elementów, potem krótszy spacer,
    potem leksykograficznie mniejszy ciąg węzłów (i krawędzi).

    Args:
        model (SubModel): Pod-model (lub mega-model z węzłami końcowymi).

    Returns:
        TestSuite: Testy w kolejności wyboru; krawędzie nie do pokrycia w ``uncoverable``.

    Raises:
        EmptyModelError: Model bez krawędzi, w którym start nie jest węzłem końcowym.
    """
    if not model.edges:
        if model.start in model.end_nodes:
            return TestSuite(tests=(), covered_edges=frozenset(), start=model.start)
        raise EmptyModelError("pod-model nie ma krawędzi, a start nie jest węzłem końcowym")

    walker = _Walker(model)
    candidates = []
    uncoverable = set()
    for element in sorted(build_cover(model)):
        try:
            walk = walker.walk(element)
        except UncoverableError:
            uncoverable.add(element.edge)
            continue
        if walk not in candidates:
            candidates.append(walk)

    coverable = frozenset(e.id for e in model.edges) - uncoverable
    remaining = set(coverable)
    tests = []
    while remaining:
        best = min(
            candidates,
            key=lambda t: (-len(remaining.intersection(t.edges)), len(t.edges), t.nodes, t.edges),
        )
        tests.append(best)
        candidates.remove(best)
        remaining -= set(best.edges)

    if uncoverable:
        app_logger.warning("UNCOVERABLE_EDGES", extra={
            'event': 'TESTGEN',
            'app': model.name,
            'edges': sorted(uncoverable),
        })
    app_logger.info("SUITE_GENERATED", extra={
        'event': 'TESTGEN',
        'app': model.name,
        'tests': len(tests),
        'covered_edges': len(coverable),
        'total_keys': sum(len(t.keys) for t in tests),
    })
    return TestSuite(tests=tuple(tests), covered_edges=coverable,
                     uncoverable=frozenset(uncoverable), start=model.start)


def suite_to_document(suite, focus=None):
    return {
        "schema": SUITE_SCHEMA,
        "version": SUITE_SCHEMA_VERSION,
        "start": suite.start,
        "focus": focus,
        "tests": [
            {"nodes": list(t.nodes), "edges": list(t.edges), "keys": [k.value for k in t.keys]}
            for t in suite.tests
        ],
        "coveredEdges": sorted(suite.covered_edges),
        "uncoverable": sorted(suite.uncoverable),
    }


def suite_from_document(document):
    """
    Raises:
        ValidationError: Dokument nie jest zestawem testów albo jest uszkodzony.
    """
    if not isinstance(document, dict) or document.get("schema") != SUITE_SCHEMA:
        raise ValidationError(f"dokument nie jest zestawem testów ({SUITE_SCHEMA})")
    if document.get("version") != SUITE_SCHEMA_VERSION:
        raise ValidationError(f"nieobsługiwana wersja schematu zestawu: {document.get('version')}")
    try:
        tests = []
        for i, raw in enumerate(document["tests"]):
            test = TestCase(
                nodes=tuple(raw["nodes"]),
                edges=tuple(raw["edges"]),
                keys=tuple(Key(k) for k in raw["keys"]),
            )
            if len(test.nodes) != len(test.keys) + 1 or len(test.edges) != len(test.keys):
                raise ValidationError("długości węzłów, krawędzi i klawiszy są niespójne", f"tests[{i}]")
            tests.append(test)
        return TestSuite(
            tests=tuple(tests),
            covered_edges=frozenset(document["coveredEdges"]),
            uncoverable=frozenset(document.get("uncoverable", ())),
            start=document.get("start", ""),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"niepoprawny dokument zestawu: {e!r}") from e


def format_keys(suite):
    """
    Format ``.keys``: blok na test, nagłówek ``# test <n> -> <węzeł końcowy>``,
    jeden klawisz w linii, bloki rozdzielone pustą linią.
    """
    blocks = []
    for i, test in enumerate(suite.tests, start=1):
        lines = [f"# test {i} -> {test.nodes[-1]}"] + [k.value for k in test.keys]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n" if blocks else ""


def parse_keys(text):
    """
    Parsuje plik ``.keys`` na listę sekwencji klawiszy.

    Test to ciąg linii z klawiszami zakończony pustą linią. Nagłówek ``# test``
    zawsze otwiera nową sekwencję (także pustą); pozostałe komentarze ``#`` są pomijane.

    Raises:
        ValidationError: Nieznany klawisz (z numerem linii).
    """
    sequences = []
    current = None
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if line.startswith("# test"):
            current = []
            sequences.append(current)
            continue
        if not line:
            current = None
            continue
        if line.startswith("#"):
            continue
        try:
            keys = [Key(token) for token in line.split()]
        except ValueError:
            raise ValidationError(f"nieznany klawisz w '{line}'", f"linia {number}") from None
        if current is None:
            current = []
            sequences.append(current)
        current.extend(keys)
    return [tuple(s) for s in sequences]
