"""
Crawler aplikacji: eksploracja w głąb (DFS) i budowa mega-modelu.

Z każdego nowego węzła crawler sonduje klawisze Up, Down, Left, Right, OK
(zawsze w tej kolejności). Reakcja aplikacji (ruch fokusu, otwarcie ekranu,
akcja końcowa) tworzy krawędź; brak reakcji - nie. Przed każdą sondą stan węzła
jest odtwarzany przez reset sesji i ponowienie ścieżki odkrycia, co odpowiada
powrotowi klawiszem Back do rodzica.
"""

import logging
import time
from collections import deque
from dataclasses import dataclass, field, replace

from creeper.errors import CrawlConfigError
from creeper.graph import Edge, MegaModel, NodeKind, action_node, edge_id, state_node
from creeper.tvsim import PROBE_KEYS, EventKind, init_session, press_key, reset_and_replay

app_logger = logging.getLogger("application")


@dataclass(frozen=True)
class CrawlConfig:
    #: Limit naciśnięć sondujących; ``None`` = bez limitu.
    max_actions: int | None = None
    #: Punkt fokusu wybrany przez testera (gdy ekran główny nie ma ``initialFocus``).
    focus: str | None = None
    probe_order: tuple = PROBE_KEYS

    def __post_init__(self):
        if tuple(self.probe_order) != PROBE_KEYS:
            raise CrawlConfigError("kolejność sond musi być Up, Down, Left, Right, OK")
        if self.max_actions is not None:
            if not isinstance(self.max_actions, int) or isinstance(self.max_actions, bool):
                raise CrawlConfigError("limit akcji musi być liczbą całkowitą")
            if self.max_actions < 0:
                raise CrawlConfigError("limit akcji nie może być ujemny")


@dataclass(frozen=True)
class CrawlResult:
    model: MegaModel
    #: Id odwiedzonych węzłów w kolejności odkrycia (równe zbiorowi węzłów modelu).
    visited: tuple[str, ...]
    actions_used: int
    #: Eksploracja przerwana limitem akcji.
    truncated: bool
    elapsed_ms: int = field(default=0, compare=False)


def reaction_target(spec, before, after, events):
    """
    Węzeł, do którego prowadzi naciśnięcie, albo ``None`` przy braku reakcji.

    Odpalenie akcji końcowej daje węzeł akcji, ruch fokusu lub otwarcie ekranu -
    węzeł nowego fokusu.
    """
    kinds = {e.kind for e in events}
    if EventKind.ACTION_FIRED in kinds:
        action = next(e.detail for e in events if e.kind is EventKind.ACTION_FIRED)
        return action_node(spec, before.screen, before.focus, action)
    if kinds & {EventKind.MOVED, EventKind.OPENED_SCREEN}:
        return state_node(spec, after.screen, after.focus)
    return None


def _mark_sinks(nodes, edges, fully_probed):
    """Węzły nawigacyjne bez krawędzi wychodzących (tylko w pełni zbadane) stają się ujściami."""
    sources = {e.source for e in edges}
    result = []
    for node in nodes:
        if node.kind is NodeKind.NAVIGABLE and node.id in fully_probed and node.id not in sources:
            node = replace(node, kind=NodeKind.SINK)
        result.append(node)
    return result


def crawl(spec, config=None):
    """
    Eksploruje aplikację od punktu fokusu i buduje mega-model.

    Kolejność odkrycia jest kolejnością rekurencyjnego DFS: po znalezieniu nowego
    węzła nawigacyjnego crawler od razu schodzi w głąb, a po wyczerpaniu jego sond
    wraca do kolejnej sondy rodzica. Węzły akcji końcowych trafiają do modelu jako
    węzły końcowe i nie są sondowane.

    Args:
        spec (AppSpec): Specyfikacja aplikacji.
        config (CrawlConfig): Limit akcji i punkt fokusu.

    Returns:
        CrawlResult: Mega-model i statystyki eksploracji.

    Raises:
        FocusRequiredError: Brak punktu fokusu.
    """
    config = config or CrawlConfig()
    started = time.perf_counter()

    root_state = init_session(spec, config.focus)
    start = state_node(spec, root_state.screen, root_state.focus)
    nodes = {start.id: start}
    edges = {}
    paths = {start.id: ()}
    fully_probed = set()
    actions = 0
    truncated = False

    if config.max_actions == 0:
        app_logger.warning("CRAWL_ACTION_CAP_ZERO", extra={'event': 'CRAWL', 'app': spec.name})
        truncated = True
    else:
        stack = [[start.id, 0]]
        live = (start.id, root_state)
        while stack:
            frame = stack[-1]
            node_id, index = frame
            if index == len(PROBE_KEYS):
                fully_probed.add(node_id)
                stack.pop()
                continue
            if config.max_actions is not None and actions >= config.max_actions:
                truncated = True
                break

            frame[1] += 1
            key = PROBE_KEYS[index]
            if live is not None and live[0] == node_id:
                state = live[1]
            else:
                state = reset_and_replay(spec, paths[node_id], config.focus)
            after, events = press_key(spec, state, key)
            actions += 1

            target = reaction_target(spec, state, after, events)
            if target is None:
                live = (node_id, after)
                continue

            edges[(node_id, key)] = Edge(id=edge_id(node_id, key), source=node_id, target=target.id, key=key)
            live = None
            if target.id in nodes:
                continue
            nodes[target.id] = target
            if target.kind is NodeKind.NAVIGABLE:
                paths[target.id] = paths[node_id] + (key,)
                stack.append([target.id, 0])
                live = (target.id, after)

    node_list = _mark_sinks(nodes.values(), edges.values(), fully_probed)
    model = MegaModel(
        nodes=tuple(node_list),
        edges=tuple(edges.values()),
        start=start.id,
        end_nodes=frozenset(n.id for n in node_list if n.kind is not NodeKind.NAVIGABLE),
        name=spec.name,
    )
    elapsed_ms = int((time.perf_counter() - started) * 1000)
    app_logger.info("CRAWL_FINISHED", extra={
        'event': 'CRAWL',
        'app': spec.name,
        'nodes': len(model.nodes),
        'edges': len(model.edges),
        'end_nodes': len(model.end_nodes),
        'actions_used': actions,
        'truncated': truncated,
        'elapsed_ms': elapsed_ms,
    })
    return CrawlResult(model=model, visited=tuple(nodes), actions_used=actions,
                       truncated=truncated, elapsed_ms=elapsed_ms)


def brute_force_model(spec, focus=None):
    """
    Niezależna wyrocznia: przeszukiwanie wszerz (BFS) po stanach symulatora.

    Każdy stan jest przechowywany wprost (bez odtwarzania ścieżek), a węzły
    rozróżniane po parze (ekran na szczycie, fokus). Służy do sprawdzania
    zupełności crawlera na małych aplikacjach.
    """
    root_state = init_session(spec, focus)
    start = state_node(spec, root_state.screen, root_state.focus)
    nodes = {start.id: start}
    edges = {}
    queue = deque([(start.id, root_state)])
    expanded = {start.id}

    while queue:
        node_id, state = queue.popleft()
        for key in PROBE_KEYS:
            after, events = press_key(spec, state, key)
            target = reaction_target(spec, state, after, events)
            if target is None:
                continue
            edges[(node_id, key)] = Edge(id=edge_id(node_id, key), source=node_id, target=target.id, key=key)
            nodes.setdefault(target.id, target)
            if target.kind is NodeKind.NAVIGABLE and target.id not in expanded:
                expanded.add(target.id)
                queue.append((target.id, after))

    node_list = _mark_sinks(nodes.values(), edges.values(), expanded)
    return MegaModel(
        nodes=tuple(node_list),
        edges=tuple(edges.values()),
        start=start.id,
        end_nodes=frozenset(n.id for n in node_list if n.kind is not NodeKind.NAVIGABLE),
        name=spec.name,
    )
