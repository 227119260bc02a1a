"""
Multigraf aplikacji: mega-model, pod-modele, eksport DOT i serializacja JSON.

Mega-model to skierowany multigraf G = (N, E, s, t) z węzłem startowym (fokus)
i zbiorem węzłów końcowych. Węzły to klikalne widżety (oraz węzły akcji końcowych),
krawędzie to naciśnięcia klawiszy pilota. Z pary (węzeł źródłowy, klawisz)
wychodzi najwyżej jedna krawędź - aplikacja jest deterministyczna.

**Identyfikatory**

- węzeł widżetu: ``"<ekran>:<widżet>"``,
- węzeł akcji: ``"<ekran>:<widżet>!<akcja>"``,
- krawędź: ``"<źródło>|<klawisz>"``.

Algorytmy grafowe (osiągalność, odległości) realizuje ``networkx`` na widoku
:attr:`MegaModel.graph`.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import networkx as nx

from creeper.errors import DestinationsUnreachableError, ModelError, UnknownNodeError
from creeper.tvsim import Key

app_logger = logging.getLogger("application")

#: Nazwa schematu dokumentu modelu (mega-model i pod-model).
MODEL_SCHEMA = "tvcreeper/model"
MODEL_SCHEMA_VERSION = 1


class NodeKind(str, Enum):
    NAVIGABLE = "navigable"
    END = "end"
    SINK = "sink"


@dataclass(frozen=True)
class Node:
    id: str
    label: str
    screen: str
    #: Widżet, który reprezentuje węzeł (dla węzła akcji - widżet, który ją odpala).
    widget: str
    kind: NodeKind = NodeKind.NAVIGABLE


@dataclass(frozen=True)
class Edge:
    id: str
    source: str
    target: str
    key: Key


def state_node_id(screen_id, widget_id):
    return f"{screen_id}:{widget_id}"


def action_node_id(screen_id, widget_id, action):
    return f"{screen_id}:{widget_id}!{action}"


def edge_id(source, key):
    return f"{source}|{Key(key).value}"


def state_node(spec, screen_id, widget_id):
    """Węzeł widżetu z etykietą pobraną ze specyfikacji aplikacji."""
    widget = spec.screen(screen_id).widget(widget_id)
    return Node(id=state_node_id(screen_id, widget_id), label=widget.label, screen=screen_id, widget=widget_id)


def action_node(spec, screen_id, widget_id, action):
    widget = spec.screen(screen_id).widget(widget_id)
    return Node(
        id=action_node_id(screen_id, widget_id, action),
        label=f"{widget.label} [{action}]",
        screen=screen_id,
        widget=widget_id,
        kind=NodeKind.END,
    )


@dataclass(frozen=True)
class MegaModel:
    """
    Mega-model aplikacji (wynik crawlingu).

    Węzły i krawędzie są przechowywane w kolejności odkrycia, co czyni model
    i jego serializację deterministycznymi. ``end_nodes`` może być pusty, gdy
    aplikacja nie ma akcji końcowych ani węzłów bez wyjścia.
    """

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    start: str
    end_nodes: frozenset
    #: Nazwa aplikacji, z której pochodzi model.
    name: str = ""

    @cached_property
    def node_index(self):
        return {n.id: n for n in self.nodes}

    @cached_property
    def edge_index(self):
        return {e.id: e for e in self.edges}

    @cached_property
    def outgoing(self):
        """Krawędzie wychodzące z każdego węzła, posortowane po (cel, id krawędzi)."""
        result = {n.id: [] for n in self.nodes}
        for e in self.edges:
            result[e.source].append(e)
        for edges in result.values():
            edges.sort(key=lambda e: (e.target, e.id))
        return result

    @cached_property
    def graph(self):
        """Widok ``networkx.MultiDiGraph`` (klucze krawędzi = id krawędzi)."""
        g = nx.MultiDiGraph()
        g.add_nodes_from(n.id for n in self.nodes)
        for e in self.edges:
            g.add_edge(e.source, e.target, key=e.id)
        return g

    def node(self, node_id):
        return self.node_index[node_id]

    def edge(self, edge_id_):
        return self.edge_index[edge_id_]

    def validate(self):
        """
        Sprawdza niezmienniki multigrafu.

        Raises:
            ModelError: Pusty zbiór węzłów, powtórzone id, krawędź do nieznanego węzła,
                powtórzona para (źródło, klawisz), nieznany start lub węzeł końcowy.
        """
        if not self.nodes:
            raise ModelError("model musi mieć co najmniej jeden węzeł")
        if len(self.node_index) != len(self.nodes):
            raise ModelError("powtórzone id węzła")
        if len(self.edge_index) != len(self.edges):
            raise ModelError("powtórzone id krawędzi")
        moves = set()
        for e in self.edges:
            if e.source not in self.node_index or e.target not in self.node_index:
                raise ModelError(f"krawędź '{e.id}' wskazuje nieznany węzeł")
            if (e.source, e.key) in moves:
                raise ModelError(f"para ({e.source}, {e.key.value}) ma więcej niż jedną krawędź")
            moves.add((e.source, e.key))
        if self.start not in self.node_index:
            raise ModelError(f"nieznany węzeł startowy '{self.start}'")
        unknown = sorted(set(self.end_nodes) - set(self.node_index))
        if unknown:
            raise ModelError(f"nieznane węzły końcowe: {', '.join(unknown)}")
        return self


@dataclass(frozen=True)
class SubModel(MegaModel):
    """Pod-model ograniczony do spacerów od startu do wybranych celów (``destinations`` = ``end_nodes``)."""

    destinations: frozenset = frozenset()

    def validate(self):
        super().validate()
        if not self.destinations:
            raise ModelError("pod-model musi mieć co najmniej jeden cel")
        if set(self.destinations) != set(self.end_nodes):
            raise ModelError("cele pod-modelu muszą być równe jego węzłom końcowym")
        return self


def find_node(model, reference):
    """
    Rozwiązuje odwołanie do węzła: dokładne id albo jednoznaczna etykieta.

    Raises:
        UnknownNodeError: Brak węzła lub etykieta pasuje do wielu węzłów.
    """
    if reference in model.node_index:
        return reference
    matches = [n.id for n in model.nodes if n.label == reference]
    if len(matches) == 1:
        return matches[0]
    if matches:
        raise UnknownNodeError(f"etykieta '{reference}' jest niejednoznaczna: {', '.join(matches)}")
    raise UnknownNodeError(f"nieznany węzeł '{reference}'")


def extract_sub_model(model, destinations):
    """
    Wycina pod-model prowadzący od startu do wskazanych celów.

    **Reguła podwójnej osiągalności**

    Węzeł zostaje, gdy jest osiągalny ze startu i gdy z niego osiągalny jest któryś cel.
    Krawędź zostaje, gdy jej źródło jest osiągalne ze startu, a z jej celu osiągalny
    jest któryś cel - czyli gdy leży na jakimś spacerze start -> cel. To najmniejszy
    podgraf zawierający wszystkie takie spacery.

    Args:
        model (MegaModel): Mega-model (lub pod-model) źródłowy.
        destinations (Iterable[str]): Id węzłów docelowych wybranych przez testera.

    Returns:
        SubModel: Pod-model; start bez zmian, ``end_nodes`` = osiągalne cele.

    Raises:
        UnknownNodeError: Cel spoza modelu.
        DestinationsUnreachableError: Brak celów lub żaden cel nie jest osiągalny ze startu.
    """
    targets = set(destinations)
    if not targets:
        raise DestinationsUnreachableError("nie wskazano żadnego celu")
    unknown = sorted(t for t in targets if t not in model.node_index)
    if unknown:
        raise UnknownNodeError(f"nieznane cele: {', '.join(unknown)}")

    g = model.graph
    forward = {model.start} | nx.descendants(g, model.start)
    backward = set(targets)
    for target in targets:
        backward |= nx.ancestors(g, target)
    kept = forward & backward

    reached = frozenset(targets & kept)
    if not reached:
        raise DestinationsUnreachableError(f"żaden z celów nie jest osiągalny ze startu '{model.start}'")

    sub = SubModel(
        nodes=tuple(n for n in model.nodes if n.id in kept),
        edges=tuple(e for e in model.edges if e.source in forward and e.target in backward),
        start=model.start,
        end_nodes=reached,
        name=model.name,
        destinations=reached,
    )
    app_logger.info("SUBMODEL_EXTRACTED", extra={
        'event': 'SUBMODEL',
        'app': model.name,
        'destinations': sorted(reached),
        'nodes': len(sub.nodes),
        'edges': len(sub.edges),
    })
    return sub


def _quote(text):
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(model):
    """
    Eksport do formatu GraphViz DOT.

    Węzły mają etykiety ``etykieta@ekran``, krawędzie - nazwę klawisza. Węzły końcowe
    rysowane są podwójnym obramowaniem, start - pogrubioną linią. Węzły i krawędzie
    są sortowane po id, więc równe modele dają identyczne bajty.
    """
    lines = [f"digraph {_quote(model.name or 'tvcreeper')} {{", "  rankdir=LR;", "  node [shape=box];"]
    for node in sorted(model.nodes, key=lambda n: n.id):
        attrs = [f"label={_quote(f'{node.label}@{node.screen}')}"]
        if node.id in model.end_nodes:
            attrs.append("peripheries=2")
        if node.id == model.start:
            attrs.append("penwidth=2")
        lines.append(f"  {_quote(node.id)} [{', '.join(attrs)}];")
    for edge in sorted(model.edges, key=lambda e: e.id):
        lines.append(f"  {_quote(edge.source)} -> {_quote(edge.target)} [label={_quote(edge.key.value)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_model(model):
    """Serializuje model do dokumentu JSON (wersjonowany schemat)."""
    document = {
        "schema": MODEL_SCHEMA,
        "version": MODEL_SCHEMA_VERSION,
        "kind": "sub" if isinstance(model, SubModel) else "mega",
        "name": model.name,
        "nodes": [
            {"id": n.id, "label": n.label, "screen": n.screen, "widget": n.widget, "kind": n.kind.value}
            for n in model.nodes
        ],
        "edges": [
            {"id": e.id, "source": e.source, "target": e.target, "key": e.key.value}
            for e in model.edges
        ],
        "start": model.start,
        "endNodes": sorted(model.end_nodes),
    }
    if isinstance(model, SubModel):
        document["destinations"] = sorted(model.destinations)
    return document


def load_model(document):
    """
    Odtwarza model z dokumentu JSON i sprawdza jego niezmienniki.

    Raises:
        ModelError: Niezgodny schemat/wersja, brakujące pola lub naruszone niezmienniki.
    """
    if not isinstance(document, dict) or document.get("schema") != MODEL_SCHEMA:
        raise ModelError(f"dokument nie jest modelem ({MODEL_SCHEMA})")
    if document.get("version") != MODEL_SCHEMA_VERSION:
        raise ModelError(f"nieobsługiwana wersja schematu modelu: {document.get('version')}")
    try:
        nodes = tuple(
            Node(id=n["id"], label=n["label"], screen=n["screen"], widget=n["widget"], kind=NodeKind(n["kind"]))
            for n in document["nodes"]
        )
        edges = tuple(
            Edge(id=e["id"], source=e["source"], target=e["target"], key=Key(e["key"]))
            for e in document["edges"]
        )
        fields = dict(
            nodes=nodes,
            edges=edges,
            start=document["start"],
            end_nodes=frozenset(document["endNodes"]),
            name=document.get("name", ""),
        )
        if document.get("kind") == "sub":
            model = SubModel(**fields, destinations=frozenset(document["destinations"]))
        else:
            model = MegaModel(**fields)
    except (KeyError, TypeError, ValueError) as e:
        raise ModelError(f"niepoprawny dokument modelu: {e!r}") from e
    return model.validate()
