"""Budowanie specyfikacji testowych i stałe używane przez testy."""

import json
from pathlib import Path

from creeper.tvsim import derive_nav_from_grid, load_app_spec, parse_app_spec

FIXTURES = Path(__file__).parent / "fixtures"

PLAY_TRAILER = "details:play-trailer!play-trailer"
SHOW_SCORE = "result:score!show-score"


def load_fixture(name):
    return derive_nav_from_grid(load_app_spec((FIXTURES / name).read_text(encoding="utf-8")))


def row_app_document(site_counts, widgets=10, name="Row"):
    """
    Aplikacja z jednym rzędem widżetów; kroki efektów rozdzielane po kolei między widżety,
    każdy widżet kończy się własną akcją końcową.
    """
    effects = [[] for _ in range(widgets)]
    position = 0
    for kind, count in site_counts.items():
        for n in range(count):
            effects[position % widgets].append({"kind": kind, "argument": f"{kind}-{n}"})
            position += 1
    return {
        "name": name,
        "rootScreen": "main",
        "screens": [{
            "id": "main",
            "initialFocus": "w0",
            "widgets": [
                {"id": f"w{k}", "label": f"W{k}", "kind": "action",
                 "effects": effects[k] + [{"kind": "terminal-action", "argument": f"action-{k}"}]}
                for k in range(widgets)
            ],
            "gridHints": {f"w{k}": [0, k] for k in range(widgets)},
        }],
    }


def grid_document(rows, cols):
    return {
        "name": f"Grid {rows}x{cols}",
        "rootScreen": "main",
        "screens": [{
            "id": "main",
            "widgets": [{"id": f"c{r}-{c}", "label": f"C{r}-{c}"} for r in range(rows) for c in range(cols)],
            "gridHints": {f"c{r}-{c}": [r, c] for r in range(rows) for c in range(cols)},
        }],
    }


def build_spec(document):
    return derive_nav_from_grid(parse_app_spec(json.loads(json.dumps(document))))
