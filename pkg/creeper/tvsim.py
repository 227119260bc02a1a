"""
Symulator aplikacji Smart TV sterowanej pilotem (aplikacja w teście jako czarna skrzynka).

Moduł wczytuje deklaratywną specyfikację aplikacji (JSON), waliduje ją i interpretuje
jako deterministyczną sesję: każde naciśnięcie klawisza pilota daje zdefiniowany
wynik oraz wpisy w logu zdarzeń, który jest jedynym kanałem obserwacji dla crawlera,
wykonawcy testów i kampanii mutacyjnych.

**Model interakcji**

- Cztery klawisze nawigacyjne (Up, Down, Left, Right) przesuwają fokus zgodnie z jawną
  tabelą ``nav`` ekranu; brak wpisu oznacza brak reakcji.
- OK wykonuje kolejne kroki efektów widżetu (``open-screen`` odkłada ekran na stos,
  ``terminal-action`` odpala akcję końcową).
- Back zdejmuje ekran ze stosu i przywraca fokus na widżet, który go otworzył.

Przykład dokumentu specyfikacji::

    {
        "name": "Grid",
        "rootScreen": "main",
        "screens": [{
            "id": "main",
            "widgets": [{"id": "v1", "label": "V1"}, {"id": "v2", "label": "V2"}],
            "nav": {"v1": {"Right": "v2"}},
            "gridHints": {"v1": [0, 0], "v2": [0, 1]}
        }]
    }
"""

import json
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from pathlib import Path

from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from creeper.errors import (
    DanglingReferenceError,
    DuplicateIdError,
    FocusRequiredError,
    SpecSchemaError,
)

app_logger = logging.getLogger("application")

#: Udokumentowany schemat dokumentu specyfikacji (JSON Schema 2020-12), dostarczany z pakietem.
APP_SPEC_SCHEMA = json.loads(Path(__file__).with_name("app_spec.schema.json").read_text(encoding="utf-8"))
_schema_validator = Draft202012Validator(APP_SPEC_SCHEMA)


class Key(str, Enum):
    """Klawisze pilota."""

    UP = "Up"
    DOWN = "Down"
    LEFT = "Left"
    RIGHT = "Right"
    OK = "OK"
    BACK = "Back"


#: Klawisze przesuwające fokus w obrębie ekranu.
DIRECTION_KEYS = (Key.UP, Key.DOWN, Key.LEFT, Key.RIGHT)
#: Klawisze sondujące crawlera, w stałej kolejności.
PROBE_KEYS = DIRECTION_KEYS + (Key.OK,)


class WidgetKind(str, Enum):
    NAVIGABLE = "navigable"
    ACTION = "action"


class EffectKind(str, Enum):
    """Rodzaje kroków wykonywanych po naciśnięciu OK."""

    FETCH_RESOURCE = "fetch-resource"
    LOOKUP_ELEMENT = "lookup-element"
    SET_ATTRIBUTE = "set-attribute"
    INVOKE_FEATURE = "invoke-feature"
    ASSIGN_VARIABLE = "assign-variable"
    COMPUTE_INDEX = "compute-index"
    CALL_FUNCTION = "call-function"
    BIND_EVENT = "bind-event"
    OPEN_SCREEN = "open-screen"
    TERMINAL_ACTION = "terminal-action"


#: Kroki kończące efekt widocznym wynikiem; dozwolony najwyżej jeden, na końcu listy.
OUTCOME_KINDS = frozenset({EffectKind.OPEN_SCREEN, EffectKind.TERMINAL_ACTION})


class EventKind(str, Enum):
    MOVED = "moved"
    NO_REACTION = "no-reaction"
    OPENED_SCREEN = "opened-screen"
    CLOSED_SCREEN = "closed-screen"
    ACTION_FIRED = "action-fired"
    FAULT = "fault"
    FOCUS_REQUIRED = "focus-required"


@dataclass(frozen=True)
class EffectStep:
    kind: EffectKind
    #: Adres zasobu, id elementu, nazwa atrybutu/funkcji/zdarzenia, id ekranu lub nazwa akcji.
    argument: str
    #: Wyjątek w tym kroku zatrzymuje aplikację (zależne od aplikacji w teście).
    fatal: bool = False
    #: Identyfikator mutanta, który uszkodził ten krok (``None`` dla oryginału).
    mutant_id: str | None = None


@dataclass(frozen=True)
class Widget:
    id: str
    label: str
    kind: WidgetKind = WidgetKind.NAVIGABLE
    effects: tuple[EffectStep, ...] = ()

    @property
    def outcome(self):
        """Krok wynikowy (open-screen / terminal-action) albo ``None``."""
        if self.effects and self.effects[-1].kind in OUTCOME_KINDS:
            return self.effects[-1]
        return None


@dataclass(frozen=True)
class Screen:
    id: str
    widgets: tuple[Widget, ...]
    #: Częściowa mapa (id widżetu, klawisz kierunkowy) -> id widżetu docelowego.
    nav: dict = field(default_factory=dict)
    initial_focus: str | None = None
    #: Opcjonalne współrzędne (wiersz, kolumna) widżetów.
    grid_hints: dict | None = None

    @cached_property
    def widget_index(self):
        return {w.id: w for w in self.widgets}

    def widget(self, widget_id):
        return self.widget_index.get(widget_id)

    @property
    def entry_focus(self):
        """Fokus po otwarciu ekranu: ``initialFocus`` albo pierwszy zadeklarowany widżet."""
        return self.initial_focus or self.widgets[0].id


@dataclass(frozen=True)
class AppSpec:
    name: str
    screens: tuple[Screen, ...]
    root_screen: str

    @cached_property
    def screen_index(self):
        return {s.id: s for s in self.screens}

    def screen(self, screen_id):
        return self.screen_index.get(screen_id)

    def root(self):
        return self.screen_index[self.root_screen]


@dataclass(frozen=True)
class LogEvent:
    kind: EventKind
    detail: str


@dataclass(frozen=True)
class SessionState:
    """
    Stan sesji symulatora.

    Stos ekranów nigdy nie jest pusty, a na jego dnie zawsze leży ekran główny.
    ``openers`` przechowuje widżety, których OK otworzyło kolejne ekrany ze stosu
    (o jeden element krótszy niż stos).
    """

    screen_stack: tuple[str, ...]
    focus: str | None
    key_count: int = 0
    log: tuple[LogEvent, ...] = ()
    openers: tuple[str, ...] = ()
    #: Aplikacja zatrzymana przez fatalny wyjątek mutanta.
    halted: bool = False

    @property
    def screen(self):
        return self.screen_stack[-1]


def _schema_location(path):
    """Ścieżka błędu JSON Schema w notacji lokalizacji, np. ``screens[0].widgets[1].id``."""
    location = ""
    for part in path:
        if isinstance(part, int):
            location += f"[{part}]"
        else:
            location += f".{part}" if location else part
    return location or "$"


def _require(mapping, key, kind, location, optional=False):
    """Pobiera pole z dokumentu i sprawdza jego typ."""
    if key not in mapping or mapping[key] is None:
        if optional:
            return None
        raise SpecSchemaError(f"brak wymaganego pola '{key}'", location)
    value = mapping[key]
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise SpecSchemaError(f"pole '{key}' ma niepoprawny typ", location)
    return value


def _parse_effect(raw, location):
    if not isinstance(raw, dict):
        raise SpecSchemaError("krok efektu musi być obiektem", location)
    kind_name = _require(raw, "kind", str, location)
    try:
        kind = EffectKind(kind_name)
    except ValueError:
        raise SpecSchemaError(f"nieznany rodzaj kroku '{kind_name}'", location) from None
    return EffectStep(
        kind=kind,
        argument=_require(raw, "argument", str, location),
        fatal=bool(_require(raw, "fatal", bool, location, optional=True)),
    )


def _parse_widget(raw, location):
    if not isinstance(raw, dict):
        raise SpecSchemaError("widżet musi być obiektem", location)
    widget_id = _require(raw, "id", str, location)
    if not widget_id:
        raise SpecSchemaError("id widżetu nie może być puste", location)
    kind_name = _require(raw, "kind", str, location, optional=True) or WidgetKind.NAVIGABLE.value
    try:
        kind = WidgetKind(kind_name)
    except ValueError:
        raise SpecSchemaError(f"nieznany rodzaj widżetu '{kind_name}'", location) from None

    effects = tuple(
        _parse_effect(step, f"{location}.effects[{i}]")
        for i, step in enumerate(_require(raw, "effects", list, location, optional=True) or [])
    )
    outcome_positions = [i for i, step in enumerate(effects) if step.kind in OUTCOME_KINDS]
    if len(outcome_positions) > 1 or outcome_positions and outcome_positions[0] != len(effects) - 1:
        raise SpecSchemaError("open-screen/terminal-action może wystąpić raz i tylko jako ostatni krok", location)
    if kind is WidgetKind.ACTION and not effects:
        raise SpecSchemaError("widżet akcji musi mieć efekty", location)

    label = _require(raw, "label", str, location, optional=True)
    return Widget(id=widget_id, label=label if label is not None else widget_id, kind=kind, effects=effects)


def _parse_screen(raw, location):
    if not isinstance(raw, dict):
        raise SpecSchemaError("ekran musi być obiektem", location)
    screen_id = _require(raw, "id", str, location)
    raw_widgets = _require(raw, "widgets", list, location)
    if not raw_widgets:
        raise SpecSchemaError("ekran musi mieć co najmniej jeden widżet", location)

    widgets = []
    seen = set()
    for i, raw_widget in enumerate(raw_widgets):
        widget = _parse_widget(raw_widget, f"{location}.widgets[{i}]")
        if widget.id in seen:
            raise DuplicateIdError(f"powtórzone id widżetu '{widget.id}'", f"{location}.widgets[{i}]")
        seen.add(widget.id)
        widgets.append(widget)

    nav = {}
    for source, moves in (_require(raw, "nav", dict, location, optional=True) or {}).items():
        nav_location = f"{location}.nav.{source}"
        if source not in seen:
            raise DanglingReferenceError(f"nieznany widżet źródłowy '{source}'", nav_location)
        if not isinstance(moves, dict):
            raise SpecSchemaError("wpis nawigacji musi być obiektem klawisz -> widżet", nav_location)
        for key_name, target in moves.items():
            try:
                key = Key(key_name)
            except ValueError:
                key = None
            if key not in DIRECTION_KEYS:
                raise SpecSchemaError(f"'{key_name}' nie jest klawiszem kierunkowym", nav_location)
            if target not in seen:
                raise DanglingReferenceError(f"nieznany widżet docelowy '{target}'", f"{nav_location}.{key_name}")
            nav[(source, key)] = target

    grid_hints = None
    raw_hints = _require(raw, "gridHints", dict, location, optional=True)
    if raw_hints:
        grid_hints = {}
        taken = {}
        for widget_id, coords in raw_hints.items():
            hint_location = f"{location}.gridHints.{widget_id}"
            if widget_id not in seen:
                raise DanglingReferenceError(f"nieznany widżet '{widget_id}'", hint_location)
            if (not isinstance(coords, list) or len(coords) != 2
                    or not all(isinstance(c, int) and not isinstance(c, bool) for c in coords)):
                raise SpecSchemaError("współrzędne muszą być parą liczb całkowitych [wiersz, kolumna]", hint_location)
            cell = tuple(coords)
            if cell in taken:
                raise SpecSchemaError(f"widżety '{taken[cell]}' i '{widget_id}' zajmują to samo pole", hint_location)
            taken[cell] = widget_id
            grid_hints[widget_id] = cell

    initial_focus = _require(raw, "initialFocus", str, location, optional=True)
    if initial_focus is not None and initial_focus not in seen:
        raise DanglingReferenceError(f"initialFocus wskazuje nieznany widżet '{initial_focus}'", location)

    return Screen(id=screen_id, widgets=tuple(widgets), nav=nav,
                  initial_focus=initial_focus, grid_hints=grid_hints)


def parse_app_spec(document):
    """
    Waliduje sparsowany dokument specyfikacji i buduje :class:`AppSpec`.

    Dokument jest najpierw sprawdzany względem :data:`APP_SPEC_SCHEMA`, a potem pod kątem
    reguł spoza schematu (odwołania do ekranów i widżetów oraz unikalność id).

    Args:
        document (dict): Dokument zgodny ze schematem specyfikacji aplikacji.

    Returns:
        AppSpec: Zwalidowana, niezmienna specyfikacja.

    Raises:
        SpecSchemaError: Naruszenie schematu (z lokalizacją pola).
        DanglingReferenceError: Odwołanie do nieistniejącego widżetu lub ekranu.
        DuplicateIdError: Powtórzone id ekranu lub widżetu.
    """
    if not isinstance(document, dict):
        raise SpecSchemaError("dokument specyfikacji musi być obiektem", "$")
    violation = best_match(_schema_validator.iter_errors(document))
    if violation is not None:
        raise SpecSchemaError(f"naruszenie schematu: {violation.message}", _schema_location(violation.absolute_path))
    name = _require(document, "name", str, "$")
    root_screen = _require(document, "rootScreen", str, "$")
    raw_screens = _require(document, "screens", list, "$")

    screens = []
    seen = set()
    for i, raw_screen in enumerate(raw_screens):
        screen = _parse_screen(raw_screen, f"screens[{i}]")
        if screen.id in seen:
            raise DuplicateIdError(f"powtórzone id ekranu '{screen.id}'", f"screens[{i}]")
        seen.add(screen.id)
        screens.append(screen)

    if root_screen not in seen:
        raise DanglingReferenceError(f"rootScreen wskazuje nieznany ekran '{root_screen}'", "$.rootScreen")
    for i, screen in enumerate(screens):
        for j, widget in enumerate(screen.widgets):
            outcome = widget.outcome
            if outcome and outcome.kind is EffectKind.OPEN_SCREEN and outcome.argument not in seen:
                raise DanglingReferenceError(
                    f"open-screen wskazuje nieznany ekran '{outcome.argument}'",
                    f"screens[{i}].widgets[{j}].effects[{len(widget.effects) - 1}]",
                )

    return AppSpec(name=name, screens=tuple(screens), root_screen=root_screen)


def load_app_spec(text):
    """Parsuje tekst JSON specyfikacji i waliduje go (patrz :func:`parse_app_spec`)."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecSchemaError(f"niepoprawny JSON: {e.msg}", f"linia {e.lineno}") from e
    spec = parse_app_spec(document)
    app_logger.info("APP_SPEC_LOADED", extra={
        'event': 'SPEC_LOAD',
        'app': spec.name,
        'screens': len(spec.screens),
        'widgets': sum(len(s.widgets) for s in spec.screens),
    })
    return spec


def derive_nav_from_grid(spec):
    """
    Uzupełnia tabele nawigacji na podstawie współrzędnych siatki (``gridHints``).

    Dla każdego widżetu ze współrzędnymi dodaje brakujące wpisy:

    - Right/Left - najbliższy widżet w tym samym wierszu z większą/mniejszą kolumną,
    - Up/Down - najbliższy widżet w tej samej kolumnie z mniejszym/większym wierszem.

    Jawne wpisy ``nav`` nigdy nie są nadpisywane; ekrany bez współrzędnych przechodzą bez zmian.
    """
    screens = []
    for screen in spec.screens:
        if not screen.grid_hints:
            screens.append(screen)
            continue

        nav = dict(screen.nav)
        cells = screen.grid_hints
        for widget_id, (row, col) in cells.items():
            same_row = [(c, w) for w, (r, c) in cells.items() if r == row and w != widget_id]
            same_col = [(r, w) for w, (r, c) in cells.items() if c == col and w != widget_id]
            candidates = {
                Key.RIGHT: min(((c, w) for c, w in same_row if c > col), default=None),
                Key.LEFT: max(((c, w) for c, w in same_row if c < col), default=None),
                Key.UP: max(((r, w) for r, w in same_col if r < row), default=None),
                Key.DOWN: min(((r, w) for r, w in same_col if r > row), default=None),
            }
            for key, found in candidates.items():
                if found is not None:
                    nav.setdefault((widget_id, key), found[1])
        screens.append(replace(screen, nav=nav))

    return replace(spec, screens=tuple(screens))


def init_session(spec, focus=None):
    """
    Otwiera sesję na ekranie głównym.

    Fokus pochodzi z ``initialFocus`` ekranu głównego, a gdy go brak - z argumentu
    ``focus`` (punkt wybrany przez testera).

    Raises:
        FocusRequiredError: Brak ``initialFocus`` i brak (lub nieznany) wskazany fokus.
    """
    root = spec.root()
    chosen = root.initial_focus or focus
    if chosen is None:
        raise FocusRequiredError("Wybierz punkt fokusu (brak initialFocus i --focus)")
    if root.widget(chosen) is None:
        raise FocusRequiredError(f"widżet fokusu '{chosen}' nie istnieje na ekranie '{root.id}'")
    return SessionState(screen_stack=(root.id,), focus=chosen)


def _run_effects(spec, state, widget):
    events = []
    stack, openers, focus, halted = state.screen_stack, state.openers, state.focus, state.halted
    for step in widget.effects:
        if step.mutant_id is not None:
            events.append(LogEvent(EventKind.FAULT, step.mutant_id))
            halted = step.fatal
            break
        if step.kind is EffectKind.OPEN_SCREEN:
            target = spec.screen(step.argument)
            stack = stack + (target.id,)
            openers = openers + (widget.id,)
            focus = target.entry_focus
            events.append(LogEvent(EventKind.OPENED_SCREEN, target.id))
        elif step.kind is EffectKind.TERMINAL_ACTION:
            events.append(LogEvent(EventKind.ACTION_FIRED, step.argument))

    if not events:
        events.append(LogEvent(EventKind.NO_REACTION, widget.id))
    return replace(state, screen_stack=stack, openers=openers, focus=focus, halted=halted), events


def press_key(spec, state, key):
    """
    Wykonuje jedno naciśnięcie klawisza pilota.

    Funkcja jest totalna: każde naciśnięcie zwiększa ``key_count`` o 1 i dopisuje
    do logu co najmniej jedno zdarzenie, niezależnie od stanu aplikacji.

    **Semantyka klawiszy**

    - Up/Down/Left/Right: ruch fokusu wg tabeli ``nav`` (``moved``) albo ``no-reaction``.
    - OK: kroki efektów po kolei; uszkodzony przez mutanta krok loguje ``fault``
      i przerywa pozostałe kroki (mutant fatalny dodatkowo zatrzymuje aplikację).
    - Back: zdjęcie ekranu ze stosu (``closed-screen``); na ekranie głównym ``no-reaction``.

    Args:
        spec (AppSpec): Specyfikacja aplikacji (współdzielona, tylko do odczytu).
        state (SessionState): Stan przed naciśnięciem.
        key (Key): Naciskany klawisz.

    Returns:
        tuple: (nowy ``SessionState``, lista ``LogEvent`` z tego naciśnięcia).
    """
    key = Key(key)
    screen = spec.screen(state.screen)

    if state.halted:
        next_state, events = state, [LogEvent(EventKind.NO_REACTION, "halted")]
    elif state.focus is None:
        next_state, events = state, [LogEvent(EventKind.FOCUS_REQUIRED, screen.id)]
    elif key in DIRECTION_KEYS:
        target = screen.nav.get((state.focus, key))
        if target is None:
            next_state, events = state, [LogEvent(EventKind.NO_REACTION, state.focus)]
        else:
            next_state, events = replace(state, focus=target), [LogEvent(EventKind.MOVED, target)]
    elif key is Key.OK:
        next_state, events = _run_effects(spec, state, screen.widget(state.focus))
    elif len(state.screen_stack) > 1:
        next_state = replace(state, screen_stack=state.screen_stack[:-1],
                             openers=state.openers[:-1], focus=state.openers[-1])
        events = [LogEvent(EventKind.CLOSED_SCREEN, screen.id)]
    else:
        next_state, events = state, [LogEvent(EventKind.NO_REACTION, screen.id)]

    next_state = replace(next_state, key_count=state.key_count + 1, log=state.log + tuple(events))
    return next_state, events


def reset_and_replay(spec, keys, focus=None):
    """Świeża sesja + odtworzenie sekwencji klawiszy; deterministycznie daje ten sam stan."""
    state = init_session(spec, focus)
    for key in keys:
        state, _ = press_key(spec, state, key)
    return state
