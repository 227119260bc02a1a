"""
Silnik testowania opartego na modelach dla aplikacji sterowanych pilotem (Smart TV).

Pakiet zawiera kolejne etapy potoku:

- :mod:`creeper.tvsim` - symulator aplikacji (czarna skrzynka zamiast emulatora TV),
- :mod:`creeper.crawler` - eksploracja aplikacji i budowa mega-modelu,
- :mod:`creeper.graph` - multigraf, wycinanie pod-modeli, eksport DOT/JSON,
- :mod:`creeper.testgen` - generowanie testów z kryterium All Edge Coverage,
- :mod:`creeper.executor` - wykonywanie testów i werdykty,
- :mod:`creeper.mutation` - operatory mutacyjne, kampanie i wynik mutacyjny.
"""
