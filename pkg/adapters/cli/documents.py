"""Signal documents for the command line.

A signal is given either as a JSON document, a tagged union mirroring the node
kinds of ``engine.signals``::

    {"kind": "piecewise_periodic", "period": 2, "pieces": [[0, 2], [1, 1]]}
    {"kind": "trig", "terms": [[a, b, lambda], ...]}
    {"kind": "dyadic", "name": "mu_no_mu", "max_terms": 3}
    {"kind": "sum", "children": [...]}
    {"kind": "shift", "tau": 1.5, "child": {...}}

or as a shorthand: ``const:c``, ``trig:a,b,l;a,b,l``, ``dyadic:name[:k]``.
"""

import json
from typing import Any

from engine.signals import (
    Const,
    DyadicSpikes,
    PiecewisePeriodic,
    Scale,
    SeriesKind,
    Shift,
    Signal,
    Steps,
    Sum,
    TrigPoly,
    Truncated,
)


def _number(doc: dict[str, Any], key: str) -> float:
    if key not in doc:
        raise ValueError(f"Signal document of kind '{doc.get('kind')}' needs '{key}'")
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"'{key}' must be a number, got {value!r}")
    return float(value)


def _child(doc: dict[str, Any], key: str = "child") -> Signal:
    if key not in doc:
        raise ValueError(f"Signal document of kind '{doc.get('kind')}' needs '{key}'")
    return signal_from_document(doc[key])


def signal_from_document(doc: Any) -> Signal:
    """Build a signal tree from its JSON document.

    Raises:
        ValueError: If the document is malformed or names an unknown kind.
    """
    if not isinstance(doc, dict):
        raise ValueError(f"Signal document must be an object, got {type(doc).__name__}")
    kind = doc.get("kind")
    if kind == "const":
        return Const(_number(doc, "c"))
    if kind == "trig":
        terms = doc.get("terms")
        if not isinstance(terms, list) or any(len(term) != 3 for term in terms):
            raise ValueError("'trig' needs 'terms' as a list of [a, b, lambda]")
        return TrigPoly(tuple(tuple(term) for term in terms))
    if kind == "piecewise_periodic":
        pieces = doc.get("pieces")
        if not isinstance(pieces, list) or any(len(piece) != 2 for piece in pieces):
            raise ValueError("'piecewise_periodic' needs 'pieces' as a list of [breakpoint, value]")
        return PiecewisePeriodic(_number(doc, "period"), tuple(tuple(p) for p in pieces))
    if kind == "steps":
        return Steps(tuple(doc.get("breaks", ())), tuple(doc.get("values", ())))
    if kind == "dyadic":
        try:
            series = SeriesKind(doc.get("name"))
        except ValueError as exc:
            names = ", ".join(k.value for k in SeriesKind)
            raise ValueError(f"Unknown dyadic series '{doc.get('name')}'; one of {names}") from exc
        max_terms = doc.get("max_terms")
        return DyadicSpikes(series, None if max_terms is None else int(max_terms))
    if kind == "sum":
        children = doc.get("children")
        if not isinstance(children, list) or not children:
            raise ValueError("'sum' needs a non-empty 'children' list")
        return Sum(tuple(signal_from_document(c) for c in children))
    if kind == "scale":
        return Scale(_number(doc, "c"), _child(doc))
    if kind == "shift":
        return Shift(_number(doc, "tau"), _child(doc))
    if kind == "truncate":
        return Truncated(_child(doc), _number(doc, "level"))
    raise ValueError(f"Unknown signal kind '{kind}'")


def parse_signal(text: str) -> Signal:
    """Parse a ``--signal`` argument: a JSON document or a shorthand."""
    text = text.strip()
    if text.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"Invalid signal JSON: {exc.msg}") from exc
        return signal_from_document(doc)

    kind, _, rest = text.partition(":")
    if kind == "const":
        return Const(float(rest))
    if kind == "trig":
        terms = []
        for chunk in rest.split(";"):
            parts = chunk.split(",")
            if len(parts) != 3:
                raise ValueError(f"trig term must be a,b,lambda, got '{chunk}'")
            terms.append(tuple(float(x) for x in parts))
        return TrigPoly(tuple(terms))
    if kind == "dyadic":
        name, _, budget = rest.partition(":")
        doc = {"kind": "dyadic", "name": name, "max_terms": int(budget) if budget else None}
        return signal_from_document(doc)
    raise ValueError(f"Unrecognised signal '{text}'; use JSON, const:c, trig:a,b,l or dyadic:name")
