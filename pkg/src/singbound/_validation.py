"""Input coercion shared by the estimators and the command line."""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .dist import DiscreteDist, as_fraction, bernoulli, gamma, pm2, point_mass, uniform
from .errors import DomainError

_NAMED = {
    "bernoulli": lambda arg: bernoulli(),
    "gamma": lambda arg: gamma(as_fraction(arg)),
    "lazy": lambda arg: gamma(as_fraction(arg)),
    "pm2": lambda arg: pm2(as_fraction(arg)),
    "uniform": lambda arg: uniform(int(arg)),
    "point": lambda arg: point_mass(int(arg or 0)),
}


def check_dist(obj) -> DiscreteDist:
    """Coerce a law given as a DiscreteDist, JSON mapping, JSON file path, or ``name[:arg]``.

    Names: ``bernoulli``, ``gamma:MU`` (alias ``lazy``), ``pm2:MU``, ``uniform:K``, ``point:V``.
    """
    if isinstance(obj, DiscreteDist):
        return obj
    if isinstance(obj, dict):
        return DiscreteDist.from_json(obj)
    if isinstance(obj, str):
        name, _, arg = obj.partition(":")
        if name.lower() in _NAMED:
            try:
                return _NAMED[name.lower()](arg)
            except (ValueError, ZeroDivisionError) as exc:
                raise DomainError(f"bad distribution argument in {obj!r}") from exc
        path = Path(obj)
        if path.is_file():
            return DiscreteDist.from_json(json.loads(path.read_text()))
        raise DomainError(f"unknown distribution {obj!r}")
    raise DomainError(f"cannot interpret {type(obj).__name__} as a distribution")


def check_positive_int(x, name: str, minimum: int = 1) -> int:
    if isinstance(x, bool) or int(x) != x or int(x) < minimum:
        raise DomainError(f"{name} must be an integer >= {minimum}")
    return int(x)


def check_fraction(x, name: str, lo=None, hi=None) -> Fraction:
    try:
        f = as_fraction(x)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"{name} is not a number") from exc
    if lo is not None and f < lo or hi is not None and f > hi:
        raise DomainError(f"{name} must lie in [{lo}, {hi}]")
    return f


def check_int_matrix(rows, name: str = "matrix") -> list:
    try:
        out = [[int(x) for x in row] for row in rows]
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{name} must be an integer matrix") from exc
    if out and len({len(r) for r in out}) != 1:
        raise DomainError(f"{name} rows differ in length")
    return out


def load_json(path_or_doc):
    """Parse a JSON file path, a JSON string, or pass a mapping through."""
    if isinstance(path_or_doc, (dict, list)):
        return path_or_doc
    text = str(path_or_doc)
    p = Path(text)
    if p.is_file():
        return json.loads(p.read_text())
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"{text!r} is neither a JSON file nor JSON text") from exc
