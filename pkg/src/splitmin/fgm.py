"""Text formats: FGM model files, splitting-parameter files and spanning-tree lists.

FGM (whitespace separated, ``#`` starts a comment)::

    FGM 1
    vars 2
    card 2 2
    phi 0 0 1
    phi 1 0 1
    factor 2 0 1 0 0 0 1

``factor <m> <i_1> .. <i_m> <values>`` lists the table row-major with the last
scope variable fastest.  ``inf`` is +infinity.
"""

from __future__ import annotations

import math

import numpy as np

from .graph import FactorGraph, GraphError
from .params import ParamsError, SplitParams, make_trmp_params, validate_params


class FormatError(ValueError):
    """Malformed input; ``line`` is 1-based (0 when not tied to a line)."""

    def __init__(self, msg: str, line: int = 0):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        toks = raw.split("#", 1)[0].split()
        if toks:
            yield no, toks


def _int(tok: str, no: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatError(f"{what} must be an integer, got {tok!r}", no) from None


def _real(tok: str, no: int) -> float:
    if tok.lower() in ("inf", "+inf"):
        return math.inf
    try:
        v = float(tok)
    except ValueError:
        raise FormatError(f"not a number: {tok!r}", no) from None
    if math.isnan(v) or v == -math.inf:
        raise FormatError(f"value {tok!r} is not allowed (only finite reals and +inf)", no)
    return v


def parse_model(text: str) -> FactorGraph:
    it = _lines(text)
    try:
        no, toks = next(it)
    except StopIteration:
        raise FormatError("empty model file") from None
    if toks != ["FGM", "1"]:
        raise FormatError("expected header 'FGM 1'", no)

    n = None
    cards: list[int] | None = None
    phis: dict[int, np.ndarray] = {}
    factors: list[tuple[tuple[int, ...], np.ndarray]] = []
    for no, toks in it:
        key, rest = toks[0], toks[1:]
        if key == "vars":
            if n is not None or len(rest) != 1:
                raise FormatError("'vars' must appear once with one count", no)
            n = _int(rest[0], no, "variable count")
            if n < 1:
                raise FormatError("need at least one variable", no)
        elif key == "card":
            if n is None:
                raise FormatError("'card' before 'vars'", no)
            if cards is not None or len(rest) != n:
                raise FormatError(f"'card' needs exactly {n} values", no)
            cards = [_int(t, no, "cardinality") for t in rest]
            if min(cards) < 1:
                raise FormatError("cardinalities must be positive", no)
        elif key == "phi":
            if cards is None:
                raise FormatError("'phi' before 'card'", no)
            if not rest:
                raise FormatError("'phi' needs a variable id", no)
            i = _int(rest[0], no, "variable id")
            if not 0 <= i < n:
                raise FormatError(f"unknown variable {i}", no)
            if i in phis:
                raise FormatError(f"duplicate phi for variable {i}", no)
            if len(rest) - 1 != cards[i]:
                raise FormatError(f"phi {i} needs {cards[i]} values, got {len(rest) - 1}", no)
            phis[i] = np.array([_real(t, no) for t in rest[1:]])
        elif key == "factor":
            if cards is None:
                raise FormatError("'factor' before 'card'", no)
            if not rest:
                raise FormatError("'factor' needs a scope size", no)
            m = _int(rest[0], no, "scope size")
            if m < 1 or len(rest) < 1 + m:
                raise FormatError("bad scope size", no)
            scope = tuple(_int(t, no, "variable id") for t in rest[1 : 1 + m])
            for v in scope:
                if not 0 <= v < n:
                    raise FormatError(f"unknown variable {v}", no)
            size = math.prod(cards[v] for v in scope)
            vals = rest[1 + m :]
            if len(vals) != size:
                raise FormatError(f"factor table needs {size} values, got {len(vals)}", no)
            table = np.array([_real(t, no) for t in vals]).reshape([cards[v] for v in scope])
            factors.append((scope, table))
        else:
            raise FormatError(f"unknown keyword {key!r}", no)
    if n is None or cards is None:
        raise FormatError("missing 'vars' or 'card'")
    try:
        return FactorGraph.build(cards, factors, phis)
    except GraphError as exc:
        raise FormatError(str(exc)) from None


def _fmt(v: float) -> str:
    return "inf" if v == math.inf else repr(float(v))


def serialize_model(g: FactorGraph) -> str:
    out = ["FGM 1", f"vars {g.n_vars}", "card " + " ".join(map(str, g.cards))]
    for i, phi in enumerate(g.phis):
        if np.any(phi != 0):
            out.append(f"phi {i} " + " ".join(_fmt(v) for v in phi))
    for f in g.factors:
        vals = " ".join(_fmt(v) for v in f.table.ravel())
        out.append(f"factor {len(f.scope)} " + " ".join(map(str, f.scope)) + " " + vals)
    return "\n".join(out) + "\n"


def parse_params(text: str, g: FactorGraph) -> SplitParams:
    """``cvar <i> <v>`` / ``cfac <a> <v>`` lines; anything unlisted is 1."""
    c_var = [1.0] * g.n_vars
    c_fac = [1.0] * g.n_factors
    for no, toks in _lines(text):
        if len(toks) != 3 or toks[0] not in ("cvar", "cfac"):
            raise FormatError("expected 'cvar <i> <value>' or 'cfac <f> <value>'", no)
        idx = _int(toks[1], no, "index")
        val = _real(toks[2], no)
        target, limit = (c_var, g.n_vars) if toks[0] == "cvar" else (c_fac, g.n_factors)
        if not 0 <= idx < limit:
            raise FormatError(f"{toks[0]} index {idx} out of range", no)
        if val == 0 or not math.isfinite(val):
            raise FormatError(f"{toks[0]} {idx}: value must be finite and nonzero", no)
        target[idx] = val
    c = SplitParams(tuple(c_var), tuple(c_fac))
    try:
        validate_params(c, g)
    except ParamsError as exc:
        raise FormatError(str(exc)) from None
    return c


def serialize_params(c: SplitParams) -> str:
    lines = [f"cvar {i} {v!r}" for i, v in enumerate(c.c_var)]
    lines += [f"cfac {a} {v!r}" for a, v in enumerate(c.c_fac)]
    return "\n".join(lines) + "\n"


def parse_trees(text: str) -> list[tuple[list[int], float]]:
    """``tree <probability> <factor ids...>`` per spanning tree."""
    trees = []
    for no, toks in _lines(text):
        if toks[0] != "tree" or len(toks) < 2:
            raise FormatError("expected 'tree <probability> <factor ids...>'", no)
        p = _real(toks[1], no)
        trees.append(([_int(t, no, "factor id") for t in toks[2:]], p))
    if not trees:
        raise FormatError("no trees listed")
    return trees


def trmp_params_from_text(text: str, g: FactorGraph) -> SplitParams:
    try:
        return make_trmp_params(g, parse_trees(text))
    except (ParamsError, GraphError) as exc:
        raise FormatError(str(exc)) from None
