"""Message storage shared by the engine, beliefs and cover code."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import FactorGraph


class InfiniteMessageError(RuntimeError):
    """A message update produced a non-finite entry."""


@dataclass
class MessageState:
    """Messages indexed by ``[factor][position in scope]``.

    ``to_factor[a][p]`` is ``m_{i->a}`` and ``to_var[a][p]`` is ``m_{a->i}``
    for ``i = scope(a)[p]``; both are vectors over the alphabet of ``i``.
    """

    to_factor: list[list[np.ndarray]]
    to_var: list[list[np.ndarray]]

    def copy(self) -> "MessageState":
        return MessageState(
            [[m.copy() for m in row] for row in self.to_factor],
            [[m.copy() for m in row] for row in self.to_var],
        )

    def is_finite(self) -> bool:
        return all(
            np.isfinite(m).all() for rows in (self.to_factor, self.to_var) for row in rows for m in row
        )

    def max_abs_diff(self, other: "MessageState") -> float:
        diff = 0.0
        for r1, r2 in ((self.to_factor, other.to_factor), (self.to_var, other.to_var)):
            for row1, row2 in zip(r1, r2):
                for m1, m2 in zip(row1, row2):
                    diff = max(diff, float(np.max(np.abs(m1 - m2))))
        return diff

    def to_json(self) -> dict:
        return {
            "to_factor": [[m.tolist() for m in row] for row in self.to_factor],
            "to_var": [[m.tolist() for m in row] for row in self.to_var],
        }

    @classmethod
    def from_json(cls, data: dict, g: FactorGraph) -> "MessageState":
        state = cls(
            [[np.asarray(m, dtype=float) for m in row] for row in data["to_factor"]],
            [[np.asarray(m, dtype=float) for m in row] for row in data["to_var"]],
        )
        for rows in (state.to_factor, state.to_var):
            if len(rows) != g.n_factors:
                raise ValueError("message state does not match the graph's factor count")
            for a, row in enumerate(rows):
                scope = g.factors[a].scope
                if len(row) != len(scope):
                    raise ValueError(f"factor {a}: wrong number of messages")
                for p, m in enumerate(row):
                    if m.shape != (g.cards[scope[p]],):
                        raise ValueError(f"factor {a}, position {p}: wrong message length")
        return state


def init_messages(g: FactorGraph) -> MessageState:
    """All-zero messages on every incidence."""
    zeros = [[np.zeros(g.cards[v]) for v in fac.scope] for fac in g.factors]
    return MessageState(zeros, [[m.copy() for m in row] for row in zeros])


def random_messages(g: FactorGraph, rng: np.random.Generator, scale: float = 1.0) -> MessageState:
    return MessageState(
        [[rng.normal(scale=scale, size=g.cards[v]) for v in fac.scope] for fac in g.factors],
        [[rng.normal(scale=scale, size=g.cards[v]) for v in fac.scope] for fac in g.factors],
    )


def normalize(vec: np.ndarray) -> np.ndarray:
    """Shift ``vec`` so its minimum is 0; reject any non-finite entry."""
    if not np.isfinite(vec).all():
        raise InfiniteMessageError(f"non-finite message entries: {vec}")
    return vec - vec.min()
