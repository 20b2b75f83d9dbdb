"""Pairwise binary models: the collapsed variable-to-variable update and partial-solution extension."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .beliefs import DEFAULT_TIE_TOL, BeliefSet, argmin_set
from .graph import DEFAULT_STATE_CAP, FactorGraph, GraphError, StateSpaceTooLarge
from .messages import MessageState, normalize
from .params import SplitParams


@dataclass
class PairwiseModel:
    phi: np.ndarray                 # (n, 2)
    edges: list[tuple[int, int]]
    psi: list[np.ndarray]           # 2x2 per edge, indexed [x_i, x_j]
    c_edge: np.ndarray

    def __post_init__(self):
        if (self.c_edge == 0).any():
            raise ValueError("edge parameters must be nonzero")
        self.incident: list[list[int]] = [[] for _ in range(len(self.phi))]
        for e, (i, j) in enumerate(self.edges):
            self.incident[i].append(e)
            self.incident[j].append(e)

    @classmethod
    def from_graph(cls, g: FactorGraph, c: SplitParams | None = None) -> "PairwiseModel":
        if not (g.is_pairwise() and g.is_binary()):
            raise GraphError("graph is not pairwise binary")
        if c is None:
            c = SplitParams.ones(g)
        if any(v != 1.0 for v in c.c_var):
            raise ValueError("pairwise updates assume c_i = 1 for every variable")
        return cls(
            np.array(g.phis, dtype=float),
            [f.scope for f in g.factors],
            [f.table for f in g.factors],
            np.array(c.c_fac, dtype=float),
        )

    def to_graph(self) -> FactorGraph:
        return FactorGraph.build([2] * len(self.phi), list(zip(self.edges, self.psi)), list(self.phi))

    def params(self) -> SplitParams:
        return SplitParams((1.0,) * len(self.phi), self.c_edge)

    def zero_messages(self) -> np.ndarray:
        """``msgs[e, 0]`` is ``m_{i->j}(x_j)`` and ``msgs[e, 1]`` is ``m_{j->i}(x_i)`` for ``e = (i, j)``."""
        return np.zeros((len(self.edges), 2, 2))


def _incoming(model: PairwiseModel, msgs: np.ndarray, e: int, i: int) -> np.ndarray:
    """Message arriving at ``i`` along edge ``e``."""
    return msgs[e, 0] if model.edges[e][1] == i else msgs[e, 1]


def pairwise_update(model: PairwiseModel, msgs: np.ndarray, e: int, src: int) -> np.ndarray:
    """New ``m_{src->dst}`` along edge ``e``, min-normalized."""
    i, j = model.edges[e]
    if src not in (i, j):
        raise ValueError(f"variable {src} is not an endpoint of edge {e}")
    psi = model.psi[e] if src == i else model.psi[e].T   # indexed [x_src, x_dst]
    c = model.c_edge[e]
    inner = model.phi[src] + (c - 1.0) * _incoming(model, msgs, e, src)
    for f in model.incident[src]:
        if f != e:
            inner = inner + model.c_edge[f] * _incoming(model, msgs, f, src)
    return normalize((psi / c + inner[:, None]).min(axis=0))


def pairwise_sync_step(model: PairwiseModel, msgs: np.ndarray) -> np.ndarray:
    new = msgs.copy()
    for e, (i, j) in enumerate(model.edges):
        new[e, 0] = pairwise_update(model, msgs, e, i)
        new[e, 1] = pairwise_update(model, msgs, e, j)
    return new


def pairwise_variable_beliefs(model: PairwiseModel, msgs: np.ndarray) -> np.ndarray:
    b = model.phi.copy()
    for e, (i, j) in enumerate(model.edges):
        b[i] += model.c_edge[e] * msgs[e, 1]
        b[j] += model.c_edge[e] * msgs[e, 0]
    return b


def messages_from_state(model: PairwiseModel, state: MessageState) -> np.ndarray:
    msgs = model.zero_messages()
    for e in range(len(model.edges)):
        msgs[e, 0] = state.to_var[e][1]
        msgs[e, 1] = state.to_var[e][0]
    return msgs


def state_from_messages(model: PairwiseModel, msgs: np.ndarray) -> MessageState:
    """Engine message state whose factor-to-variable messages equal ``msgs``.

    Variable-to-factor messages are left at zero; the beliefs only depend on
    the factor-to-variable side.
    """
    to_var = [[msgs[e, 1].copy(), msgs[e, 0].copy()] for e in range(len(model.edges))]
    to_factor = [[np.zeros(2), np.zeros(2)] for _ in model.edges]
    return MessageState(to_factor, to_var)


@dataclass
class PartialExtension:
    fixed: dict[int, int]
    assignment: tuple[int, ...] | None
    value: float | None = None
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.assignment is not None


def extend_partial_solution(
    g: FactorGraph,
    b: BeliefSet,
    tie_tol: float = DEFAULT_TIE_TOL,
    const_tol: float = 1e-9,
    cap: int = DEFAULT_STATE_CAP,
) -> PartialExtension:
    """Complete the variables with a unique belief argmin into a global minimizer.

    Applies when every variable sharing a factor with a fixed variable is either
    fixed itself or has a constant belief.  The completion is found by
    exhaustive search over the free variables with the fixed ones clamped.
    """
    if not (g.is_pairwise() and g.is_binary()):
        raise GraphError("partial-solution extension needs a pairwise binary graph")
    fixed = {}
    for i, v in enumerate(b.b_var):
        s = argmin_set(v, tie_tol)
        if len(s) == 1:
            fixed[i] = s[0]
    violations = []
    for a, f in enumerate(g.factors):
        for i in f.scope:
            if i not in fixed:
                continue
            for j in f.scope:
                if j == i or j in fixed:
                    continue
                spread = float(b.b_var[j].max() - b.b_var[j].min())
                if not spread <= const_tol:
                    violations.append(
                        f"variable {j} shares factor {a} with fixed variable {i} "
                        f"but its belief is not constant (spread {spread:.3g})"
                    )
    if violations:
        return PartialExtension(fixed, None, violations=violations)

    free = [i for i in range(g.n_vars) if i not in fixed]
    if 2 ** len(free) > cap:
        raise StateSpaceTooLarge(f"{2 ** len(free)} free states exceed cap {cap}")
    best, best_x = np.inf, None
    x = [0] * g.n_vars
    for i, s in fixed.items():
        x[i] = s
    for states in itertools.product((0, 1), repeat=len(free)):
        for i, s in zip(free, states):
            x[i] = s
        val = g.evaluate(x)
        if val < best:
            best, best_x = val, tuple(x)
    if best_x is None:
        return PartialExtension(fixed, None, violations=["no completion has finite objective"])
    return PartialExtension(fixed, best_x, best)
