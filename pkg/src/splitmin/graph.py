"""Factor graphs over finite alphabets, objective evaluation and exhaustive oracles.

Potential tables are dense numpy arrays whose axes follow the factor scope, so a
flattened table is row-major with the last scope variable varying fastest.
Entries may be ``+inf`` (hard constraints); ``-inf`` and NaN are rejected.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DEFAULT_STATE_CAP = 2 ** 24


class GraphError(ValueError):
    """Raised when a factor graph, scope or assignment is malformed."""


class StateSpaceTooLarge(RuntimeError):
    """Raised when an exhaustive oracle would exceed the configured state cap."""


def _as_table(values, shape: tuple[int, ...], what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    expected = int(np.prod(shape)) if shape else 1
    if arr.size != expected:
        raise GraphError(f"{what}: table has {arr.size} entries, expected {expected}")
    arr = arr.reshape(shape).copy()
    if np.isnan(arr).any():
        raise GraphError(f"{what}: NaN entry")
    if np.isneginf(arr).any():
        raise GraphError(f"{what}: -inf entry")
    if not np.isfinite(arr).any():
        raise GraphError(f"{what}: every entry is +inf")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Factor:
    scope: tuple[int, ...]
    table: np.ndarray

    @property
    def size(self) -> int:
        return len(self.scope)


@dataclass(frozen=True, eq=False)
class FactorGraph:
    """Objective ``f(x) = sum_i phi_i(x_i) + sum_a psi_a(x_a)`` over a multiset of factors.

    Instances are immutable.  Build them with :meth:`build`, which validates the
    scopes and tables and computes the incidence lists.
    """

    cards: tuple[int, ...]
    phis: tuple[np.ndarray, ...]
    factors: tuple[Factor, ...]
    incidence: tuple[tuple[int, ...], ...] = field(repr=False)

    @classmethod
    def build(
        cls,
        cards: Sequence[int],
        factors: Iterable[tuple[Sequence[int], object]] = (),
        phis: Sequence[object] | dict[int, object] | None = None,
    ) -> "FactorGraph":
        cards = tuple(int(k) for k in cards)
        if not cards:
            raise GraphError("graph has no variables")
        for i, k in enumerate(cards):
            if k < 1:
                raise GraphError(f"variable {i}: cardinality {k} < 1")
        n = len(cards)

        phi_list: list[np.ndarray] = []
        if phis is None:
            phis = {}
        if isinstance(phis, dict):
            for i in phis:
                if not 0 <= i < n:
                    raise GraphError(f"self-potential for unknown variable {i}")
            src = [phis.get(i) for i in range(n)]
        else:
            if len(phis) != n:
                raise GraphError(f"{len(phis)} self-potentials for {n} variables")
            src = list(phis)
        for i, p in enumerate(src):
            if p is None:
                p = np.zeros(cards[i])
            phi_list.append(_as_table(p, (cards[i],), f"phi_{i}"))

        fac_list: list[Factor] = []
        for a, (scope, table) in enumerate(factors):
            scope = tuple(int(v) for v in scope)
            if not scope:
                raise GraphError(f"factor {a}: empty scope")
            for v in scope:
                if not 0 <= v < n:
                    raise GraphError(f"factor {a}: unknown variable {v}")
            if len(set(scope)) != len(scope):
                raise GraphError(f"factor {a}: repeated variable in scope {scope}")
            shape = tuple(cards[v] for v in scope)
            fac_list.append(Factor(scope, _as_table(table, shape, f"factor {a}")))

        inc: list[list[int]] = [[] for _ in range(n)]
        for a, fac in enumerate(fac_list):
            for v in fac.scope:
                inc[v].append(a)
        return cls(cards, tuple(phi_list), tuple(fac_list), tuple(tuple(x) for x in inc))

    @property
    def n_vars(self) -> int:
        return len(self.cards)

    @property
    def n_factors(self) -> int:
        return len(self.factors)

    @property
    def max_degree(self) -> int:
        return max((len(x) for x in self.incidence), default=0)

    @property
    def n_states(self) -> int:
        return int(np.prod([float(k) for k in self.cards]))

    def edges(self) -> list[tuple[int, int]]:
        """All (factor, position) incidences in factor order."""
        return [(a, p) for a, fac in enumerate(self.factors) for p in range(fac.size)]

    def position(self, a: int, i: int) -> int:
        return self.factors[a].scope.index(i)

    def is_pairwise(self) -> bool:
        return all(f.size == 2 for f in self.factors)

    def is_binary(self) -> bool:
        return all(k == 2 for k in self.cards)

    def is_tree(self) -> bool:
        """True when the bipartite factor graph is acyclic (a forest)."""
        # union-find over variable nodes and factor nodes
        parent = list(range(self.n_vars + self.n_factors))

        def find(u: int) -> int:
            while parent[u] != u:
                parent[u] = parent[parent[u]]
                u = parent[u]
            return u

        for a, fac in enumerate(self.factors):
            fa = self.n_vars + a
            for v in fac.scope:
                r1, r2 = find(fa), find(v)
                if r1 == r2:
                    return False
                parent[r1] = r2
        return True

    def components(self) -> list[list[int]]:
        """Connected components as sorted lists of variable ids."""
        parent = list(range(self.n_vars))

        def find(u: int) -> int:
            while parent[u] != u:
                parent[u] = parent[parent[u]]
                u = parent[u]
            return u

        for fac in self.factors:
            for v in fac.scope[1:]:
                parent[find(v)] = find(fac.scope[0])
        groups: dict[int, list[int]] = {}
        for v in range(self.n_vars):
            groups.setdefault(find(v), []).append(v)
        return sorted(groups.values())

    def structurally_equal(self, other: "FactorGraph") -> bool:
        if self.cards != other.cards or self.n_factors != other.n_factors:
            return False
        if any(not np.array_equal(p, q) for p, q in zip(self.phis, other.phis)):
            return False
        return all(
            f.scope == h.scope and np.array_equal(f.table, h.table)
            for f, h in zip(self.factors, other.factors)
        )

    # ------------------------------------------------------------------
    # objective

    def check_assignment(self, x: Sequence[int]) -> tuple[int, ...]:
        x = tuple(int(v) for v in x)
        if len(x) != self.n_vars:
            raise GraphError(f"assignment has {len(x)} entries, graph has {self.n_vars} variables")
        for i, (v, k) in enumerate(zip(x, self.cards)):
            if not 0 <= v < k:
                raise GraphError(f"variable {i}: state {v} outside alphabet of size {k}")
        return x

    def evaluate(self, x: Sequence[int]) -> float:
        x = self.check_assignment(x)
        total = 0.0
        for i, phi in enumerate(self.phis):
            total += phi[x[i]]
        for fac in self.factors:
            total += fac.table[tuple(x[v] for v in fac.scope)]
        return float(total)

    def broadcast(self, table: np.ndarray, scope: Sequence[int]) -> np.ndarray:
        """View ``table`` over ``scope`` as an array broadcastable to the joint space."""
        order = np.argsort(scope)
        t = np.transpose(table, order)
        shape = [1] * self.n_vars
        for v in scope:
            shape[v] = self.cards[v]
        return t.reshape(shape)

    def joint_table(self, cap: int = DEFAULT_STATE_CAP) -> np.ndarray:
        """Objective value at every joint state, axes in variable order."""
        if self.n_states > cap:
            raise StateSpaceTooLarge(f"{self.n_states} joint states exceed cap {cap}")
        f = np.zeros(self.cards)
        for i, phi in enumerate(self.phis):
            f = f + self.broadcast(phi, (i,))
        for fac in self.factors:
            f = f + self.broadcast(fac.table, fac.scope)
        return f


@dataclass
class GraphReport:
    ok: bool
    pairwise: bool = False
    binary: bool = False
    tree: bool = False
    max_degree: int = 0
    errors: list[str] = field(default_factory=list)


def validate_graph(g: FactorGraph) -> GraphReport:
    """Re-check the invariants of ``g`` and summarize its structure."""
    errors = []
    if g.n_vars == 0:
        errors.append("graph has no variables")
    for i, phi in enumerate(g.phis):
        if phi.shape != (g.cards[i],):
            errors.append(f"phi_{i}: shape {phi.shape} does not match cardinality {g.cards[i]}")
    for a, fac in enumerate(g.factors):
        if any(not 0 <= v < g.n_vars for v in fac.scope):
            errors.append(f"factor {a}: unknown variable in scope {fac.scope}")
            continue
        if len(set(fac.scope)) != len(fac.scope):
            errors.append(f"factor {a}: repeated variable in scope {fac.scope}")
        shape = tuple(g.cards[v] for v in fac.scope)
        if fac.table.shape != shape:
            errors.append(f"factor {a}: table shape {fac.table.shape} != {shape}")
    for i, inc in enumerate(g.incidence):
        if sorted(inc) != [a for a, f in enumerate(g.factors) if i in f.scope]:
            errors.append(f"variable {i}: incidence list inconsistent with scopes")
    if errors:
        return GraphReport(False, errors=errors)
    return GraphReport(True, g.is_pairwise(), g.is_binary(), g.is_tree(), g.max_degree)


def evaluate_objective(g: FactorGraph, x: Sequence[int]) -> float:
    return g.evaluate(x)


def brute_force_minimize(
    g: FactorGraph, cap: int = DEFAULT_STATE_CAP, atol: float = 1e-9
) -> tuple[float, list[tuple[int, ...]]]:
    """Exhaustive minimum and every assignment attaining it (within ``atol``)."""
    f = g.joint_table(cap)
    best = float(f.min())
    if not np.isfinite(best):
        raise GraphError("objective is +inf everywhere")
    idx = np.argwhere(f <= best + atol)
    return best, [tuple(int(v) for v in row) for row in idx]


def oracle_min_marginals(g: FactorGraph, i: int, cap: int = DEFAULT_STATE_CAP) -> np.ndarray:
    """``f_i(x_i) = min over x with x_i fixed`` of the objective."""
    if not 0 <= i < g.n_vars:
        raise GraphError(f"unknown variable {i}")
    f = g.joint_table(cap)
    if not np.isfinite(f).any():
        raise GraphError("objective is +inf everywhere")
    axes = tuple(v for v in range(g.n_vars) if v != i)
    return f.min(axis=axes) if axes else f.copy()


def split_factor_graph(g: FactorGraph, a: int, k: int) -> FactorGraph:
    """Replace factor ``a`` by ``k`` copies carrying ``psi_a / k`` each.

    The copies take the place of ``a`` in the factor order, so factor ``a``
    becomes factors ``a .. a+k-1`` and later factors shift by ``k-1``.
    """
    if not 0 <= a < g.n_factors:
        raise GraphError(f"unknown factor {a}")
    if k < 1:
        raise GraphError(f"split count {k} < 1")
    if k == 1:
        return g
    facs: list[tuple[tuple[int, ...], np.ndarray]] = []
    for b, fac in enumerate(g.factors):
        if b == a:
            facs.extend((fac.scope, fac.table / k) for _ in range(k))
        else:
            facs.append((fac.scope, fac.table))
    return FactorGraph.build(g.cards, facs, g.phis)


def split_variable_graph(g: FactorGraph, i: int, k: int) -> FactorGraph:
    """Replace variable ``i`` by ``k`` copies tied together through every factor on ``i``.

    Copy 0 keeps id ``i``; copies 1..k-1 get ids ``n .. n+k-2``.  Each copy
    carries ``phi_i / k``.  A factor containing ``i`` gets all copies in its
    scope (inserted right after ``i``) with ``+inf`` wherever they disagree.
    """
    if not 0 <= i < g.n_vars:
        raise GraphError(f"unknown variable {i}")
    if k < 1:
        raise GraphError(f"split count {k} < 1")
    if k == 1:
        return g
    n = g.n_vars
    copies = [i] + list(range(n, n + k - 1))
    card = g.cards[i]
    cards = list(g.cards) + [card] * (k - 1)
    phis = list(g.phis) + [None] * (k - 1)
    for v in copies:
        phis[v] = g.phis[i] / k

    # 0 where all k copies agree, +inf elsewhere; axes are the k copies
    tie = np.full((card,) * k, np.inf)
    for s in range(card):
        tie[(s,) * k] = 0.0

    facs = []
    for fac in g.factors:
        if i not in fac.scope:
            facs.append((fac.scope, fac.table))
            continue
        p = fac.scope.index(i)
        scope = fac.scope[: p + 1] + tuple(copies[1:]) + fac.scope[p + 1:]
        # insert k-1 new axes after position p, then add the tie indicator
        t = fac.table.reshape(fac.table.shape[: p + 1] + (1,) * (k - 1) + fac.table.shape[p + 1:])
        tie_shape = (1,) * p + (card,) * k + (1,) * (fac.size - p - 1)
        facs.append((scope, t + tie.reshape(tie_shape)))
    return FactorGraph.build(cards, facs, phis)


def all_assignments(g: FactorGraph) -> Iterable[tuple[int, ...]]:
    return itertools.product(*(range(k) for k in g.cards))
