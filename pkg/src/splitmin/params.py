"""Splitting parameters ``c``, conical weights ``d`` and optimality classification."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .graph import FactorGraph

# slack for floating-point sums such as 3 * (1/3) <= 1
SIGN_TOL = 1e-12


class ParamsError(ValueError):
    pass


@dataclass(frozen=True)
class SplitParams:
    c_var: tuple[float, ...]
    c_fac: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "c_var", tuple(float(v) for v in self.c_var))
        object.__setattr__(self, "c_fac", tuple(float(v) for v in self.c_fac))

    @classmethod
    def ones(cls, g: FactorGraph) -> "SplitParams":
        return cls((1.0,) * g.n_vars, (1.0,) * g.n_factors)

    def with_factor(self, a: int, value: float) -> "SplitParams":
        c_fac = list(self.c_fac)
        c_fac[a] = value
        return SplitParams(self.c_var, c_fac)

    def with_var(self, i: int, value: float) -> "SplitParams":
        c_var = list(self.c_var)
        c_var[i] = value
        return SplitParams(c_var, self.c_fac)

    def var_weight(self, g: FactorGraph, i: int) -> float:
        """Coefficient ``(1 - sum_{a in di} c_a) c_i`` of ``b_i`` in the reparameterization."""
        return (1.0 - sum(self.c_fac[a] for a in g.incidence[i])) * self.c_var[i]


@dataclass
class ConicalWeights:
    d_var: np.ndarray                     # d_ii
    d_fac: np.ndarray                     # d_aa
    d_edge: dict[tuple[int, int], float]  # (i, a) -> d_ia

    def __post_init__(self):
        if (np.asarray(self.d_var) < 0).any() or (np.asarray(self.d_fac) < 0).any():
            raise ParamsError("conical weights must be nonnegative")
        if any(v < 0 for v in self.d_edge.values()):
            raise ParamsError("conical weights must be nonnegative")


class Optimality(enum.Enum):
    GLOBAL_SIGN = "GlobalSign"
    GLOBAL_CONICAL = "GlobalConical"
    LOCAL_ONLY = "LocalOnly"
    NONE = "None"


@dataclass
class OptimalityClass:
    kind: Optimality
    async_convergent: bool
    standard_minsum: bool
    # human-readable reasons, keyed by condition name; empty list means satisfied
    failures: dict[str, list[str]] = field(default_factory=dict)

    @property
    def global_sign(self) -> bool:
        return self.kind is Optimality.GLOBAL_SIGN


def validate_params(c: SplitParams, g: FactorGraph) -> None:
    if len(c.c_var) != g.n_vars:
        raise ParamsError(f"{len(c.c_var)} variable parameters for {g.n_vars} variables")
    if len(c.c_fac) != g.n_factors:
        raise ParamsError(f"{len(c.c_fac)} factor parameters for {g.n_factors} factors")
    for name, vals in (("cvar", c.c_var), ("cfac", c.c_fac)):
        for k, v in enumerate(vals):
            if not np.isfinite(v):
                raise ParamsError(f"{name} {k}: value {v} is not finite")
            if v == 0:
                raise ParamsError(f"{name} {k}: value must be nonzero")


def make_uniform_params(g: FactorGraph) -> SplitParams:
    """``c_i = 1`` and ``c_a = 1/d`` with ``d`` the maximum variable degree."""
    if g.n_factors == 0:
        raise ParamsError("graph has no factors")
    d = g.max_degree
    return SplitParams((1.0,) * g.n_vars, (1.0 / d,) * g.n_factors)


def _check_spanning_forest(g: FactorGraph, edges: Sequence[int]) -> None:
    parent = list(range(g.n_vars))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for a in edges:
        if not 0 <= a < g.n_factors:
            raise ParamsError(f"tree references unknown factor {a}")
        i, j = g.factors[a].scope
        ri, rj = find(i), find(j)
        if ri == rj:
            raise ParamsError(f"tree edge set {sorted(edges)} contains a cycle")
        parent[ri] = rj
    if len(edges) != g.n_vars - len(g.components()):
        raise ParamsError(f"tree edge set {sorted(edges)} does not span the graph")


def _check_trmp_input(g: FactorGraph, trees) -> list[tuple[tuple[int, ...], float]]:
    if not g.is_pairwise():
        raise ParamsError("tree-reweighted parameters need a pairwise graph")
    out = []
    for edges, prob in trees:
        if prob < 0:
            raise ParamsError(f"negative tree probability {prob}")
        edges = tuple(sorted(int(a) for a in edges))
        _check_spanning_forest(g, edges)
        out.append((edges, float(prob)))
    if not out or abs(sum(p for _, p in out) - 1.0) > 1e-9:
        raise ParamsError("tree probabilities must sum to 1")
    return out


def make_trmp_params(g: FactorGraph, trees) -> SplitParams:
    """Edge-appearance probabilities of a distribution over spanning trees.

    ``trees`` is a list of ``(factor indices of the tree edges, probability)``.
    """
    trees = _check_trmp_input(g, trees)
    c_fac = np.zeros(g.n_factors)
    for edges, prob in trees:
        c_fac[list(edges)] += prob
    for a, v in enumerate(c_fac):
        if v <= 0:
            raise ParamsError(f"factor {a} appears in no tree with positive probability")
    return SplitParams((1.0,) * g.n_vars, c_fac)


def trmp_conical_weights(g: FactorGraph, trees) -> ConicalWeights:
    """Conical weights obtained by rooting every spanning tree.

    Each tree contributes its probability to ``d_rr`` at the root of every
    component and to ``d_{p(a), a}`` for each tree edge, where ``p(a)`` is the
    endpoint nearer the root.
    """
    trees = _check_trmp_input(g, trees)
    d_var = np.zeros(g.n_vars)
    d_edge: dict[tuple[int, int], float] = {}
    for edges, prob in trees:
        adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(g.n_vars)}
        for a in edges:
            i, j = g.factors[a].scope
            adj[i].append((a, j))
            adj[j].append((a, i))
        seen = set()
        for comp in g.components():
            root = comp[0]
            d_var[root] += prob
            seen.add(root)
            stack = [root]
            while stack:
                u = stack.pop()
                for a, w in adj[u]:
                    if w not in seen:
                        seen.add(w)
                        d_edge[(u, a)] = d_edge.get((u, a), 0.0) + prob
                        stack.append(w)
    return ConicalWeights(d_var, np.zeros(g.n_factors), d_edge)


def _local_slice_ok(c: SplitParams, g: FactorGraph, i: int) -> str | None:
    # slice (1 - S) c_i b_i + sum_a c_a b_a needs d_aa + d_ia = c_a and
    # d_ii - sum d_ia = (1 - S) c_i with all d >= 0; feasible iff every c_a > 0
    # and (1 - S) c_i + S >= 0
    for a in g.incidence[i]:
        if c.c_fac[a] <= 0:
            return f"factor {a} at variable {i}: c_α = {c.c_fac[a]:g} ≤ 0"
    s = sum(c.c_fac[a] for a in g.incidence[i])
    slack = c.var_weight(g, i) + s
    if slack < -SIGN_TOL:
        return f"variable {i}: (1 − Σc_α)c_i + Σc_α = {slack:g} < 0"
    return None


def find_conical_weights(c: SplitParams, g: FactorGraph) -> ConicalWeights | None:
    """Any nonnegative ``d`` reproducing the coefficients of ``c``, via an LP feasibility solve."""
    edges = [(i, a) for a, fac in enumerate(g.factors) for i in fac.scope]
    n, m, e = g.n_vars, g.n_factors, len(edges)
    nv = n + m + e
    A = np.zeros((n + m, nv))
    rhs = np.zeros(n + m)
    for i in range(n):
        A[i, i] = 1.0
        rhs[i] = c.var_weight(g, i)
    for a in range(m):
        A[n + a, n + a] = 1.0
        rhs[n + a] = c.c_fac[a]
    for k, (i, a) in enumerate(edges):
        A[i, n + m + k] = -1.0
        A[n + a, n + m + k] = 1.0
    res = linprog(np.zeros(nv), A_eq=A, b_eq=rhs, bounds=[(0, None)] * nv, method="highs")
    if res.status != 0:
        return None
    x = np.clip(res.x, 0.0, None)
    return ConicalWeights(x[:n], x[n:n + m], {ed: float(x[n + m + k]) for k, ed in enumerate(edges)})


def classify_params(c: SplitParams, g: FactorGraph) -> OptimalityClass:
    validate_params(c, g)
    failures: dict[str, list[str]] = {}

    sign = []
    for a, v in enumerate(c.c_fac):
        if v <= 0:
            sign.append(f"factor {a}: c_α = {v:g} ≤ 0".replace("= -", "= −"))
    for i in range(g.n_vars):
        w = c.var_weight(g, i)
        if w < -SIGN_TOL:
            sign.append(f"variable {i}: (1 − Σc_α)c_i = {w:g}".replace("= -", "= −"))
    failures["GlobalSign"] = sign

    local = [msg for i in range(g.n_vars) if (msg := _local_slice_ok(c, g, i))]
    failures["LocalOnly"] = local

    conical = []
    if sign and find_conical_weights(c, g) is None:
        conical.append("no nonnegative conical weights reproduce c")
    failures["GlobalConical"] = conical

    if not sign:
        kind = Optimality.GLOBAL_SIGN
    elif not conical:
        kind = Optimality.GLOBAL_CONICAL
    elif not local:
        kind = Optimality.LOCAL_ONLY
    else:
        kind = Optimality.NONE

    async_ok = (
        all(v == 1.0 for v in c.c_var)
        and all(v > 0 for v in c.c_fac)
        and all(sum(c.c_fac[a] for a in g.incidence[i]) <= 1.0 + SIGN_TOL for i in range(g.n_vars))
    )
    standard = all(v == 1.0 for v in c.c_var) and all(v == 1.0 for v in c.c_fac)
    return OptimalityClass(kind, async_ok, standard, failures)


def params_from_conical(d: ConicalWeights, g: FactorGraph, tol: float = 1e-12) -> SplitParams:
    """``c_a = d_aa + sum_i d_ia``; ``c_i = (d_ii - sum_a d_ia) / (1 - sum_a c_a)``.

    When the denominator vanishes the numerator must vanish too and ``c_i`` is
    set to 1.
    """
    c_fac = []
    for a, fac in enumerate(g.factors):
        v = d.d_fac[a] + sum(d.d_edge.get((i, a), 0.0) for i in fac.scope)
        if v == 0:
            raise ParamsError(f"factor {a}: c_a = 0")
        c_fac.append(float(v))
    c_var = []
    for i in range(g.n_vars):
        num = d.d_var[i] - sum(d.d_edge.get((i, a), 0.0) for a in g.incidence[i])
        den = 1.0 - sum(c_fac[a] for a in g.incidence[i])
        if abs(den) <= tol:
            if abs(num) > tol:
                raise ParamsError(
                    f"variable {i}: 1 - sum c_a = 0 but d_ii - sum d_ia = {num:g}"
                )
            c_var.append(1.0)
            continue
        v = num / den
        if v == 0:
            raise ParamsError(f"variable {i}: c_i = 0")
        c_var.append(float(v))
    return SplitParams(c_var, c_fac)


def conical_from_params(c: SplitParams, g: FactorGraph) -> ConicalWeights | None:
    """Canonical weights ``d_aa = c_a``, ``d_ia = 0``, ``d_ii = (1 - sum c_a) c_i`` under GlobalSign."""
    if classify_params(c, g).kind is not Optimality.GLOBAL_SIGN:
        return None
    d_var = np.array([max(c.var_weight(g, i), 0.0) for i in range(g.n_vars)])
    d_edge = {(i, a): 0.0 for a, fac in enumerate(g.factors) for i in fac.scope}
    return ConicalWeights(d_var, np.array(c.c_fac, dtype=float), d_edge)


def conical_coefficients(d: ConicalWeights, g: FactorGraph) -> tuple[np.ndarray, np.ndarray]:
    """Net coefficients of ``b_i`` and ``b_a`` in the conical form ``d``."""
    var = np.array([
        d.d_var[i] - sum(d.d_edge.get((i, a), 0.0) for a in g.incidence[i])
        for i in range(g.n_vars)
    ])
    fac = np.array([
        d.d_fac[a] + sum(d.d_edge.get((i, a), 0.0) for i in fac.scope)
        for a, fac in enumerate(g.factors)
    ])
    return var, fac
