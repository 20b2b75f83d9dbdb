"""Named example graphs, random generators and a plain-loop reference min-sum."""

from __future__ import annotations

import itertools

import numpy as np

from splitmin.graph import FactorGraph
from splitmin.params import SplitParams

EQ = [[1.0, 0.0], [0.0, 1.0]]  # 1 when the endpoints agree


def g1() -> FactorGraph:
    """f = x1 + x2 + x1*x2 on {0,1}^2."""
    return FactorGraph.build([2, 2], [((0, 1), [[0, 0], [0, 1]])], [[0, 1], [0, 1]])


def g2(field=None) -> FactorGraph:
    """Frustrated triangle: each edge costs 1 when its endpoints agree."""
    phis = {0: field} if field is not None else None
    return FactorGraph.build([2, 2, 2], [((0, 1), EQ), ((1, 2), EQ), ((0, 2), EQ)], phis)


def g3() -> FactorGraph:
    """Three-variable binary chain with integer potentials and a unique minimizer."""
    return FactorGraph.build(
        [2, 2, 2],
        [((0, 1), [[0, 2], [3, 1]]), ((1, 2), [[2, 0], [1, 3]])],
        [[1, 0], [0, 2], [0, 1]],
    )


def six_cycle() -> FactorGraph:
    """The connected 2-cover of g2: a 6-cycle of agree-penalty edges."""
    edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]
    return FactorGraph.build([2] * 6, [(e, EQ) for e in edges])


# --- random generators ----------------------------------------------------


def _table(rng, shape, integer=False, inf_prob=0.0):
    t = rng.integers(-3, 4, size=shape).astype(float) if integer else rng.normal(size=shape)
    if inf_prob:
        mask = rng.random(shape) < inf_prob
        t[mask] = np.inf
        if np.isinf(t).all():
            t.flat[0] = 0.0
    return t


def random_graph(rng, n_max=5, card_max=3, max_scope=3, integer=False, min_n=2, state_cap=4096):
    """Connected-ish random factor graph with mixed scope sizes and duplicate scopes allowed."""
    while True:
        n = int(rng.integers(min_n, n_max + 1))
        cards = [int(rng.integers(2, card_max + 1)) for _ in range(n)]
        if np.prod(cards) <= state_cap:
            break
    facs = []
    # spanning chain first so the graph is connected, then extra factors
    for i in range(1, n):
        j = int(rng.integers(0, i))
        facs.append(((j, i), _table(rng, (cards[j], cards[i]), integer)))
    for _ in range(int(rng.integers(1, n + 2))):
        m = int(rng.integers(1, min(max_scope, n) + 1))
        scope = tuple(int(v) for v in rng.choice(n, size=m, replace=False))
        facs.append((scope, _table(rng, tuple(cards[v] for v in scope), integer)))
    phis = [_table(rng, (k,), integer) for k in cards]
    return FactorGraph.build(cards, facs, phis)


def random_tree(rng, n_max=8, card_max=4, integer=False):
    """Random tree-structured factor graph (bipartite graph acyclic, connected)."""
    n = int(rng.integers(2, n_max + 1))
    cards = [int(rng.integers(2, card_max + 1)) for _ in range(n)]
    facs = []
    placed = 1
    while placed < n:
        anchor = int(rng.integers(0, placed))
        fresh = min(int(rng.integers(1, 3)), n - placed)
        scope = (anchor, *range(placed, placed + fresh))
        placed += fresh
        facs.append((scope, _table(rng, tuple(cards[v] for v in scope), integer)))
    for _ in range(int(rng.integers(0, 3))):  # unary factors keep it a tree
        v = int(rng.integers(0, n))
        facs.append(((v,), _table(rng, (cards[v],), integer)))
    phis = [_table(rng, (k,), integer) for k in cards]
    return FactorGraph.build(cards, facs, phis)


def random_loopy(rng, n_max=6, card_max=3, integer=True):
    """Pairwise graph containing at least one cycle."""
    while True:
        g = random_graph(rng, n_max=n_max, card_max=card_max, max_scope=2, integer=integer, min_n=3)
        if not g.is_tree():
            return g


def random_pairwise_binary(rng, n_min=3, n_max=6, integer=True):
    n = int(rng.integers(n_min, n_max + 1))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chain = [(i - 1, i) for i in range(1, n)]
    extra = [p for p in pairs if p not in chain]
    k = int(rng.integers(0, len(extra) + 1))
    picked = [extra[t] for t in rng.choice(len(extra), size=k, replace=False)] if k else []
    edges = sorted(chain + picked)
    facs = [(e, _table(rng, (2, 2), integer)) for e in edges]
    return FactorGraph.build([2] * n, facs, [_table(rng, (2,), integer) for _ in range(n)])


def random_params(rng, g, positive=True, lo=0.3, hi=2.0):
    def draw():
        v = float(rng.uniform(lo, hi))
        return v if positive or rng.random() < 0.7 else -v

    return SplitParams(tuple(draw() for _ in range(g.n_vars)), tuple(draw() for _ in range(g.n_factors)))


# --- reference standard min-sum (plain loops, no shared code with the engine) ---


def reference_minsum(g: FactorGraph, t: int):
    """Messages of standard min-sum after each of ``t`` synchronous rounds from zero.

    Returns a list (index = round) of dicts ``{("v2f", a, i): vec, ("f2v", a, i): vec}``,
    every vector shifted to minimum 0.
    """
    def shift(v):
        v = np.asarray(v, dtype=float)
        return v - v.min()

    msgs = {}
    for a, fac in enumerate(g.factors):
        for i in fac.scope:
            msgs[("v2f", a, i)] = np.zeros(g.cards[i])
            msgs[("f2v", a, i)] = np.zeros(g.cards[i])
    history = [dict(msgs)]
    for _ in range(t):
        new = {}
        for a, fac in enumerate(g.factors):
            for i in fac.scope:
                out = np.array(g.phis[i], dtype=float)
                for b, other in enumerate(g.factors):
                    if b != a and i in other.scope:
                        out = out + msgs[("f2v", b, i)]
                new[("v2f", a, i)] = shift(out)

                p = fac.scope.index(i)
                best = np.full(g.cards[i], np.inf)
                for x in itertools.product(*(range(g.cards[v]) for v in fac.scope)):
                    val = fac.table[x]
                    for q, k in enumerate(fac.scope):
                        if q != p:
                            val = val + msgs[("v2f", a, k)][x[q]]
                    best[x[p]] = min(best[x[p]], val)
                new[("f2v", a, i)] = shift(best)
        msgs = new
        history.append(dict(msgs))
    return history


def brute_min_marginal(g: FactorGraph, i: int) -> np.ndarray:
    """Min-marginal by direct enumeration through ``g.evaluate``."""
    out = np.full(g.cards[i], np.inf)
    for x in itertools.product(*(range(k) for k in g.cards)):
        out[x[i]] = min(out[x[i]], g.evaluate(x))
    return out


def brute_min(g: FactorGraph):
    best, arg = np.inf, []
    for x in itertools.product(*(range(k) for k in g.cards)):
        v = g.evaluate(x)
        if v < best - 1e-12:
            best, arg = v, [x]
        elif abs(v - best) <= 1e-12:
            arg.append(x)
    return best, arg
