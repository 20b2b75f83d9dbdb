"""Graph covers of factor graphs and the 2-cover certificate for pairwise binary models."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .beliefs import DEFAULT_TIE_TOL, BeliefSet, argmin_set, check_min_consistent
from .graph import FactorGraph, GraphError
from .params import SplitParams


@dataclass(frozen=True, eq=False)
class CoverMap:
    """Covering map ``h`` from ``cover`` onto ``base``.

    ``var_map[v]`` is the base variable copied by cover variable ``v`` and
    ``fac_map[a]`` the base factor copied by cover factor ``a``.
    """

    base: FactorGraph
    cover: FactorGraph
    var_map: tuple[int, ...]
    fac_map: tuple[int, ...]


@dataclass
class CoverReport:
    ok: bool
    k: int | None
    violations: list[str] = field(default_factory=list)


def verify_cover(cm: CoverMap, k: int | None = None) -> CoverReport:
    G, H = cm.base, cm.cover
    bad: list[str] = []
    if len(cm.var_map) != H.n_vars or len(cm.fac_map) != H.n_factors:
        return CoverReport(False, None, ["map sizes do not match the cover graph"])
    for v, u in enumerate(cm.var_map):
        if not 0 <= u < G.n_vars:
            bad.append(f"variable {v} maps to unknown variable {u}")
        elif H.cards[v] != G.cards[u] or not np.array_equal(H.phis[v], G.phis[u]):
            bad.append(f"variable {v}: alphabet or self-potential differs from variable {u}")
    for a, b in enumerate(cm.fac_map):
        if not 0 <= b < G.n_factors:
            bad.append(f"factor {a} maps to unknown factor {b}")
            continue
        hs, gs = H.factors[a].scope, G.factors[b].scope
        if len(hs) != len(gs) or any(cm.var_map[v] != u for v, u in zip(hs, gs)):
            bad.append(f"factor {a}: scope {hs} is not mapped onto the scope {gs} of factor {b}")
        elif not np.array_equal(H.factors[a].table, G.factors[b].table):
            bad.append(f"factor {a}: table differs from factor {b}")
    if bad:
        return CoverReport(False, None, bad)
    for v in range(H.n_vars):
        images = Counter(cm.fac_map[a] for a in H.incidence[v])
        if images != Counter(G.incidence[cm.var_map[v]]):
            bad.append(f"variable {v}: neighborhood is not mapped bijectively onto that of {cm.var_map[v]}")
    counts = Counter(cm.var_map)
    fcounts = Counter(cm.fac_map)
    sizes = {counts[u] for u in range(G.n_vars)} | {fcounts[b] for b in range(G.n_factors)}
    observed = sizes.pop() if len(sizes) == 1 else None
    if k is not None and observed != k:
        bad.append(f"not a {k}-cover: copy counts {sorted(sizes | {observed})}")
    return CoverReport(not bad, observed, bad)


def disjoint_cover(g: FactorGraph, k: int = 2) -> CoverMap:
    """``k`` disjoint copies of ``g``; copy ``r`` of variable ``i`` is ``r * n + i``."""
    n, m = g.n_vars, g.n_factors
    facs = [(tuple(r * n + v for v in f.scope), f.table) for r in range(k) for f in g.factors]
    H = FactorGraph.build(g.cards * k, facs, list(g.phis) * k)
    return CoverMap(g, H, tuple(i for _ in range(k) for i in range(n)),
                    tuple(a for _ in range(k) for a in range(m)))


def pairwise_two_cover(g: FactorGraph, crossed: Iterable[int] = ()) -> CoverMap:
    """2-cover of a pairwise graph: copy ``i`` of a variable is ``i`` / ``n + i``.

    Factor ``a = (i, j)`` becomes ``(i_1, j_1), (i_2, j_2)`` (parallel) or
    ``(i_1, j_2), (i_2, j_1)`` when ``a`` is listed in ``crossed``.
    """
    if not g.is_pairwise():
        raise GraphError("pairwise_two_cover needs a pairwise graph")
    crossed = set(crossed)
    n, m = g.n_vars, g.n_factors
    first, second = [], []
    for a, f in enumerate(g.factors):
        i, j = f.scope
        if a in crossed:
            first.append(((i, n + j), f.table))
            second.append(((n + i, j), f.table))
        else:
            first.append(((i, j), f.table))
            second.append(((n + i, n + j), f.table))
    H = FactorGraph.build(g.cards * 2, first + second, list(g.phis) * 2)
    return CoverMap(g, H, tuple(range(n)) * 2, tuple(range(m)) * 2)


def lift_assignment(cm: CoverMap, x: Sequence[int]) -> tuple[int, ...]:
    x = cm.base.check_assignment(x)
    return tuple(x[u] for u in cm.var_map)


def lift_params(cm: CoverMap, c: SplitParams) -> SplitParams:
    return SplitParams([c.c_var[u] for u in cm.var_map], [c.c_fac[b] for b in cm.fac_map])


def lift_beliefs(cm: CoverMap, b: BeliefSet) -> BeliefSet:
    k = len(cm.var_map) // cm.base.n_vars
    return BeliefSet(
        [b.b_var[u].copy() for u in cm.var_map],
        [b.b_fac[a].copy() for a in cm.fac_map],
        k * b.kappa,
    )


@dataclass
class CoverCertificate:
    cover: CoverMap
    assignment: tuple[int, ...]
    claimed_value: float
    wiring: list[str]            # "parallel" / "crossed" per base factor

    def dump(self) -> str:
        g = self.cover.base
        lines = [f"2-cover with {self.cover.cover.n_vars} variables, {self.cover.cover.n_factors} factors"]
        for a, w in enumerate(self.wiring):
            i, j = g.factors[a].scope
            lines.append(f"factor {a} ({i},{j}): {w}")
        n = g.n_vars
        for i in range(n):
            lines.append(f"x{i}: copies {self.assignment[i]} {self.assignment[n + i]}")
        lines.append(f"value {self.claimed_value:.12g}")
        return "\n".join(lines)


class CertificateError(RuntimeError):
    pass


def build_two_cover_certificate(
    g: FactorGraph,
    b: BeliefSet,
    tie_tol: float = DEFAULT_TIE_TOL,
    consistency_tol: float = 1e-6,
) -> CoverCertificate:
    """2-cover plus an assignment on it minimizing every copied belief.

    Variables with a unique belief argmin get that state on both copies;
    tied variables get 0 on copy 1 and 1 on copy 2.  Each factor is wired
    parallel or crossed so the copied factor beliefs are minimized.
    """
    if not (g.is_pairwise() and g.is_binary()):
        raise GraphError("2-cover certificates need a pairwise binary graph")
    resid = check_min_consistent(g, b)
    if resid > consistency_tol:
        raise CertificateError(f"beliefs are not min-consistent (residual {resid:.3g})")

    n = g.n_vars
    x = [0] * (2 * n)
    tied = []
    for i in range(n):
        s = argmin_set(b.b_var[i], tie_tol)
        if len(s) == 1:
            x[i] = x[n + i] = s[0]
            tied.append(False)
        else:
            x[i], x[n + i] = 0, 1
            tied.append(True)

    crossed = []
    wiring = []
    for a, f in enumerate(g.factors):
        i, j = f.scope
        best = set(zip(*np.nonzero(b.b_fac[a] <= b.b_fac[a].min() + tie_tol)))
        best = {(int(u), int(v)) for u, v in best}
        if tied[i] and tied[j]:
            if {(0, 0), (1, 1)} <= best:
                wiring.append("parallel")
            elif {(0, 1), (1, 0)} <= best:
                wiring.append("crossed")
                crossed.append(a)
            else:
                raise CertificateError(f"factor {a}: no parallel or crossed wiring minimizes b_a")
        else:
            wiring.append("parallel")
            pairs = {(x[i], x[j]), (x[n + i], x[n + j])}
            if not pairs <= best:
                raise CertificateError(f"factor {a}: chosen states {sorted(pairs)} do not minimize b_a")
    cm = pairwise_two_cover(g, crossed)
    xh = tuple(x)
    return CoverCertificate(cm, xh, cm.cover.evaluate(xh), wiring)
