"""Beliefs derived from messages: admissibility, min-consistency, estimates, dual bound."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .graph import DEFAULT_STATE_CAP, FactorGraph, GraphError, StateSpaceTooLarge
from .messages import MessageState
from .params import Optimality, ParamsError, SplitParams, classify_params

DEFAULT_TIE_TOL = 1e-9


@dataclass
class BeliefSet:
    b_var: list[np.ndarray]
    b_fac: list[np.ndarray]
    kappa: float


@dataclass
class Estimate:
    argmin_sets: list[tuple[int, ...]]
    unique: bool
    assignment: tuple[int, ...] | None


def _div(table: np.ndarray, c: float) -> np.ndarray:
    if c < 0 and np.isinf(table).any():
        raise ValueError("negative splitting parameter applied to a +inf potential")
    return table / c


def _along(vec: np.ndarray, pos: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[pos] = vec.shape[0]
    return vec.reshape(shape)


def variable_belief(g: FactorGraph, c: SplitParams, to_var, i: int) -> np.ndarray:
    v = _div(g.phis[i], c.c_var[i])
    for a in g.incidence[i]:
        v = v + c.c_fac[a] * to_var[a][g.position(a, i)]
    return v


def variable_beliefs(g: FactorGraph, c: SplitParams, to_var) -> list[np.ndarray]:
    return [variable_belief(g, c, to_var, i) for i in range(g.n_vars)]


def factor_belief(g: FactorGraph, c: SplitParams, to_var, b_var, a: int) -> np.ndarray:
    """``psi_a / c_a + sum_k c_k (b_k - m_{a->k})``."""
    fac = g.factors[a]
    out = _div(fac.table, c.c_fac[a])
    for p, k in enumerate(fac.scope):
        out = out + c.c_var[k] * _along(b_var[k] - to_var[a][p], p, fac.size)
    return out


def _reference_assignment(g: FactorGraph, cap: int) -> tuple[int, ...]:
    x0 = (0,) * g.n_vars
    if np.isfinite(g.evaluate(x0)):
        return x0
    for count, x in enumerate(itertools.product(*(range(k) for k in g.cards))):
        if count >= cap:
            break
        if np.isfinite(g.evaluate(x)):
            return x
    raise GraphError("no assignment with finite objective found within the cap")


def reparameterized_sum(g: FactorGraph, c: SplitParams, b_var, b_fac, x) -> float:
    """``sum_i c_i b_i + sum_a c_a [b_a - sum_k c_k b_k]`` at one assignment."""
    total = 0.0
    for i in range(g.n_vars):
        total += c.c_var[i] * b_var[i][x[i]]
    for a, fac in enumerate(g.factors):
        inner = b_fac[a][tuple(x[v] for v in fac.scope)]
        for k in fac.scope:
            inner -= c.c_var[k] * b_var[k][x[k]]
        total += c.c_fac[a] * inner
    return float(total)


def compute_beliefs(
    g: FactorGraph, c: SplitParams, state: MessageState, cap: int = DEFAULT_STATE_CAP
) -> BeliefSet:
    """Variable and factor beliefs with ``kappa`` fitted at a reference assignment."""
    if not state.is_finite():
        raise ValueError("message state is not finite")
    b_var = variable_beliefs(g, c, state.to_var)
    b_fac = [factor_belief(g, c, state.to_var, b_var, a) for a in range(g.n_factors)]
    x_ref = _reference_assignment(g, cap)
    with np.errstate(invalid="ignore"):
        kappa = g.evaluate(x_ref) - reparameterized_sum(g, c, b_var, b_fac, x_ref)
    if not np.isfinite(kappa):
        kappa = 0.0
    return BeliefSet(b_var, b_fac, float(kappa))


def _joint_reparameterization(g: FactorGraph, c: SplitParams, b: BeliefSet) -> np.ndarray:
    S = np.zeros(g.cards)
    with np.errstate(invalid="ignore"):
        for i in range(g.n_vars):
            S = S + c.c_var[i] * g.broadcast(b.b_var[i], (i,))
        for a, fac in enumerate(g.factors):
            inner = b.b_fac[a]
            for p, k in enumerate(fac.scope):
                inner = inner - c.c_var[k] * _along(b.b_var[k], p, fac.size)
            S = S + c.c_fac[a] * g.broadcast(inner, fac.scope)
    return S


def admissibility_residuals(
    g: FactorGraph, c: SplitParams, b: BeliefSet, cap: int = DEFAULT_STATE_CAP
) -> np.ndarray:
    """``|f(x) - kappa - S(x)|`` at every joint state (0 where both sides are infinite)."""
    if g.n_states > cap:
        raise StateSpaceTooLarge(f"{g.n_states} joint states exceed cap {cap}")
    f = g.joint_table(cap)
    S = b.kappa + _joint_reparameterization(g, c, b)
    with np.errstate(invalid="ignore"):
        r = np.abs(f - S)
    both_inf = np.isinf(f) & ~np.isfinite(S)
    r[both_inf] = 0.0
    r[np.isnan(r)] = np.inf
    return r


def check_admissible(
    g: FactorGraph, c: SplitParams, b: BeliefSet, cap: int = DEFAULT_STATE_CAP
) -> float:
    """Maximum admissibility residual over all assignments."""
    return float(admissibility_residuals(g, c, b, cap).max())


def min_consistency_residuals(g: FactorGraph, b: BeliefSet) -> dict[tuple[int, int], float]:
    """Per (factor, variable): spread of ``min_{x_a \\ i} b_a - b_i`` over ``x_i``."""
    out = {}
    for a, fac in enumerate(g.factors):
        for p, i in enumerate(fac.scope):
            axes = tuple(q for q in range(fac.size) if q != p)
            m = b.b_fac[a].min(axis=axes) if axes else b.b_fac[a]
            both = np.isinf(m) & np.isinf(b.b_var[i])
            if (np.isinf(m) ^ np.isinf(b.b_var[i])).any():
                out[(a, i)] = np.inf
                continue
            r = (m - np.where(both, 0.0, b.b_var[i]))[~both]
            out[(a, i)] = float(r.max() - r.min()) if r.size else 0.0
    return out


def check_min_consistent(g: FactorGraph, b: BeliefSet) -> float:
    return max(min_consistency_residuals(g, b).values(), default=0.0)


def argmin_set(vec: np.ndarray, tie_tol: float = DEFAULT_TIE_TOL) -> tuple[int, ...]:
    lo = vec.min()
    return tuple(int(s) for s in np.flatnonzero(vec <= lo + tie_tol))


def extract_estimate(b: BeliefSet, tie_tol: float = DEFAULT_TIE_TOL) -> Estimate:
    sets = [argmin_set(v, tie_tol) for v in b.b_var]
    unique = all(len(s) == 1 for s in sets)
    return Estimate(sets, unique, tuple(s[0] for s in sets) if unique else None)


def lower_bound_unchecked(g: FactorGraph, c: SplitParams, b: BeliefSet) -> float:
    lb = b.kappa
    for i in range(g.n_vars):
        w = c.var_weight(g, i)
        if w != 0:
            lb += w * float(b.b_var[i].min())
    for a in range(g.n_factors):
        lb += c.c_fac[a] * float(b.b_fac[a].min())
    return float(lb)


def lower_bound(g: FactorGraph, c: SplitParams, b: BeliefSet) -> float:
    """Dual bound ``kappa + sum_i (1 - sum c_a) c_i min b_i + sum_a c_a min b_a``.

    Valid (below ``min f``) only when the parameters pass the GlobalSign test.
    """
    if classify_params(c, g).kind is not Optimality.GLOBAL_SIGN:
        raise ParamsError("lower bound needs parameters satisfying the GlobalSign conditions")
    return lower_bound_unchecked(g, c, b)


def local_lower_bound(g: FactorGraph, c: SplitParams, b: BeliefSet, j: int) -> float:
    """Terms of the per-variable bound that the update of ``j`` can change.

    With ``c_j = 1`` and positive factor parameters this is
    ``min b_j * (1 - sum c_a) + sum_{a in dj} c_a min b_a`` split into its
    conical pieces ``d_jj = 1``, ``d_ja = c_a``:
    ``min b_j + sum_a c_a min_{x_a} (b_a - b_j)``.
    """
    total = float(b.b_var[j].min())
    for a in g.incidence[j]:
        p = g.position(a, j)
        fac = g.factors[a]
        diff = b.b_fac[a] - _along(b.b_var[j], p, fac.size)
        total += c.c_fac[a] * float(diff.min())
    return total
