"""Splitting min-sum updates under synchronous and asynchronous schedules."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .beliefs import (
    DEFAULT_TIE_TOL,
    BeliefSet,
    Estimate,
    compute_beliefs,
    extract_estimate,
    factor_belief,
    lower_bound_unchecked,
    variable_belief,
)
from .graph import FactorGraph
from .messages import InfiniteMessageError, MessageState, init_messages, normalize
from .params import Optimality, SplitParams, classify_params, validate_params

log = logging.getLogger(__name__)

__all__ = [
    "InfiniteMessageError",
    "MessageState",
    "RunReport",
    "Schedule",
    "Status",
    "async_variable_update",
    "factor_to_var",
    "init_messages",
    "run",
    "sync_sweep",
    "var_to_factor",
]


def _along(vec: np.ndarray, pos: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[pos] = vec.shape[0]
    return vec.reshape(shape)


def var_to_factor(g: FactorGraph, c: SplitParams, to_var, a: int, p: int) -> np.ndarray:
    """Unnormalized ``m_{i->a} = phi_i/c_i + (c_a - 1) m_{a->i} + sum_{b != a} c_b m_{b->i}``."""
    i = g.factors[a].scope[p]
    out = g.phis[i] / c.c_var[i] + (c.c_fac[a] - 1.0) * to_var[a][p]
    for b in g.incidence[i]:
        if b != a:
            out = out + c.c_fac[b] * to_var[b][g.position(b, i)]
    return out


def factor_to_var(g: FactorGraph, c: SplitParams, to_factor, a: int, p: int) -> np.ndarray:
    """Unnormalized ``m_{a->i}``: a min over the other scope variables plus the ``(c_i - 1)`` echo."""
    fac = g.factors[a]
    i = fac.scope[p]
    with np.errstate(invalid="ignore"):
        inner = fac.table / c.c_fac[a]
        for q, k in enumerate(fac.scope):
            if q != p:
                inner = inner + c.c_var[k] * _along(to_factor[a][q], q, fac.size)
        axes = tuple(q for q in range(fac.size) if q != p)
        out = inner.min(axis=axes) if axes else inner
    if np.isnan(out).any():
        raise InfiniteMessageError(f"factor {a} -> variable {i}: undefined message")
    return out + (c.c_var[i] - 1.0) * to_factor[a][p]


def _checked(vec: np.ndarray, what: str) -> np.ndarray:
    try:
        return normalize(vec)
    except InfiniteMessageError:
        raise InfiniteMessageError(f"{what}: non-finite message {vec}") from None


def sync_sweep(
    g: FactorGraph, c: SplitParams, state: MessageState, damping: float = 0.0
) -> MessageState:
    """One round of every message recomputed from the previous state."""
    new = state.copy()
    for a, fac in enumerate(g.factors):
        for p in range(fac.size):
            new.to_factor[a][p] = _checked(
                var_to_factor(g, c, state.to_var, a, p), f"variable {fac.scope[p]} -> factor {a}"
            )
            new.to_var[a][p] = _checked(
                factor_to_var(g, c, state.to_factor, a, p), f"factor {a} -> variable {fac.scope[p]}"
            )
    if damping:
        for rows_new, rows_old in ((new.to_factor, state.to_factor), (new.to_var, state.to_var)):
            for row_new, row_old in zip(rows_new, rows_old):
                for p in range(len(row_new)):
                    row_new[p] = normalize((1.0 - damping) * row_new[p] + damping * row_old[p])
    return new


def update_all_var_to_factor(g: FactorGraph, c: SplitParams, state: MessageState) -> MessageState:
    new = state.copy()
    for a, p in g.edges():
        new.to_factor[a][p] = _checked(var_to_factor(g, c, state.to_var, a, p), f"to factor {a}")
    return new


def update_all_factor_to_var(g: FactorGraph, c: SplitParams, state: MessageState) -> MessageState:
    new = state.copy()
    for a, p in g.edges():
        new.to_var[a][p] = _checked(factor_to_var(g, c, state.to_factor, a, p), f"from factor {a}")
    return new


def async_variable_update(
    g: FactorGraph, c: SplitParams, state: MessageState, j: int
) -> MessageState:
    """Refresh every ``m_{b->j}``, first updating the inputs ``m_{i->b}`` of each factor ``b``."""
    new = state.copy()
    for b in g.incidence[j]:
        fac = g.factors[b]
        pj = fac.scope.index(j)
        for q, i in enumerate(fac.scope):
            if q != pj:
                new.to_factor[b][q] = _checked(
                    var_to_factor(g, c, new.to_var, b, q), f"variable {i} -> factor {b}"
                )
        new.to_var[b][pj] = _checked(
            factor_to_var(g, c, new.to_factor, b, pj), f"factor {b} -> variable {j}"
        )
    return new


class Status(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    INFINITE_MESSAGE = "infinite_message"


@dataclass
class Schedule:
    kind: str = "sync"              # "sync" or "async"
    order: Sequence[int] | None = None
    seed: int | None = None         # random permutation per sweep when set

    @classmethod
    def parse(cls, kind: str, order: str = "natural") -> "Schedule":
        if kind not in ("sync", "async"):
            raise ValueError(f"unknown schedule {kind!r}")
        if order == "natural":
            return cls(kind)
        if order.startswith("random:"):
            return cls(kind, seed=int(order.split(":", 1)[1]))
        raise ValueError(f"unknown order {order!r}")


@dataclass
class RunReport:
    status: Status
    sweeps: int
    final_delta: float
    estimate: Estimate | None
    lb_trace: list[float] | None = None
    delta_trace: list[float] = field(default_factory=list)
    beliefs: BeliefSet | None = None
    state: MessageState | None = None
    error: str | None = None

    @property
    def unique(self) -> bool:
        return bool(self.estimate and self.estimate.unique)


def _array_delta(u: np.ndarray, v: np.ndarray) -> float:
    with np.errstate(invalid="ignore"):
        d = np.abs(u - v)
    d[np.isinf(u) & np.isinf(v) & (u == v)] = 0.0
    d[np.isnan(d)] = np.inf
    return float(d.max()) if d.size else 0.0


def _belief_delta(b1: BeliefSet, b2: BeliefSet) -> float:
    delta = 0.0
    for u, v in zip(b1.b_var + b1.b_fac, b2.b_var + b2.b_fac):
        delta = max(delta, _array_delta(u, v))
    return delta


def _refresh_local(g: FactorGraph, c: SplitParams, state: MessageState, b: BeliefSet, j: int) -> float:
    """Recompute in place the beliefs an update of ``j`` can touch; return their max change."""
    new = variable_belief(g, c, state.to_var, j)
    delta = _array_delta(b.b_var[j], new)
    b.b_var[j] = new
    for a in g.incidence[j]:
        new = factor_belief(g, c, state.to_var, b.b_var, a)
        delta = max(delta, _array_delta(b.b_fac[a], new))
        b.b_fac[a] = new
    return delta


def run(
    g: FactorGraph,
    c: SplitParams,
    schedule: Schedule | str = "sync",
    tol: float = 1e-8,
    max_sweeps: int = 1000,
    damping: float = 0.0,
    init: MessageState | None = None,
    tie_tol: float = DEFAULT_TIE_TOL,
) -> RunReport:
    """Iterate sweeps until the beliefs (and, when available, the dual bound) settle.

    Sync stops once no belief entry and no message entry moves by ``tol``
    over a sweep.  Async
    measures the belief change across every single variable update of a sweep
    and, under GlobalSign parameters, also requires the bound to improve by
    less than ``tol`` over the sweep.
    """
    validate_params(c, g)
    if isinstance(schedule, str):
        schedule = Schedule.parse(schedule)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not 0.0 <= damping < 1.0:
        raise ValueError("damping must lie in [0, 1)")
    if damping and schedule.kind != "sync":
        raise ValueError("damping applies to the synchronous schedule only")

    use_lb = classify_params(c, g).kind is Optimality.GLOBAL_SIGN
    state = init.copy() if init is not None else init_messages(g)
    if not state.is_finite():
        raise ValueError("initial messages must be finite")
    b = compute_beliefs(g, c, state)
    lb_trace = [lower_bound_unchecked(g, c, b)] if use_lb else None
    deltas: list[float] = []
    rng = np.random.default_rng(schedule.seed) if schedule.seed is not None else None
    order = list(schedule.order) if schedule.order is not None else list(range(g.n_vars))

    status = Status.MAX_ITERS
    sweeps = 0
    delta = np.inf
    error = None
    try:
        for sweeps in range(1, max_sweeps + 1):
            if schedule.kind == "sync":
                prev = state
                state = sync_sweep(g, c, state, damping)
                nb = compute_beliefs(g, c, state)
                delta = _belief_delta(b, nb)
                b = nb
                # beliefs only see factor-to-variable messages, which lag a sweep
                # behind; a fixed point also needs the messages themselves to settle
                msg_delta = state.max_abs_diff(prev)
            else:
                seq = list(rng.permutation(order)) if rng is not None else order
                delta = 0.0
                # only m_{b->j}, b in dj, change, so only b_j and the b_b move
                work = BeliefSet(list(b.b_var), list(b.b_fac), b.kappa)
                for j in seq:
                    state = async_variable_update(g, c, state, int(j))
                    delta = max(delta, _refresh_local(g, c, state, work, int(j)))
                b = compute_beliefs(g, c, state)
            deltas.append(delta)
            done = delta < tol
            if schedule.kind == "sync":
                done = done and msg_delta < tol
            if use_lb:
                lb_trace.append(lower_bound_unchecked(g, c, b))
                if schedule.kind == "async":
                    done = done and (lb_trace[-1] - lb_trace[-2]) < tol
            if done:
                status = Status.CONVERGED
                break
    except InfiniteMessageError as exc:
        status = Status.INFINITE_MESSAGE
        error = str(exc)
        log.warning("run aborted after %d sweeps: %s", sweeps, exc)

    return RunReport(
        status=status,
        sweeps=sweeps,
        final_delta=float(delta),
        estimate=extract_estimate(b, tie_tol),
        lb_trace=lb_trace,
        delta_trace=deltas,
        beliefs=b,
        state=state,
        error=error,
    )
