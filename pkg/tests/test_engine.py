import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import g1, g2, g3, random_graph, random_loopy, reference_minsum
from splitmin.beliefs import (
    check_min_consistent,
    compute_beliefs,
    local_lower_bound,
    lower_bound,
    min_consistency_residuals,
)
from splitmin.engine import (
    InfiniteMessageError,
    Schedule,
    Status,
    async_variable_update,
    init_messages,
    run,
    sync_sweep,
)
from splitmin.graph import FactorGraph, brute_force_minimize, oracle_min_marginals
from splitmin.messages import MessageState
from splitmin.params import SplitParams, make_uniform_params


def test_init_messages_shapes():
    s = init_messages(g1())
    vecs = [m for rows in (s.to_factor, s.to_var) for row in rows for m in row]
    assert len(vecs) == 4 and all(v.shape == (2,) and not v.any() for v in vecs)
    s = init_messages(g2())
    assert sum(len(row) for rows in (s.to_factor, s.to_var) for row in rows) == 12
    s = init_messages(FactorGraph.build([3]))
    assert s.to_factor == [] and s.to_var == []


def test_first_sweep_g1():
    g = g1()
    c = SplitParams.ones(g)
    s = sync_sweep(g, c, init_messages(g))
    np.testing.assert_array_equal(s.to_var[0][0], [0, 0])
    np.testing.assert_array_equal(compute_beliefs(g, c, s).b_var[0], [0, 1])


def test_messages_min_normalized():
    rng = np.random.default_rng(0)
    g = random_graph(rng)
    c = SplitParams(tuple(rng.uniform(0.3, 2, g.n_vars)), tuple(rng.uniform(0.3, 2, g.n_factors)))
    s = init_messages(g)
    for _ in range(5):
        s = sync_sweep(g, c, s)
        for rows in (s.to_factor, s.to_var):
            for row in rows:
                for m in row:
                    assert abs(m.min()) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_standard_minsum_equivalence(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n_max=6, card_max=3, max_scope=2)
    c = SplitParams.ones(g)
    ref = reference_minsum(g, 10)
    s = init_messages(g)
    for t in range(1, 11):
        s = sync_sweep(g, c, s)
        for a, fac in enumerate(g.factors):
            for p, i in enumerate(fac.scope):
                assert np.abs(s.to_factor[a][p] - ref[t][("v2f", a, i)]).max() < 1e-12
                assert np.abs(s.to_var[a][p] - ref[t][("f2v", a, i)]).max() < 1e-12


def test_infinite_slice_aborts():
    g = FactorGraph.build([2, 2], [((0, 1), [[np.inf, 0], [np.inf, 0]])])
    with pytest.raises(InfiniteMessageError):
        sync_sweep(g, SplitParams.ones(g), init_messages(g))
    rep = run(g, SplitParams.ones(g))
    assert rep.status is Status.INFINITE_MESSAGE and rep.error
    assert rep.state.is_finite()


def test_hard_constraints_without_abort():
    # +inf entries that never empty a slice keep messages finite
    g = FactorGraph.build([2, 2], [((0, 1), [[0, np.inf], [np.inf, 0]])], [[0, 1], [0, 0]])
    rep = run(g, SplitParams.ones(g))
    assert rep.status is Status.CONVERGED and rep.estimate.assignment == (0, 0)


def test_async_update_consistency_g1():
    g = g1()
    c = SplitParams.ones(g)
    s = async_variable_update(g, c, init_messages(g), 0)
    b = compute_beliefs(g, c, s)
    assert min_consistency_residuals(g, b)[(0, 0)] < 1e-12


def test_async_update_consistency_g2():
    g = g2()
    c = make_uniform_params(g)
    rng = np.random.default_rng(1)
    s = MessageState(
        [[rng.normal(size=2) for _ in f.scope] for f in g.factors],
        [[rng.normal(size=2) for _ in f.scope] for f in g.factors],
    )
    s = async_variable_update(g, c, s, 0)
    r = min_consistency_residuals(g, compute_beliefs(g, c, s))
    for a in g.incidence[0]:
        assert r[(a, 0)] < 1e-12


def test_async_update_isolated_variable():
    g = FactorGraph.build([2, 2, 2], [((0, 1), [[0, 1], [1, 0]])])
    c = SplitParams.ones(g)
    s = sync_sweep(g, c, init_messages(g))
    assert async_variable_update(g, c, s, 2).max_abs_diff(s) == 0


def test_run_g3_chain_exact():
    g = g3()
    rep = run(g, SplitParams.ones(g))
    assert rep.status is Status.CONVERGED
    # a message crosses the 4 factor-graph hops from x0 to x2 in 4 sweeps;
    # one more sweep observes that nothing moves
    assert rep.sweeps <= 5
    for i in range(3):
        diff = rep.beliefs.b_var[i] - oracle_min_marginals(g, i)
        assert np.ptp(diff) < 1e-9
    early = run(g, SplitParams.ones(g), max_sweeps=4)
    for i in range(3):
        assert np.ptp(early.beliefs.b_var[i] - oracle_min_marginals(g, i)) < 1e-9


def test_run_g2_uniform_async():
    g = g2()
    rep = run(g, make_uniform_params(g), "async")
    assert rep.status is Status.CONVERGED and not rep.unique
    assert rep.estimate.argmin_sets == [(0, 1)] * 3
    assert rep.lb_trace[-1] < 1 - 1e-6


def test_run_g1_uniform_async():
    g = g1()
    rep = run(g, make_uniform_params(g), "async")
    assert rep.status is Status.CONVERGED and rep.unique
    assert rep.estimate.assignment == (0, 0) and g.evaluate((0, 0)) == 0


def test_run_field_breaks_symmetry():
    g = g2(field=[0, 10])
    rep = run(g, make_uniform_params(g), "async")
    assert rep.status is Status.CONVERGED
    assert rep.estimate.argmin_sets[0] == (0,)


def test_sync_fixed_point_is_min_consistent():
    # beliefs can sit still for one sweep while factor inputs are still moving
    g = g2(field=[0, 10])
    rep = run(g, make_uniform_params(g), "sync")
    assert rep.status is Status.CONVERGED and rep.sweeps > 1
    assert check_min_consistent(g, rep.beliefs) < 1e-6


def test_run_argument_errors():
    g = g1()
    c = SplitParams.ones(g)
    with pytest.raises(ValueError):
        run(g, c, tol=0)
    with pytest.raises(ValueError):
        run(g, c, damping=1.0)
    with pytest.raises(ValueError):
        run(g, c, "async", damping=0.5)
    with pytest.raises(ValueError):
        run(g, SplitParams((1, 1), (0,)))
    with pytest.raises(ValueError):
        Schedule.parse("sync", "shuffled")
    with pytest.raises(ValueError):
        run(g, c, init=MessageState([[np.array([0, np.inf]), np.zeros(2)]], [[np.zeros(2)] * 2]))


def test_max_iters_status():
    rng = np.random.default_rng(4)
    g = random_loopy(rng)
    rep = run(g, SplitParams.ones(g), max_sweeps=1, tol=1e-300)
    assert rep.status is Status.MAX_ITERS and rep.sweeps == 1 and len(rep.delta_trace) == 1


def test_damping_reaches_same_fixed_point():
    g = g3()
    plain = run(g, SplitParams.ones(g))
    damped = run(g, SplitParams.ones(g), damping=0.5, tol=1e-12, max_sweeps=5000)
    assert damped.status is Status.CONVERGED and damped.sweeps > plain.sweeps
    for u, v in zip(plain.beliefs.b_var, damped.beliefs.b_var):
        np.testing.assert_allclose(u - u.min(), v - v.min(), atol=1e-8)


def test_random_order_is_seeded():
    rng = np.random.default_rng(9)
    g = random_loopy(rng)
    c = make_uniform_params(g)
    a = run(g, c, Schedule.parse("async", "random:3"))
    b = run(g, c, Schedule.parse("async", "random:3"))
    assert a.sweeps == b.sweeps and a.lb_trace == b.lb_trace


def test_lb_trace_tracks_global_sign_only():
    g = g2()
    assert run(g, SplitParams.ones(g), max_sweeps=3).lb_trace is None
    rep = run(g, make_uniform_params(g), max_sweeps=3)
    assert len(rep.lb_trace) == len(rep.delta_trace) + 1


def _async_convergent_params(rng, g):
    c_fac = np.empty(g.n_factors)
    for a in range(g.n_factors):
        cap = min(1.0 / len(g.incidence[i]) for i in g.factors[a].scope)
        c_fac[a] = rng.uniform(0.2, 1.0) * cap
    return SplitParams((1.0,) * g.n_vars, tuple(c_fac))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_async_lb_never_decreases(seed):
    rng = np.random.default_rng(seed)
    g = random_loopy(rng, n_max=5)
    c = _async_convergent_params(rng, g)
    oracle = brute_force_minimize(g)[0]
    s = init_messages(g)
    prev = lower_bound(g, c, compute_beliefs(g, c, s))
    for _ in range(4):
        for j in range(g.n_vars):
            s = async_variable_update(g, c, s, j)
            lb = lower_bound(g, c, compute_beliefs(g, c, s))
            assert lb >= prev - 1e-12
            assert lb <= oracle + 1e-9
            prev = lb


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_local_bound_never_decreases(seed):
    rng = np.random.default_rng(seed)
    g = random_loopy(rng, n_max=5)
    c = SplitParams((1.0,) * g.n_vars, tuple(rng.uniform(0.2, 1.5, g.n_factors)))
    s = init_messages(g)
    for _ in range(3):
        for j in range(g.n_vars):
            before = local_lower_bound(g, c, compute_beliefs(g, c, s), j)
            s = async_variable_update(g, c, s, j)
            after = local_lower_bound(g, c, compute_beliefs(g, c, s), j)
            assert after >= before - 1e-12
