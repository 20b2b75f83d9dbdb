import numpy as np
import pytest

from corpus import EQ, g1, g2, g3, random_pairwise_binary, six_cycle
from splitmin.beliefs import check_admissible, check_min_consistent, compute_beliefs
from splitmin.covers import (
    CertificateError,
    CoverMap,
    build_two_cover_certificate,
    disjoint_cover,
    lift_assignment,
    lift_beliefs,
    lift_params,
    pairwise_two_cover,
    verify_cover,
)
from splitmin.engine import Status, run
from splitmin.graph import FactorGraph, GraphError, brute_force_minimize
from splitmin.messages import init_messages, random_messages
from splitmin.params import SplitParams, make_uniform_params


def test_disjoint_cover_of_g1():
    cm = disjoint_cover(g1())
    rep = verify_cover(cm, k=2)
    assert rep.ok and rep.k == 2


def test_six_cycle_cover_of_triangle():
    cm = pairwise_two_cover(g2(), crossed=[2])
    assert verify_cover(cm, k=2).ok
    value, xs = brute_force_minimize(cm.cover)
    assert value == 0 and len(xs) == 2
    # the cover is a single 6-cycle, isomorphic to the hand-built one
    assert len(cm.cover.components()) == 1
    assert brute_force_minimize(six_cycle())[0] == 0


def test_non_bijective_neighbourhood_flagged():
    G = g2()
    # both factors at cover variable 0 map to factor 0 of the base graph
    H = FactorGraph.build([2] * 6, [((0, 1), EQ), ((0, 4), EQ), ((1, 2), EQ), ((4, 5), EQ),
                                    ((3, 2), EQ), ((3, 5), EQ)])
    cm = CoverMap(G, H, (0, 1, 2, 0, 1, 2), (0, 0, 1, 1, 2, 2))
    rep = verify_cover(cm)
    assert not rep.ok and rep.violations


def test_potential_mismatch_flagged():
    G = g1()
    H = FactorGraph.build([2] * 4, [((0, 1), [[0, 0], [0, 2]]), ((2, 3), [[0, 0], [0, 1]])],
                          [[0, 1]] * 4)
    rep = verify_cover(CoverMap(G, H, (0, 1, 0, 1), (0, 0)))
    assert not rep.ok and "table differs" in rep.violations[0]


def test_copy_count_claim():
    rep = verify_cover(disjoint_cover(g1(), 3), k=2)
    assert not rep.ok and rep.k == 3


def test_lift_assignment_examples():
    cm = disjoint_cover(g1())
    assert cm.cover.evaluate(lift_assignment(cm, (0, 0))) == 0
    cm = pairwise_two_cover(g2(), crossed=[2])
    x = (0, 0, 1)
    assert g2().evaluate(x) == 1
    lifted = lift_assignment(cm, x)
    assert cm.cover.evaluate(lifted) == 2
    assert lifted[:3] == x and lifted[3:] == x


def test_lift_doubles_value_on_random_covers():
    rng = np.random.default_rng(3)
    for _ in range(20):
        g = random_pairwise_binary(rng, n_max=5)
        crossed = [a for a in range(g.n_factors) if rng.random() < 0.5]
        cm = pairwise_two_cover(g, crossed)
        assert verify_cover(cm, k=2).ok
        x = tuple(int(v) for v in rng.integers(0, 2, g.n_vars))
        assert cm.cover.evaluate(lift_assignment(cm, x)) == pytest.approx(2 * g.evaluate(x), abs=1e-12)


def test_certificate_g2_frustrated():
    g = g2()
    rep = run(g, make_uniform_params(g), "async")
    cert = build_two_cover_certificate(g, rep.beliefs)
    assert cert.wiring == ["crossed"] * 3
    assert cert.claimed_value == 0
    assert brute_force_minimize(cert.cover.cover)[0] == 0
    assert len(cert.cover.cover.components()) == 1   # a 6-cycle
    x = cert.assignment
    assert [x[i] for i in range(3)] == [0, 0, 0] and [x[3 + i] for i in range(3)] == [1, 1, 1]
    text = cert.dump()
    assert "factor 0 (0,1): crossed" in text and text.endswith("value 0")


def test_certificate_g1_unique():
    g = g1()
    rep = run(g, make_uniform_params(g), "async")
    cert = build_two_cover_certificate(g, rep.beliefs)
    assert cert.wiring == ["parallel"]
    assert cert.assignment == (0, 0, 0, 0) and cert.claimed_value == 0
    assert len(cert.cover.cover.components()) == 2


def test_certificate_chain():
    g = g3()
    rep = run(g, make_uniform_params(g), "async")
    assert rep.unique
    cert = build_two_cover_certificate(g, rep.beliefs)
    g_min = brute_force_minimize(g)[0]
    assert cert.claimed_value == pytest.approx(2 * g_min, abs=1e-9)
    assert brute_force_minimize(cert.cover.cover)[0] == pytest.approx(2 * g_min, abs=1e-9)


def test_certificate_rejects_inconsistent_beliefs():
    g = g2()
    c = make_uniform_params(g)
    b = compute_beliefs(g, c, random_messages(g, np.random.default_rng(0), scale=3.0))
    with pytest.raises(CertificateError):
        build_two_cover_certificate(g, b)
    with pytest.raises(GraphError):
        tri = FactorGraph.build([2, 2, 2], [((0, 1, 2), np.zeros((2, 2, 2)))])
        build_two_cover_certificate(tri, compute_beliefs(tri, SplitParams.ones(tri), init_messages(tri)))


def test_lifted_residuals_equal():
    rng = np.random.default_rng(6)
    for _ in range(10):
        g = random_pairwise_binary(rng, n_max=5)
        c = make_uniform_params(g)
        b = compute_beliefs(g, c, random_messages(g, rng))
        cm = pairwise_two_cover(g, [a for a in range(g.n_factors) if rng.random() < 0.5])
        bh = lift_beliefs(cm, b)
        ch = lift_params(cm, c)
        assert abs(check_admissible(cm.cover, ch, bh) - check_admissible(g, c, b)) <= 1e-12
        assert abs(check_min_consistent(cm.cover, bh) - check_min_consistent(g, b)) <= 1e-12


def test_cover_solution_theorem_on_converged_run():
    rng = np.random.default_rng(7)
    hits = 0
    for _ in range(30):
        g = random_pairwise_binary(rng, n_max=5)
        rep = run(g, make_uniform_params(g), "async", tol=1e-10)
        if rep.status is not Status.CONVERGED or not rep.unique:
            continue
        hits += 1
        for crossed in ([], list(range(g.n_factors)), [0]):
            cm = pairwise_two_cover(g, crossed)
            value = cm.cover.evaluate(lift_assignment(cm, rep.estimate.assignment))
            assert value == pytest.approx(brute_force_minimize(cm.cover)[0], abs=1e-9)
    assert hits >= 5
