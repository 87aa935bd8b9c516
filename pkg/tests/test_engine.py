import math

import numpy as np
import pytest

import bpcert as bp
from bpcert.engine import MessageUnderflowError, local_seminorm
from conftest import loop_graph, random_positive_graph, random_tree
from oracles import enumerate_marginals, jacobian_finite_difference


def test_init_uniform_is_zero(rng):
    fg = random_positive_graph(rng)
    for vec in bp.init_messages(fg, "uniform"):
        assert np.all(vec == 0.0)


def test_init_random_deterministic(rng):
    fg = random_positive_graph(rng)
    a = bp.init_messages(fg, "random", seed=7)
    b = bp.init_messages(fg, "random", seed=7)
    c = bp.init_messages(fg, "random", seed=8)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)
    assert any(np.any(x != y) for x, y in zip(a, c))
    assert all(np.all((x > -1) & (x < 1)) for x in a)


def test_uniform_factors_fixed_point():
    fg = bp.FactorGraph([2, 3], [((0, 1), np.ones(6))])
    msgs = bp.init_messages(fg, "uniform")
    new = bp.update_parallel(fg, msgs)
    from bpcert.engine import quotient_residual
    assert quotient_residual(new, msgs) == 0.0


def test_tree_messages_become_exact_fixed_point(rng):
    for _ in range(5):
        fg = random_tree(rng, max_nodes=16)
        msgs = bp.init_messages(fg, "random", seed=3)
        for _ in range(2 * (fg.num_vars + fg.num_factors)):
            msgs = bp.update_parallel(fg, msgs)
        again = bp.update_parallel(fg, msgs)
        from bpcert.engine import quotient_residual
        assert quotient_residual(again, msgs) < 1e-12


def test_identity_loop_rotates_messages():
    fg = loop_graph(5, 0.0)
    msgs = bp.init_messages(fg, "random", seed=11)
    new = bp.update_parallel(fg, msgs)
    edges = fg.message_edges()
    index = {key: e for e, key in enumerate(edges)}
    # factor k couples (k, k+1); its message toward k+1 is last round's
    # message from factor k-1 toward k, renormalized
    for k in range(1, 5):
        incoming = msgs[index[(k - 1, k)]]
        rotated = incoming - np.log(np.exp(incoming).sum())
        np.testing.assert_allclose(new[index[(k, (k + 1) % 5)]], rotated,
                                   atol=1e-12)


def test_identity_loop_residual_never_decays():
    fg = loop_graph(4, 0.0)
    result = bp.run(fg, max_iters=200, init="random", seed=5)
    assert not result.converged
    assert result.iterations == 200
    assert result.residual > 0.01


def test_ferromagnetic_loop_converges():
    result = bp.run(loop_graph(4, 0.5), init="random", seed=1)
    assert result.converged


def test_run_on_trees_matches_enumeration(rng):
    for _ in range(5):
        fg = random_tree(rng, max_nodes=12, max_card=3)
        total = 1
        for c in fg.cardinalities:
            total *= c
        if total > 3 ** 9:
            continue
        result = bp.run(fg, tol=1e-11, init="random", seed=2)
        assert result.converged
        singles, factors = enumerate_marginals(fg)
        for got, want in zip(result.single_beliefs, singles):
            np.testing.assert_allclose(got, want, atol=1e-8)
        for got, want in zip(result.factor_beliefs, factors):
            np.testing.assert_allclose(got, want, atol=1e-8)


def test_beliefs_normalized(rng):
    fg = random_positive_graph(rng)
    result = bp.run(fg, max_iters=50)
    for b in result.single_beliefs + result.factor_beliefs:
        assert abs(float(np.sum(b)) - 1.0) < 1e-12
        assert np.all(np.asarray(b) >= 0)


def test_scale_invariance_of_update(rng):
    fg = random_positive_graph(rng)
    msgs = bp.init_messages(fg, "random", seed=4)
    shifted = [m + rng.normal() for m in msgs]
    out = bp.update_parallel(fg, msgs)
    out_shifted = bp.update_parallel(fg, shifted)
    for a, b in zip(out, out_shifted):
        assert local_seminorm(a - b) < 1e-12


def test_all_minus_inf_message_is_hard_error():
    # variable b is forced to state 0 by the first factor while the second
    # factor gives state 0 of b no support at all
    fg = bp.FactorGraph(
        [2, 2, 2],
        [((0, 1), [1.0, 0.0, 1.0, 0.0]),
         ((1, 2), [0.0, 0.0, 1.0, 1.0])],
    )
    assert not bp.check_zero_support(fg).ok
    msgs = bp.init_messages(fg, "uniform")
    msgs = bp.update_parallel(fg, msgs)
    with pytest.raises(MessageUnderflowError):
        bp.update_parallel(fg, msgs)


def test_result_json_round_trip(rng):
    import json

    fg = random_positive_graph(rng)
    result = bp.run(fg, max_iters=30)
    payload = json.loads(result.to_json())
    assert set(payload) == {"converged", "iterations", "residual",
                            "single_beliefs", "factor_beliefs"}
    assert payload["converged"] == result.converged
    assert len(payload["single_beliefs"]) == fg.num_vars


# --- binary engine ---------------------------------------------------------


def test_binary_update_odd_symmetry():
    model = bp.BinaryPairwiseModel(3, [(0, 1, 0.4), (1, 2, -0.7), (0, 2, 1.1)])
    nu = bp.init_messages_binary(model, "uniform")
    np.testing.assert_array_equal(bp.update_parallel_binary(model, nu), nu)


def test_binary_isolated_pair_closed_form():
    h = 0.9
    model = bp.BinaryPairwiseModel(2, [(0, 1, 0.6)], np.array([h, 0.0]))
    nu = np.zeros(2)
    new = bp.update_parallel_binary(model, nu)
    expect = math.atanh(math.tanh(0.6) * math.tanh(h))
    assert new[0] == pytest.approx(expect, abs=1e-14)  # edge 0 -> 1
    assert new[1] == pytest.approx(0.0, abs=1e-14)


def test_binary_messages_bounded_by_coupling(rng):
    from bpcert.experiments import gen_fully_random

    for seed in range(5):
        model = gen_fully_random(5, seed)
        nu = rng.uniform(-3, 3, model.num_edges)
        new = bp.update_parallel_binary(model, nu)
        assert np.all(np.abs(new) <= np.abs(model.edge_coupling) + 1e-12)


def test_binary_matches_general_engine(rng):
    from bpcert.experiments import gen_fully_random

    for seed in range(4):
        model = gen_fully_random(5, 100 + seed)
        fg = model.to_factor_graph()
        msgs = bp.init_messages(fg, "uniform")
        nu = bp.init_messages_binary(model, "uniform")
        for _ in range(30):
            msgs = bp.update_parallel(fg, msgs)
            nu = bp.update_parallel_binary(model, nu)
            general, general_pairs = bp.beliefs(fg, msgs)
            binary = bp.beliefs_binary(model, nu)
            for v in range(5):
                np.testing.assert_allclose(general[v], binary[v], atol=1e-10)
        from bpcert.engine import pair_beliefs_binary
        pair_b = pair_beliefs_binary(model, nu)
        for b, table in enumerate(pair_b):
            np.testing.assert_allclose(general_pairs[model.num_vars + b],
                                       table, atol=1e-10)


def test_run_binary_agrees_with_general_run(rng):
    from bpcert.experiments import gen_fully_random

    model = gen_fully_random(4, 77)
    rb = bp.run_binary(model, tol=1e-11)
    rg = bp.run(model.to_factor_graph(), tol=1e-11)
    assert rb.converged == rg.converged
    for v in range(4):
        np.testing.assert_allclose(rb.single_beliefs[v],
                                   rg.single_beliefs[v], atol=1e-9)


def test_jacobian_symmetric_point_magnitudes():
    model = bp.BinaryPairwiseModel(3, [(0, 1, 0.8), (1, 2, -0.5), (0, 2, 0.3)])
    jac = bp.jacobian_binary(model, np.zeros(model.num_edges))
    amp = np.tanh(np.abs(model.edge_coupling))
    for e in range(model.num_edges):
        nonzero = np.abs(jac[e][np.abs(jac[e]) > 0])
        if nonzero.size:
            np.testing.assert_allclose(nonzero, amp[e], atol=1e-14)


def test_jacobian_matches_finite_differences(rng):
    from bpcert.experiments import gen_fully_random

    for seed in range(20):
        model = gen_fully_random(4, 500 + seed)
        nu = np.random.default_rng(seed).uniform(-1, 1, model.num_edges)
        jac = bp.jacobian_binary(model, nu)
        fd = jacobian_finite_difference(model, nu)
        assert np.max(np.abs(jac - fd)) < 1e-6


def test_jacobian_bounded_by_base_matrix(rng):
    from bpcert.certify_binary import build_matrix_binary
    from bpcert.experiments import gen_fully_random

    for seed in range(10):
        model = gen_fully_random(4, 900 + seed)
        base = build_matrix_binary(model).matrix
        nu = np.random.default_rng(seed).uniform(-2, 2, model.num_edges)
        jac = np.abs(bp.jacobian_binary(model, nu))
        assert np.all(jac <= base + 1e-12)
