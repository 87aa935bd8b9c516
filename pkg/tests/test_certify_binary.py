import math

import numpy as np
import pytest

import bpcert as bp
from bpcert.certify_binary import (build_matrix_binary, cavity_gap,
                                   cavity_intervals, certify_improved,
                                   certify_spectral_binary, improved_matrix,
                                   l1_condition_binary, linfty_condition)
from bpcert.certify_general import build_matrix_general
from bpcert.experiments import gen_fully_random, gen_uniform_model
from bpcert.spectral import spectral_radius_info
from oracles import spectral_radius_eig


def test_chain_matrix_nilpotent():
    model = bp.BinaryPairwiseModel(3, [(0, 1, 0.9), (1, 2, -1.4)])
    bm = build_matrix_binary(model)
    assert np.all(np.linalg.matrix_power(bm.matrix, bm.dimension) == 0.0)
    assert certify_spectral_binary(model).value == 0.0


def test_fully_connected_uniform_radius():
    for coupling in (0.2, 0.5, 0.9):
        model = gen_uniform_model(4, coupling, 0.0)
        cert = certify_spectral_binary(model, tol=1e-10)
        assert cert.value == pytest.approx(2 * math.tanh(coupling), abs=1e-9)


def test_single_coupling_zero_matrix():
    model = bp.BinaryPairwiseModel(2, [(0, 1, 2.0)])
    assert np.all(build_matrix_binary(model).matrix == 0.0)
    assert linfty_condition(model).value == 0.0
    assert l1_condition_binary(model).value == 0.0


def test_linfty_values():
    model = gen_uniform_model(4, 0.7, 0.0)
    assert linfty_condition(model).value == pytest.approx(
        2 * math.tanh(0.7), abs=1e-12)
    chain = bp.BinaryPairwiseModel(3, [(0, 1, 0.4), (1, 2, 0.9)])
    assert linfty_condition(chain).value == pytest.approx(
        math.tanh(0.9), abs=1e-12)


def test_l1_never_above_linfty(rng):
    for seed in range(20):
        model = gen_fully_random(5, 3000 + seed)
        l1 = l1_condition_binary(model)
        linf = linfty_condition(model)
        assert l1.value <= linf.value + 1e-12
        if linf.holds:
            assert l1.holds


def test_l1_equals_linfty_for_uniform_complete_graph():
    model = gen_uniform_model(4, 0.6, 0.0)
    assert l1_condition_binary(model).value == pytest.approx(
        linfty_condition(model).value, abs=1e-12)
    assert l1_condition_binary(model).value == pytest.approx(
        2 * math.tanh(0.6), abs=1e-12)


def test_l1_equals_matrix_column_norm(rng):
    for seed in range(10):
        model = gen_fully_random(5, 4000 + seed)
        bm = build_matrix_binary(model)
        assert l1_condition_binary(model).value == pytest.approx(
            bm.l1_norm(), abs=1e-12)


def test_cavity_depth_zero_is_whole_line():
    model = gen_uniform_model(3, 0.5, 1.0)
    lo, hi = cavity_intervals(model, 0)
    assert np.all(np.isneginf(lo)) and np.all(np.isposinf(hi))
    assert np.all(cavity_gap(lo, hi) == 0.0)


def test_cavity_depth_one_closed_form():
    # star around variable 0: cavity for 0 -> 1 sums |J| over bonds to 2, 3
    model = bp.BinaryPairwiseModel(
        4, [(0, 1, 0.9), (0, 2, 0.3), (0, 3, -0.4)],
        np.array([0.5, 0.0, 0.0, 0.0]))
    lo, hi = cavity_intervals(model, 1)
    edges = model.directed_edges()
    e01 = edges.index((0, 1, 0))
    assert lo[e01] == pytest.approx(0.5 - 0.7, abs=1e-12)
    assert hi[e01] == pytest.approx(0.5 + 0.7, abs=1e-12)


def test_cavity_intervals_nested(rng):
    for seed in range(10):
        model = gen_fully_random(4, 6000 + seed)
        prev_lo, prev_hi = cavity_intervals(model, 1)
        for depth in range(2, 7):
            lo, hi = cavity_intervals(model, depth)
            assert np.all(lo >= prev_lo - 1e-12)
            assert np.all(hi <= prev_hi + 1e-12)
            prev_lo, prev_hi = lo, hi


def test_improved_depth_zero_equals_base(rng):
    model = gen_fully_random(4, 81)
    base = build_matrix_binary(model).matrix
    np.testing.assert_array_equal(improved_matrix(model, 0).matrix, base)


def test_improved_zero_fields_equals_base(rng):
    model = gen_uniform_model(4, 0.8, 0.0)
    base = build_matrix_binary(model).matrix
    for depth in (1, 3, 5):
        np.testing.assert_allclose(improved_matrix(model, depth).matrix, base,
                                   atol=1e-14)


def test_improved_entry_closed_form():
    # cavity interval [2, 3] around the 0 -> 1 edge makes the gap exactly 2
    model = bp.BinaryPairwiseModel(3, [(0, 1, 1.0), (0, 2, 0.5)],
                                   np.array([2.5, 0.0, 0.0]))
    lo, hi = cavity_intervals(model, 1)
    edges = model.directed_edges()
    e01 = edges.index((0, 1, 0))
    assert (lo[e01], hi[e01]) == (pytest.approx(2.0), pytest.approx(3.0))
    mat = improved_matrix(model, 1).matrix
    expect = 0.5 * (math.tanh(1.0 - 2.0) + math.tanh(1.0 + 2.0))
    feeder = edges.index((2, 0, 1))
    assert mat[e01, feeder] == pytest.approx(expect, abs=1e-12)
    assert expect == pytest.approx(0.11673, abs=5e-6)


def test_improved_entries_never_above_base(rng):
    for seed in range(10):
        model = gen_fully_random(4, 7000 + seed)
        base = build_matrix_binary(model).matrix
        for depth in (1, 2, 5):
            assert np.all(improved_matrix(model, depth).matrix <= base + 1e-14)


def test_improved_radius_non_increasing_in_depth(rng):
    for seed in range(10):
        model = gen_fully_random(4, 8000 + seed)
        values = [certify_improved(model, m=d, tol=1e-10).value
                  for d in range(7)]
        for a, b in zip(values, values[1:]):
            assert b <= a + 1e-9


def test_improved_beats_plain_spectral_with_fields():
    model = gen_uniform_model(4, 0.6, 2.0)
    plain = certify_spectral_binary(model)
    better = certify_improved(model, m=5)
    assert not plain.holds   # 2 tanh(0.6) = 1.07
    assert better.value < plain.value
    assert better.holds


def test_improved_holds_whenever_plain_does(rng):
    for seed in range(30):
        model = gen_fully_random(4, 8100 + seed)
        if certify_spectral_binary(model).holds:
            assert certify_improved(model, m=1).holds


def test_dobrushin_entry_shape_identity(rng):
    # the improved entry formula coincides with the binary interdependence
    # closed form when the same gap is plugged in
    for absj in (0.3, 1.0, 2.5):
        for gap in (0.0, 0.7, 2.0):
            entry = 0.5 * (math.tanh(absj - gap) + math.tanh(absj + gap))
            sinh_form = math.sinh(2 * absj) / (math.cosh(2 * absj)
                                               + math.cosh(2 * gap))
            assert entry == pytest.approx(sinh_form, abs=1e-14)


def test_gain_bound_valid_at_depth(rng):
    # after m sweeps the exact per-edge gain never exceeds the improved
    # entry divided by tanh|J|
    from bpcert.engine import _cavity_fields, update_parallel_binary

    for seed in range(10):
        model = gen_fully_random(4, 9000 + seed)
        absj = np.abs(model.edge_coupling)
        amp = np.tanh(absj)
        for m in (1, 2, 4):
            nu = np.random.default_rng(seed).uniform(-5, 5, model.num_edges)
            for _ in range(m):
                nu = update_parallel_binary(model, nu)
            h = _cavity_fields(model, nu)
            nu_next = update_parallel_binary(model, nu)
            gain = np.abs((1 - np.tanh(h) ** 2) / (1 - np.tanh(nu_next) ** 2))
            lo, hi = cavity_intervals(model, m)
            gap = cavity_gap(lo, hi)
            entry = 0.5 * (np.tanh(absj - gap) + np.tanh(absj + gap))
            with np.errstate(invalid="ignore"):
                ratio = np.where(amp > 0, entry / np.where(amp > 0, amp, 1.0), 1.0)
            assert np.all(gain <= ratio + 1e-9)


def test_binary_general_consistency(rng):
    for seed in range(15):
        model = gen_fully_random(5, 10000 + seed)
        fg = model.to_factor_graph()
        general = build_matrix_general(fg)
        binary = build_matrix_binary(model)
        # map the general edge (pair factor -> variable) onto the directed
        # pair (other member -> variable); factor order is singles first
        perm = []
        for f_idx, target in general.labels:
            scope = fg.factors[f_idx].scope
            src = scope[0] if scope[1] == target else scope[1]
            bond = f_idx - model.num_vars
            perm.append(binary.labels.index((src, target, bond)))
        perm = np.array(perm)
        reordered = binary.matrix[np.ix_(perm, perm)]
        assert general.matrix.shape == reordered.shape
        np.testing.assert_allclose(general.matrix, reordered, atol=1e-12)
        assert (general.matrix > 0).sum() == (reordered > 0).sum()
        rho_g, ok_g = spectral_radius_info(general.matrix, tol=1e-10)
        rho_b, ok_b = spectral_radius_info(binary.matrix, tol=1e-10)
        assert ok_g and ok_b
        assert rho_g == pytest.approx(rho_b, abs=1e-9)


def test_binary_radius_matches_eigensolver(rng):
    for seed in range(10):
        model = gen_fully_random(5, 11000 + seed)
        bm = build_matrix_binary(model)
        value, certified = spectral_radius_info(bm.matrix, tol=1e-10)
        assert certified
        assert value == pytest.approx(spectral_radius_eig(bm.matrix), abs=1e-9)
