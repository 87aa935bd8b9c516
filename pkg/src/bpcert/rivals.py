"""Rival convergence conditions: Dobrushin, Simon, and the allocation
(free-energy uniqueness) feasibility test.

All three accept either a pairwise factor graph or a binary pairwise model;
models are expanded on the fly.  Enumeration caps are hard errors, never
silent approximations, because these conditions exist for exact comparison.
"""

import itertools

import numpy as np

from .certificate import Certificate
from .factor_graph import FactorGraph, ModelError
from .ising import BinaryPairwiseModel, to_binary_pairwise
from .simplex import feasible_point
from .strength import heskes_sigma, simon_strength


def _as_graph(model_or_fg):
    if isinstance(model_or_fg, BinaryPairwiseModel):
        return model_or_fg.to_factor_graph(), model_or_fg
    return model_or_fg, None


def _pairwise_tables(fg):
    """Per-variable single tables (merged) and per-pair merged pair tables.

    Requires strictly positive factors with scopes of size at most two.
    Returns (singles, pairs) with ``pairs[(i, j)]`` oriented (i, j), i < j.
    """
    singles = [np.ones(c) for c in fg.cardinalities]
    pairs = {}
    for f_idx, f in enumerate(fg.factors):
        if np.any(f.table <= 0):
            raise ModelError(f"factor {f_idx} has a zero entry")
        if len(f.scope) == 1:
            singles[f.scope[0]] = singles[f.scope[0]] * f.table
        elif len(f.scope) == 2:
            i, j = f.scope
            tab = f.table if i < j else f.table.T
            key = (min(i, j), max(i, j))
            pairs[key] = pairs.get(key, 1.0) * tab
        else:
            raise ModelError(f"factor {f_idx} is not pairwise")
    return singles, pairs


def _neighbor_map(pairs, num_vars):
    nbrs = [[] for _ in range(num_vars)]
    for (i, j) in pairs:
        nbrs[i].append(j)
        nbrs[j].append(i)
    return [sorted(v) for v in nbrs]


def _pair_table(pairs, i, j):
    if i < j:
        return pairs[(i, j)]
    return pairs[(j, i)].T


def _dobrushin_entry_enumerated(singles, pairs, nbrs, cards, i, j, cap):
    """Largest total-variation swing of the conditional of x_i when x_j
    flips, over all assignments of i's other neighbors."""
    others = [k for k in nbrs[i] if k != j]
    n_combo = 1
    for k in others:
        n_combo *= cards[k]
    if n_combo > cap:
        raise ModelError(
            f"conditional enumeration for ({i},{j}) needs {n_combo} cases, cap {cap}"
        )
    ci, cj = cards[i], cards[j]
    base = np.log(singles[i])[:, None, None] * np.ones((ci, cj, n_combo))
    base += np.log(_pair_table(pairs, i, j))[:, :, None]
    for combo_idx, assignment in enumerate(itertools.product(
            *[range(cards[k]) for k in others])):
        for k, xk in zip(others, assignment):
            base[:, :, combo_idx] += np.log(_pair_table(pairs, i, k)[:, xk])[:, None]
    p = np.exp(base - base.max(axis=0, keepdims=True))
    p /= p.sum(axis=0, keepdims=True)
    # half L1 distance between conditionals for every pair of x_j values
    best = 0.0
    for b1 in range(cj):
        for b2 in range(b1 + 1, cj):
            dist = 0.5 * np.abs(p[:, b1, :] - p[:, b2, :]).sum(axis=0)
            best = max(best, float(dist.max()))
    return best


def _binary_interference(signed, theta, cap):
    """min over sign assignments of |theta + sum(+-J)|; exhaustive."""
    k = signed.size
    if k == 0:
        return abs(theta)
    if 2 ** k > cap:
        raise ModelError(f"{2 ** k} sign patterns exceed cap {cap}")
    patterns = np.array(list(itertools.product((1.0, -1.0), repeat=k)))
    return float(np.abs(theta + patterns @ signed).min())


def dobrushin_matrix(model_or_fg, cap=1 << 16):
    """Interdependence matrix C: entry (i, j) bounds how much the
    conditional of x_i can move when x_j alone changes.

    Binary pairwise inputs take a closed-form path,
    ``(tanh(|J| - H) + tanh(|J| + H)) / 2`` with H the least attainable
    cavity magnitude; it matches the generic enumeration to 1e-12.
    """
    fg, model = _as_graph(model_or_fg)
    if model is None and all(c == 2 for c in fg.cardinalities):
        try:
            model = to_binary_pairwise(fg)
        except ModelError:
            model = None
    if model is not None:
        return _dobrushin_matrix_binary(model, cap)
    singles, pairs = _pairwise_tables(fg)
    nbrs = _neighbor_map(pairs, fg.num_vars)
    c = np.zeros((fg.num_vars, fg.num_vars))
    for i in range(fg.num_vars):
        for j in nbrs[i]:
            c[i, j] = _dobrushin_entry_enumerated(
                singles, pairs, nbrs, fg.cardinalities, i, j, cap)
    return c

def _dobrushin_matrix_binary(model, cap):
    couplings = model.coupling_map()
    nbrs = [model.neighbor_vars(v) for v in range(model.num_vars)]
    c = np.zeros((model.num_vars, model.num_vars))
    for i in range(model.num_vars):
        for j in nbrs[i]:
            others = [k for k in nbrs[i] if k != j]
            signed = np.array([couplings[(min(i, k), max(i, k))] for k in others])
            absj = abs(couplings[(min(i, j), max(i, j))])
            h = _binary_interference(signed, model.fields[i], cap)
            c[i, j] = 0.5 * (np.tanh(absj - h) + np.tanh(absj + h))
    return c


def dobrushin_condition(model_or_fg, cap=1 << 16):
    """Holds when no single site exerts total influence one or more on its
    neighbors' conditionals (largest column sum of the interdependence
    matrix below one).

    The transposed aggregation, the largest influence any site receives,
    is the textbook twin condition and is reported in the detail; both
    certify a unique fixed point.
    """
    c = dobrushin_matrix(model_or_fg, cap=cap)
    if c.size == 0:
        return Certificate("dobrushin", 0.0, True)
    cols = c.sum(axis=0)
    value = float(cols.max())
    return Certificate("dobrushin", value, value < 1.0,
                       detail={"worst_variable": int(cols.argmax()),
                               "received_influence": float(c.sum(axis=1).max())})


def simon_condition(model_or_fg):
    """Holds when, at every variable, the summed log dynamic ranges of the
    incident pair factors stay below one."""
    fg, _ = _as_graph(model_or_fg)
    totals = np.zeros(fg.num_vars)
    for f in fg.factors:
        if len(f.scope) == 2:
            s = simon_strength(f.table)
            totals[f.scope[0]] += s
            totals[f.scope[1]] += s
        elif len(f.scope) > 2:
            raise ModelError("condition needs pairwise factors")
    value = float(totals.max()) if totals.size else 0.0
    return Certificate("simon", value, value < 1.0,
                       detail={"worst_variable": int(totals.argmax()) if totals.size else None})


def allocation_program(fg, cap=1 << 24):
    """Assemble the allocation feasibility program.

    Variables are one X per (factor, member) plus one auxiliary t per
    factor standing in for max_i X; the max constraint linearizes exactly
    because its coefficient 1 - sigma is nonnegative.  Returns
    (a_ub, b_ub, x_labels, sigmas).
    """
    sigmas = []
    for f in fg.factors:
        if len(f.scope) == 1:
            sigmas.append(0.0)
        else:
            sigmas.append(heskes_sigma(f.table, max_pairs=cap))
    x_labels = [(f_idx, v) for f_idx, f in enumerate(fg.factors) for v in f.scope]
    x_index = {lab: k for k, lab in enumerate(x_labels)}
    nx = len(x_labels)
    nf = fg.num_factors
    rows = []
    rhs = []
    # t_f >= X_{f,v}  ->  X - t <= 0
    for (f_idx, v), k in x_index.items():
        row = np.zeros(nx + nf)
        row[k] = 1.0
        row[nx + f_idx] = -1.0
        rows.append(row)
        rhs.append(0.0)
    # (1 - sigma) t + sigma * sum X <= 1
    for f_idx, f in enumerate(fg.factors):
        row = np.zeros(nx + nf)
        row[nx + f_idx] = 1.0 - sigmas[f_idx]
        for v in f.scope:
            row[x_index[(f_idx, v)]] += sigmas[f_idx]
        rows.append(row)
        rhs.append(1.0)
    # sum_{factors at v} X >= |N_v| - 1
    for v in range(fg.num_vars):
        incident = [f_idx for f_idx, f in enumerate(fg.factors) if v in f.scope]
        if len(incident) <= 1:
            continue
        row = np.zeros(nx + nf)
        for f_idx in incident:
            row[x_index[(f_idx, v)]] = -1.0
        rows.append(row)
        rhs.append(-(len(incident) - 1.0))
    return np.array(rows), np.array(rhs), x_labels, sigmas


def heskes_condition(model_or_fg, cap=1 << 24, tol=1e-9):
    """Fixed-point uniqueness via allocation feasibility.

    The certificate value is the residual infeasibility of the program
    (zero when a valid allocation exists); a found allocation is stored in
    the detail under "allocation"."""
    fg, _ = _as_graph(model_or_fg)
    a_ub, b_ub, x_labels, sigmas = allocation_program(fg, cap=cap)
    feasible, x, infeas = feasible_point(a_ub, b_ub, tol=tol)
    detail = {"sigmas": sigmas}
    if feasible:
        detail["allocation"] = {lab: float(x[k]) for k, lab in enumerate(x_labels)}
    return Certificate("heskes", float(infeas), feasible, detail=detail)
