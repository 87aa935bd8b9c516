"""Convergence certificates for arbitrary discrete factor graphs.

The bound matrix lives on directed factor-to-variable edges: entry
(I->i, J->j) is the strength of factor I between members i and j whenever
the message J->j feeds the update of I->i.  A spectral radius below one
certifies convergence to a unique fixed point; the column-sum condition is
the cruder norm version of the same statement.
"""

import numpy as np

from .certificate import Certificate
from .factor_graph import ModelError, check_zero_support
from .spectral import BoundMatrix, spectral_radius_info
from .strength import potential_strength


def _pair_strengths(fg, max_states=1 << 20):
    """Strength of every multi-variable factor between each ordered pair of
    its members, as {(f_idx, i, j): value} (symmetric in i, j)."""
    out = {}
    for f_idx, f in enumerate(fg.factors):
        if len(f.scope) < 2:
            continue
        for a in range(len(f.scope)):
            for b in range(a + 1, len(f.scope)):
                i, j = f.scope[a], f.scope[b]
                s = potential_strength(f, i, j, max_states=max_states)
                out[(f_idx, i, j)] = s
                out[(f_idx, j, i)] = s
    return out


def build_matrix_general(fg, max_states=1 << 20):
    """Bound matrix over directed factor-to-variable edges.

    Requires the zero-support check to pass.  Rows and columns range over
    edges from multi-variable factors only; single-variable factors send
    constant messages and are excluded.
    """
    report = check_zero_support(fg)
    if not report.ok:
        raise ModelError(f"zero-support check failed: {report.failures[:3]}")
    edges = fg.message_edges()
    index = {key: e for e, key in enumerate(edges)}
    strengths = _pair_strengths(fg, max_states=max_states)
    n = len(edges)
    mat = np.zeros((n, n))
    factors_at = [[] for _ in range(fg.num_vars)]
    for f_idx, f in enumerate(fg.factors):
        if len(f.scope) >= 2:
            for v in f.scope:
                factors_at[v].append(f_idx)
    for row, (f_idx, i) in enumerate(edges):
        for j in fg.factors[f_idx].scope:
            if j == i:
                continue
            for g_idx in factors_at[j]:
                if g_idx == f_idx:
                    continue
                mat[row, index[(g_idx, j)]] = strengths[(f_idx, i, j)]
    mat.flags.writeable = False
    return BoundMatrix(tuple(edges), mat)


def l1_condition_general(fg, max_states=1 << 20):
    """Column-sum condition: the largest, over directed edges (J, j), of the
    summed strengths of all other factors at j toward their other members.
    Holding (< 1) certifies convergence to a unique fixed point."""
    strengths = _pair_strengths(fg, max_states=max_states)
    row_sums = {}   # (f_idx, j) -> sum_{i in I \ j} strength(I, i, j)
    for f_idx, f in enumerate(fg.factors):
        if len(f.scope) < 2:
            continue
        for j in f.scope:
            row_sums[(f_idx, j)] = sum(
                strengths[(f_idx, i, j)] for i in f.scope if i != j
            )
    totals = np.zeros(fg.num_vars)
    for (f_idx, j), s in row_sums.items():
        totals[j] += s
    value = 0.0
    worst = None
    for (f_idx, j) in row_sums:
        col = totals[j] - row_sums[(f_idx, j)]
        if col > value:
            value, worst = col, (f_idx, j)
    return Certificate("l1", float(value), value < 1.0,
                       detail={"worst_edge": worst})


def certify_spectral_general(fg, tol=1e-9, max_states=1 << 20):
    """Spectral certificate for a general factor graph.

    Refuses (raises) when the zero-support hypothesis fails.  Acyclic
    graphs short-circuit to value zero; otherwise the value is the spectral
    radius of the general bound matrix within ``tol``.
    """
    report = check_zero_support(fg)
    if not report.ok:
        raise ModelError(
            "spectral certificate needs the zero-support condition; "
            f"violations: {report.failures[:3]}"
        )
    if fg.is_acyclic():
        return Certificate("spectral", 0.0, True,
                           detail={"acyclic": True, "rate": 0.0})
    bm = build_matrix_general(fg, max_states=max_states)
    value, certified = spectral_radius_info(bm.matrix, tol=tol)
    detail = {"acyclic": False, "rate": value, "certified": certified}
    if not certified:
        detail["note"] = "upper-bound-only"
    return Certificate("spectral", float(value), value < 1.0, detail=detail)
