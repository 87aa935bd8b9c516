"""Binary pairwise convergence certificates.

The base bound matrix over directed pairs has entry tanh|J| wherever one
directed message feeds another.  Local fields tighten it: propagating
intervals for the cavity fields for m sweeps shrinks each entry to the
average of tanh(|J| - h) and tanh(|J| + h), where h is the distance of the
cavity interval from zero.  Depth m = 0 reproduces the field-free matrix
exactly.
"""

import numpy as np

from .certificate import Certificate
from .spectral import BoundMatrix, spectral_radius_info

_ATANH_CLIP = 1.0 - 1e-16


def build_matrix_binary(model):
    """Field-free bound matrix: entry (i->j, k->i) is tanh|J_ij| for every
    feeder k->i that is not the same bond run backwards."""
    return _assemble(model, np.tanh(np.abs(model.edge_coupling)))


def _assemble(model, row_values):
    n = model.num_edges
    mat = np.zeros((n, n))
    rev = np.arange(n) ^ 1
    for e in range(n):
        feeders = model.in_edges[model.edge_src[e]]
        feeders = feeders[feeders != rev[e]]
        mat[e, feeders] = row_values[e]
    mat.flags.writeable = False
    return BoundMatrix(tuple(model.directed_edges()), mat)


def linfty_condition(model):
    """Row-sum condition: max over variables of
    (degree - 1) * largest incident tanh|J|."""
    value = 0.0
    worst = None
    amp = np.tanh(np.abs(model.edge_coupling))
    for v in range(model.num_vars):
        deg = model.degree(v)
        if deg < 2:
            continue
        out_edges = np.nonzero(model.edge_src == v)[0]
        local = (deg - 1) * float(amp[out_edges].max())
        if local > value:
            value, worst = local, v
    return Certificate("linfty", float(value), value < 1.0,
                       detail={"worst_variable": worst})


def l1_condition_binary(model):
    """Column-sum condition: max over variables i and neighbors k of the
    summed tanh|J| over i's other bonds.  Never above the row-sum value."""
    amp = np.tanh(np.abs(model.edge_coupling))
    out_sum = np.zeros(model.num_vars)
    np.add.at(out_sum, model.edge_src, amp)
    if model.num_edges == 0:
        return Certificate("l1", 0.0, True)
    cols = out_sum[model.edge_dst] - amp
    value = float(cols.max())
    worst = int(cols.argmax())
    return Certificate("l1", value, value < 1.0,
                       detail={"worst_edge": model.directed_edges()[worst]})


def _interval_map(coupling, lo, hi):
    """Monotone image of [lo, hi] under h -> atanh(tanh(J) tanh(h)).

    Endpoints swap when the coupling is negative; infinite endpoints map to
    the saturation values +-J.
    """
    t = np.tanh(coupling)
    y1 = np.arctanh(np.clip(t * np.tanh(lo), -_ATANH_CLIP, _ATANH_CLIP))
    y2 = np.arctanh(np.clip(t * np.tanh(hi), -_ATANH_CLIP, _ATANH_CLIP))
    return np.minimum(y1, y2), np.maximum(y1, y2)


def cavity_intervals(model, m):
    """Per-edge enclosures of the cavity field after ``m`` sweeps.

    Depth 0 is the whole line.  Each sweep maps every feeder interval
    through the message response and sums them around the local field;
    intervals are non-expanding in depth.  Returns (lo, hi) arrays indexed
    by directed edge.
    """
    if m < 0:
        raise ValueError("depth must be nonnegative")
    n = model.num_edges
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    rev = np.arange(n) ^ 1
    for _ in range(m):
        glo, ghi = _interval_map(model.edge_coupling, lo, hi)
        sum_lo = np.zeros(model.num_vars)
        sum_hi = np.zeros(model.num_vars)
        np.add.at(sum_lo, model.edge_dst, glo)
        np.add.at(sum_hi, model.edge_dst, ghi)
        src = model.edge_src
        lo = model.fields[src] + sum_lo[src] - glo[rev]
        hi = model.fields[src] + sum_hi[src] - ghi[rev]
    return lo, hi


def cavity_gap(lo, hi):
    """Distance of each interval from zero: |hi| when hi < 0, lo when
    lo > 0, exactly zero when the interval straddles the origin."""
    return np.where(hi < 0, -hi, np.where(lo > 0, lo, 0.0))


def improved_matrix(model, m):
    """Field-aware bound matrix at interval depth ``m``.

    Each entry becomes ``(tanh(|J| - h) + tanh(|J| + h)) / 2`` with h the
    cavity gap of the row edge; at m = 0 this is exactly the field-free
    matrix."""
    lo, hi = cavity_intervals(model, m)
    gap = cavity_gap(lo, hi)
    absj = np.abs(model.edge_coupling)
    vals = 0.5 * (np.tanh(absj - gap) + np.tanh(absj + gap))
    return _assemble(model, vals)


def certify_spectral_binary(model, tol=1e-9):
    """Field-free spectral certificate: radius of the base matrix."""
    bm = build_matrix_binary(model)
    value, certified = spectral_radius_info(bm.matrix, tol=tol)
    detail = {"rate": value, "certified": certified}
    if not certified:
        detail["note"] = "upper-bound-only"
    return Certificate("spectral", float(value), value < 1.0, detail=detail)


def certify_improved(model, m=1, tol=1e-9):
    """Field-aware spectral certificate at depth ``m``; its value is
    non-increasing in ``m`` and never above the field-free value."""
    bm = improved_matrix(model, m)
    value, certified = spectral_radius_info(bm.matrix, tol=tol)
    detail = {"rate": value, "certified": certified}
    if not certified:
        detail["note"] = "upper-bound-only"
    return Certificate("improved", float(value), value < 1.0, m=m, detail=detail)
