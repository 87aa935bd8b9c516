"""Binary pairwise models: couplings J on variable pairs plus local fields.

Spin convention: table index 0 is spin +1 and index 1 is spin -1, fixed
throughout the package.  Pair bonds are kept as a list so that parallel
bonds between the same variable pair (which arise e.g. on 2-wide toroidal
grids) stay distinct; each bond contributes its own pair of directed
messages.
"""

import math

import numpy as np

from .factor_graph import FactorGraph, ModelError

#: spin value of table index 0 and 1
SPINS = (1.0, -1.0)


class BinaryPairwiseModel:
    """Couplings and fields of a binary model with pairwise interactions.

    Attributes:
        num_vars: variable count.
        bonds: tuple of (i, j, J) with i < j; parallel bonds allowed.
        fields: dense per-variable field array.
    """

    def __init__(self, num_vars, bonds, fields=None):
        self.num_vars = int(num_vars)
        canon = []
        for (i, j, coupling) in bonds:
            i, j = int(i), int(j)
            if i == j:
                raise ModelError(f"self-coupling on variable {i}")
            if not 0 <= i < self.num_vars or not 0 <= j < self.num_vars:
                raise ModelError(f"bond ({i},{j}) out of range")
            if not math.isfinite(coupling):
                raise ModelError(f"non-finite coupling on ({i},{j})")
            if i > j:
                i, j = j, i
            canon.append((i, j, float(coupling)))
        self.bonds = tuple(canon)
        if fields is None:
            fields = np.zeros(self.num_vars)
        self.fields = np.asarray(fields, dtype=float).copy()
        if self.fields.shape != (self.num_vars,):
            raise ModelError("fields must have one entry per variable")
        if not np.all(np.isfinite(self.fields)):
            raise ModelError("non-finite field")
        self.fields.flags.writeable = False
        self._build_edges()

    def _build_edges(self):
        # directed pair 2b runs bond b from i to j, 2b+1 runs it back
        n_edges = 2 * len(self.bonds)
        self.edge_src = np.empty(n_edges, dtype=int)
        self.edge_dst = np.empty(n_edges, dtype=int)
        self.edge_coupling = np.empty(n_edges)
        for b, (i, j, coupling) in enumerate(self.bonds):
            self.edge_src[2 * b], self.edge_dst[2 * b] = i, j
            self.edge_src[2 * b + 1], self.edge_dst[2 * b + 1] = j, i
            self.edge_coupling[2 * b] = coupling
            self.edge_coupling[2 * b + 1] = coupling
        for a in (self.edge_src, self.edge_dst, self.edge_coupling):
            a.flags.writeable = False
        self.in_edges = [np.nonzero(self.edge_dst == v)[0]
                         for v in range(self.num_vars)]

    @property
    def num_edges(self):
        """Number of directed pairs: twice the bond count."""
        return 2 * len(self.bonds)

    def reverse_edge(self, e):
        """Ordinal of the same bond run in the opposite direction."""
        return e ^ 1

    def directed_edges(self):
        """List of (source, destination, bond_index) per directed pair."""
        return [(int(self.edge_src[e]), int(self.edge_dst[e]), e // 2)
                for e in range(self.num_edges)]

    def degree(self, v):
        """Number of bonds incident to ``v`` (parallel bonds counted)."""
        return len(self.in_edges[v])

    def coupling_map(self):
        """Couplings merged per variable pair (parallel bonds summed)."""
        merged = {}
        for (i, j, coupling) in self.bonds:
            merged[(i, j)] = merged.get((i, j), 0.0) + coupling
        return merged

    def neighbor_vars(self, v):
        """Distinct variables sharing at least one bond with ``v``."""
        out = set()
        for (i, j, _) in self.bonds:
            if i == v:
                out.add(j)
            elif j == v:
                out.add(i)
        return sorted(out)

    def to_factor_graph(self):
        """Expand to a factor graph: one single-variable factor exp(theta*x)
        per variable and one pair factor exp(J*x*y) per bond."""
        factors = []
        for v in range(self.num_vars):
            t = self.fields[v]
            factors.append(((v,), np.array([math.exp(t), math.exp(-t)])))
        for (i, j, coupling) in self.bonds:
            e = math.exp(coupling)
            factors.append(((i, j), np.array([e, 1.0 / e, 1.0 / e, e])))
        return FactorGraph([2] * self.num_vars, factors)

    def __repr__(self):
        return (f"BinaryPairwiseModel(num_vars={self.num_vars}, "
                f"bonds={len(self.bonds)})")


def from_ising(couplings, fields, num_vars=None):
    """Build a factor graph from coupling and field maps.

    Args:
        couplings: mapping (i, j) -> J with i != j; both orientations of the
            same pair count as a duplicate.
        fields: mapping i -> theta, or a dense sequence.
        num_vars: optional; inferred from the largest mentioned id otherwise.

    Emits one single-variable factor per field entry and one pair factor per
    coupling, in sorted id order.
    """
    pair_items = []
    seen = set()
    for (i, j), coupling in couplings.items():
        i, j = int(i), int(j)
        if i == j:
            raise ModelError(f"self-coupling on variable {i}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ModelError(f"duplicate coupling for pair {key}")
        seen.add(key)
        if not math.isfinite(coupling):
            raise ModelError(f"non-finite coupling on {key}")
        pair_items.append((key, float(coupling)))
    pair_items.sort()
    if hasattr(fields, "items"):
        field_items = sorted((int(v), float(t)) for v, t in fields.items())
    else:
        field_items = list(enumerate(float(t) for t in fields))
    for v, t in field_items:
        if not math.isfinite(t):
            raise ModelError(f"non-finite field on variable {v}")
    mentioned = [v for (i, j), _ in pair_items for v in (i, j)]
    mentioned += [v for v, _ in field_items]
    if num_vars is None:
        num_vars = max(mentioned) + 1 if mentioned else 0
    factors = []
    for v, t in field_items:
        factors.append(((v,), np.array([math.exp(t), math.exp(-t)])))
    for (i, j), coupling in pair_items:
        e = math.exp(coupling)
        factors.append(((i, j), np.array([e, 1.0 / e, 1.0 / e, e])))
    return FactorGraph([2] * num_vars, factors)


def to_binary_pairwise(fg):
    """Extract couplings and fields from a strictly positive binary
    pairwise factor graph.

    For a pair table psi the coupling is
    ``0.25*log(psi(+,+)*psi(-,-) / (psi(+,-)*psi(-,+)))`` and each incident
    variable absorbs a field contribution; single-variable factors contribute
    ``0.5*log(psi(+)/psi(-))``.  The reconstruction exp(J*x*y + a*x + b*y)
    reproduces every factor up to a positive constant.
    """
    for v, c in enumerate(fg.cardinalities):
        if c != 2:
            raise ModelError(f"variable {v} has cardinality {c}, need 2")
    fields = np.zeros(fg.num_vars)
    bonds = []
    for f_idx, f in enumerate(fg.factors):
        if len(f.scope) > 2:
            raise ModelError(f"factor {f_idx} has scope size {len(f.scope)}")
        if np.any(f.table <= 0):
            raise ModelError(f"factor {f_idx} has a zero entry")
        logt = np.log(f.table)
        if len(f.scope) == 1:
            fields[f.scope[0]] += 0.5 * (logt[0] - logt[1])
        else:
            i, j = f.scope
            coupling = 0.25 * (logt[0, 0] + logt[1, 1] - logt[0, 1] - logt[1, 0])
            fields[i] += 0.25 * (logt[0, 0] + logt[0, 1] - logt[1, 0] - logt[1, 1])
            fields[j] += 0.25 * (logt[0, 0] + logt[1, 0] - logt[0, 1] - logt[1, 1])
            bonds.append((i, j, coupling))
    return BinaryPairwiseModel(fg.num_vars, bonds, fields)
