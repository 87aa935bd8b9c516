"""Discrete factor graphs: construction, validation, text I/O, structure queries.

A factor graph is a set of variables with finite cardinalities plus a list of
nonnegative factor tables, each over an ordered scope of distinct variables.
Tables are stored row-major with the last scope variable fastest.
"""

import numpy as np


class ModelError(ValueError):
    """A structurally invalid model (bad scope, bad table, bad cardinality)."""


class FormatError(ModelError):
    """A malformed model document; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class Factor:
    """One factor: an ordered scope of variable ids and a shaped table."""

    def __init__(self, scope, table):
        self.scope = tuple(int(v) for v in scope)
        self.table = np.asarray(table, dtype=float)

    def __repr__(self):
        return f"Factor(scope={self.scope}, shape={self.table.shape})"


class FactorGraph:
    """Immutable collection of variables and nonnegative factors.

    Args:
        cardinalities: per-variable number of states (positive ints).
        factors: iterable of (scope, table) pairs; ``table`` may be flat
            (row-major, last scope variable fastest) or already shaped.
    """

    def __init__(self, cardinalities, factors):
        self.cardinalities = tuple(int(c) for c in cardinalities)
        if any(c < 1 for c in self.cardinalities):
            raise ModelError("cardinalities must be positive")
        self.num_vars = len(self.cardinalities)
        self.factors = []
        for f_idx, (scope, table) in enumerate(factors):
            scope = tuple(int(v) for v in scope)
            for v in scope:
                if not 0 <= v < self.num_vars:
                    raise ModelError(f"factor {f_idx}: variable id {v} out of range")
            if len(set(scope)) != len(scope):
                raise ModelError(f"factor {f_idx}: repeated variable in scope {scope}")
            shape = tuple(self.cardinalities[v] for v in scope)
            arr = np.asarray(table, dtype=float)
            if arr.size != int(np.prod(shape)):
                raise ModelError(
                    f"factor {f_idx}: table has {arr.size} entries, "
                    f"scope {scope} needs {int(np.prod(shape))}"
                )
            arr = arr.reshape(shape)
            if not np.all(np.isfinite(arr)):
                raise ModelError(f"factor {f_idx}: non-finite table entry")
            if np.any(arr < 0):
                raise ModelError(f"factor {f_idx}: negative table entry")
            if not np.any(arr > 0):
                raise ModelError(f"factor {f_idx}: table is identically zero")
            arr.flags.writeable = False
            self.factors.append(Factor(scope, arr))

    @property
    def num_factors(self):
        return len(self.factors)

    def neighbors(self, v):
        """Indices of all factors whose scope contains variable ``v``."""
        return [i for i, f in enumerate(self.factors) if v in f.scope]

    def message_edges(self):
        """Directed factor-to-variable edges carrying non-constant messages.

        Single-variable factors send constant messages and generate no edges.
        Returns a list of (factor_index, variable) pairs; the list position is
        the edge's dense ordinal.
        """
        edges = []
        for f_idx, f in enumerate(self.factors):
            if len(f.scope) >= 2:
                for v in f.scope:
                    edges.append((f_idx, v))
        return edges

    def is_acyclic(self):
        """True when the bipartite variable/factor graph has no cycle."""
        parent = list(range(self.num_vars + self.num_factors))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for f_idx, f in enumerate(self.factors):
            fnode = self.num_vars + f_idx
            for v in f.scope:
                ra, rb = find(v), find(fnode)
                if ra == rb:
                    return False
                parent[ra] = rb
        return True

    def __repr__(self):
        return (
            f"FactorGraph(num_vars={self.num_vars}, "
            f"num_factors={self.num_factors})"
        )


class ZeroSupportReport:
    """Outcome of the zero-support check, per factor and overall."""

    def __init__(self, factor_ok, failures):
        self.factor_ok = list(factor_ok)
        self.failures = list(failures)
        self.ok = all(self.factor_ok)

    def __bool__(self):
        return self.ok


def check_zero_support(fg):
    """Check the support conditions that keep positive messages positive.

    For every multi-variable factor, each member variable in each of its
    states must admit at least one completion of the remaining scope with a
    strictly positive table entry.  Single-variable factors must be strictly
    positive everywhere.

    Returns a :class:`ZeroSupportReport`; ``failures`` lists tuples
    (factor_index, variable, state) pinpointing the first kind of violation
    and (factor_index, variable, None) for a zero single-variable factor.
    """
    factor_ok = []
    failures = []
    for f_idx, f in enumerate(fg.factors):
        if len(f.scope) == 1:
            good = bool(np.all(f.table > 0))
            if not good:
                failures.append((f_idx, f.scope[0], None))
            factor_ok.append(good)
            continue
        good = True
        for pos, v in enumerate(f.scope):
            moved = np.moveaxis(f.table, pos, 0)
            has_support = moved.reshape(moved.shape[0], -1).max(axis=1) > 0
            for state in np.nonzero(~has_support)[0]:
                failures.append((f_idx, v, int(state)))
                good = False
        factor_ok.append(good)
    return ZeroSupportReport(factor_ok, failures)


def _tokenize(text):
    for line_no, line in enumerate(text.splitlines(), start=1):
        for tok in line.split():
            yield tok, line_no


class _TokenReader:
    def __init__(self, text):
        self._it = _tokenize(text)
        self.line = 0

    def next(self, what):
        try:
            tok, self.line = next(self._it)
        except StopIteration:
            raise FormatError(f"unexpected end of document, expected {what}",
                              self.line) from None
        return tok

    def next_int(self, what):
        tok = self.next(what)
        try:
            return int(tok)
        except ValueError:
            raise FormatError(f"expected {what}, got {tok!r}", self.line) from None

    def next_float(self, what):
        tok = self.next(what)
        try:
            return float(tok)
        except ValueError:
            raise FormatError(f"expected {what}, got {tok!r}", self.line) from None

    def done(self):
        try:
            tok, line = next(self._it)
        except StopIteration:
            return
        raise FormatError(f"trailing token {tok!r}", line)


def load_model(text):
    """Parse a UAI-style whitespace-separated document into a FactorGraph.

    Layout: the token "MARKOV", the variable count, the cardinalities, the
    factor count, one scope per factor (size then 0-based variable ids), then
    per factor its table size followed by that many nonnegative reals
    (row-major, last scope variable fastest).
    """
    r = _TokenReader(text)
    magic = r.next("header token")
    if magic != "MARKOV":
        raise FormatError(f"expected MARKOV header, got {magic!r}", r.line)
    num_vars = r.next_int("variable count")
    if num_vars < 0:
        raise FormatError("negative variable count", r.line)
    cards = [r.next_int(f"cardinality of variable {i}") for i in range(num_vars)]
    for i, c in enumerate(cards):
        if c < 1:
            raise FormatError(f"variable {i} has cardinality {c}", r.line)
    num_factors = r.next_int("factor count")
    if num_factors < 0:
        raise FormatError("negative factor count", r.line)
    scopes = []
    for f in range(num_factors):
        size = r.next_int(f"scope size of factor {f}")
        if size < 1:
            raise FormatError(f"factor {f} has scope size {size}", r.line)
        scope = []
        for k in range(size):
            v = r.next_int(f"scope entry {k} of factor {f}")
            if not 0 <= v < num_vars:
                raise FormatError(f"factor {f}: variable id {v} out of range", r.line)
            scope.append(v)
        if len(set(scope)) != len(scope):
            raise FormatError(f"factor {f}: repeated variable in scope", r.line)
        scopes.append(tuple(scope))
    tables = []
    for f, scope in enumerate(scopes):
        expected = 1
        for v in scope:
            expected *= cards[v]
        size = r.next_int(f"table size of factor {f}")
        if size != expected:
            raise FormatError(
                f"factor {f}: declared table size {size}, scope needs {expected}",
                r.line,
            )
        values = np.empty(size)
        for k in range(size):
            x = r.next_float(f"table entry {k} of factor {f}")
            if not np.isfinite(x) or x < 0:
                raise FormatError(f"factor {f}: bad table entry {x!r}", r.line)
            values[k] = x
        tables.append(values)
    r.done()
    return FactorGraph(cards, list(zip(scopes, tables)))


def save_model(fg):
    """Render a FactorGraph back to the text format; round-trips exactly
    at 17 significant digits."""
    out = ["MARKOV", str(fg.num_vars),
           " ".join(str(c) for c in fg.cardinalities),
           str(fg.num_factors)]
    for f in fg.factors:
        out.append(" ".join([str(len(f.scope))] + [str(v) for v in f.scope]))
    out.append("")
    for f in fg.factors:
        flat = f.table.ravel()
        out.append(str(flat.size))
        out.append(" ".join(format(x, ".17g") for x in flat))
    return "\n".join(out) + "\n"


def exact_marginals(fg, max_states=1 << 22):
    """Exhaustive-summation marginals; the brute-force reference for tests
    and small models.

    Returns (single, factor) where ``single[v]`` is the marginal of variable
    ``v`` and ``factor[f]`` the joint marginal over factor ``f``'s scope.
    """
    total = 1
    for c in fg.cardinalities:
        total *= c
    if total > max_states:
        raise ModelError(f"state space {total} exceeds cap {max_states}")
    joint = np.ones(fg.cardinalities)
    for f in fg.factors:
        shape = [1] * fg.num_vars
        for v in f.scope:
            shape[v] = fg.cardinalities[v]
        # reorder scope axes into ascending variable order before broadcasting
        order = np.argsort(f.scope)
        perm_table = np.transpose(f.table, order)
        joint = joint * perm_table.reshape(shape)
    z = joint.sum()
    if z <= 0:
        raise ModelError("model has zero partition sum")
    joint = joint / z
    singles = []
    for v in range(fg.num_vars):
        axes = tuple(a for a in range(fg.num_vars) if a != v)
        singles.append(joint.sum(axis=axes))
    factor_marginals = []
    for f in fg.factors:
        axes = tuple(a for a in range(fg.num_vars) if a not in f.scope)
        m = joint.sum(axis=axes)
        # sum leaves axes in ascending variable order; restore scope order
        asc = tuple(sorted(f.scope))
        perm = [asc.index(v) for v in f.scope]
        factor_marginals.append(np.transpose(m, perm))
    return singles, factor_marginals
