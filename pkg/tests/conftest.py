import numpy as np
import pytest

from bpcert import FactorGraph


def loop_graph(n, eps):
    """Single cycle of n binary variables: identity pair factors except one
    ferromagnetic factor [[1, eps], [eps, 1]] closing the loop."""
    factors = [((k, k + 1), np.array([1.0, 0.0, 0.0, 1.0]))
               for k in range(n - 1)]
    factors.append(((n - 1, 0), np.array([1.0, eps, eps, 1.0])))
    return FactorGraph([2] * n, factors)


def random_tree(rng, max_nodes=30, max_card=4):
    """Random factor-graph tree: variables plus single/pair/triple factors
    attached so the bipartite graph stays acyclic."""
    cards = [int(rng.integers(2, max_card + 1))]
    factors = []
    nodes = 1
    while True:
        arity = int(rng.choice([1, 2, 2, 3]))
        if nodes + arity > max_nodes:  # factor node plus fresh variables
            break
        anchor = int(rng.integers(0, len(cards)))
        scope = [anchor]
        for _ in range(arity - 1):
            cards.append(int(rng.integers(2, max_card + 1)))
            scope.append(len(cards) - 1)
        size = 1
        for v in scope:
            size *= cards[v]
        factors.append((tuple(scope), rng.uniform(0.1, 3.0, size)))
        nodes += arity
        if rng.random() < 0.08:
            break
    return FactorGraph(cards, factors)


def random_positive_graph(rng, num_vars=4, max_card=3):
    """Small random factor graph with strictly positive tables (may have
    cycles)."""
    cards = [int(rng.integers(2, max_card + 1)) for _ in range(num_vars)]
    factors = []
    for v in range(num_vars):
        if rng.random() < 0.7:
            factors.append(((v,), rng.uniform(0.2, 2.0, cards[v])))
    for a in range(num_vars):
        for b in range(a + 1, num_vars):
            if rng.random() < 0.6:
                factors.append(((a, b), rng.uniform(0.2, 2.0, cards[a] * cards[b])))
    if not factors:
        factors.append(((0,), rng.uniform(0.2, 2.0, cards[0])))
    return FactorGraph(cards, factors)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
