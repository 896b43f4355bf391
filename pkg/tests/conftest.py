import random

import pytest

from tapkit.core import RoleInventory, Sentence, Vertex, build_graph
from tapkit.scores import EDGE_OPTIONS, ScoreSet, span_options

E1_TOKENS = (
    "According to the U.S. Census , whereas only 10% of White Americans live at or below "
    "the poverty line today , 28% of African Americans do ."
).split()

E1_VERTICES = [
    Vertex(3, 5, "SOURCE"),  # U.S. Census
    Vertex(8, 9, "VALUE"),  # 10%
    Vertex(10, 12, "WHOLE"),  # White Americans
    Vertex(12, 19, "QUANTITY"),  # live at or below the poverty line
    Vertex(19, 20, "TIME"),  # today
    Vertex(21, 22, "VALUE"),  # 28%
    Vertex(23, 25, "WHOLE"),  # African Americans
]

E1_EDGES = [
    (1, 0, "FACT"),
    (1, 2, "FACT"),
    (1, 3, "FACT"),
    (1, 4, "FACT"),
    (5, 0, "FACT"),
    (5, 6, "FACT"),
    (5, 3, "FACT"),
    (5, 4, "FACT"),
    (1, 5, "ANALOGY"),
    (2, 6, "ANALOGY"),
]


def e1_graph():
    return build_graph(Sentence("E1", E1_TOKENS), E1_VERTICES, E1_EDGES)


@pytest.fixture
def e1():
    return e1_graph()


def _peaky(rng, size):
    """A random distribution that is usually dominated by one option."""
    w = [rng.random() ** 4 for _ in range(size)]
    w[rng.randrange(size)] += rng.random() * 2
    total = sum(w)
    row = [x / total for x in w]
    row[-1] = 1.0 - sum(row[:-1])
    return [max(0.0, x) for x in row]


def random_scores(seed, n_spans, inventory=None, n_roles=None):
    """Score set with random spans and peaky random distributions.

    With ``n_roles`` only the first roles of the inventory (always VALUE)
    receive mass, which makes feasible non-empty graphs more common.
    """
    rng = random.Random(seed)
    inv = inventory or RoleInventory()
    opts = span_options(inv)
    tokens = [f"t{k}" for k in range(2 * n_spans + 2)]
    spans = [(2 * k, 2 * k + 1 + rng.randint(0, 1)) for k in range(n_spans)]
    span_scores = []
    for _ in spans:
        if n_roles:
            head = _peaky(rng, n_roles + 1)
            row = head[:n_roles] + [0.0] * (len(opts) - 1 - n_roles) + [head[-1]]
        else:
            row = _peaky(rng, len(opts))
        span_scores.append(row)
    edges = {(i, j): _peaky(rng, len(EDGE_OPTIONS)) for i in range(n_spans) for j in range(i + 1, n_spans)}
    return ScoreSet(Sentence(f"rand-{seed}", tokens), spans, span_scores, edges, inv).check()
