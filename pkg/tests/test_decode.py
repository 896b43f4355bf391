import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import e1_graph, random_scores
from tapkit.constraints import Assignment, assignment_from_graph, validate
from tapkit.core import EdgeLabel, RoleInventory, Sentence, transitive_closure
from tapkit.decode import (
    brute_force_decode,
    decode,
    exact_decode,
    greedy_decode,
    objective,
)
from tapkit.errors import BudgetExhaustedWithNoIncumbent, InstanceTooLarge
from tapkit.gen import GenParams, adversarial_case, gen_graph, gen_scores
from tapkit.scores import EDGE_OPTIONS, ScoreSet, emit_scores, span_options


def scores_from(spans, roles, edges, n_tokens=12, inventory=None):
    """Score set from {role: p} per span and {(i, j): {label: p}} per pair."""
    inv = inventory or RoleInventory()
    opts = span_options(inv)
    rows = [[dist.get(o, 0.0) for o in opts] for dist in roles]
    es = {}
    for i in range(len(spans)):
        for j in range(i + 1, len(spans)):
            d = edges.get((i, j), {"NONE": 1.0})
            es[(i, j)] = [d.get(o, 0.0) for o in EDGE_OPTIONS]
    return ScoreSet(Sentence("t", [f"w{k}" for k in range(n_tokens)]), spans, rows, es, inv).check()


# -- objective -----------------------------------------------------------------------


def test_objective_of_all_none_on_uniform_scores():
    inv = RoleInventory(("VALUE", "WHOLE", "TIME"))  # four options per span, like pairs
    n = 4
    s = scores_from(
        [(k, k + 1) for k in range(n)],
        [{r: 0.25 for r in span_options(inv)}] * n,
        {(i, j): {o: 0.25 for o in EDGE_OPTIONS} for i in range(n) for j in range(i + 1, n)},
        inventory=inv,
    )
    a = Assignment(s.spans, (None,) * n, {})
    assert objective(a, s) == pytest.approx((n + n * (n - 1) // 2) * math.log(0.25), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_objective_matches_naive_resummation(seed):
    rng = random.Random(seed)
    s = random_scores(seed, rng.randint(1, 5))
    opts = s.options
    roles = tuple(rng.choice(list(s.inventory.roles) + [None]) for _ in s.spans)
    labels = {p: rng.choice(list(EdgeLabel) + [None]) for p in s.pairs()}
    a = Assignment(s.spans, roles, labels)

    def lg(p):
        return math.log(p) if p > 1e-12 else math.log(1e-12)

    total = 0.0
    for k, r in enumerate(roles):
        total += lg(s.span_scores[k][opts.index(r or "NONE")])
    for (i, j), lab in labels.items():
        total += lg(s.edge_scores[(i, j)][EDGE_OPTIONS.index(lab.value if lab else "NONE")])
    assert objective(a, s) == pytest.approx(total, abs=1e-9)


# -- noise-free recovery --------------------------------------------------------------


def test_e1_recovered_from_noise_free_scores():
    g = transitive_closure(e1_graph())
    s = gen_scores(g, 0.0, seed=0)
    for result in (greedy_decode(s), exact_decode(s)):
        assert result.graph.structure() == g.structure()
        assert result.objective == 0.0
    assert exact_decode(s).optimal
    assert not greedy_decode(s).optimal


def test_gold_assignment_scores_zero_at_noise_zero():
    g = transitive_closure(e1_graph())
    s = gen_scores(g, 0.0, seed=5)
    assert objective(assignment_from_graph(g, s.spans), s) == 0.0


# -- greedy repair -----------------------------------------------------------------------

SURE = {"VALUE": 1.0}


def two_facts_with_times(p_first, p_second):
    """VALUE 0/1 compared on WHOLE 2/3; TIME 4 and 5 both attach to VALUE 0."""
    spans = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6)]
    roles = [SURE, SURE, {"WHOLE": 1.0}, {"WHOLE": 1.0}, {"TIME": 1.0}, {"TIME": 1.0}]
    edges = {
        (0, 2): {"FACT": 1.0},
        (1, 3): {"FACT": 1.0},
        (0, 1): {"ANALOGY": 1.0},
        (2, 3): {"ANALOGY": 1.0},
        (0, 4): {"FACT": p_first, "NONE": 1 - p_first},
        (0, 5): {"FACT": p_second, "NONE": 1 - p_second},
    }
    return scores_from(spans, roles, edges)


def test_greedy_keeps_the_stronger_of_two_same_role_arguments():
    g = greedy_decode(two_facts_with_times(0.9, 0.6)).graph
    times = {g.vertices[v].start for v in g.vertices if g.vertices[v].role == "TIME"}
    assert times == {4}
    assert validate(g) == []
    g = greedy_decode(two_facts_with_times(0.6, 0.9)).graph
    assert {g.vertices[v].start for v in g.vertices if g.vertices[v].role == "TIME"} == {5}


def test_greedy_discards_unsupported_value_analogy():
    spans = [(0, 1), (1, 2), (2, 3)]
    roles = [SURE, SURE, {"WHOLE": 1.0}]
    edges = {(0, 1): {"ANALOGY": 1.0}, (0, 2): {"FACT": 1.0}, (1, 2): {"FACT": 1.0}}
    r = greedy_decode(scores_from(spans, roles, edges))
    assert r.graph.vertices == {} and r.graph.edges == frozenset()


def test_greedy_resolves_overlaps_by_span_score():
    spans = [(0, 2), (1, 3), (3, 4), (4, 5), (5, 6)]
    roles = [{"WHOLE": 0.6, "NONE": 0.4}, {"WHOLE": 0.9, "NONE": 0.1}, SURE, SURE, {"WHOLE": 1.0}]
    edges = {(1, 2): {"FACT": 1.0}, (0, 2): {"FACT": 1.0}, (3, 4): {"FACT": 1.0}, (2, 3): {"ANALOGY": 1.0},
             (1, 4): {"ANALOGY": 1.0}, (0, 4): {"ANALOGY": 1.0}}
    s = ScoreSet(Sentence("t", [f"w{k}" for k in range(8)]), spans,
                 [[d.get(o, 0.0) for o in span_options(RoleInventory())] for d in roles],
                 {(i, j): [edges.get((i, j), {"NONE": 1.0}).get(o, 0.0) for o in EDGE_OPTIONS]
                  for i in range(5) for j in range(i + 1, 5)}, raw=True).check()
    g = greedy_decode(s).graph
    assert (1, 3) in {(v.start, v.end) for v in g.vertices.values()}
    assert (0, 2) not in {(v.start, v.end) for v in g.vertices.values()}
    assert validate(g) == []


# -- exact versus brute force ------------------------------------------------------------


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 5), st.integers(1, 3))
def test_exact_matches_brute_force_on_random_scores(seed, n, k):
    s = random_scores(seed, n, n_roles=3)
    b = brute_force_decode(s, k)
    e = exact_decode(s, top_k_roles=k)
    assert e.optimal
    assert e.objective == pytest.approx(b.objective, abs=1e-9)
    assert validate(b.graph) == [] and validate(e.graph) == []


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([0.1, 0.3, 0.6, 0.9]))
def test_exact_matches_brute_force_on_generated_scores(seed, noise):
    p = GenParams(seed=seed, n_frames=(1, 1), facts_per_frame=(2, 2), roles_per_fact=(1, 1), max_vertices=4)
    g, _ = gen_graph(p)
    s = gen_scores(g, noise, seed, distractors=1)
    assert len(s.spans) <= 5
    assert exact_decode(s, top_k_roles=3).objective == pytest.approx(brute_force_decode(s, 3).objective, abs=1e-9)


def test_brute_force_limits():
    with pytest.raises(InstanceTooLarge):
        brute_force_decode(random_scores(0, 6), 3)
    with pytest.raises(InstanceTooLarge):
        brute_force_decode(random_scores(0, 3), 4)


def test_brute_force_two_spans_uniform():
    inv = RoleInventory()
    s = scores_from([(0, 1), (1, 2)], [{r: 1 / 9 for r in span_options(inv)}] * 2, {(0, 1): {o: 0.25 for o in EDGE_OPTIONS}})
    r = brute_force_decode(s, 3)
    # two spans can never hold an analogy, so the only admissible answer is empty
    assert r.graph.vertices == {}
    with pytest.raises(BudgetExhaustedWithNoIncumbent):
        brute_force_decode(s, 3, allow_empty=False)


def test_exact_refuses_oversized_instances():
    with pytest.raises(InstanceTooLarge):
        exact_decode(random_scores(0, 65))


def test_require_analogy_without_any_admissible_graph():
    s = random_scores(3, 2)
    with pytest.raises(BudgetExhaustedWithNoIncumbent):
        exact_decode(s, allow_empty=False)


def test_budget_returns_valid_incumbent():
    g, _ = gen_graph(GenParams(seed=11))
    s = gen_scores(g, 1.0, 11)
    r = exact_decode(s, max_nodes=300)
    assert not r.optimal and r.nodes_explored >= 300
    assert validate(r.graph) == []


# -- properties over generated score sets -------------------------------------------------


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([0.0, 0.2, 0.4, 0.5, 1.0]))
def test_decoders_emit_valid_graphs_and_exact_dominates(seed, noise):
    g, _ = gen_graph(GenParams(seed=seed))
    s = gen_scores(g, noise, seed)
    gr = greedy_decode(s)
    ex = exact_decode(s, max_nodes=3000)
    assert validate(gr.graph) == [] and validate(ex.graph) == []
    assert ex.objective >= gr.objective - 1e-12
    if noise == 0.0:
        assert gr.graph.structure() == ex.graph.structure() == g.structure()


def test_decoding_is_deterministic():
    g, _ = gen_graph(GenParams(seed=21))
    s = gen_scores(g, 0.4, 21)
    from tapkit.core import emit_graph

    for mode in ("greedy", "exact"):
        assert emit_graph(decode(s, mode).graph) == emit_graph(decode(s, mode).graph)
    assert emit_scores(s) == emit_scores(gen_scores(g, 0.4, 21))


# -- adversarial instances ------------------------------------------------------------------


def argmax_graph_violations(s):
    from tapkit.decode import assignment_to_graph

    opts = s.options
    roles = []
    for row in s.span_scores:
        best = opts[max(range(len(opts)), key=lambda k: (row[k], -k))]
        roles.append(None if best == "NONE" else best)
    labels = {}
    for p, row in s.edge_scores.items():
        best = EDGE_OPTIONS[max(range(4), key=lambda k: (row[k], -k))]
        labels[p] = None if best == "NONE" else EdgeLabel(best)
    return validate(assignment_to_graph(Assignment(s.spans, tuple(roles), labels), s))


@pytest.mark.parametrize("seed", range(8))
def test_adversarial_cases_force_repair(seed):
    case = adversarial_case(seed)
    s = case.scores
    assert argmax_graph_violations(s)
    gr, ex = greedy_decode(s), exact_decode(s)
    assert validate(gr.graph) == [] and validate(ex.graph) == []
    assert ex.optimal and ex.objective >= gr.objective
    assert ex.graph.structure() == case.gold.structure()
    if case.optimum is not None:
        assert ex.objective == pytest.approx(case.optimum, abs=1e-9)
    if case.kind == "equivalence-trap":
        # greedy has to discard the whole analogy cluster
        assert gr.graph.vertices == {}
    else:
        assert len(gr.graph.vertices) < len(ex.graph.vertices)
