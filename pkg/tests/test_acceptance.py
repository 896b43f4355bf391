"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line."""

import random
import time

import pytest

from conftest import e1_graph
from oracles import brute_matching_weight, naive_closure, naive_triples, set_difference_counts
from tapkit.chart import frame_to_chart
from tapkit.constraints import validate
from tapkit.core import Vertex, build_graph, graph_to_frames
from tapkit.decode import brute_force_decode, exact_decode, greedy_decode
from tapkit.errors import DegenerateData
from tapkit.evaluation import edge_prf, frame_prf, krippendorff_alpha, match_spans, span_prf
from tapkit.gen import GenParams, gen_graph, gen_scores

NOISE_CYCLE = (0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, started):
        with capsys.disabled():
            print(f"\nCRITERION {number}: {'PASS' if ok else 'FAIL'} ({detail}; {time.perf_counter() - started:.1f} s)")

    return emit


def test_criterion_1_exact_matches_brute_force(report):
    t0 = time.perf_counter()
    mismatches, incomplete = [], []
    for seed in range(500):
        p = GenParams(
            seed=seed,
            n_frames=(1, 1),
            facts_per_frame=(2, 2),
            roles_per_fact=(1, 2),
            max_vertices=5,
        )
        g, _ = gen_graph(p)
        s = gen_scores(g, NOISE_CYCLE[seed % len(NOISE_CYCLE)], seed, distractors=5 - len(g.vertices))
        assert len(s.spans) <= 5
        brute = brute_force_decode(s, top_k_roles=3)
        exact = exact_decode(s, top_k_roles=3)
        if not exact.optimal:
            incomplete.append(seed)
        elif abs(exact.objective - brute.objective) > 1e-9:
            mismatches.append(seed)
    elapsed = time.perf_counter() - t0
    ok = not mismatches and not incomplete and elapsed < 60
    report(1, ok, f"{500 - len(mismatches) - len(incomplete)}/500 equal, {len(incomplete)} over budget", t0)
    assert not mismatches and not incomplete
    assert elapsed < 60


def test_criterion_2_decoders_always_valid(report):
    t0 = time.perf_counter()
    bad = []
    count = 0
    for noise in (0.0, 0.2, 0.5, 1.0):
        for seed in range(2500):
            g, _ = gen_graph(GenParams(seed=seed))
            s = gen_scores(g, noise, seed)
            count += 1
            for name, result in (("greedy", greedy_decode(s)), ("exact", exact_decode(s, max_nodes=5000))):
                if validate(result.graph):
                    bad.append((noise, seed, name))
    elapsed = time.perf_counter() - t0
    ok = count == 10_000 and not bad and elapsed < 300
    report(2, ok, f"{count} score sets, {len(bad)} invalid outputs", t0)
    assert count == 10_000 and not bad
    assert elapsed < 300


def test_criterion_3_noise_free_recovery(report):
    t0 = time.perf_counter()
    failures = []
    for seed in range(1000):
        g, _ = gen_graph(GenParams(seed=seed))
        s = gen_scores(g, 0.0, seed)
        for name, result in (("greedy", greedy_decode(s)), ("exact", exact_decode(s))):
            if result.graph.structure() != g.structure() or frame_prf(g, result.graph).f1 != 1.0:
                failures.append((seed, name))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 120
    report(3, ok, f"{2000 - len(failures)}/2000 decodes reproduce gold", t0)
    assert not failures
    assert elapsed < 120


def test_criterion_4_exact_dominates_greedy(report):
    t0 = time.perf_counter()
    counterexamples, completed = [], 0
    for seed in range(1000):
        noise = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0)[seed % 8]
        g, _ = gen_graph(GenParams(seed=seed))
        s = gen_scores(g, noise, seed)
        gr = greedy_decode(s)
        ex = exact_decode(s, max_nodes=10_000)
        if ex.optimal:
            completed += 1
            if ex.objective < gr.objective:
                counterexamples.append(seed)
    report(4, not counterexamples, f"{len(counterexamples)} counterexamples over {completed} completed searches", t0)
    assert not counterexamples
    assert completed > 0


def _perturb(g, rng, k, kind):
    edges = sorted(g.edges)
    for _ in range(k):
        if not edges:
            break
        i = rng.randrange(len(edges))
        if kind == "drop":
            edges.pop(i)
        else:
            e = edges[i]
            if e.label.value == "FACT":
                continue
            other = "ANALOGY" if e.label.value == "EQUIVALENCE" else "EQUIVALENCE"
            edges[i] = type(e)(e.a, e.b, type(e.label)(other))
    return build_graph(g.sentence, g.vertices, [(e.a, e.b, e.label) for e in edges], g.inventory)


def test_criterion_5_metric_self_consistency(report):
    t0 = time.perf_counter()
    identity_failures, oracle_failures = [], []
    rng = random.Random(5)
    graphs = [e1_graph()] + [gen_graph(GenParams(seed=seed))[0] for seed in range(300)]
    for n, g in enumerate(graphs):
        for fn in (frame_prf, span_prf, edge_prf):
            prf = fn(g, g)
            if (prf.precision, prf.recall, prf.f1) != (1.0, 1.0, 1.0):
                identity_failures.append((n, fn.__name__))
        for kind in ("drop", "flip"):
            for k in (1, 2, 3):
                pred = _perturb(g, rng, k, kind)
                expected = set_difference_counts(naive_closure(naive_triples(g)), naive_closure(naive_triples(pred)))
                got = frame_prf(g, pred)
                plain = set_difference_counts({t[:3] for t in naive_triples(g)}, {t[:3] for t in naive_triples(pred)})
                got_plain = edge_prf(g, pred)
                if (got.tp, got.fp, got.fn) != expected or (got_plain.tp, got_plain.fp, got_plain.fn) != plain:
                    oracle_failures.append((n, kind, k))
    ok = not identity_failures and not oracle_failures
    report(5, ok, f"{len(graphs)} graphs, {len(identity_failures)} identity and {len(oracle_failures)} oracle mismatches", t0)
    assert ok


def test_criterion_6_matching_optimality(report):
    t0 = time.perf_counter()
    rng = random.Random(6)
    failures = []
    for trial in range(1000):
        n, m = rng.randint(1, 7), rng.randint(1, 7)
        length = rng.randint(8, 30)

        def spans(k):
            out = []
            for _ in range(k):
                a = rng.randrange(length)
                out.append(Vertex(a, min(length, a + rng.randint(1, 8)), "WHOLE"))
            return out

        gold, pred = spans(n), spans(m)
        if match_spans(gold, pred).weight != brute_matching_weight(gold, pred):
            failures.append(trial)
    report(6, not failures, f"{1000 - len(failures)}/1000 trials at the exhaustive maximum", t0)
    assert not failures


def test_criterion_7_krippendorff_fixtures(report):
    t0 = time.perf_counter()
    identical = ["O", "VALUE", "WHOLE", "WHOLE", "O", "TIME"]
    a_identical = krippendorff_alpha([identical, list(identical)])
    rng = random.Random(7)
    labels = ["O", "VALUE", "WHOLE", "TIME", "AGENT"]
    a_random = krippendorff_alpha([[rng.choice(labels) for _ in range(10**5)] for _ in range(2)])
    # hand expansion: o_AA = 2, o_AB = o_BA = 1, o_BB = 4; n_A = 3, n_B = 5, n = 8
    # alpha = 1 - (n - 1) * (o_AB + o_BA) / (2 * n_A * n_B) = 1 - 7 * 2 / 30 = 8 / 15
    a_hand = krippendorff_alpha([["A", "A", "B", "B"], ["A", "B", "B", "B"]])
    with pytest.warns(DegenerateData):
        krippendorff_alpha([["A", "A"], ["A", "A"]])
    ok = a_identical == 1.0 and abs(a_random) <= 0.02 and abs(a_hand - 8 / 15) <= 1e-12
    report(7, ok, f"identical={a_identical}, random={a_random:+.4f}, fixture={a_hand:.15f}", t0)
    assert a_identical == 1.0
    assert abs(a_random) <= 0.02
    assert a_hand == pytest.approx(8 / 15, abs=1e-12)


def test_criterion_8_e1_end_to_end(report):
    t0 = time.perf_counter()
    frames = graph_to_frames(e1_graph())
    (fr,) = frames
    compared = {role: {fr.cluster_text(slot) for slot in slots} for role, slots in fr.compared}
    shared = {role: fr.cluster_text(vs) for role, vs in fr.shared}
    chart = frame_to_chart(fr)
    ok = (
        compared.get("WHOLE") == {"White Americans", "African Americans"}
        and compared.get("VALUE") == {"10%", "28%"}
        and "U.S. Census" in shared.get("SOURCE", "")
        and chart.series == (("%", (10.0, 28.0)),)
    )
    report(8, ok, f"compared={sorted(compared)}, series={chart.series}", t0)
    assert compared["WHOLE"] == {"White Americans", "African Americans"}
    assert compared["VALUE"] == {"10%", "28%"}
    assert "U.S. Census" in shared["SOURCE"]
    assert chart.series == (("%", (10.0, 28.0)),)


def test_criterion_9_budget_behavior(report):
    t0 = time.perf_counter()
    # four three-fact frames plus distractors: 64 candidate spans, argmax graph infeasible
    p = GenParams(seed=1, n_frames=(4, 4), facts_per_frame=(3, 3), roles_per_fact=(2, 2), max_vertices=0)
    g, _ = gen_graph(p)
    s = gen_scores(g, 0.55, 1, distractors=64 - len(g.vertices))
    assert len(s.spans) == 64
    result = exact_decode(s, max_nodes=10**4)
    elapsed = time.perf_counter() - t0
    violations = validate(result.graph)
    ok = not result.optimal and not violations and elapsed < 30
    report(9, ok, f"optimal={result.optimal}, nodes={result.nodes_explored}, vertices={len(result.graph.vertices)}", t0)
    assert not result.optimal
    assert violations == []
    assert elapsed < 30
