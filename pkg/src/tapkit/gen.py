"""Synthetic analogy graphs and score sets.

Graphs are valid by construction and come with the frames they were built
from.  Tokens are placeholders that name the gold role (``AGT_1``); VALUE
tokens are numeric literals so that charts can be drawn from them.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .core import RoleInventory, Sentence, Vertex, build_graph, make_frame, transitive_closure
from .scores import EDGE_OPTIONS, ScoreSet, TokenScores, round_sig, span_options

ABBREV = {
    "VALUE": "VAL",
    "QUANTITY": "QNT",
    "WHOLE": "WHL",
    "AGENT": "AGT",
    "THEME": "THM",
    "SOURCE": "SRC",
    "CAUSE": "CAU",
    "TIME": "TIM",
}
FILLER = ("the", "of", "and", "while", "from", "to", "in", "with")
UNITS = ("%", "marks", "$", "")


@dataclass(frozen=True)
class GenParams:
    seed: int = 0
    n_frames: tuple = (1, 2)
    facts_per_frame: tuple = (2, 3)
    roles_per_fact: tuple = (1, 2)
    shared_fraction: float = 0.5
    noise: float = 0.0
    distractors: int = 2
    max_vertices: int = 10
    inventory: RoleInventory = field(default_factory=RoleInventory)

    def __post_init__(self):
        for name in ("n_frames", "facts_per_frame", "roles_per_fact"):
            lo, hi = getattr(self, name)
            if not 1 <= lo <= hi:
                raise ValueError(f"{name} must be a non-empty range of positive integers")
        if self.facts_per_frame[0] < 2:
            raise ValueError("a frame compares at least two facts")
        if not 0.0 <= self.shared_fraction <= 1.0 or not 0.0 <= self.noise <= 1.0:
            raise ValueError("shared_fraction and noise must lie in [0, 1]")


def _abbrev(role):
    return ABBREV.get(role, role[:3])


def _plan(p, rng):
    """Draw frame plans: per frame the fact count and a list of (role, kind, groups)."""
    inv = p.inventory
    arg_roles = [r for r in inv.roles if r != inv.value_role]
    frames = []
    for _ in range(rng.randint(*p.n_frames)):
        k = rng.randint(*p.facts_per_frame)
        n_roles = min(rng.randint(*p.roles_per_fact), len(arg_roles))
        roles = rng.sample(arg_roles, n_roles)
        entries = [(roles[0], "compared", [[f] for f in range(k)])]
        for role in roles[1:]:
            shared = rng.random() < p.shared_fraction
            if shared and rng.random() < 0.5:
                entries.append((role, "scope", [list(range(k))]))
            elif shared:
                subset = sorted(rng.sample(range(k), rng.randint(2, k)))
                entries.append((role, "equiv", [[f] for f in subset]))
            elif rng.random() < 0.5:
                subset = sorted(rng.sample(range(k), rng.randint(2, k)))
                entries.append((role, "compared", [[f] for f in subset]))
            else:
                entries.append((role, "local", [[rng.randrange(k)]]))
        # occasionally let one compared filler scope over several facts
        if p.shared_fraction > 0 and k >= 3 and rng.random() < p.shared_fraction / 2:
            role, _, groups = entries[0]
            facts = list(range(k))
            rng.shuffle(facts)
            cut = rng.randint(2, k - 1)
            merged = [sorted(facts[:cut])] + [[f] for f in sorted(facts[cut:])]
            if len(merged) >= 2:
                spare = [r for r in arg_roles if r not in roles]
                if spare:
                    entries.append((spare[0], "compared", merged))
        frames.append((k, entries))
    return frames


def gen_graph(p: GenParams):
    """Return ``(graph, frames)`` for a synthetic sentence; deterministic in ``p.seed``."""
    rng = random.Random(p.seed)
    inv = p.inventory
    while True:
        plan = _plan(p, rng)
        n_vertices = sum(k + sum(len(g) for _, _, g in entries) for k, entries in plan)
        if n_vertices <= p.max_vertices or p.max_vertices <= 0:
            break

    # abstract vertices: (key, role, n_tokens); facts reference them by key
    pieces = []
    counter = {}

    def new_piece(role, size):
        counter[role] = counter.get(role, -1) + 1
        key = (role, counter[role])
        pieces.append((key, size))
        return key

    texts = {}
    frame_specs = []
    for k, entries in plan:
        unit = rng.choice(UNITS)
        values = []
        for _ in range(k):
            key = new_piece(inv.value_role, 2 if unit == "marks" else 1)
            mag = round(rng.uniform(1, 100), 1)
            if unit == "%":
                texts[key] = [f"{mag}%"]
            elif unit == "$":
                texts[key] = [f"${mag}"]
            elif unit == "marks":
                texts[key] = [f"{mag}", "marks"]
            else:
                texts[key] = [f"{mag}"]
            values.append(key)
        args = [dict() for _ in range(k)]
        shared, compared, equiv_groups, compared_groups = [], [], [], []
        for role, kind, groups in entries:
            keys = []
            for group in groups:
                key = new_piece(role, rng.randint(1, 2))
                keys.append(key)
                for f in group:
                    args[f].setdefault(role, []).append(key)
            if kind == "scope":
                shared.append((role, keys))
            elif kind == "equiv":
                shared.append((role, keys))
                equiv_groups.append(keys)
            elif kind == "compared":
                slots = [[] for _ in range(k)]
                for key, group in zip(keys, groups):
                    for f in group:
                        slots[f].append(key)
                compared.append((role, slots))
                compared_groups.append(keys)
        frame_specs.append((values, args, shared, compared, equiv_groups, compared_groups))

    # lay pieces out left to right with filler between them
    rng.shuffle(pieces)
    tokens, span_of = [], {}
    for key, size in pieces:
        for _ in range(rng.randint(0, 1) + (1 if rng.random() < 0.3 else 0)):
            tokens.append(rng.choice(FILLER))
        role, idx = key
        words = texts.get(key) or [f"{_abbrev(role)}_{idx}"] + [f"{_abbrev(role)}_{idx}b"] * (size - 1)
        span_of[key] = (len(tokens), len(tokens) + len(words))
        tokens.extend(words)
    while sum(1 for t in tokens if t in FILLER) < p.distractors:
        tokens.append(rng.choice(FILLER))
    tokens.append(".")

    vertex = {key: Vertex(*span_of[key], key[0]) for key, _ in pieces}
    order = sorted(vertex.values())
    vid = {v: i for i, v in enumerate(order)}
    edges = set()
    frames = []
    sentence = Sentence(f"gen-{p.seed}", tokens)
    for values, args, shared, compared, equiv_groups, compared_groups in frame_specs:
        for a, v in enumerate(values):
            for b in values[a + 1:]:
                edges.add((vid[vertex[v]], vid[vertex[b]], "ANALOGY"))
            for keys in args[a].values():
                for key in keys:
                    edges.add((vid[vertex[v]], vid[vertex[key]], "FACT"))
        for keys in equiv_groups:
            for a, x in enumerate(keys):
                for y in keys[a + 1:]:
                    edges.add((vid[vertex[x]], vid[vertex[y]], "EQUIVALENCE"))
        for keys in compared_groups:
            for a, x in enumerate(keys):
                for y in keys[a + 1:]:
                    edges.add((vid[vertex[x]], vid[vertex[y]], "ANALOGY"))
        frames.append(
            make_frame(
                [
                    (vertex[v], {role: [vertex[x] for x in keys] for role, keys in args[a].items()})
                    for a, v in enumerate(values)
                ],
                [(role, [vertex[x] for x in keys]) for role, keys in shared],
                [(inv.value_role, [[vertex[v]] for v in values])]
                + [(role, [[vertex[x] for x in slot] for slot in slots]) for role, slots in compared],
                sentence,
                inv,
            )
        )
    g = transitive_closure(build_graph(sentence, order, sorted(edges), inv))
    frames.sort(key=lambda fr: min(fr.values))
    return g, frames


def _noisy(true_index, size, noise, rng):
    """One-hot on ``true_index`` with mass ``noise`` spread over the other options."""
    weights = [rng.gammavariate(1.0, 1.0) if i != true_index else 0.0 for i in range(size)]
    total = sum(weights) or 1.0
    probs = [noise * w / total for w in weights]
    probs[true_index] = 1.0 - noise
    return [round_sig(x) for x in probs]


def gen_scores(g, noise=0.0, seed=0, distractors=2):
    """Score set whose argmax decisions reproduce ``g`` while ``noise`` < 0.5.

    Candidates are the gold spans plus up to ``distractors`` single-token spans
    on uncovered tokens whose true role is NONE.
    """
    rng = random.Random(seed * 7919 + 17)
    inv = g.inventory
    opts = span_options(inv)
    covered = set()
    for v in g.vertices.values():
        covered.update(range(v.start, v.end))
    free = [t for t in range(len(g.sentence)) if t not in covered]
    picks = sorted(rng.sample(free, min(distractors, len(free))))
    cand = sorted(
        [((v.start, v.end), v.role, vid) for vid, v in g.vertices.items()]
        + [((t, t + 1), "NONE", None) for t in picks]
    )
    spans = [c[0] for c in cand]
    span_scores = [_noisy(opts.index(role), len(opts), noise, rng) for _, role, _ in cand]
    pos = {vid: k for k, (_, _, vid) in enumerate(cand) if vid is not None}
    truth = {}
    for e in sorted(g.edges):
        key = tuple(sorted((pos[e.a], pos[e.b])))
        truth.setdefault(key, e.label.value)
    edge_scores = {}
    for i in range(len(spans)):
        for j in range(i + 1, len(spans)):
            true = EDGE_OPTIONS.index(truth.get((i, j), "NONE"))
            edge_scores[(i, j)] = _noisy(true, len(EDGE_OPTIONS), noise, rng)
    token_label = ["O"] * len(g.sentence)
    for v in g.vertices.values():
        for t in range(v.start, v.end):
            token_label[t] = v.role
    tok_opts = inv.roles + ("O",)
    rows = [_noisy(tok_opts.index(lab), len(tok_opts), noise, rng) for lab in token_label]
    return ScoreSet(g.sentence, spans, span_scores, edge_scores, inv, TokenScores(rows, inv))


def gen_instance(p: GenParams):
    """Gold graph, gold frames and a score set at ``p.noise``."""
    g, frames = gen_graph(p)
    return g, frames, gen_scores(g, p.noise, p.seed, p.distractors)


# -- adversarial cases -------------------------------------------------------------


@dataclass(frozen=True)
class AdversarialCase:
    kind: str
    scores: ScoreSet
    gold: object
    optimum: float | None = None


def _scores_from_tables(tokens, spans, roles, edges, inv, sid):
    """Build a score set from explicit per-span role and per-pair label distributions."""
    opts = span_options(inv)
    span_scores = []
    for dist in roles:
        row = [0.0] * len(opts)
        for role, p in dist.items():
            row[opts.index(role)] = p
        span_scores.append([round_sig(x) for x in row])
    edge_scores = {}
    for i in range(len(spans)):
        for j in range(i + 1, len(spans)):
            dist = edges.get((i, j), {"NONE": 1.0})
            row = [dist.get(o, 0.0) for o in EDGE_OPTIONS]
            edge_scores[(i, j)] = [round_sig(x) for x in row]
    return ScoreSet(Sentence(sid, tokens), spans, span_scores, edge_scores, inv)


def _split(rng, hi, lo):
    """Two probabilities ``hi > lo`` with a small remainder for NONE."""
    a = rng.uniform(0.50, 0.60)
    b = rng.uniform(0.30, 0.95 - a)
    return {hi: a, lo: b, "NONE": 1.0 - a - b}


def adversarial_case(seed):
    """A score set whose argmax graph breaks a constraint, after two failure patterns.

    Even seeds: two TIME spans scored as EQUIVALENCE rather than ANALOGY, which
    leaves the VALUE pair without compared arguments.  Odd seeds: two copies
    of one phrase scored as analogous while both attach to the first VALUE,
    so the analogy has no support and the VALUE holds two unrelated THEMEs.
    ``gold`` is the intended reading; ``optimum`` is the brute-force objective
    when the instance is small enough.
    """
    from .decode import brute_force_decode

    rng = random.Random(seed)
    inv = RoleInventory()
    sure = lambda role: {role: 1.0}  # noqa: E731
    if seed % 2 == 0:
        tokens = ["contracts", "totaled", "9,118", "this", "year", "up", "from", "4,645", "a", "year", "earlier"]
        spans = [(2, 3), (3, 5), (7, 8), (8, 11)]
        roles = [sure("VALUE"), sure("TIME"), sure("VALUE"), sure("TIME")]
        p_fact = rng.uniform(0.8, 0.99)
        edges = {
            (0, 1): {"FACT": p_fact, "NONE": 1 - p_fact},
            (2, 3): {"FACT": p_fact, "NONE": 1 - p_fact},
            (0, 2): {"ANALOGY": 0.9, "NONE": 0.1},
            (1, 3): _split(rng, "EQUIVALENCE", "ANALOGY"),
        }
        gold_edges = [(0, 1, "FACT"), (2, 3, "FACT"), (0, 2, "ANALOGY"), (1, 3, "ANALOGY")]
        kind = "equivalence-trap"
    else:
        tokens = (
            "bulls see the dollar near 1.900 marks while the dollar bears see it near 1.7600 marks".split()
        )
        # 0 bulls(SOURCE) 1 the dollar(THEME) 2 1.900 marks(VALUE) 3 the dollar(THEME) 4 bears(SOURCE) 5 1.7600 marks
        spans = [(0, 1), (2, 4), (5, 7), (8, 10), (10, 11), (14, 16)]
        roles = [sure("SOURCE"), sure("THEME"), sure("VALUE"), sure("THEME"), sure("SOURCE"), sure("VALUE")]
        p_trap = rng.uniform(0.6, 0.8)
        p_src = rng.uniform(0.55, 0.75)
        edges = {
            (0, 2): {"FACT": 0.9, "NONE": 0.1},
            (1, 2): {"FACT": 0.92, "NONE": 0.08},
            (2, 3): {"FACT": 0.88, "NONE": 0.12},
            (3, 5): {"FACT": 0.1, "NONE": 0.9},
            (4, 5): {"FACT": 0.9, "NONE": 0.1},
            (2, 5): {"ANALOGY": 0.9, "NONE": 0.1},
            (1, 3): {"ANALOGY": p_trap, "EQUIVALENCE": 0.95 - p_trap, "NONE": 0.05},
            (0, 4): {"ANALOGY": p_src, "NONE": 1 - p_src},
        }
        gold_edges = [
            (2, 0, "FACT"),
            (2, 1, "FACT"),
            (2, 3, "FACT"),
            (5, 4, "FACT"),
            (2, 5, "ANALOGY"),
            (0, 4, "ANALOGY"),
            (1, 3, "EQUIVALENCE"),
        ]
        kind = "surface-similarity-trap"
    s = _scores_from_tables(tokens, spans, roles, edges, inv, f"adv-{seed}")
    sentence = s.sentence
    gold = build_graph(
        sentence, [Vertex(a, b, next(iter(r))) for (a, b), r in zip(spans, roles)], gold_edges, inv
    )
    optimum = brute_force_decode(s, 3).objective if len(spans) <= 5 else None
    return AdversarialCase(kind, s, gold, optimum)


def gen_adversarial(seed):
    return adversarial_case(seed).scores
