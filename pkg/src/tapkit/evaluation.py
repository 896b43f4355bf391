"""Precision/recall scoring of predicted graphs and annotator agreement."""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import EdgeLabel, transitive_closure
from .errors import DegenerateData


@dataclass(frozen=True)
class PRF:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self):
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self):
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self):
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __add__(self, other):
        return PRF(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    def to_dict(self):
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
        }


@dataclass(frozen=True)
class SpanMatching:
    pairs: tuple  # ((gold id, pred id, overlap), ...) sorted by gold id

    @property
    def weight(self):
        return sum(w for _, _, w in self.pairs)

    def pred_to_gold(self):
        return {p: g for g, p, _ in self.pairs}

    def gold_to_pred(self):
        return {g: p for g, p, _ in self.pairs}


def _items(vs):
    if isinstance(vs, dict):
        return sorted(vs.items())
    return list(enumerate(vs))


def overlap(u, v):
    return max(0, min(u.end, v.end) - max(u.start, v.start))


def match_spans(gold, pred):
    """Maximum-total-overlap one-to-one matching between two vertex collections.

    Either side may be a list (ids are positions) or a mapping id -> Vertex.
    Roles play no part; pairs with zero overlap are never reported.
    """
    g_items, p_items = _items(gold), _items(pred)
    if not g_items or not p_items:
        return SpanMatching(())
    w = np.array([[overlap(gv, pv) for _, pv in p_items] for _, gv in g_items], dtype=float)
    rows, cols = linear_sum_assignment(w, maximize=True)
    pairs = tuple(
        (g_items[r][0], p_items[c][0], int(w[r, c])) for r, c in zip(rows, cols) if w[r, c] > 0
    )
    return SpanMatching(tuple(sorted(pairs)))


def _directed(g, a, b, label):
    """FACT runs from its VALUE end; a mistyped FACT has no direction."""
    return label == EdgeLabel.FACT and g.is_value(a) != g.is_value(b)


def _triples(g, with_roles):
    out = set()
    for e in g.edges:
        a, b = e.a, e.b
        if not _directed(g, a, b, e.label) and b < a:
            a, b = b, a
        if with_roles:
            out.add((a, e.label, b, g.vertices[a].role, g.vertices[b].role))
        else:
            out.add((a, e.label, b))
    return out


def _mapped(g, triples, m, with_roles):
    out = set()
    for t in triples:
        a, label, b = t[0], t[1], t[2]
        if a not in m or b not in m:
            out.add(("unmatched",) + t)
            continue
        x, y = m[a], m[b]
        if not _directed(g, a, b, label) and y < x:
            x, y = y, x
            if with_roles:
                t = t[:3] + (t[4], t[3])
        out.add((x, label, y) + t[3:])
    return out


def _edge_score(gold, pred, with_roles):
    m = match_spans(gold.vertices, pred.vertices).pred_to_gold()
    gold_t = _triples(gold, with_roles)
    pred_t = _mapped(pred, _triples(pred, with_roles), m, with_roles)
    tp = len(gold_t & pred_t)
    return PRF(tp, len(pred_t) - tp, len(gold_t) - tp)


def frame_prf(gold, pred):
    """Labeled triples (vertex, label, vertex, with both roles) on closed graphs."""
    return _edge_score(transitive_closure(gold), transitive_closure(pred), True)


def edge_prf(gold, pred, close=False):
    """Labeled edges under the span matching; roles are not checked.

    With ``close`` both graphs are transitively closed first.
    """
    if close:
        gold, pred = transitive_closure(gold), transitive_closure(pred)
    return _edge_score(gold, pred, False)


def span_prf(gold, pred):
    """Labeled non-VALUE spans under the span matching."""
    m = match_spans(gold.vertices, pred.vertices).pred_to_gold()
    g_args = [v for v in gold.vertices if not gold.is_value(v)]
    p_args = [v for v in pred.vertices if not pred.is_value(v)]
    tp = sum(1 for p in p_args if p in m and gold.vertices[m[p]].role == pred.vertices[p].role)
    return PRF(tp, len(p_args) - tp, len(g_args) - tp)


METRICS = {"frame": frame_prf, "span": span_prf, "edge": edge_prf}


def score_pair(gold, pred):
    return {name: fn(gold, pred) for name, fn in METRICS.items()}


def micro_average(pairs):
    """Summed counts over ``(gold, pred)`` pairs for each metric family."""
    total = {name: PRF() for name in METRICS}
    for gold, pred in pairs:
        for name, prf in score_pair(gold, pred).items():
            total[name] = total[name] + prf
    return total


# -- agreement ---------------------------------------------------------------------


def coincidences(annotations):
    """Coincidence counts ``{(c, k): o_ck}`` over items with two or more values.

    ``annotations`` is one label sequence per annotator; ``None`` marks a
    missing value.
    """
    if len(annotations) < 2:
        raise ValueError("need at least two annotators")
    length = len(annotations[0])
    if any(len(a) != length for a in annotations):
        raise ValueError("annotation sequences differ in length")
    o = Counter()
    for u in range(length):
        vals = [a[u] for a in annotations if a[u] is not None]
        m = len(vals)
        if m < 2:
            continue
        for x, y in combinations(range(m), 2):
            o[(vals[x], vals[y])] += 1 / (m - 1)
            o[(vals[y], vals[x])] += 1 / (m - 1)
    return o


def krippendorff_alpha(annotations, metric="nominal"):
    """Nominal Krippendorff alpha, ``1 - D_o / D_e`` over the coincidence matrix.

    When only one label occurs anywhere the statistic is undefined; a
    :class:`DegenerateData` warning is issued and 1.0 returned.
    """
    if metric != "nominal":
        raise ValueError(f"unsupported metric {metric!r}")
    o = coincidences(annotations)
    n_c = Counter()
    for (c, _), w in o.items():
        n_c[c] += w
    n = sum(n_c.values())
    if len(n_c) < 2:
        warnings.warn("a single label occurs; alpha is undefined and reported as 1.0", DegenerateData, stacklevel=2)
        return 1.0
    disagree = sum(w for (c, k), w in o.items() if c != k)
    expected = n * n - sum(x * x for x in n_c.values())
    return 1.0 - (n - 1) * disagree / expected


def token_labels(g, outside="O"):
    """Per-token role labels of a graph, ``outside`` where no vertex covers the token."""
    labels = [outside] * len(g.sentence)
    for v in g.vertices.values():
        for t in range(v.start, v.end):
            labels[t] = v.role
    return labels
