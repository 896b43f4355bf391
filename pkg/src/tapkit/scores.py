"""Score files: the contract between an upstream scorer and the decoders.

A score set holds, for a list of candidate spans, a distribution over roles
plus NONE for every span and a distribution over FACT/EQUIVALENCE/ANALOGY/NONE
for every unordered span pair.  Optional token scores (roles plus ``O``) let
candidate spans be derived from a per-token labeling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping

import numpy as np

from .core import RoleInventory, Sentence, dumps, load_inventory, loads, sentence_from_dict, sentence_to_dict
from .errors import DistributionNotNormalized, MalformedInput

NONE = "NONE"
OUTSIDE = "O"
EDGE_OPTIONS = ("FACT", "EQUIVALENCE", "ANALOGY", NONE)
NORM_TOL = 1e-6
LOG_FLOOR = math.log(1e-12)


def span_options(inventory):
    return inventory.roles + (NONE,)


def token_options(inventory):
    return inventory.roles + (OUTSIDE,)


def safe_log(p):
    return math.log(p) if p > 1e-12 else LOG_FLOOR


def round_sig(p, digits=9):
    return float(f"{p:.{digits}g}")


@dataclass(frozen=True)
class TokenScores:
    """Per-token distributions over the inventory roles followed by ``O``."""

    rows: tuple
    inventory: RoleInventory = RoleInventory()

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(float(p) for p in r) for r in self.rows))

    @property
    def labels(self):
        return token_options(self.inventory)

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class ScoreSet:
    sentence: Sentence
    spans: tuple  # ((start, end), ...)
    span_scores: tuple  # per span, probabilities aligned with span_options(inventory)
    edge_scores: Mapping  # (i, j), i < j -> probabilities aligned with EDGE_OPTIONS
    inventory: RoleInventory = RoleInventory()
    token_scores: TokenScores | None = None
    raw: bool = False

    def __post_init__(self):
        object.__setattr__(self, "spans", tuple((int(s), int(e)) for s, e in self.spans))
        object.__setattr__(self, "span_scores", tuple(tuple(float(p) for p in r) for r in self.span_scores))
        object.__setattr__(
            self, "edge_scores", {tuple(k): tuple(float(p) for p in v) for k, v in dict(self.edge_scores).items()}
        )

    @property
    def options(self):
        return span_options(self.inventory)

    def pairs(self):
        return list(combinations(range(len(self.spans)), 2))

    def check(self):
        """Raise if shapes, bounds or normalization are off."""
        n = len(self.sentence)
        if len(self.span_scores) != len(self.spans):
            raise MalformedInput("one score row per span required", field="spans")
        for k, (s, e) in enumerate(self.spans):
            if not 0 <= s < e <= n:
                raise MalformedInput(f"span [{s}, {e}) outside sentence", field=f"spans[{k}]")
            _check_dist(self.span_scores[k], len(self.options), f"spans[{k}]")
        if not self.raw:
            order = sorted(range(len(self.spans)), key=lambda k: self.spans[k])
            for x, y in zip(order, order[1:]):
                if self.spans[y][0] < self.spans[x][1]:
                    raise MalformedInput(f"spans {x} and {y} overlap and raw is not set", field="spans")
        expected = set(self.pairs())
        got = set(self.edge_scores)
        if got != expected:
            missing = sorted(expected - got)
            extra = sorted(got - expected)
            detail = f"missing pair {missing[0]}" if missing else f"unexpected pair {extra[0]}"
            raise MalformedInput(detail, field="edges")
        for (i, j), row in sorted(self.edge_scores.items()):
            _check_dist(row, len(EDGE_OPTIONS), f"edges[{i},{j}]")
        if self.token_scores is not None:
            if len(self.token_scores) != n:
                raise MalformedInput("one token score row per token required", field="token_scores")
            for k, row in enumerate(self.token_scores.rows):
                _check_dist(row, len(self.inventory.roles) + 1, f"token_scores[{k}]")
        return self

    def span_logs(self):
        """Natural-log span scores as an ``(n_spans, n_roles + 1)`` array."""
        p = np.array(self.span_scores, dtype=float).reshape(len(self.spans), len(self.options))
        return _clamped_log(p)

    def edge_logs(self):
        """Natural-log edge scores as an ``(n, n, 4)`` array, symmetric in the first two axes."""
        n = len(self.spans)
        out = np.full((n, n, len(EDGE_OPTIONS)), LOG_FLOOR)
        for (i, j), row in self.edge_scores.items():
            out[i, j] = out[j, i] = _clamped_log(np.array(row, dtype=float))
        return out


def _clamped_log(p):
    with np.errstate(divide="ignore"):
        return np.where(p > 1e-12, np.log(np.maximum(p, 1e-300)), LOG_FLOOR)


def _check_dist(row, size, where, line=None):
    if len(row) != size:
        raise MalformedInput(f"expected {size} probabilities, got {len(row)}", line=line, field=where)
    if any(not math.isfinite(p) or p < 0 for p in row):
        raise MalformedInput("probabilities must be finite and non-negative", line=line, field=where)
    total = math.fsum(row)
    if abs(total - 1.0) > NORM_TOL:
        raise DistributionNotNormalized(where, total, line=line)


# -- span extraction -----------------------------------------------------------


def spans_from_labels(labels, outside=OUTSIDE):
    """Merge maximal runs of identical non-outside labels into ``(start, end, label)``."""
    out = []
    start = None
    for k, lab in enumerate(list(labels) + [None]):
        if start is not None and lab != labels[start]:
            out.append((start, k, labels[start]))
            start = None
        if start is None and lab is not None and lab != outside:
            start = k
    return out


def extract_spans(ts):
    """Spans from the per-token argmax labeling; ties go to the earlier inventory label."""
    labels = ts.labels
    seq = [labels[int(np.argmax(row))] for row in ts.rows]
    return spans_from_labels(seq)


def span_distribution_from_tokens(ts, span):
    """Sum the token distributions inside ``span`` and renormalize; ``O`` mass becomes NONE."""
    start, end = span
    if not 0 <= start < end <= len(ts):
        raise ValueError(f"span {span} outside {len(ts)} tokens")
    total = np.sum(np.array(ts.rows[start:end], dtype=float), axis=0)
    return tuple((total / total.sum()).tolist())


def top_roles(s, k):
    """Per span, indices (into the role list, NONE excluded) of the ``k`` most likely roles."""
    n_roles = len(s.inventory.roles)
    out = []
    for row in s.span_scores:
        order = sorted(range(n_roles), key=lambda r: (-row[r], r))
        out.append(tuple(sorted(order[:k])))
    return out


# -- serialization ---------------------------------------------------------------


def scores_to_dict(s):
    opts = s.options
    out = {
        "sentence": sentence_to_dict(s.sentence),
        "inventory": s.inventory.to_dict(),
        "spans": [
            {"start": a, "end": b, "scores": {o: round_sig(p) for o, p in zip(opts, row)}}
            for (a, b), row in zip(s.spans, s.span_scores)
        ],
        "edges": [
            {"a": i, "b": j, "scores": {o: round_sig(p) for o, p in zip(EDGE_OPTIONS, s.edge_scores[(i, j)])}}
            for i, j in sorted(s.edge_scores)
        ],
    }
    if s.token_scores is not None:
        out["token_scores"] = [[round_sig(p) for p in row] for row in s.token_scores.rows]
    if s.raw:
        out["raw"] = True
    return out


def _dist_from_keys(obj, options, where, line):
    if not isinstance(obj, dict):
        raise MalformedInput("scores must be an object", line=line, field=where)
    unknown = set(obj) - set(options)
    if unknown:
        raise MalformedInput(f"unknown label {sorted(unknown)[0]!r}", line=line, field=where)
    try:
        row = tuple(float(obj.get(o, 0.0)) for o in options)
    except (TypeError, ValueError):
        raise MalformedInput("probabilities must be numbers", line=line, field=where) from None
    _check_dist(row, len(options), where, line)
    return row


def scores_from_dict(obj, line=None, inventory=None):
    if not isinstance(obj, dict):
        raise MalformedInput("expected a JSON object", line=line)
    for key in ("sentence", "spans", "edges"):
        if key not in obj:
            raise MalformedInput("missing key", line=line, field=key)
    sentence = sentence_from_dict(obj["sentence"], line)
    try:
        inv = RoleInventory.from_dict(obj["inventory"]) if "inventory" in obj else (inventory or load_inventory())
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(str(exc), line=line, field="inventory") from None
    spans, rows = [], []
    for k, item in enumerate(obj["spans"]):
        try:
            spans.append((int(item["start"]), int(item["end"])))
            scores = item["scores"]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad span: {exc!r}", line=line, field=f"spans[{k}]") from None
        rows.append(_dist_from_keys(scores, span_options(inv), f"spans[{k}]", line))
    edges = {}
    n = len(spans)
    for k, item in enumerate(obj["edges"]):
        try:
            a, b = int(item["a"]), int(item["b"])
            scores = item["scores"]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad edge: {exc!r}", line=line, field=f"edges[{k}]") from None
        if not (0 <= a < b < n):
            raise MalformedInput(f"pair ({a}, {b}) must satisfy 0 <= a < b < {n}", line=line, field=f"edges[{k}]")
        if (a, b) in edges:
            raise MalformedInput(f"pair ({a}, {b}) listed twice", line=line, field=f"edges[{k}]")
        edges[(a, b)] = _dist_from_keys(scores, EDGE_OPTIONS, f"edges[{k}]", line)
    ts = None
    if obj.get("token_scores") is not None:
        try:
            ts = TokenScores(obj["token_scores"], inv)
        except (TypeError, ValueError) as exc:
            raise MalformedInput(str(exc), line=line, field="token_scores") from None
    s = ScoreSet(sentence, spans, rows, edges, inv, ts, bool(obj.get("raw", False)))
    try:
        s.check()
    except DistributionNotNormalized as exc:
        raise DistributionNotNormalized(exc.where, exc.total, line=line) from None
    except MalformedInput as exc:
        raise MalformedInput(str(exc), line=line) from None
    return s


def emit_scores(s):
    return dumps(scores_to_dict(s)).encode("utf-8")


def parse_scores(data, line=None, inventory=None):
    return scores_from_dict(loads(data, line), line, inventory)


def read_scores(lines):
    for n, raw in enumerate(lines, 1):
        if raw.strip():
            yield parse_scores(raw, line=n)
