"""Structural constraints on analogy graphs.

:func:`validate` reports violations on a graph; :func:`feasible` answers the
same question for a (possibly partial) assignment of roles to candidate spans
and labels to span pairs, and is what the decoders use to prune.

Beyond the textbook list, two readings are fixed here:

* two same-role arguments of one VALUE must be joined by EQUIVALENCE;
* an ANALOGY between non-VALUE vertices needs support from an ANALOGY
  between two distinct VALUE vertices whose facts they belong to.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping

from .core import EdgeLabel

FACT = EdgeLabel.FACT
EQUIV = EdgeLabel.EQUIVALENCE
ANALOGY = EdgeLabel.ANALOGY


class ConstraintId(enum.Enum):
    WELL_FORMED_OVERLAP = 1
    WELL_FORMED_CONNECTED = 2
    TYPING_FACT = 3
    TYPING_EQUIV_ANALOGY = 4
    UNIQUE_FACTS = 5
    TRANSITIVITY_EQUIV = 6
    TRANSITIVITY_ANALOGY = 7
    ANALOGY_VALUE_PAIR = 8
    ANALOGY_QUADRANGLE = 9

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Violation:
    id: ConstraintId
    vertices: tuple = ()
    edges: tuple = ()
    message: str = ""

    def __post_init__(self):
        if not self.vertices and not self.edges:
            raise ValueError("a violation must reference a vertex or an edge")

    def to_dict(self):
        return {
            "constraint": self.id.name,
            "vertices": list(self.vertices),
            "edges": [{"a": e.a, "b": e.b, "label": e.label.value} for e in self.edges],
            "message": self.message,
        }


def validate(g):
    """All violations in ``g``, ordered by constraint then vertex ids."""
    out = []
    for cid in ConstraintId:
        out.extend(check(g, cid))
    return out


def check(g, cid):
    vs = _CHECKS[cid](g)
    return sorted(dict.fromkeys(vs), key=lambda v: (v.vertices, v.edges))


def _label_map(g):
    labels = {}
    for e in g.edges:
        labels.setdefault(frozenset((e.a, e.b)), set()).add(e.label)
    return labels


def _has(labels, a, b, label):
    return label in labels.get(frozenset((a, b)), ())


def _fact_args(g):
    """VALUE id -> ids of non-VALUE vertices linked to it by FACT."""
    args = {v: set() for v in g.value_ids}
    for e in g.edges_with(FACT):
        if g.is_value(e.a) and not g.is_value(e.b):
            args[e.a].add(e.b)
    return args


def _check_overlap(g):
    ids = sorted(g.vertices)
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            if g.vertices[a].overlaps(g.vertices[b]):
                yield Violation(ConstraintId.WELL_FORMED_OVERLAP, (a, b), (), f"spans of {a} and {b} overlap")


def _check_connected(g):
    touched = set()
    for e in g.edges_with(FACT):
        touched.update((e.a, e.b))
    for v in sorted(g.vertices):
        if v not in touched:
            yield Violation(ConstraintId.WELL_FORMED_CONNECTED, (v,), (), f"vertex {v} has no FACT edge")


def _check_typing_fact(g):
    for e in sorted(g.edges_with(FACT)):
        if g.is_value(e.a) == g.is_value(e.b):
            yield Violation(ConstraintId.TYPING_FACT, (e.a, e.b), (e,), "FACT must join a VALUE to a non-VALUE vertex")


def _check_typing_same_role(g):
    labels = _label_map(g)
    for e in sorted(g.edges):
        if e.label == FACT:
            continue
        if g.vertices[e.a].role != g.vertices[e.b].role:
            yield Violation(
                ConstraintId.TYPING_EQUIV_ANALOGY, (e.a, e.b), (e,), f"{e.label} between different roles"
            )
        elif e.label == ANALOGY and _has(labels, e.a, e.b, EQUIV):
            yield Violation(
                ConstraintId.TYPING_EQUIV_ANALOGY, (e.a, e.b), (e,), "pair is both EQUIVALENCE and ANALOGY"
            )


def _check_unique_facts(g):
    labels = _label_map(g)
    for v, args in _fact_args(g).items():
        for w, w2 in combinations(sorted(args), 2):
            if g.vertices[w].role == g.vertices[w2].role and not _has(labels, w, w2, EQUIV):
                yield Violation(
                    ConstraintId.UNIQUE_FACTS,
                    (v, w, w2),
                    (),
                    f"VALUE {v} has two {g.vertices[w].role} arguments {w}, {w2} without EQUIVALENCE",
                )


def _transitivity(g, label, members, cid):
    members = set(members)
    adj = {m: set() for m in members}
    for e in g.edges_with(label):
        if e.a in members and e.b in members:
            adj[e.a].add(e.b)
            adj[e.b].add(e.a)
    for b in sorted(members):
        for a, c in combinations(sorted(adj[b]), 2):
            if c not in adj[a]:
                yield (a, c, b)


def _check_transitivity(label, cid, values_only):
    def run(g):
        members = g.value_ids if values_only else list(g.vertices)
        seen = set()
        for a, c, b in sorted(_transitivity(g, label, members, cid)):
            if (a, c) in seen:
                continue
            seen.add((a, c))
            yield Violation(cid, (a, b, c), (), f"{label}({a},{b}) and {label}({b},{c}) but not {label}({a},{c})")

    return run


def _check_value_pair(g):
    if not g.vertices:
        return
    for e in g.edges_with(ANALOGY):
        if g.is_value(e.a) and g.is_value(e.b):
            return
    witness = tuple(sorted(g.value_ids)) or tuple(sorted(g.vertices))
    yield Violation(ConstraintId.ANALOGY_VALUE_PAIR, witness, (), "no pair of analogous VALUE vertices")


def _check_quadrangle(g):
    labels = _label_map(g)
    args = _fact_args(g)
    facts_of = {}
    for v, ws in args.items():
        for w in ws:
            facts_of.setdefault(w, set()).add(v)
    for e in sorted(g.edges_with(ANALOGY)):
        a, b = e.a, e.b
        if g.is_value(a) and g.is_value(b):
            ok = any(_has(labels, w, w2, ANALOGY) for w in args[a] for w2 in args[b] if w != w2)
            if not ok:
                yield Violation(
                    ConstraintId.ANALOGY_QUADRANGLE, (a, b), (e,), f"analogous VALUEs {a}, {b} lack analogous arguments"
                )
        elif not g.is_value(a) and not g.is_value(b):
            ok = any(
                v != v2 and _has(labels, v, v2, ANALOGY)
                for v in facts_of.get(a, ())
                for v2 in facts_of.get(b, ())
            )
            if not ok:
                yield Violation(
                    ConstraintId.ANALOGY_QUADRANGLE, (a, b), (e,), f"ANALOGY({a},{b}) not backed by analogous facts"
                )


_CHECKS = {
    ConstraintId.WELL_FORMED_OVERLAP: _check_overlap,
    ConstraintId.WELL_FORMED_CONNECTED: _check_connected,
    ConstraintId.TYPING_FACT: _check_typing_fact,
    ConstraintId.TYPING_EQUIV_ANALOGY: _check_typing_same_role,
    ConstraintId.UNIQUE_FACTS: _check_unique_facts,
    ConstraintId.TRANSITIVITY_EQUIV: _check_transitivity(EQUIV, ConstraintId.TRANSITIVITY_EQUIV, False),
    ConstraintId.TRANSITIVITY_ANALOGY: _check_transitivity(ANALOGY, ConstraintId.TRANSITIVITY_ANALOGY, True),
    ConstraintId.ANALOGY_VALUE_PAIR: _check_value_pair,
    ConstraintId.ANALOGY_QUADRANGLE: _check_quadrangle,
}


# -- assignments -------------------------------------------------------------


class _Undecided:
    def __repr__(self):
        return "UNDECIDED"

    def __reduce__(self):
        return "UNDECIDED"


UNDECIDED = _Undecided()


@dataclass(frozen=True)
class Assignment:
    """Roles for candidate spans and labels for span pairs.

    ``role_of[i]`` is a role name, ``None`` (span dropped) or ``UNDECIDED``.
    ``label_of`` maps ``(i, j)`` with ``i < j`` to an :class:`EdgeLabel`, ``None``
    or ``UNDECIDED``; pairs absent from the map count as ``None`` in a total
    assignment and as ``UNDECIDED`` in a partial one.
    """

    spans: tuple
    role_of: tuple
    label_of: Mapping = field(default_factory=dict)
    value_role: str = "VALUE"

    def label(self, i, j, partial=False):
        if i > j:
            i, j = j, i
        default = UNDECIDED if partial else None
        return self.label_of.get((i, j), default)

    @property
    def is_empty(self):
        return all(r is None for r in self.role_of)


def assignment_from_graph(g, spans=None):
    """Induce the assignment of ``g`` over ``spans`` (default: its own vertex spans)."""
    order = sorted(g.vertices, key=g.sort_key)
    if spans is None:
        spans = tuple((g.vertices[v].start, g.vertices[v].end) for v in order)
    index = {s: i for i, s in enumerate(spans)}
    role_of = [None] * len(spans)
    pos = {}
    for v in order:
        key = (g.vertices[v].start, g.vertices[v].end)
        if key not in index or role_of[index[key]] is not None:
            raise ValueError(f"vertex {v} has no free candidate span")
        role_of[index[key]] = g.vertices[v].role
        pos[v] = index[key]
    labels = {}
    for e in g.edges:
        i, j = sorted((pos[e.a], pos[e.b]))
        if (i, j) in labels:
            raise ValueError(f"pair ({e.a}, {e.b}) carries more than one label")
        labels[(i, j)] = e.label
    return Assignment(tuple(spans), tuple(role_of), labels, g.inventory.value_role)


def feasible(a, allow_undecided=False, allow_empty=False):
    """Whether assignment ``a`` satisfies every structural constraint.

    With ``allow_undecided`` the answer is False only when the decided part
    already rules out every completion; it never rejects a completable
    assignment.  ``allow_empty`` admits the assignment with every span dropped.
    """
    n = len(a.spans)
    VAL = a.value_role
    partial = allow_undecided
    roles = a.role_of
    if not partial and (UNDECIDED in roles or any(x is UNDECIDED for x in a.label_of.values())):
        raise ValueError("assignment has undecided variables")

    def known(i):
        return roles[i] is not UNDECIDED

    def lab(i, j):
        return a.label(i, j, partial)

    def maybe_value(i):
        return roles[i] is UNDECIDED or roles[i] == VAL

    def maybe_arg(i):
        return roles[i] is UNDECIDED or (roles[i] is not None and roles[i] != VAL)

    def maybe_same(i, j):
        return not (known(i) and known(j)) or roles[i] == roles[j]

    def can(i, j, label):
        x = lab(i, j)
        return x is UNDECIDED or x == label

    def can_fact(v, w):
        # v as the VALUE end, w as the argument
        return can(v, w, FACT) and maybe_value(v) and maybe_arg(w)

    def can_analogy(i, j, values):
        if not can(i, j, ANALOGY) or not maybe_same(i, j):
            return False
        if values:
            return maybe_value(i) and maybe_value(j)
        return maybe_arg(i) and maybe_arg(j)

    active = [known(i) and roles[i] is not None for i in range(n)]

    for i, j in combinations(range(n), 2):
        (s0, e0), (s1, e1) = a.spans[i], a.spans[j]
        if active[i] and active[j] and s0 < e1 and s1 < e0:
            return False
        x = lab(i, j)
        if x is None or x is UNDECIDED:
            continue
        if (known(i) and roles[i] is None) or (known(j) and roles[j] is None):
            return False
        if active[i] and active[j]:
            if x == FACT and (roles[i] == VAL) == (roles[j] == VAL):
                return False
            if x != FACT and roles[i] != roles[j]:
                return False

    for i in range(n):
        if active[i] and not any(can_fact(i, j) or can_fact(j, i) for j in range(n) if j != i):
            return False

    for i, j, k in combinations(range(n), 3):
        tri = ((i, j, k), (i, k, j), (j, k, i))
        for label, values_only in ((EQUIV, False), (ANALOGY, True)):
            if values_only and not all(known(x) and roles[x] == VAL for x in (i, j, k)):
                continue
            for x, y, z in tri:
                # x-z and y-z present forces x-y
                if lab(x, z) == label and lab(y, z) == label:
                    other = lab(x, y)
                    if other is not UNDECIDED and other != label:
                        return False

    for v in range(n):
        if not (known(v) and roles[v] == VAL):
            continue
        args = [w for w in range(n) if w != v and lab(v, w) == FACT]
        for w, w2 in combinations(args, 2):
            if known(w) and known(w2) and roles[w] == roles[w2]:
                x = lab(w, w2)
                if x is not UNDECIDED and x != EQUIV:
                    return False

    for i, j in combinations(range(n), 2):
        if lab(i, j) != ANALOGY or not (known(i) and known(j)):
            continue
        if roles[i] == VAL and roles[j] == VAL:
            ok = any(
                can_fact(i, w) and can_fact(j, w2) and can_analogy(w, w2, False)
                for w in range(n)
                for w2 in range(n)
                if len({i, j, w, w2}) == 4
            )
        elif roles[i] != VAL and roles[j] != VAL:
            ok = any(
                can_fact(v, i) and can_fact(v2, j) and can_analogy(v, v2, True)
                for v in range(n)
                for v2 in range(n)
                if len({i, j, v, v2}) == 4
            )
        else:
            continue
        if not ok:
            return False

    nonempty = any(active) if allow_empty else True
    if nonempty and not any(can_analogy(i, j, True) for i, j in combinations(range(n), 2)):
        return False
    return True
