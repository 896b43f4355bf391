"""Decoders from score sets to constraint-satisfying analogy graphs.

All decoders maximize (or, for the greedy one, approximate) the same
objective: the sum of log-probabilities of every span-role and pair-label
decision, NONE decisions included.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .constraints import Assignment, feasible
from .core import AnalogyGraph, EdgeLabel, Vertex, build_graph
from .errors import BudgetExhaustedWithNoIncumbent, InstanceTooLarge
from .scores import safe_log, top_roles
from .unionfind import UnionFind

# pair label codes follow EDGE_OPTIONS
FACT, EQ, AN, NONE = 0, 1, 2, 3
LABELS = (EdgeLabel.FACT, EdgeLabel.EQUIVALENCE, EdgeLabel.ANALOGY, None)
UND = -1

DEFAULT_MAX_NODES = 10**7
DEFAULT_MAX_MS = 30_000
DEFAULT_MAX_SPANS = 64
BRUTE_MAX_SPANS = 5
BRUTE_MAX_K = 3
EPS = 1e-10


@dataclass(frozen=True)
class DecodeResult:
    graph: AnalogyGraph
    objective: float
    optimal: bool
    nodes_explored: int
    assignment: Assignment


def objective(a, s):
    """Sum of log-probabilities of all span and pair decisions in total assignment ``a``."""
    opts = s.options
    total = 0.0
    for k, role in enumerate(a.role_of):
        total += safe_log(s.span_scores[k][opts.index(role if role is not None else "NONE")])
    for i, j in s.pairs():
        lab = a.label(i, j)
        code = NONE if lab is None else LABELS.index(EdgeLabel(lab))
        total += safe_log(s.edge_scores[(i, j)][code])
    return total


def _assignment(s, roles, labels):
    """Build an :class:`Assignment` from role indices (None = dropped) and pair codes."""
    inv = s.inventory
    role_of = tuple(None if r is None else inv.roles[r] for r in roles)
    label_of = {p: LABELS[c] for p, c in labels.items() if c != NONE}
    return Assignment(s.spans, role_of, label_of, inv.value_role)


def assignment_to_graph(a, s):
    """Vertices keep their candidate span index as id."""
    verts = {k: Vertex(st, en, r) for k, ((st, en), r) in enumerate(zip(a.spans, a.role_of)) if r is not None}
    edges = [(i, j, lab) for (i, j), lab in a.label_of.items() if lab is not None]
    return build_graph(s.sentence, verts, edges, s.inventory)


def _result(s, a, optimal, nodes):
    return DecodeResult(assignment_to_graph(a, s), objective(a, s), optimal, nodes, a)


def _empty(s):
    return Assignment(s.spans, (None,) * len(s.spans), {}, s.inventory.value_role)


# -- greedy -------------------------------------------------------------------


def greedy_decode(s):
    """Argmax decisions, then repair in five passes.

    1. most likely role per span and label per pair;
    2. drop overlapping spans (lower span score first, later start on ties)
       and edges with inactive endpoints or wrong typing;
    3. close EQUIVALENCE clusters and ANALOGY clusters of VALUE spans;
    4. per VALUE and role, keep the argument with the best FACT score
       (together with its EQUIVALENCE cluster);
    5. drop unconnected spans, unsupported argument analogies and every VALUE
       cluster failing the quadrangle test, until nothing changes.
    """
    n = len(s.spans)
    inv = s.inventory
    R = len(inv.roles)
    VAL = inv.index(inv.value_role)

    roles = []
    for row in s.span_scores:
        k = max(range(R + 1), key=lambda r: (row[r], -r))
        roles.append(None if k == R else k)
    label = {}
    for p in s.pairs():
        row = s.edge_scores[p]
        label[p] = max(range(4), key=lambda c: (row[c], -c))

    def lab(i, j):
        return label[(i, j) if i < j else (j, i)]

    def put(i, j, c):
        label[(i, j) if i < j else (j, i)] = c

    def drop_span(i):
        roles[i] = None
        for k in range(n):
            if k != i:
                put(i, k, NONE)

    order = sorted(
        (k for k in range(n) if roles[k] is not None),
        key=lambda k: (-s.span_scores[k][roles[k]], s.spans[k][0], k),
    )
    kept = []
    for k in order:
        st, en = s.spans[k]
        if any(st < s.spans[q][1] and s.spans[q][0] < en for q in kept):
            drop_span(k)
        else:
            kept.append(k)

    for (i, j), c in label.items():
        if c == NONE:
            continue
        ri, rj = roles[i], roles[j]
        if ri is None or rj is None:
            label[(i, j)] = NONE
        elif c == FACT and (ri == VAL) == (rj == VAL):
            label[(i, j)] = NONE
        elif c in (EQ, AN) and ri != rj:
            label[(i, j)] = NONE
        elif c == EQ and ri == VAL:
            label[(i, j)] = NONE

    def active():
        return [k for k in range(n) if roles[k] is not None]

    def values():
        return [k for k in active() if roles[k] == VAL]

    eq = UnionFind(active())
    for (i, j), c in label.items():
        if c == EQ:
            eq.union(i, j)
    for group in eq.groups():
        for i, j in itertools.combinations(sorted(group), 2):
            put(i, j, EQ)
    an = UnionFind(values())
    for i, j in itertools.combinations(values(), 2):
        if lab(i, j) == AN:
            an.union(i, j)
    for group in an.groups():
        for i, j in itertools.combinations(sorted(group), 2):
            put(i, j, AN)

    for v in values():
        args = [w for w in active() if w != v and lab(v, w) == FACT]
        by_role = {}
        for w in args:
            by_role.setdefault(roles[w], []).append(w)
        for ws in by_role.values():
            if len({eq.find(w) for w in ws}) < 2:
                continue
            best = max(ws, key=lambda w: (s.edge_scores[(min(v, w), max(v, w))][FACT], -w))
            for w in ws:
                if not eq.connected(w, best):
                    put(v, w, NONE)

    changed = True
    while changed:
        changed = False
        for k in active():
            if not any(lab(k, q) == FACT for q in range(n) if q != k):
                drop_span(k)
                changed = True
        vals = values()
        facts_of = {w: [v for v in vals if lab(v, w) == FACT] for w in active() if roles[w] != VAL}
        for w, w2 in itertools.combinations(sorted(facts_of), 2):
            if lab(w, w2) != AN:
                continue
            if not any(v != v2 and lab(v, v2) == AN for v in facts_of[w] for v2 in facts_of[w2]):
                put(w, w2, NONE)
                changed = True
        groups = UnionFind(vals)
        for v, v2 in itertools.combinations(vals, 2):
            if lab(v, v2) == AN:
                groups.union(v, v2)
        for group in groups.groups():
            ok = all(
                any(
                    w != w2 and lab(w, w2) == AN
                    for w in facts_of
                    if lab(v, w) == FACT
                    for w2 in facts_of
                    if lab(v2, w2) == FACT
                )
                for v, v2 in itertools.combinations(sorted(group), 2)
            )
            if not ok:
                for v in group:
                    drop_span(v)
                changed = True

    vals = values()
    if not any(lab(v, v2) == AN for v, v2 in itertools.combinations(vals, 2)):
        a = _empty(s)
    else:
        a = _assignment(s, roles, label)
    return _result(s, a, False, 0)


# -- exact branch and bound --------------------------------------------------------


class _Search:
    """Depth-first branch and bound: span roles first, then pair labels."""

    def __init__(self, s, allow_empty, top_k, max_nodes, max_ms):
        self.s = s
        self.n = n = len(s.spans)
        inv = s.inventory
        self.R = R = len(inv.roles)
        self.VAL = inv.index(inv.value_role)
        self.allow_empty = allow_empty
        self.max_nodes = max_nodes
        self.deadline = time.monotonic() + max_ms / 1000.0
        self.slog = s.span_logs().tolist()
        self.pairs = s.pairs()
        self.pid = [[-1] * n for _ in range(n)]
        for p, (i, j) in enumerate(self.pairs):
            self.pid[i][j] = self.pid[j][i] = p
        el = s.edge_logs()
        self.elog = [el[i, j].tolist() for i, j in self.pairs]
        self.best_all = [max(r) for r in self.elog]
        self.best_none = [r[NONE] for r in self.elog]
        self.best_fact = [max(r[FACT], r[NONE]) for r in self.elog]
        self.best_same = [max(r[EQ], r[AN], r[NONE]) for r in self.elog]

        allowed = top_roles(s, top_k) if top_k else [tuple(range(R))] * n
        self.role_opts = []
        margins = []
        for k in range(n):
            opts = [R] + list(allowed[k])
            opts.sort(key=lambda r: (-self.slog[k][r], r))
            self.role_opts.append(opts)
            vals = sorted((self.slog[k][r] for r in opts), reverse=True)
            margins.append(vals[0] - vals[1] if len(vals) > 1 else 0.0)
        self.span_order = sorted(range(n), key=lambda k: (-margins[k], k))
        self.val_allowed = [self.VAL in allowed[k] for k in range(n)]
        self.arg_allowed = [any(r != self.VAL for r in allowed[k]) for k in range(n)]
        self.overlaps = [
            [q for q in range(n) if q != k and s.spans[k][0] < s.spans[q][1] and s.spans[q][0] < s.spans[k][1]]
            for k in range(n)
        ]

        self.role = [UND] * n
        self.lab = [[UND] * n for _ in range(n)]
        self.pair_ub = [self.best_all[p] for p in range(len(self.pairs))]
        self.ub = sum(max(self.slog[k][r] for r in self.role_opts[k]) for k in range(n)) + sum(self.pair_ub)
        self.nodes = 0
        self.exhausted = False
        self.best = None
        self.best_obj = -np.inf

    # -- phase 1 -------------------------------------------------------------

    def _pair_bound(self, p, ri, rj):
        R, VAL = self.R, self.VAL
        if ri == R or rj == R:
            return self.best_none[p]
        if ri == UND or rj == UND:
            return self.best_all[p]
        if (ri == VAL) != (rj == VAL):
            return self.best_fact[p]
        if ri == rj:
            return self.best_same[p]
        return self.best_none[p]

    def set_role(self, k, r):
        """Assign role ``r`` to span ``k``; returns the undo record or None if refuted."""
        R = self.R
        undo = (k, self.ub, [])
        self.role[k] = r
        self.ub += self.slog[k][r] - max(self.slog[k][x] for x in self.role_opts[k])
        for q in range(self.n):
            if q == k:
                continue
            p = self.pid[k][q]
            b = self._pair_bound(p, r, self.role[q])
            if b != self.pair_ub[p]:
                undo[2].append((p, self.pair_ub[p]))
                self.ub += b - self.pair_ub[p]
                self.pair_ub[p] = b
        if r != R and any(self.role[q] not in (UND, R) for q in self.overlaps[k]):
            return undo, False
        return undo, self._roles_possible()

    def unset_role(self, undo):
        k, ub, changes = undo
        self.role[k] = UND
        self.ub = ub
        for p, b in changes:
            self.pair_ub[p] = b

    def _roles_possible(self):
        R, VAL = self.R, self.VAL
        role = self.role
        n_val = n_arg = 0
        act_val = act_arg = False
        arg_roles = {}
        for k in range(self.n):
            r = role[k]
            if r == UND:
                n_val += self.val_allowed[k]
                n_arg += self.arg_allowed[k]
            elif r == VAL:
                n_val += 1
                act_val = True
            elif r != R:
                n_arg += 1
                act_arg = True
                arg_roles[r] = arg_roles.get(r, 0) + 1
        if act_val or act_arg or not self.allow_empty:
            if n_val < 2 or n_arg < 2:
                return False
        if act_val and n_arg == 0 or act_arg and n_val == 0:
            return False
        if UND not in role and (act_val or act_arg):
            if max(arg_roles.values(), default=0) < 2:
                return False
        return True

    # -- phase 2 ---------------------------------------------------------------

    def enter_pairs(self):
        """Fix forced pairs and list the free ones; returns (free pairs, label options) or None."""
        R, VAL = self.R, self.VAL
        role = self.role
        free, opts = [], []
        self.pf = [0] * self.n  # pairs that can still be FACT, per span
        self.vv_open = 0
        margins = []
        for p, (i, j) in enumerate(self.pairs):
            ri, rj = role[i], role[j]
            if ri == R or rj == R:
                cand = None
            elif (ri == VAL) != (rj == VAL):
                cand = [FACT, NONE]
            elif ri == rj:
                cand = [EQ, AN, NONE]
            else:
                cand = None
            if cand is None:
                self.lab[i][j] = self.lab[j][i] = NONE
                continue
            row = self.elog[p]
            cand.sort(key=lambda c: (-row[c], c))
            free.append(p)
            opts.append(cand)
            margins.append(row[cand[0]] - row[cand[1]])
            if FACT in cand:
                self.pf[i] += 1
                self.pf[j] += 1
            if ri == VAL and rj == VAL:
                self.vv_open += 1
        for k in range(self.n):
            if role[k] != R and self.pf[k] == 0:
                return None
        if any(r != R for r in role) and self.vv_open == 0:
            return None
        order = sorted(range(len(free)), key=lambda x: (-margins[x], free[x]))
        self.values = [k for k in range(self.n) if role[k] == VAL]
        self.args = [k for k in range(self.n) if role[k] not in (R, VAL)]
        return [free[x] for x in order], [opts[x] for x in order]

    def leave_pairs(self):
        for i, j in self.pairs:
            self.lab[i][j] = self.lab[j][i] = UND

    def _can(self, i, j, c):
        x = self.lab[i][j]
        return x == UND or x == c

    def _quad_possible(self, v, v2):
        role, can = self.role, self._can
        for w in self.args:
            if not can(v, w, FACT):
                continue
            for w2 in self.args:
                if w2 != w and role[w2] == role[w] and can(v2, w2, FACT) and can(w, w2, AN):
                    return True
        return False

    def _support_possible(self, w, w2):
        can = self._can
        for v in self.values:
            if not can(v, w, FACT):
                continue
            for v2 in self.values:
                if v2 != v and can(v2, w2, FACT) and can(v, v2, AN):
                    return True
        return False

    def set_label(self, p, c):
        i, j = self.pairs[p]
        lab, role, VAL = self.lab, self.role, self.VAL
        undo = (p, self.ub, self.pf[i], self.pf[j], self.vv_open)
        lab[i][j] = lab[j][i] = c
        self.ub += self.elog[p][c] - self.pair_ub_free[p]
        vi, vj = role[i] == VAL, role[j] == VAL
        if vi != vj:
            if c != FACT:
                self.pf[i] -= 1
                self.pf[j] -= 1
                if self.pf[i] == 0 or self.pf[j] == 0:
                    return undo, False
        elif vi and c != AN:
            self.vv_open -= 1
            if self.vv_open == 0:
                return undo, False
        return undo, self._consistent(i, j, c, vi, vj)

    def unset_label(self, undo):
        p, ub, pfi, pfj, vv = undo
        i, j = self.pairs[p]
        self.lab[i][j] = self.lab[j][i] = UND
        self.ub = ub
        self.pf[i], self.pf[j], self.vv_open = pfi, pfj, vv

    def _consistent(self, i, j, c, vi, vj):
        lab, role, n = self.lab, self.role, self.n
        li, lj = lab[i], lab[j]
        if vi == vj:
            # transitivity of EQUIVALENCE (all roles) and of ANALOGY (VALUE only)
            for label in (EQ, AN) if vi else (EQ,):
                ks = self.values if label == AN else range(n)
                if c == label:
                    for k in ks:
                        if k == i or k == j:
                            continue
                        a, b = li[k], lj[k]
                        if (b == label and a != UND and a != label) or (a == label and b != UND and b != label):
                            return False
                else:
                    for k in ks:
                        if k != i and k != j and li[k] == label and lj[k] == label:
                            return False
        if vi != vj:
            v, w = (i, j) if vi else (j, i)
            lv, lw = lab[v], lab[w]
            if c == FACT:
                for w2 in self.args:
                    if w2 != w and role[w2] == role[w] and lv[w2] == FACT and lw[w2] not in (UND, EQ):
                        return False
            else:
                for v2 in self.values:
                    if v2 != v and lv[v2] == AN and not self._quad_possible(v, v2):
                        return False
                for w2 in self.args:
                    if w2 != w and lw[w2] == AN and not self._support_possible(w, w2):
                        return False
        elif vi:
            if c == AN:
                if not self._quad_possible(i, j):
                    return False
            else:
                for w in self.args:
                    for w2 in self.args:
                        if w < w2 and lab[w][w2] == AN and not self._support_possible(w, w2):
                            return False
        else:
            if c != EQ:
                for v in self.values:
                    if lab[v][i] == FACT and lab[v][j] == FACT:
                        return False
            if c == AN:
                if not self._support_possible(i, j):
                    return False
            else:
                for v in self.values:
                    for v2 in self.values:
                        if v < v2 and lab[v][v2] == AN and not self._quad_possible(v, v2):
                            return False
        return True

    # -- driver ----------------------------------------------------------------

    def offer(self, a, obj):
        if obj > self.best_obj + EPS:
            self.best, self.best_obj = a, obj

    def _tick(self):
        self.nodes += 1
        if self.nodes >= self.max_nodes or (self.nodes & 255 == 0 and time.monotonic() > self.deadline):
            self.exhausted = True
        return not self.exhausted

    def _leaf(self):
        R = self.R
        roles = [None if r == R else r for r in self.role]
        labels = {(i, j): self.lab[i][j] for i, j in self.pairs}
        a = _assignment(self.s, roles, labels)
        if feasible(a, allow_empty=self.allow_empty):
            self.offer(a, self.ub)

    def _enter(self):
        entered = self.enter_pairs()
        if entered is None:
            return False
        self._free, self._free_opts = entered
        self.pair_ub_free = {p: self.elog[p][o[0]] for p, o in zip(*entered)}
        lab = self.lab
        self.ub = sum(self.slog[k][self.role[k]] for k in range(self.n)) + sum(
            self.elog[p][lab[i][j]] if lab[i][j] != UND else self.pair_ub_free[p]
            for p, (i, j) in enumerate(self.pairs)
        )
        return True

    def run(self):
        n = self.n
        if n == 0:
            self._leaf()
            return
        first = self.span_order[0]
        stack = [_Frame("span", first, self.role_opts[first], 0)]
        while stack:
            f = stack[-1]
            if f.undo is not None:
                if f.kind == "span":
                    if f.entered:
                        self.leave_pairs()
                        f.entered = False
                    self.unset_role(f.undo)
                else:
                    self.unset_label(f.undo)
                f.undo = None
            if f.pos == len(f.options) or self.exhausted:
                stack.pop()
                continue
            value = f.options[f.pos]
            f.pos += 1
            if not self._tick():
                continue
            if f.kind == "span":
                f.undo, ok = self.set_role(f.var, value)
            else:
                f.undo, ok = self.set_label(f.var, value)
            if not ok or self.ub <= self.best_obj + EPS:
                continue
            d = f.depth + 1
            if f.kind == "span":
                if d < n:
                    nxt = self.span_order[d]
                    stack.append(_Frame("span", nxt, self.role_opts[nxt], d))
                    continue
                f.entered = True
                if not self._enter() or self.ub <= self.best_obj + EPS:
                    continue
                if not self._free:
                    self._leaf()
                    continue
                stack.append(_Frame("pair", self._free[0], self._free_opts[0], 0))
            elif d == len(self._free):
                self._leaf()
            else:
                stack.append(_Frame("pair", self._free[d], self._free_opts[d], d))


class _Frame:
    __slots__ = ("kind", "var", "options", "depth", "pos", "undo", "entered")

    def __init__(self, kind, var, options, depth):
        self.kind = kind
        self.var = var
        self.options = options
        self.depth = depth
        self.pos = 0
        self.undo = None
        self.entered = False


def exact_decode(
    s,
    max_nodes=DEFAULT_MAX_NODES,
    max_ms=DEFAULT_MAX_MS,
    allow_empty=True,
    top_k_roles=None,
    max_spans=DEFAULT_MAX_SPANS,
):
    """Maximize :func:`objective` subject to every structural constraint.

    Depth-first branch and bound seeded with the greedy solution.  ``optimal``
    is True only when the search finished within ``max_nodes`` and ``max_ms``;
    otherwise the best incumbent is returned.  ``top_k_roles`` restricts each
    span to its k most likely roles (plus NONE).
    """
    if len(s.spans) > max_spans:
        raise InstanceTooLarge(f"{len(s.spans)} candidate spans exceed the limit of {max_spans}")
    search = _Search(s, allow_empty, top_k_roles, max_nodes, max_ms)
    greedy = greedy_decode(s)
    if (allow_empty or not greedy.assignment.is_empty) and _within_top_k(s, greedy.assignment, top_k_roles):
        search.offer(greedy.assignment, greedy.objective)
    if allow_empty:
        empty = _empty(s)
        search.offer(empty, objective(empty, s))
    search.run()
    if search.best is None:
        raise BudgetExhaustedWithNoIncumbent("no admissible graph found")
    return _result(s, search.best, not search.exhausted, search.nodes)


def _within_top_k(s, a, k):
    if not k:
        return True
    allowed = top_roles(s, k)
    inv = s.inventory
    return all(r is None or inv.index(r) in allowed[i] for i, r in enumerate(a.role_of))


# -- exhaustive oracle -------------------------------------------------------------


def brute_force_decode(s, top_k_roles=BRUTE_MAX_K, allow_empty=True):
    """Enumerate every assignment over each span's top-k roles plus NONE.

    Role tuples are enumerated in lexicographic order; for each, every
    combination of type-admissible pair labels is scored and checked at once
    with array operations.  Ties keep the first assignment met.
    """
    n = len(s.spans)
    if n > BRUTE_MAX_SPANS:
        raise InstanceTooLarge(f"{n} spans; exhaustive search supports at most {BRUTE_MAX_SPANS}")
    if not 1 <= top_k_roles <= BRUTE_MAX_K:
        raise InstanceTooLarge(f"top_k_roles={top_k_roles}; exhaustive search supports 1..{BRUTE_MAX_K}")
    inv = s.inventory
    R = len(inv.roles)
    VAL = inv.index(inv.value_role)
    slog = s.span_logs()
    elog = s.edge_logs()
    pairs = s.pairs()
    m = len(pairs)
    allowed = top_roles(s, top_k_roles)
    choices = [list(allowed[k]) + [R] for k in range(n)]
    best_obj, best = -np.inf, None
    count = 0
    for roles in itertools.product(*choices):
        act = [r != R for r in roles]
        if any(
            act[i] and act[j] and s.spans[i][0] < s.spans[j][1] and s.spans[j][0] < s.spans[i][1]
            for i, j in pairs
        ):
            continue
        adm = []
        for i, j in pairs:
            ri, rj = roles[i], roles[j]
            if not (act[i] and act[j]):
                adm.append([NONE])
            elif (ri == VAL) != (rj == VAL):
                adm.append([FACT, NONE])
            elif ri == rj:
                adm.append([EQ, AN, NONE])
            else:
                adm.append([NONE])
        span_part = sum(slog[k, roles[k]] for k in range(n))
        if not any(act):
            count += 1
            if allow_empty:
                obj = span_part + sum(elog[i, j, NONE] for i, j in pairs)
                if obj > best_obj:
                    best_obj, best = obj, (roles, [NONE] * m)
            continue
        # a span with no FACT-capable pair can never be connected
        if any(act[k] and not any(FACT in adm[p] for p, (i, j) in enumerate(pairs) if k in (i, j)) for k in range(n)):
            continue
        # an analogy needs two VALUE spans and two arguments sharing a role
        n_val = sum(1 for k in range(n) if act[k] and roles[k] == VAL)
        arg_roles = [roles[k] for k in range(n) if act[k] and roles[k] != VAL]
        if n_val < 2 or len(arg_roles) == len(set(arg_roles)):
            continue
        # no label combination can beat the incumbent
        if span_part + sum(max(elog[i, j, c] for c in adm[p]) for p, (i, j) in enumerate(pairs)) <= best_obj:
            continue
        if m:
            grids = np.meshgrid(*[np.array(a, dtype=np.int8) for a in adm], indexing="ij")
            L = np.stack([g.ravel() for g in grids], axis=1)
        else:
            L = np.zeros((1, 0), dtype=np.int8)
        count += len(L)
        table = np.array([elog[i, j] for i, j in pairs]).reshape(m, 4)
        obj = span_part + table[np.arange(m), L].sum(axis=1) if m else np.full(1, span_part)
        ok = _oracle_feasible(L, roles, act, pairs, VAL)
        if not ok.any():
            continue
        masked = np.where(ok, obj, -np.inf)
        k = int(np.argmax(masked))
        if masked[k] > best_obj:
            best_obj, best = float(masked[k]), (roles, L[k].tolist())
    if best is None:
        raise BudgetExhaustedWithNoIncumbent("no admissible assignment exists")
    roles, codes = best
    a = _assignment(s, [None if r == R else r for r in roles], dict(zip(pairs, codes)))
    return DecodeResult(assignment_to_graph(a, s), objective(a, s), True, count, a)


def _oracle_feasible(L, roles, act, pairs, VAL):
    """Row mask of label matrices ``L`` satisfying every constraint under fixed ``roles``."""
    n = len(roles)
    col = {}
    for p, (i, j) in enumerate(pairs):
        col[(i, j)] = col[(j, i)] = L[:, p]

    def is_(i, j, c):
        return col[(i, j)] == c

    ok = np.ones(len(L), dtype=bool)
    values = [k for k in range(n) if act[k] and roles[k] == VAL]
    args = [k for k in range(n) if act[k] and roles[k] != VAL]
    for k in range(n):
        if act[k]:
            conn = np.zeros(len(L), dtype=bool)
            for q in range(n):
                if q != k:
                    conn |= is_(k, q, FACT)
            ok &= conn
    for a, b, c in itertools.combinations([k for k in range(n) if act[k]], 3):
        for x, y, z in ((a, b, c), (a, c, b), (b, c, a)):
            ok &= ~(is_(x, z, EQ) & is_(y, z, EQ)) | is_(x, y, EQ)
            if roles[x] == roles[y] == roles[z] == VAL:
                ok &= ~(is_(x, z, AN) & is_(y, z, AN)) | is_(x, y, AN)
    for v in values:
        for w, w2 in itertools.combinations(args, 2):
            if roles[w] == roles[w2]:
                ok &= ~(is_(v, w, FACT) & is_(v, w2, FACT)) | is_(w, w2, EQ)
    for v, v2 in itertools.combinations(values, 2):
        sup = np.zeros(len(L), dtype=bool)
        for w in args:
            for w2 in args:
                if w != w2 and roles[w] == roles[w2]:
                    sup |= is_(v, w, FACT) & is_(v2, w2, FACT) & is_(w, w2, AN)
        ok &= ~is_(v, v2, AN) | sup
    for w, w2 in itertools.combinations(args, 2):
        if roles[w] != roles[w2]:
            continue
        sup = np.zeros(len(L), dtype=bool)
        for v in values:
            for v2 in values:
                if v != v2:
                    sup |= is_(v, w, FACT) & is_(v2, w2, FACT) & is_(v, v2, AN)
        ok &= ~is_(w, w2, AN) | sup
    any_pair = np.zeros(len(L), dtype=bool)
    for v, v2 in itertools.combinations(values, 2):
        any_pair |= is_(v, v2, AN)
    ok &= any_pair
    return ok


def decode(s, mode="exact", **kw):
    if mode == "greedy":
        return greedy_decode(s)
    if mode == "exact":
        return exact_decode(s, **kw)
    raise ValueError(f"unknown decode mode {mode!r}")
