"""Sentences, analogy graphs and TAP frames.

An analogy graph has one vertex per role-labeled token span and three kinds
of edges between them:

* ``FACT``: from a VALUE vertex to an argument of its fact (directed),
* ``EQUIVALENCE``: two same-role spans contributing shared content,
* ``ANALOGY``: two same-role spans contributing compared content.

Each connected group of analogous VALUE vertices yields one :class:`TapFrame`.
Token indices are half-open: a vertex covers ``tokens[start:end]``.
"""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import (
    EdgeEndpointMissing,
    InconsistentFrame,
    InvalidGraph,
    MalformedInput,
    SelfLoop,
    SpanOutOfBounds,
    UnknownRole,
)
from .unionfind import UnionFind

DEFAULT_ROLES = ("VALUE", "QUANTITY", "WHOLE", "AGENT", "THEME", "SOURCE", "CAUSE", "TIME")


@dataclass(frozen=True)
class RoleInventory:
    roles: tuple = DEFAULT_ROLES
    value_role: str = "VALUE"

    def __post_init__(self):
        roles = tuple(str(r).upper() for r in self.roles)
        if len(set(roles)) != len(roles):
            raise ValueError(f"duplicate role names in {roles}")
        value_role = str(self.value_role).upper()
        if value_role not in roles:
            raise ValueError(f"value role {value_role!r} not among {roles}")
        object.__setattr__(self, "roles", roles)
        object.__setattr__(self, "value_role", value_role)

    def __contains__(self, role):
        return role in self.roles

    def index(self, role):
        return self.roles.index(role)

    def to_dict(self):
        return {"roles": list(self.roles), "value_role": self.value_role}

    @classmethod
    def from_dict(cls, obj):
        return cls(tuple(obj["roles"]), obj.get("value_role", "VALUE"))


def load_inventory(path=None):
    """Read a role inventory from ``path`` or ``$TAP_INVENTORY``; fall back to the default."""
    path = path or os.environ.get("TAP_INVENTORY")
    if not path:
        return RoleInventory()
    with open(path, encoding="utf-8") as fh:
        return RoleInventory.from_dict(json.load(fh))


@dataclass(frozen=True)
class Sentence:
    id: str
    tokens: tuple
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValueError("sentence has no tokens")
        if any(not isinstance(t, str) or not t for t in self.tokens):
            raise ValueError("tokens must be non-empty strings")
        meta = {}
        for key, values in dict(self.meta or {}).items():
            values = tuple(values)
            if len(values) != len(self.tokens):
                raise ValueError(f"metadata {key!r} has {len(values)} entries for {len(self.tokens)} tokens")
            meta[key] = values
        object.__setattr__(self, "meta", meta)

    def __len__(self):
        return len(self.tokens)

    def text(self, start, end):
        return " ".join(self.tokens[start:end])


@dataclass(frozen=True, order=True)
class Vertex:
    start: int
    end: int
    role: str

    def overlaps(self, other):
        return self.start < other.end and other.start < self.end


class EdgeLabel(str, enum.Enum):
    FACT = "FACT"
    EQUIVALENCE = "EQUIVALENCE"
    ANALOGY = "ANALOGY"

    def __str__(self):
        return self.value


@dataclass(frozen=True, order=True)
class Edge:
    a: int
    b: int
    label: EdgeLabel


@dataclass(frozen=True)
class AnalogyGraph:
    sentence: Sentence
    vertices: Mapping  # id -> Vertex
    edges: frozenset
    inventory: RoleInventory = RoleInventory()

    def is_value(self, vid):
        return self.vertices[vid].role == self.inventory.value_role

    @property
    def value_ids(self):
        return sorted((i for i in self.vertices if self.is_value(i)), key=self.sort_key)

    def sort_key(self, vid):
        return (self.vertices[vid], vid)

    def text(self, vid):
        v = self.vertices[vid]
        return self.sentence.text(v.start, v.end)

    def edges_with(self, label):
        return [e for e in self.edges if e.label == label]

    def adjacency(self, label):
        adj = {i: set() for i in self.vertices}
        for e in self.edges:
            if e.label == label:
                adj[e.a].add(e.b)
                adj[e.b].add(e.a)
        return adj

    def structure(self):
        """Id-free view of the graph: (vertex set, labeled vertex-pair set)."""
        verts = frozenset(self.vertices.values())
        edges = set()
        for e in self.edges:
            u, w = self.vertices[e.a], self.vertices[e.b]
            if e.label != EdgeLabel.FACT:
                u, w = min(u, w), max(u, w)
            edges.add((u, e.label.value, w))
        return verts, frozenset(edges)

    def __len__(self):
        return len(self.vertices)


def canonical_edge(a, b, label, vertices, value_role):
    label = EdgeLabel(label)
    if label == EdgeLabel.FACT:
        a_val = vertices[a].role == value_role
        b_val = vertices[b].role == value_role
        if b_val and not a_val:
            return Edge(b, a, label)
        if a_val and not b_val:
            return Edge(a, b, label)
    return Edge(min(a, b), max(a, b), label)


def build_graph(sentence, vertices, edges, inventory=None):
    """Assemble a graph, canonicalizing edge direction and collapsing duplicates.

    ``vertices`` is either a sequence (ids are positions) or a mapping id -> Vertex.
    ``edges`` holds :class:`Edge` objects or ``(a, b, label)`` triples.
    """
    inventory = inventory or RoleInventory()
    items = vertices.items() if isinstance(vertices, Mapping) else enumerate(vertices)
    n = len(sentence)
    first_id = {}
    remap = {}
    verts = {}
    for vid, v in sorted(items):
        if not isinstance(v, Vertex):
            v = Vertex(*v)
        if v.role not in inventory:
            raise UnknownRole(f"vertex {vid}: role {v.role!r} not in inventory")
        if not 0 <= v.start < v.end <= n:
            raise SpanOutOfBounds(f"vertex {vid}: span [{v.start}, {v.end}) outside sentence of {n} tokens")
        if v in first_id:
            remap[vid] = first_id[v]
            continue
        first_id[v] = vid
        remap[vid] = vid
        verts[vid] = v
    out = set()
    for e in edges:
        a, b, label = (e.a, e.b, e.label) if isinstance(e, Edge) else e
        if a not in remap or b not in remap:
            missing = a if a not in remap else b
            raise EdgeEndpointMissing(f"edge ({a}, {b}, {label}) references missing vertex {missing}")
        a, b = remap[a], remap[b]
        if a == b:
            raise SelfLoop(f"edge ({a}, {b}, {label}) is a self loop")
        out.add(canonical_edge(a, b, label, verts, inventory.value_role))
    return AnalogyGraph(sentence, verts, frozenset(out), inventory)


def empty_graph(sentence, inventory=None):
    return AnalogyGraph(sentence, {}, frozenset(), inventory or RoleInventory())


def transitive_closure(g):
    """Close EQUIVALENCE over all vertices and ANALOGY over VALUE vertices."""
    edges = set(g.edges)
    for label, members in (
        (EdgeLabel.EQUIVALENCE, list(g.vertices)),
        (EdgeLabel.ANALOGY, g.value_ids),
    ):
        allowed = set(members)
        uf = UnionFind(members)
        for e in g.edges:
            if e.label == label and e.a in allowed and e.b in allowed:
                uf.union(e.a, e.b)
        for group in uf.groups():
            group = sorted(group)
            for i, a in enumerate(group):
                for b in group[i + 1:]:
                    edges.add(Edge(a, b, label))
    if len(edges) == len(g.edges):
        return g
    return AnalogyGraph(g.sentence, g.vertices, frozenset(edges), g.inventory)


@dataclass(frozen=True)
class Fact:
    value: Vertex
    arguments: tuple  # ((role, (Vertex, ...)), ...)

    def get(self, role):
        for r, vs in self.arguments:
            if r == role:
                return vs
        return ()


@dataclass(frozen=True)
class TapFrame:
    facts: tuple
    shared: tuple  # ((role, (Vertex, ...)), ...)
    compared: tuple  # ((role, ((Vertex, ...), ...one slot per fact)), ...)
    sentence: Sentence | None = field(default=None, compare=False)
    inventory: RoleInventory = field(default=RoleInventory(), compare=False)

    @property
    def values(self):
        return [f.value for f in self.facts]

    def text(self, vertex):
        if self.sentence is None:
            return ""
        return self.sentence.text(vertex.start, vertex.end)

    def cluster_text(self, cluster):
        return " / ".join(dict.fromkeys(self.text(v) for v in sorted(cluster)))


def make_frame(facts, shared, compared, sentence=None, inventory=None):
    """Build a frame in canonical order.

    ``facts`` is a list of ``(value_vertex, {role: [vertices]})``; ``shared`` a list of
    ``(role, vertices)``; ``compared`` a list of ``(role, [slot vertices per fact])``
    whose slots follow the order of ``facts``.  Facts are sorted by position, roles
    by inventory order, and compared slots permuted to match.
    """
    inventory = inventory or RoleInventory()
    rank = {r: i for i, r in enumerate(inventory.roles)}
    order = sorted(range(len(facts)), key=lambda i: facts[i][0])
    out_facts = []
    for i in order:
        value, args = facts[i]
        args = tuple(
            (role, tuple(sorted(set(vs))))
            for role, vs in sorted(dict(args).items(), key=lambda kv: rank[kv[0]])
            if vs
        )
        out_facts.append(Fact(value, args))
    out_shared = tuple(
        sorted(
            ((role, tuple(sorted(set(vs)))) for role, vs in shared),
            key=lambda rc: (rank[rc[0]], rc[1]),
        )
    )
    entries = []
    for role, slots in compared:
        slots = [tuple(sorted(set(slots[i]))) for i in order]
        first = min(s for s in slots if s)
        entries.append((role, tuple(slots), first))
    entries.sort(key=lambda e: (rank[e[0]], e[2]))
    out_compared = tuple((role, slots) for role, slots, _ in entries)
    return TapFrame(tuple(out_facts), out_shared, out_compared, sentence, inventory)


def graph_to_frames(g):
    """One frame per group (two or more) of ANALOGY-linked VALUE vertices."""
    from .constraints import validate

    violations = validate(g)
    if violations:
        raise InvalidGraph(violations)
    inv = g.inventory
    V = g.vertices
    fact_args = {v: set() for v in g.value_ids}
    for e in g.edges_with(EdgeLabel.FACT):
        fact_args[e.a].add(e.b)
    eq_adj = g.adjacency(EdgeLabel.EQUIVALENCE)
    an_adj = g.adjacency(EdgeLabel.ANALOGY)

    uf = UnionFind(g.value_ids)
    for e in g.edges_with(EdgeLabel.ANALOGY):
        if e.a in fact_args and e.b in fact_args:
            uf.union(e.a, e.b)
    components = [c for c in uf.groups() if len(c) > 1]
    components.sort(key=lambda c: min(V[v] for v in c))

    frames = []
    for comp in components:
        values = sorted(comp, key=g.sort_key)
        args = set().union(*(fact_args[v] for v in values))
        attached = {a: {v for v in values if a in fact_args[v]} for a in args}

        ents = UnionFind(sorted(args))
        for a in args:
            for b in eq_adj[a] & args:
                ents.union(a, b)
        entity_of = {a: ents.find(a) for a in args}
        entities = {ents.find(a): frozenset(m) for m in ents.groups() for a in m}

        groups = UnionFind(sorted(entities))
        linked = set()
        for a in args:
            for b in an_adj[a] & args:
                if entity_of[a] != entity_of[b]:
                    groups.union(entity_of[a], entity_of[b])
                    linked.update((entity_of[a], entity_of[b]))

        compared = [(inv.value_role, [[V[v]] for v in values])]
        in_group = set()
        for grp in groups.groups():
            if not grp & linked:
                continue
            in_group.update(grp)
            slots = []
            for v in values:
                slot = []
                for ent in grp:
                    if any(v in attached[a] for a in entities[ent]):
                        slot.extend(V[a] for a in entities[ent])
                slots.append(slot)
            role = V[next(iter(grp))].role
            compared.append((role, slots))

        shared = []
        for ent, members in entities.items():
            if ent in in_group:
                continue
            covered = set().union(*(attached[a] for a in members))
            if len(covered) == len(values) or (len(members) > 1 and len(covered) > 1):
                shared.append((V[ent].role, [V[a] for a in members]))

        facts = []
        for v in values:
            by_role = {}
            for a in fact_args[v]:
                by_role.setdefault(V[a].role, []).append(V[a])
            facts.append((V[v], by_role))
        frames.append(make_frame(facts, shared, compared, g.sentence, inv))
    return frames


def frames_to_graph(frames, sentence, inventory=None):
    """Inverse of :func:`graph_to_frames`: emit the closed graph encoding ``frames``."""
    if inventory is None:
        inventory = frames[0].inventory if frames else RoleInventory()
    value_role = inventory.value_role
    verts = set()
    edges = set()
    for k, fr in enumerate(frames):
        values = [f.value for f in fr.facts]
        if len(values) < 2:
            raise InconsistentFrame(f"frame {k} has fewer than two facts")
        if not any(role == value_role for role, _ in fr.compared):
            raise InconsistentFrame(f"frame {k} has no compared {value_role}")
        for role, vs in fr.shared:
            if role == value_role or any(v.role != role for v in vs):
                raise InconsistentFrame(f"frame {k}: shared {role} cluster holds a vertex of another role")
        for role, slots in fr.compared:
            if any(v.role != role for slot in slots for v in slot):
                raise InconsistentFrame(f"frame {k}: compared {role} slot holds a vertex of another role")
        shared_vs = {v for _, vs in fr.shared for v in vs}
        compared_vs = set()
        for f in fr.facts:
            if f.value.role != value_role:
                raise InconsistentFrame(f"frame {k}: fact anchored on {f.value.role}")
            verts.add(f.value)
            for role, vs in f.arguments:
                for w in vs:
                    if w.role != role or w.role == value_role:
                        raise InconsistentFrame(f"frame {k}: argument {w} filed under {role}")
                    verts.add(w)
                    edges.add((f.value, w, EdgeLabel.FACT))
        for i, u in enumerate(values):
            for w in values[i + 1:]:
                edges.add((u, w, EdgeLabel.ANALOGY))
        for role, slots in fr.compared:
            if len(slots) != len(values):
                raise InconsistentFrame(f"frame {k}: {role} has {len(slots)} slots for {len(values)} facts")
            if sum(1 for s in slots if s) < 2:
                raise InconsistentFrame(f"frame {k}: {role} compares fewer than two facts")
            if role == value_role:
                if [tuple(s) for s in slots] != [(v,) for v in values]:
                    raise InconsistentFrame(f"frame {k}: {value_role} slots do not match facts")
                continue
            clusters = []
            for f, slot in zip(fr.facts, slots):
                if not slot:
                    continue
                if not set(slot) & set(f.get(role)):
                    raise InconsistentFrame(f"frame {k}: {role} slot not attached to its fact")
                if frozenset(slot) not in clusters:
                    clusters.append(frozenset(slot))
            for i, c in enumerate(clusters):
                compared_vs |= c
                _clique(c, EdgeLabel.EQUIVALENCE, edges)
                for d in clusters[i + 1:]:
                    for u in c:
                        for w in d:
                            edges.add((u, w, EdgeLabel.ANALOGY))
        if shared_vs & compared_vs:
            raise InconsistentFrame(f"frame {k}: a vertex is both shared and compared")
        for _, vs in fr.shared:
            _clique(vs, EdgeLabel.EQUIVALENCE, edges)
        verts |= shared_vs | compared_vs
    ordered = sorted(verts)
    for u, w in zip(ordered, ordered[1:]):
        if (u.start, u.end) == (w.start, w.end):
            raise InconsistentFrame(f"span [{u.start}, {u.end}) carries roles {u.role} and {w.role}")
    ids = {v: i for i, v in enumerate(ordered)}
    g = build_graph(
        sentence,
        ordered,
        [(ids[u], ids[w], label) for u, w, label in edges],
        inventory,
    )
    return transitive_closure(g)


def _clique(vs, label, edges):
    vs = sorted(set(vs))
    for i, u in enumerate(vs):
        for w in vs[i + 1:]:
            edges.add((u, w, label))


# -- serialization ---------------------------------------------------------


def sentence_to_dict(s):
    out = {"id": s.id, "tokens": list(s.tokens)}
    if s.meta:
        out["meta"] = {k: list(v) for k, v in s.meta.items()}
    return out


def sentence_from_dict(obj, line=None):
    try:
        return Sentence(str(obj["id"]), obj["tokens"], obj.get("meta") or {})
    except KeyError as exc:
        raise MalformedInput("missing key", line=line, field=f"sentence.{exc.args[0]}") from None
    except (TypeError, ValueError, AttributeError) as exc:
        raise MalformedInput(str(exc), line=line, field="sentence") from None


def graph_to_dict(g):
    order = sorted(g.vertices, key=g.sort_key)
    return {
        "sentence": sentence_to_dict(g.sentence),
        "inventory": g.inventory.to_dict(),
        "vertices": [
            {"id": i, "start": g.vertices[i].start, "end": g.vertices[i].end, "role": g.vertices[i].role}
            for i in order
        ],
        "edges": [{"a": e.a, "b": e.b, "label": e.label.value} for e in sorted(g.edges)],
    }


def graph_from_dict(obj, line=None, inventory=None):
    if not isinstance(obj, dict):
        raise MalformedInput("expected a JSON object", line=line)
    for key in ("sentence", "vertices", "edges"):
        if key not in obj:
            raise MalformedInput("missing key", line=line, field=key)
    sentence = sentence_from_dict(obj["sentence"], line)
    try:
        inv = RoleInventory.from_dict(obj["inventory"]) if "inventory" in obj else (inventory or load_inventory())
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(str(exc), line=line, field="inventory") from None
    verts = {}
    for k, item in enumerate(obj["vertices"]):
        try:
            vid = item["id"]
            if not isinstance(vid, int) or isinstance(vid, bool):
                raise TypeError("vertex id must be an integer")
            if vid in verts:
                raise ValueError(f"duplicate vertex id {vid}")
            verts[vid] = Vertex(int(item["start"]), int(item["end"]), str(item["role"]).upper())
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(str(exc), line=line, field=f"vertices[{k}]") from None
    edges = []
    for k, item in enumerate(obj["edges"]):
        try:
            edges.append((item["a"], item["b"], EdgeLabel(str(item["label"]).upper())))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(str(exc), line=line, field=f"edges[{k}]") from None
    try:
        return build_graph(sentence, verts, edges, inv)
    except (EdgeEndpointMissing, SelfLoop, SpanOutOfBounds, UnknownRole) as exc:
        raise MalformedInput(f"{type(exc).__name__}: {exc}", line=line) from None


def dumps(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def loads(data, line=None):
    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedInput(f"not UTF-8: {exc}", line=line) from None
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON: {exc.msg} at column {exc.colno}", line=line) from None


def emit_graph(g):
    return dumps(graph_to_dict(g)).encode("utf-8")


def parse_graph(data, line=None):
    return graph_from_dict(loads(data, line), line)


def read_graphs(lines: Iterable):
    """Yield graphs from newline-delimited JSON, skipping blank lines."""
    for n, raw in enumerate(lines, 1):
        if raw.strip():
            yield parse_graph(raw, line=n)


# -- frame serialization ---------------------------------------------------


def _vertex_dict(fr, v):
    return {"start": v.start, "end": v.end, "role": v.role, "text": fr.text(v)}


def frame_to_dict(fr, index=0):
    return {
        "sentence": sentence_to_dict(fr.sentence) if fr.sentence else None,
        "inventory": fr.inventory.to_dict(),
        "frame_index": index,
        "facts": [
            {
                "value": _vertex_dict(fr, f.value),
                "arguments": {role: [_vertex_dict(fr, w) for w in vs] for role, vs in f.arguments},
            }
            for f in fr.facts
        ],
        "shared": [{"role": role, "cluster": [_vertex_dict(fr, w) for w in vs]} for role, vs in fr.shared],
        "compared": [
            {"role": role, "slots": [[_vertex_dict(fr, w) for w in slot] for slot in slots]}
            for role, slots in fr.compared
        ],
    }


def frame_from_dict(obj, line=None):
    def vx(d):
        return Vertex(int(d["start"]), int(d["end"]), str(d["role"]).upper())

    try:
        sentence = sentence_from_dict(obj["sentence"], line) if obj.get("sentence") else None
        inv = RoleInventory.from_dict(obj["inventory"]) if "inventory" in obj else load_inventory()
        facts = [
            (vx(f["value"]), {role: [vx(w) for w in ws] for role, ws in f["arguments"].items()})
            for f in obj["facts"]
        ]
        shared = [(s["role"], [vx(w) for w in s["cluster"]]) for s in obj["shared"]]
        compared = [(c["role"], [[vx(w) for w in slot] for slot in c["slots"]]) for c in obj["compared"]]
        index = int(obj.get("frame_index", 0))
    except MalformedInput:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise MalformedInput(f"bad frame: {exc!r}", line=line) from None
    # slots are stored in fact order already
    return make_frame(facts, shared, compared, sentence, inv), index
