"""The ``tap`` command: newline-delimited JSON in, newline-delimited JSON out.

Exit codes: 0 success, 1 validation or metric threshold failure, 2 decode
budget exhausted without an admissible graph, 3 malformed input.
"""

from __future__ import annotations

import argparse
import enum
import json
import os
import sys
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from contextlib import ExitStack

from . import chart as chartmod
from .constraints import validate
from .core import dumps, emit_graph, frame_from_dict, frame_to_dict, graph_to_frames, loads, parse_graph
from .decode import DEFAULT_MAX_MS, DEFAULT_MAX_NODES, exact_decode, greedy_decode
from .errors import BudgetExhaustedWithNoIncumbent, InvalidGraph, MalformedInput, TapError
from .evaluation import METRICS, PRF, krippendorff_alpha, score_pair, token_labels
from .gen import GenParams, gen_graph, gen_scores
from .scores import emit_scores, parse_scores


class ExitCode(enum.IntEnum):
    OK = 0
    FAILED = 1
    BUDGET = 2
    MALFORMED = 3


GRAPH_SCHEMA = """\
graph line: {"sentence": {"id", "tokens": [...], "meta"?},
             "inventory"?: {"roles": [...], "value_role": "VALUE"},
             "vertices": [{"id", "start", "end", "role"}],
             "edges": [{"a", "b", "label": FACT|EQUIVALENCE|ANALOGY}]}
token offsets are end-exclusive; FACT edges point from the VALUE vertex."""

SCORES_SCHEMA = """\
scores line: {"sentence": {...}, "inventory"?: {...},
              "spans": [{"start", "end", "scores": {ROLE: p, ..., "NONE": p}}],
              "edges": [{"a", "b", "scores": {"FACT", "EQUIVALENCE", "ANALOGY", "NONE"}}],
              "token_scores"?: [[p per role, then p for O], ...], "raw"?: bool}
one edge entry per span pair a < b; every distribution sums to 1 within 1e-6."""

FRAME_SCHEMA = """\
frame line: {"sentence": {...}, "inventory": {...}, "frame_index",
             "facts": [{"value": V, "arguments": {ROLE: [V, ...]}}],
             "shared": [{"role", "cluster": [V, ...]}],
             "compared": [{"role", "slots": [[V, ...] per fact]}]}
with V = {"start", "end", "role", "text"}."""

EXIT_HELP = "exit codes: 0 ok, 1 validation/metric failure, 2 decode budget failure, 3 malformed input"


def _lines(path):
    """Numbered non-blank lines of a file or stdin, read lazily."""
    stream = sys.stdin if path in (None, "-") else open(path, encoding="utf-8")
    try:
        for n, raw in enumerate(stream, 1):
            if raw.strip():
                yield n, raw
    finally:
        if stream is not sys.stdin:
            stream.close()


def _open_out(stack, path):
    if path in (None, "-"):
        return sys.stdout
    return stack.enter_context(open(path, "w", encoding="utf-8"))


def ordered_map(fn, items, jobs):
    """``map`` over an iterable with up to ``jobs`` worker processes, input order kept.

    At most ``4 * jobs`` items are in flight, so the input is never read whole.
    """
    if jobs <= 1:
        for item in items:
            yield fn(item)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        window = deque()
        for item in items:
            window.append(pool.submit(fn, item))
            if len(window) >= 4 * jobs:
                yield window.popleft().result()
        while window:
            yield window.popleft().result()


# -- workers (module level so they pickle) ----------------------------------------


def _decode_line(task):
    (n, raw), mode, require, nodes, ms = task
    s = parse_scores(raw, line=n)
    try:
        if mode == "greedy":
            r = greedy_decode(s)
            if require and not r.graph.vertices:
                raise BudgetExhaustedWithNoIncumbent("greedy repair left no analogy")
        else:
            r = exact_decode(s, max_nodes=nodes, max_ms=ms, allow_empty=not require)
    except BudgetExhaustedWithNoIncumbent as exc:
        return n, None, str(exc)
    return n, emit_graph(r.graph).decode("utf-8"), None


def _validate_line(item):
    n, raw = item
    g = parse_graph(raw, line=n)
    vs = validate(g)
    return dumps({"id": g.sentence.id, "valid": not vs, "violations": [v.to_dict() for v in vs]})


def _frames_line(item):
    n, raw = item
    g = parse_graph(raw, line=n)
    try:
        frames = graph_to_frames(g)
    except InvalidGraph as exc:
        return n, [], f"line {n}: {exc}"
    return n, [dumps(frame_to_dict(fr, k)) for k, fr in enumerate(frames)], None


# -- subcommands ---------------------------------------------------------------------


def cmd_gen(args):
    with ExitStack() as stack:
        out = _open_out(stack, args.out)
        gold = stack.enter_context(open(args.gold, "w", encoding="utf-8")) if args.gold else None
        for k in range(args.count):
            p = GenParams(seed=args.seed + k, noise=args.noise, distractors=args.distractors)
            g, _ = gen_graph(p)
            s = gen_scores(g, p.noise, p.seed, p.distractors)
            out.write(emit_scores(s).decode("utf-8") + "\n")
            if gold:
                gold.write(emit_graph(g).decode("utf-8") + "\n")
    return ExitCode.OK


def cmd_decode(args):
    code = ExitCode.OK
    tasks = ((item, args.mode, args.require_analogy, args.budget_nodes, args.budget_ms) for item in _lines(args.scores))
    with ExitStack() as stack:
        out = _open_out(stack, args.out)
        for n, line, err in ordered_map(_decode_line, tasks, args.jobs):
            if err is not None:
                print(f"line {n}: {err}", file=sys.stderr)
                code = ExitCode.BUDGET
                continue
            out.write(line + "\n")
    return code


def cmd_validate(args):
    code = ExitCode.OK
    for line in ordered_map(_validate_line, _lines(args.graphs), args.jobs):
        sys.stdout.write(line + "\n")
        if not json.loads(line)["valid"]:
            code = ExitCode.FAILED
    return code


def cmd_frames(args):
    code = ExitCode.OK
    with ExitStack() as stack:
        out = _open_out(stack, args.out)
        for _, lines, err in ordered_map(_frames_line, _lines(args.graphs), args.jobs):
            if err:
                print(err, file=sys.stderr)
                code = ExitCode.FAILED
            for line in lines:
                out.write(line + "\n")
    return code


def _paired_graphs(gold_path, pred_path):
    gold, pred = _lines(gold_path), _lines(pred_path)
    while True:
        a, b = next(gold, None), next(pred, None)
        if a is None and b is None:
            return
        if a is None or b is None:
            which, item = ("gold", b) if a is None else ("pred", a)
            raise MalformedInput(f"{which} file ends before the other", line=item[0])
        g, p = parse_graph(a[1], line=a[0]), parse_graph(b[1], line=b[0])
        if g.sentence.id != p.sentence.id:
            raise MalformedInput(f"sentence id {p.sentence.id!r} does not match gold {g.sentence.id!r}", line=b[0])
        yield g, p


def _prf_row(name, prf):
    d = prf.to_dict()
    return "\t".join([name] + [f"{d[k]:.6f}" for k in ("precision", "recall", "f1")] + [str(d[k]) for k in ("tp", "fp", "fn")])


def cmd_eval(args):
    total = {name: PRF() for name in METRICS}
    header = "metric\tprecision\trecall\tf1\ttp\tfp\tfn"
    if args.report == "tsv":
        print(("sentence\t" if args.per_sentence else "") + header)
    for g, p in _paired_graphs(args.gold, args.pred):
        scores = score_pair(g, p)
        for name, prf in scores.items():
            total[name] = total[name] + prf
        if args.per_sentence:
            if args.report == "json":
                print(dumps({"id": g.sentence.id, **{k: v.to_dict() for k, v in scores.items()}}))
            else:
                for name, prf in scores.items():
                    print(f"{g.sentence.id}\t" + _prf_row(name, prf))
    if args.report == "json":
        print(dumps({"micro": {k: v.to_dict() for k, v in total.items()}}))
    else:
        for name, prf in total.items():
            print(("micro\t" if args.per_sentence else "") + _prf_row(name, prf))
    if args.min_f1 is not None and any(prf.f1 < args.min_f1 for prf in total.values()):
        return ExitCode.FAILED
    return ExitCode.OK


def _edge_items(graphs):
    """Edge labels per annotator over every pair of spans present in any annotation."""
    spans = sorted({(v.start, v.end) for g in graphs for v in g.vertices.values()})
    labels = []
    for g in graphs:
        at = {(v.start, v.end): vid for vid, v in g.vertices.items()}
        lab = {}
        for e in g.edges:
            lab[frozenset((e.a, e.b))] = e.label.value
        row = []
        for x in range(len(spans)):
            for y in range(x + 1, len(spans)):
                a, b = at.get(spans[x]), at.get(spans[y])
                row.append(lab.get(frozenset((a, b)), "NONE") if a is not None and b is not None else "NONE")
        labels.append(row)
    return labels


def cmd_alpha(args):
    streams = [_lines(p) for p in args.files]
    tokens = [[] for _ in streams]
    edges = [[] for _ in streams]
    while True:
        items = [next(s, None) for s in streams]
        if all(i is None for i in items):
            break
        if any(i is None for i in items):
            raise MalformedInput("annotation files differ in length")
        graphs = [parse_graph(raw, line=n) for n, raw in items]
        ids = {g.sentence.id for g in graphs}
        if len(ids) != 1 or len({len(g.sentence) for g in graphs}) != 1:
            raise MalformedInput(f"annotators disagree on sentence {sorted(ids)[0]!r}", line=items[0][0])
        for k, g in enumerate(graphs):
            tokens[k].extend(token_labels(g))
        for k, row in enumerate(_edge_items(graphs)):
            edges[k].extend(row)
    out = {"token_alpha": krippendorff_alpha(tokens), "items": len(tokens[0])}
    out["edge_alpha"] = krippendorff_alpha(edges) if edges[0] else None
    print(dumps(out))
    return ExitCode.OK


def _frame_groups(path):
    """Consecutive frames of one sentence, as ``(sentence id, [(index, frame), ...])``."""
    group, current = [], None
    for n, raw in _lines(path):
        fr, index = frame_from_dict(loads(raw, n), n)
        sid = fr.sentence.id if fr.sentence else f"line{n}"
        if group and sid != current:
            yield current, group
            group = []
        current = sid
        group.append((index, fr))
    if group:
        yield current, group


def cmd_chart(args):
    os.makedirs(args.out_dir, exist_ok=True)
    code = ExitCode.OK
    for sid, group in _frame_groups(args.frames):
        group.sort(key=lambda item: item[0])
        try:
            charts = chartmod.frames_to_charts([fr for _, fr in group], args.x_role)
        except (TapError, ValueError) as exc:
            print(f"sentence {sid}: {type(exc).__name__}: {exc}", file=sys.stderr)
            code = ExitCode.FAILED
            continue
        for pos, spec in charts:
            name = f"{sid}-{group[pos][0]}.{args.format}"
            data = chartmod.emit_svg(spec) if args.format == "svg" else chartmod.emit_chart_json(spec) + b"\n"
            with open(os.path.join(args.out_dir, name), "wb") as fh:
                fh.write(data)
    return code


# -- parser --------------------------------------------------------------------------


def build_parser():
    fmt = argparse.RawDescriptionHelpFormatter
    p = argparse.ArgumentParser(prog="tap", description=__doc__, formatter_class=fmt)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate synthetic score files", epilog=SCORES_SCHEMA + "\n\n" + GRAPH_SCHEMA, formatter_class=fmt)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--distractors", type=int, default=2)
    g.add_argument("--out", help="scores output (default stdout)")
    g.add_argument("--gold", help="write the gold graphs here")
    g.set_defaults(fn=cmd_gen)

    d = sub.add_parser("decode", help="decode score files into graphs", epilog=SCORES_SCHEMA + "\n\n" + EXIT_HELP, formatter_class=fmt)
    d.add_argument("--scores", help="scores input (default stdin)")
    d.add_argument("--mode", choices=("greedy", "exact"), default="exact")
    d.add_argument("--require-analogy", action="store_true", help="reject the empty graph as an answer")
    d.add_argument("--budget-nodes", type=int, default=DEFAULT_MAX_NODES)
    d.add_argument("--budget-ms", type=int, default=DEFAULT_MAX_MS)
    d.add_argument("--out", help="graphs output (default stdout)")
    d.add_argument("--jobs", type=int, default=1)
    d.set_defaults(fn=cmd_decode)

    v = sub.add_parser("validate", help="report constraint violations", epilog=GRAPH_SCHEMA + "\n\n" + EXIT_HELP, formatter_class=fmt)
    v.add_argument("graphs", nargs="?", help="graph file (default stdin)")
    v.add_argument("--jobs", type=int, default=1)
    v.set_defaults(fn=cmd_validate)

    f = sub.add_parser("frames", help="extract frames from graphs", epilog=GRAPH_SCHEMA + "\n\n" + FRAME_SCHEMA, formatter_class=fmt)
    f.add_argument("graphs", nargs="?", help="graph file (default stdin)")
    f.add_argument("--out")
    f.add_argument("--jobs", type=int, default=1)
    f.set_defaults(fn=cmd_frames)

    e = sub.add_parser("eval", help="micro-averaged frame/span/edge PRF", epilog=GRAPH_SCHEMA, formatter_class=fmt)
    e.add_argument("--gold", required=True)
    e.add_argument("--pred", required=True)
    e.add_argument("--per-sentence", action="store_true")
    e.add_argument("--report", choices=("json", "tsv"), default="json")
    e.add_argument("--min-f1", type=float, help="exit 1 when any micro F1 falls below this")
    e.set_defaults(fn=cmd_eval)

    a = sub.add_parser("alpha", help="Krippendorff alpha between annotators", epilog=GRAPH_SCHEMA, formatter_class=fmt)
    a.add_argument("files", nargs="+", help="one graph file per annotator, same sentences in the same order")
    a.set_defaults(fn=cmd_alpha)

    c = sub.add_parser("chart", help="render frames as bar charts", epilog=FRAME_SCHEMA, formatter_class=fmt)
    c.add_argument("frames", nargs="?", help="frame file (default stdin)")
    c.add_argument("--format", choices=("svg", "json"), default="svg")
    c.add_argument("--out-dir", default=".")
    c.add_argument("--x-role", default=chartmod.AUTO)
    c.set_defaults(fn=cmd_chart)
    return p


def run(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("--jobs must be at least 1", file=sys.stderr)
        return ExitCode.MALFORMED
    try:
        return ExitCode(args.fn(args))
    except MalformedInput as exc:
        print(f"malformed input: {exc}", file=sys.stderr)
        return ExitCode.MALFORMED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitCode.MALFORMED


def main():
    sys.exit(int(run()))


if __name__ == "__main__":
    main()
