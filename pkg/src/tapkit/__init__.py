"""Textual analogy parsing: graphs, constraints, decoders, frames, evaluation and charts."""

from .chart import ChartSpec, emit_chart_json, emit_svg, frame_to_chart, parse_value
from .constraints import ConstraintId, feasible, validate
from .core import AnalogyGraph, RoleInventory, Sentence, TapFrame, Vertex, build_graph, frames_to_graph, graph_to_frames
from .decode import brute_force_decode, exact_decode, greedy_decode
from .evaluation import edge_prf, frame_prf, krippendorff_alpha, match_spans, span_prf
from .gen import GenParams, gen_graph, gen_scores
from .scores import ScoreSet

__version__ = "0.1.0"
