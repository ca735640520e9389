"""Agenda-driven chart parser with activated edges.

Edges carry an activation in [0, 1].  A new edge's activation mixes the
strength of the unification that licensed it with the activations of
the edges it came from::

    activation = w1 * strength + w2 * activ_active + w3 * activ_other

Unifications weaker than ``unification_threshold`` fail outright, and
edges whose activation falls below ``activation_threshold`` are
suspended: recorded in the report but never entered into the chart.

Parsing is top-down.  Goal edges are seeded at position 0 from rules
whose mother matches the start category; active edges then predict
rules for their next needed constituent and are extended by adjacent
inactive edges.  The agenda is best-first by activation, FIFO among
ties.
"""

from __future__ import annotations

import heapq
import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence, Union

from .avm import (
    TOLERANCE,
    FeatureStructure,
    Node,
    category,
    fs_equal,
    make_atom,
    shape_key,
)
from .unify import unify_within

log = logging.getLogger(__name__)

LEXICAL = "LEXICAL"
RULE_INVOKED = "RULE-INVOKED"
EXTENDED = "EXTENDED"

EVENT_KINDS = (
    "LEX-INIT",
    "GOAL-SEED",
    "EXTEND",
    "INVOKE",
    "SUSPEND",
    "UNIFY-FAIL",
    "DEDUP-DROP",
)


class ParseError(Exception):
    pass


class UnknownWordError(ParseError):
    def __init__(self, token: str, position: int):
        super().__init__(f"no lexical entry for {token!r} at position {position}")
        self.token = token
        self.position = position


@dataclass(frozen=True)
class Rule:
    id: str
    lhs: Node
    rhs: tuple

    def __post_init__(self):
        if not self.rhs:
            raise ValueError(f"rule {self.id!r} has an empty right-hand side")
        object.__setattr__(self, "rhs", tuple(self.rhs))


@dataclass(frozen=True)
class LexEntry:
    word: str
    fs: Node
    id: str = ""


@dataclass(frozen=True)
class Grammar:
    start: str
    rules: tuple

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        ids = [r.id for r in self.rules]
        if len(set(ids)) != len(ids):
            raise ValueError("rule ids must be unique")


GrammarFile = Grammar


@dataclass(frozen=True)
class ParserConfig:
    unification_threshold: float = 0.7
    activation_threshold: float = 0.6
    weights: tuple = (0.5, 0.3, 0.2)
    start_category: Optional[str] = None
    max_agenda_steps: int = 100_000

    def __post_init__(self):
        for name in ("unification_threshold", "activation_threshold"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {val!r}")
        weights = tuple(float(w) for w in self.weights)
        if len(weights) != 3 or any(w < 0 for w in weights):
            raise ValueError("weights must be three non-negative numbers")
        if abs(sum(weights) - 1.0) > TOLERANCE:
            raise ValueError(f"weights must sum to 1, got {sum(weights)!r}")
        object.__setattr__(self, "weights", weights)
        if self.max_agenda_steps < 1:
            raise ValueError("max_agenda_steps must be positive")


@dataclass(frozen=True, eq=False)
class Edge:
    """A chart item.

    ``needed`` lists the constituents still to be found; the edge is
    inactive when it is empty.  ``origin`` is the constituent this edge
    was predicted for (``None`` for lexical edges); an edge only
    completes active edges that need that same constituent.
    """

    id: int
    start: int
    end: int
    mother: Node
    needed: tuple
    activation: float
    kind: str
    parents: tuple = ()
    strength: Optional[float] = None
    rule: Optional[str] = None
    origin: Optional[Node] = None
    entry: Optional[str] = None
    word: Optional[str] = None

    @property
    def active(self) -> bool:
        return bool(self.needed)

    @property
    def category(self) -> Optional[str]:
        return category(self.mother)


@dataclass(frozen=True)
class TraceEvent:
    step: int
    kind: str
    edges: tuple
    strength: Optional[float] = None
    activation: Optional[float] = None
    note: str = ""

    def to_tsv(self) -> str:
        def num(x):
            return "-" if x is None else repr(x)

        ids = ",".join(str(i) for i in self.edges) or "-"
        return "\t".join(
            [str(self.step), self.kind, ids, num(self.strength), num(self.activation), self.note or "-"]
        )

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "kind": self.kind,
            "edges": list(self.edges),
            "strength": self.strength,
            "activation": self.activation,
            "note": self.note,
        }


def compute_activation(strength: float, activ1: float, activ2: float, cfg: ParserConfig) -> float:
    w1, w2, w3 = cfg.weights
    return min(1.0, max(0.0, w1 * strength + w2 * activ1 + w3 * activ2))


def _bundle(mother: Node, needed: Sequence[Node]) -> FeatureStructure:
    # Wraps an edge's structures into one node so sharing across them is compared.
    feats = {"m": mother}
    feats.update({f"d{i}": n for i, n in enumerate(needed)})
    return FeatureStructure(feats)


class Chart:
    """Chart, agenda, suspended list and trace for one parse run."""

    def __init__(self, tokens: Sequence[str], cfg: ParserConfig, rules: Iterable[Rule] = ()):
        self.tokens = list(tokens)
        self.cfg = cfg
        self.rules = tuple(rules)
        self.edges: dict[int, Edge] = {}
        self.by_span: dict[tuple, list[Edge]] = {}
        self.suspended: list[tuple[Edge, str]] = []
        self.trace: list[TraceEvent] = []
        self.steps = 0
        self.truncated = False
        self._agenda: list = []
        self._seq = itertools.count()
        self._ids = itertools.count()
        self._active_by_end: dict[int, list[Edge]] = {}
        self._inactive_by_start: dict[int, list[Edge]] = {}
        self._signatures: dict[tuple, list[Edge]] = {}
        # Edges differing only in activation share structure, so predictions
        # and extensions are memoized on the structures involved.
        self._predictions: dict[tuple, list] = {}
        self._extensions: dict[tuple, tuple] = {}
        self._goal: Optional[FeatureStructure] = None
        self._entered: set[int] = set()

    # -- bookkeeping ----------------------------------------------------

    @property
    def goal(self) -> FeatureStructure:
        """The structure goal edges are predicted for: ``[CAT: {start}]``."""
        if self._goal is None:
            self._goal = FeatureStructure({"CAT": make_atom([(self.cfg.start_category, 1.0)])})
        return self._goal

    def _event(self, kind, edges, strength=None, activation=None, note=""):
        self.trace.append(TraceEvent(self.steps, kind, tuple(edges), strength, activation, note))

    def _new_edge(self, **kw) -> Edge:
        edge = Edge(id=next(self._ids), **kw)
        self.edges[edge.id] = edge
        return edge

    def _signature(self, start, end, mother, needed) -> tuple:
        return (start, end, len(needed), shape_key(_bundle(mother, needed)))

    def _find_duplicate(self, start, end, mother, needed, activation, origin, entered_only=False,
                        exclude=None) -> Optional[Edge]:
        """An edge with the same span, structure and origin, at least as active."""
        bucket = self._signatures.get(self._signature(start, end, mother, needed), ())
        if not bucket:
            return None
        bundle = None
        for old in bucket:
            if old is exclude or (entered_only and old.id not in self._entered):
                continue
            if old.activation < activation - TOLERANCE:
                continue
            if (old.origin is None) != (origin is None):
                continue
            if origin is not None and not fs_equal(old.origin, origin):
                continue
            if bundle is None:
                bundle = _bundle(mother, needed)
            if fs_equal(_bundle(old.mother, old.needed), bundle):
                return old
        return None

    def _offer(self, event: str, start: int, end: int, mother, needed, activation, **kw) -> Optional[Edge]:
        """Suspend, drop as duplicate, or queue a freshly built edge."""
        needed = tuple(needed)
        if activation < self.cfg.activation_threshold:
            edge = self._new_edge(start=start, end=end, mother=mother, needed=needed,
                                  activation=activation, **kw)
            self.suspended.append((edge, "activation below threshold"))
            self._event("SUSPEND", (edge.id,) + edge.parents, edge.strength, activation, kw.get("rule") or "")
            return edge
        dup = self._find_duplicate(start, end, mother, needed, activation, kw.get("origin"))
        if dup is not None:
            self._event("DEDUP-DROP", (dup.id,) + kw.get("parents", ()), kw.get("strength"), activation)
            return None
        edge = self._new_edge(start=start, end=end, mother=mother, needed=needed,
                              activation=activation, **kw)
        self._signatures.setdefault(self._signature(start, end, mother, needed), []).append(edge)
        heapq.heappush(self._agenda, (-activation, next(self._seq), edge))
        self._event(event, (edge.id,) + edge.parents, edge.strength, activation, edge.rule or "")
        return edge

    def _enter(self, edge: Edge) -> None:
        self._entered.add(edge.id)
        self.by_span.setdefault((edge.start, edge.end, edge.active), []).append(edge)
        if edge.active:
            self._active_by_end.setdefault(edge.end, []).append(edge)
        else:
            self._inactive_by_start.setdefault(edge.start, []).append(edge)

    @property
    def agenda(self) -> list[Edge]:
        """Pending edges in the order they would be popped."""
        return [e for _, _, e in sorted(self._agenda, key=lambda t: t[:2])]

    def chart_edges(self) -> list[Edge]:
        out = [e for edges in self.by_span.values() for e in edges]
        return sorted(out, key=lambda e: e.id)

    # -- the two ways of growing the chart --------------------------------

    def add_lexical(self, position: int, entry: LexEntry, activation: float = 1.0) -> Edge:
        edge = self._new_edge(start=position, end=position + 1, mother=entry.fs, needed=(),
                              activation=activation, kind=LEXICAL, entry=entry.id, word=entry.word)
        if activation < self.cfg.activation_threshold:
            self.suspended.append((edge, "activation below threshold"))
            self._event("SUSPEND", (edge.id,), None, activation, entry.id)
        else:
            self._enter(edge)
            self._event("LEX-INIT", (edge.id,), None, activation, entry.id)
        return edge

    def seed_goals(self) -> list[Edge]:
        """Seed one active edge at (0, 0) per rule matching the start category."""
        goal = self.goal
        out = []
        for rule in self.rules:
            roots, strength, _ = unify_within((rule.lhs,) + rule.rhs, 0, goal,
                                              self.cfg.unification_threshold)
            if roots is None:
                continue
            activation = compute_activation(strength, 1.0, 1.0, self.cfg)
            edge = self._offer("GOAL-SEED", 0, 0, roots[0], roots[1:], activation,
                               kind=RULE_INVOKED, strength=strength, rule=rule.id, origin=goal)
            if edge is not None:
                out.append(edge)
        return out

    def extend_edge(self, active: Edge, inactive: Edge) -> Optional[Edge]:
        """Extend ``active`` by ``inactive`` (which must start where it ends).

        Returns the new edge, queued or suspended, or ``None`` when the
        unification failed or the edge duplicated an existing one.
        """
        if active.end != inactive.start or not active.needed or inactive.needed:
            raise ValueError(f"edges {active.id} and {inactive.id} cannot combine")
        host = (active.mother,) + active.needed
        key = tuple(map(id, host)) + (id(inactive.mother),)
        hit = self._extensions.get(key)
        if hit is None:
            hit = (host, inactive.mother) + unify_within(
                host, 1, inactive.mother, self.cfg.unification_threshold
            )
            self._extensions[key] = hit
        roots, strength, clash = hit[2:]
        if roots is None:
            self._event("UNIFY-FAIL", (active.id, inactive.id), strength, None,
                        "clash" if clash else "below unification threshold")
            return None
        activation = compute_activation(strength, active.activation, inactive.activation, self.cfg)
        return self._offer("EXTEND", active.start, inactive.end, roots[0], roots[2:], activation,
                           kind=EXTENDED, parents=(active.id, inactive.id), strength=strength,
                           rule=active.rule, origin=active.origin)

    def invoke_rules(self, active: Edge) -> list[Edge]:
        """Predict every rule whose mother unifies with the next needed constituent."""
        if not active.needed:
            raise ValueError(f"edge {active.id} is inactive")
        wanted = active.needed[0]
        out = []
        for rule, roots, strength, clash in self._predict(wanted):
            if roots is None:
                self._event("UNIFY-FAIL", (active.id,), strength, None, rule.id)
                continue
            activation = compute_activation(strength, active.activation, 1.0, self.cfg)
            edge = self._offer("INVOKE", active.end, active.end, roots[0], roots[1:], activation,
                               kind=RULE_INVOKED, parents=(active.id,), strength=strength,
                               rule=rule.id, origin=wanted)
            if edge is not None and edge.activation >= self.cfg.activation_threshold:
                out.append(edge)
        return out

    def _predict(self, wanted: Node) -> list:
        bucket = self._predictions.setdefault(shape_key(wanted), [])
        for seen, results in bucket:
            if fs_equal(seen, wanted):
                return results
        results = []
        for rule in self.rules:
            out = unify_within((rule.lhs,) + rule.rhs, 0, wanted, self.cfg.unification_threshold)
            results.append((rule,) + out)
        bucket.append((wanted, results))
        return results

    @staticmethod
    def _completes(active: Edge, inactive: Edge) -> bool:
        return inactive.origin is None or fs_equal(inactive.origin, active.needed[0])

    def run(self) -> None:
        while self._agenda:
            if self.steps >= self.cfg.max_agenda_steps:
                self.truncated = True
                log.warning("agenda step limit %d reached", self.cfg.max_agenda_steps)
                break
            _, _, edge = heapq.heappop(self._agenda)
            better = self._find_duplicate(edge.start, edge.end, edge.mother, edge.needed, edge.activation,
                                          edge.origin, entered_only=True, exclude=edge)
            if better is not None:
                # a variant at least as active was expanded since this one was queued
                self._event("DEDUP-DROP", (better.id, edge.id), edge.strength, edge.activation, "dominated")
                continue
            self.steps += 1
            self._enter(edge)
            if edge.active:
                for other in list(self._inactive_by_start.get(edge.end, ())):
                    if self._completes(edge, other):
                        self.extend_edge(edge, other)
                self.invoke_rules(edge)
            else:
                for other in list(self._active_by_end.get(edge.start, ())):
                    if self._completes(other, edge):
                        self.extend_edge(other, edge)


def init_chart(
    tokens: Sequence[str],
    lexicon: Iterable[LexEntry],
    cfg: Optional[ParserConfig] = None,
    lex_activations: Optional[Mapping[tuple, float]] = None,
    rules: Iterable[Rule] = (),
) -> Chart:
    """Create a chart holding one lexical edge per entry of each token.

    ``lex_activations`` maps ``(token index, entry id)`` to an initial
    activation; anything missing starts at 1.0.
    """
    cfg = cfg or ParserConfig()
    by_word: dict[str, list[LexEntry]] = {}
    for entry in lexicon:
        by_word.setdefault(entry.word, []).append(entry)
    lex_activations = lex_activations or {}
    chart = Chart(tokens, cfg, rules)
    for i, tok in enumerate(tokens):
        if tok not in by_word:
            raise UnknownWordError(tok, i)
        for entry in by_word[tok]:
            activation = float(lex_activations.get((i, entry.id), 1.0))
            if not 0.0 <= activation <= 1.0:
                raise ValueError(f"lexical activation {activation!r} for {entry.id} outside [0, 1]")
            chart.add_lexical(i, entry, activation)
    return chart


@dataclass
class ParseTree:
    label: Optional[str]
    edge: int
    children: tuple = ()
    word: Optional[str] = None
    entry: Optional[str] = None
    rule: Optional[str] = None

    def __str__(self) -> str:
        if self.word is not None:
            return f"({self.label} {self.word})"
        inner = " ".join(str(c) for c in self.children)
        return f"({self.label} {inner})" if inner else f"({self.label})"

    def entries(self) -> list[str]:
        """Lexical entry ids at the leaves, left to right."""
        if self.entry is not None:
            return [self.entry]
        return [e for c in self.children for e in c.entries()]

    def rules(self) -> list[str]:
        out = [self.rule] if self.rule else []
        for c in self.children:
            out.extend(c.rules())
        return out

    def to_dict(self) -> dict:
        d = {"label": self.label, "edge": self.edge}
        if self.word is not None:
            d.update(word=self.word, entry=self.entry)
        else:
            d.update(rule=self.rule, children=[c.to_dict() for c in self.children])
        return d


def build_tree(edges: Mapping[int, Edge], edge_id: int) -> ParseTree:
    """Rebuild the derivation of an edge from provenance links."""
    edge = edges[edge_id]
    if edge.kind == LEXICAL:
        return ParseTree(edge.category, edge.id, word=edge.word, entry=edge.entry)
    if edge.kind == RULE_INVOKED:
        return ParseTree(edge.category, edge.id, rule=edge.rule)
    head = build_tree(edges, edge.parents[0])
    last = build_tree(edges, edge.parents[1])
    return ParseTree(edge.category, edge.id, head.children + (last,), rule=edge.rule)


@dataclass
class ParseReport:
    tokens: list
    start_category: str
    config: ParserConfig
    parses: list
    suspended: list
    trace: list
    truncated: bool
    steps: int
    edges: dict = field(repr=False)
    chart: Optional[Chart] = field(default=None, repr=False)

    def tree(self, edge: Union[Edge, int]) -> ParseTree:
        return build_tree(self.edges, edge if isinstance(edge, int) else edge.id)

    def trace_tsv(self) -> str:
        return "".join(ev.to_tsv() + "\n" for ev in self.trace)


def _spanning(chart: Chart, start_category: str) -> list[Edge]:
    # Only edges predicted for the goal are analyses of the whole input;
    # a spanning edge predicted for some daughter carries that context.
    n = len(chart.tokens)
    found = [
        e
        for e in chart.by_span.get((0, n, False), ())
        if e.category == start_category and (e.origin is None or fs_equal(e.origin, chart.goal))
    ]
    return sorted(found, key=lambda e: (-e.activation, e.id))


def run_parse(
    tokens: Sequence[str],
    grammar: Union[Grammar, Sequence[Rule]],
    lexicon: Iterable[LexEntry],
    cfg: Optional[ParserConfig] = None,
    lex_activations: Optional[Mapping[tuple, float]] = None,
) -> ParseReport:
    """Parse ``tokens`` and report the spanning analyses, best first."""
    cfg = cfg or ParserConfig()
    rules = grammar.rules if isinstance(grammar, Grammar) else tuple(grammar)
    start = cfg.start_category or (grammar.start if isinstance(grammar, Grammar) else None)
    if start is None:
        raise ValueError("no start category given")
    if cfg.start_category != start:
        cfg = replace(cfg, start_category=start)
    chart = init_chart(tokens, lexicon, cfg, lex_activations, rules)
    if tokens:
        chart.seed_goals()
        chart.run()
    return ParseReport(
        tokens=list(tokens),
        start_category=start,
        config=cfg,
        parses=_spanning(chart, start) if tokens else [],
        suspended=list(chart.suspended),
        trace=list(chart.trace),
        truncated=chart.truncated,
        steps=chart.steps,
        edges=dict(chart.edges),
        chart=chart,
    )


def extract_parses(report: ParseReport, n: int) -> list[tuple[ParseTree, float, Node]]:
    """Top ``n`` spanning analyses as ``(tree, activation, structure)``.

    Edges that differ only in activation (the same derivation reached
    through differently activated predictions) count as one analysis,
    represented by its best edge.
    """
    if n < 1:
        raise ValueError("n must be positive")
    out: list[tuple[ParseTree, float, Node]] = []
    for edge in sorted(report.parses, key=lambda e: (-e.activation, e.id)):
        tree = report.tree(edge)
        if any(str(t) == str(tree) and fs_equal(fs, edge.mother) for t, _, fs in out):
            continue
        out.append((tree, edge.activation, edge.mother))
        if len(out) == n:
            break
    return out


__all__ = [
    "Chart",
    "Edge",
    "Grammar",
    "GrammarFile",
    "LexEntry",
    "ParseReport",
    "ParseTree",
    "ParserConfig",
    "Rule",
    "TraceEvent",
    "UnknownWordError",
    "build_tree",
    "compute_activation",
    "extract_parses",
    "init_chart",
    "run_parse",
]
