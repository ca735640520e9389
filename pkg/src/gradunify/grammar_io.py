"""Reading and writing grammars, lexicons, tag likelihoods and AVMs.

AVM syntax::

    [FEAT: value FEAT: value ...]     complex node
    {sym:weight, sym:weight}          atom ({sym} means {sym:1.0})
    value!p                           priority p on an atom-valued feature
    #n value  /  #n                   declare / reference shared node n

A tag that is referenced but never given a value stands for an empty
node ``[]``, which unifies with anything.

Grammar files (``.gu``) hold ``:start CAT`` and any number of
``:rule [ID:] MOTHER -> DAUGHTER ...`` blocks.  A constituent is an
optional ``#n`` tag followed by a category symbol, an AVM, or both
(``NP [NUM: {sg}]``); the symbol is shorthand for a ``CAT`` feature.
Lexicon files (``.gul``) hold one ``word constituent`` per line.  Both
accept ``:cat-priority P`` to set the priority of the ``CAT`` shorthand
for the lines after it.  ``%`` starts a comment.

Tag-likelihood files (``.gup``) hold ``index entry-id likelihood`` lines.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .avm import (
    DEFAULT_PRIORITY,
    Atom,
    AvmError,
    FeatureStructure,
    Node,
    make_atom,
)
from .chart import Grammar, LexEntry, Rule


class GrammarSyntaxError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)
        self.line = line
        self.column = column


SYMBOL = re.compile(r"[A-Za-z+\-_][A-Za-z0-9+\-_]*")
# Atom values may also start with a digit, as in PER:{3}.
VALUE_SYMBOL = re.compile(r"[A-Za-z0-9+\-_]+")
NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
INTEGER = re.compile(r"\d+")
SPACE = re.compile(r"(?:\s|%[^\n]*)*")


class _Scanner:
    def __init__(self, text: str, line: int = 1, column: int = 1):
        self.text = text
        self.pos = 0
        self.line0 = line
        self.col0 = column

    def where(self, pos: Optional[int] = None) -> tuple[int, int]:
        pos = self.pos if pos is None else pos
        before = self.text[:pos]
        nl = before.count("\n")
        if nl:
            return self.line0 + nl, pos - before.rfind("\n")
        return self.line0, self.col0 + pos

    def error(self, msg: str, pos: Optional[int] = None) -> GrammarSyntaxError:
        return GrammarSyntaxError(msg, *self.where(pos))

    def skip(self) -> None:
        self.pos = SPACE.match(self.text, self.pos).end()

    def peek(self, s: str) -> bool:
        self.skip()
        return self.text.startswith(s, self.pos)

    def accept(self, s: str) -> bool:
        if self.peek(s):
            self.pos += len(s)
            return True
        return False

    def expect(self, s: str) -> None:
        if not self.accept(s):
            raise self.error(f"expected {s!r}, found {self._next_text()!r}")

    def match(self, pattern: re.Pattern, what: str) -> str:
        self.skip()
        m = pattern.match(self.text, self.pos)
        if not m:
            raise self.error(f"expected {what}, found {self._next_text()!r}")
        self.pos = m.end()
        return m.group()

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def _next_text(self) -> str:
        return self.text[self.pos:self.pos + 12] or "end of input"


# Raw parse tree, resolved into immutable structures once all tags are known.


@dataclass
class _Raw:
    kind: str  # "atom", "complex" or "ref"
    tag: Optional[int] = None
    atom: Optional[Atom] = None
    feats: Optional[list] = None  # [(feat, _Raw, priority or None, pos)]
    pos: int = 0


def _parse_atom(sc: _Scanner) -> Atom:
    start = sc.pos
    sc.expect("{")
    pairs = []
    while True:
        sym = sc.match(VALUE_SYMBOL, "a symbol")
        weight = 1.0
        if sc.accept(":"):
            at = sc.pos
            weight = float(sc.match(NUMBER, "a weight"))
            if weight < 0:
                raise sc.error(f"negative weight {weight!r}", at)
        pairs.append((sym, weight))
        if sc.accept("}"):
            break
        sc.expect(",")
    try:
        return make_atom(pairs)
    except AvmError as exc:
        raise sc.error(str(exc), start) from None


def _parse_value(sc: _Scanner) -> _Raw:
    sc.skip()
    pos = sc.pos
    tag = None
    if sc.accept("#"):
        tag = int(sc.match(INTEGER, "a tag number"))
    if sc.peek("["):
        return _Raw("complex", tag, feats=_parse_features(sc), pos=pos)
    if sc.peek("{"):
        return _Raw("atom", tag, atom=_parse_atom(sc), pos=pos)
    if tag is None:
        raise sc.error(f"expected a value, found {sc._next_text()!r}")
    return _Raw("ref", tag, pos=pos)


def _parse_priority(sc: _Scanner) -> Optional[float]:
    if not sc.accept("!"):
        return None
    at = sc.pos
    p = float(sc.match(NUMBER, "a priority"))
    if not p > 0:
        raise sc.error(f"priority must be positive, got {p!r}", at)
    return p


def _parse_features(sc: _Scanner) -> list:
    sc.expect("[")
    feats = []
    seen = set()
    while not sc.accept("]"):
        sc.skip()
        pos = sc.pos
        feat = sc.match(SYMBOL, "a feature name or ']'")
        if feat in seen:
            raise sc.error(f"feature {feat!r} given twice", pos)
        seen.add(feat)
        sc.expect(":")
        value = _parse_value(sc)
        feats.append((feat, value, _parse_priority(sc), pos))
        sc.accept(",")
    return feats


def _resolve(raws: list[_Raw], sc: _Scanner) -> list[Node]:
    """Turn raw values into shared immutable nodes."""
    defs: dict[int, _Raw] = {}

    def collect(raw: _Raw):
        if raw.tag is not None and raw.kind != "ref":
            if raw.tag in defs:
                raise sc.error(f"tag #{raw.tag} defined twice", raw.pos)
            defs[raw.tag] = raw
        for _, child, _, _ in raw.feats or ():
            collect(child)

    for raw in raws:
        collect(raw)

    built: dict[int, Node] = {}
    building: set[int] = set()

    def build(raw: _Raw) -> Node:
        if raw.tag is not None:
            if raw.tag in built:
                return built[raw.tag]
            if raw.tag in building:
                raise sc.error(f"tag #{raw.tag} makes the structure cyclic", raw.pos)
            building.add(raw.tag)
            target = defs.get(raw.tag)
            node = build_untagged(target) if target is not None else FeatureStructure()
            building.discard(raw.tag)
            built[raw.tag] = node
            return node
        return build_untagged(raw)

    def build_untagged(raw: _Raw) -> Node:
        if raw.kind == "atom":
            return raw.atom
        values, prios = {}, {}
        for feat, child, prio, pos in raw.feats:
            val = build(child)
            values[feat] = val
            if prio is not None:
                if not isinstance(val, Atom):
                    raise sc.error(f"priority on complex-valued feature {feat!r}", pos)
                prios[feat] = prio
        return FeatureStructure(values, prios)

    return [build(r) for r in raws]


def parse_avm(text: str) -> Node:
    """Parse a single AVM (or atom) from text."""
    sc = _Scanner(text)
    raw = _parse_value(sc)
    if not sc.at_end():
        raise sc.error(f"unexpected trailing text {sc._next_text()!r}")
    return _resolve([raw], sc)[0]


def _parse_constituent(sc: _Scanner, cat_priority: float) -> _Raw:
    sc.skip()
    pos = sc.pos
    tag = None
    if sc.accept("#"):
        tag = int(sc.match(INTEGER, "a tag number"))
    sc.skip()
    cat = None
    if SYMBOL.match(sc.text, sc.pos) and not sc.text.startswith("->", sc.pos):
        cat = sc.match(SYMBOL, "a category")
    feats = None
    if sc.peek("["):
        feats = _parse_features(sc)
    if cat is None and feats is None:
        if tag is None:
            raise sc.error(f"expected a constituent, found {sc._next_text()!r}")
        return _Raw("ref", tag, pos=pos)
    feats = feats or []
    if cat is not None:
        if any(f == "CAT" for f, _, _, _ in feats):
            raise sc.error("category given both as shorthand and as a CAT feature", pos)
        feats.insert(0, ("CAT", _Raw("atom", atom=make_atom([(cat, 1.0)])), cat_priority, pos))
    return _Raw("complex", tag, feats=feats, pos=pos)


def _strip_comment(line: str) -> str:
    return line.split("%", 1)[0]


def _directive_blocks(text: str):
    """Yield ``(name, body, line, column)`` for every ``:directive``."""
    lines = text.split("\n")
    current = None
    for lineno, line in enumerate(lines, 1):
        code = _strip_comment(line)
        stripped = code.lstrip()
        if stripped.startswith(":"):
            if current is not None:
                yield current
            m = re.match(r":([A-Za-z-]+)", stripped)
            if not m:
                raise GrammarSyntaxError("malformed directive", lineno, len(code) - len(stripped) + 1)
            col = len(code) - len(stripped) + m.end() + 1
            current = [m.group(1), stripped[m.end():], lineno, col]
        elif stripped:
            if current is None:
                raise GrammarSyntaxError("text outside a directive", lineno, len(code) - len(stripped) + 1)
            current[1] += "\n" + code
        elif current is not None:
            current[1] += "\n"
    if current is not None:
        yield current


def _parse_float_directive(body: str, line: int, col: int, name: str) -> float:
    try:
        val = float(body.strip())
    except ValueError:
        raise GrammarSyntaxError(f":{name} needs a number", line, col) from None
    if not val > 0:
        raise GrammarSyntaxError(f":{name} must be positive", line, col)
    return val


def parse_grammar(text: str) -> Grammar:
    """Load a grammar file.  Nothing is returned unless the whole file is valid."""
    start = None
    rules: list[Rule] = []
    cat_priority = DEFAULT_PRIORITY
    for name, body, line, col in _directive_blocks(text):
        if name == "start":
            if start is not None:
                raise GrammarSyntaxError("more than one :start directive", line, col)
            sc = _Scanner(body, line, col)
            start = sc.match(SYMBOL, "a start category")
            if not sc.at_end():
                raise sc.error("unexpected text after start category")
        elif name == "cat-priority":
            cat_priority = _parse_float_directive(body, line, col, name)
        elif name == "rule":
            sc = _Scanner(body, line, col)
            rule_id = f"r{len(rules) + 1}"
            sc.skip()
            m = re.compile(r"([A-Za-z0-9+\-_]+)\s*:(?!:)").match(sc.text, sc.pos)
            if m:
                rule_id = m.group(1)
                sc.pos = m.end()
            mother = _parse_constituent(sc, cat_priority)
            sc.expect("->")
            daughters = []
            while not sc.at_end():
                daughters.append(_parse_constituent(sc, cat_priority))
            if not daughters:
                raise sc.error(f"rule {rule_id!r} has no daughters")
            if any(r.id == rule_id for r in rules):
                raise GrammarSyntaxError(f"duplicate rule id {rule_id!r}", line, col)
            nodes = _resolve([mother] + daughters, sc)
            rules.append(Rule(rule_id, nodes[0], tuple(nodes[1:])))
        else:
            raise GrammarSyntaxError(f"unknown directive :{name}", line, col)
    if start is None:
        raise GrammarSyntaxError("missing :start directive")
    return Grammar(start, tuple(rules))


def entry_id(word: str, fs: Node, taken) -> str:
    cat = None
    if isinstance(fs, FeatureStructure) and isinstance(fs.get("CAT"), Atom):
        cat = fs["CAT"].top()
    base = f"{word}/{cat or '?'}"
    ident, k = base, 1
    while ident in taken:
        k += 1
        ident = f"{base}.{k}"
    return ident


def parse_lexicon(text: str) -> list[LexEntry]:
    """Load a lexicon: one ``word constituent`` per line."""
    entries: list[LexEntry] = []
    taken: set[str] = set()
    cat_priority = DEFAULT_PRIORITY
    for lineno, line in enumerate(text.split("\n"), 1):
        code = _strip_comment(line)
        stripped = code.strip()
        if not stripped:
            continue
        indent = len(code) - len(code.lstrip())
        if stripped.startswith(":"):
            name, _, rest = stripped[1:].partition(" ")
            if name != "cat-priority":
                raise GrammarSyntaxError(f"unknown directive :{name}", lineno, indent + 1)
            cat_priority = _parse_float_directive(rest, lineno, indent + 1, name)
            continue
        word, _, rest = stripped.partition(" ")
        if not rest.strip():
            raise GrammarSyntaxError(f"entry for {word!r} has no structure", lineno, indent + 1)
        sc = _Scanner(rest, lineno, indent + len(word) + 2)
        raw = _parse_constituent(sc, cat_priority)
        if not sc.at_end():
            raise sc.error(f"unexpected trailing text {sc._next_text()!r}")
        fs = _resolve([raw], sc)[0]
        ident = entry_id(word, fs, taken)
        taken.add(ident)
        entries.append(LexEntry(word, fs, ident))
    return entries


@dataclass(frozen=True)
class TagProb:
    index: int
    entry: str
    likelihood: float


def parse_tagprobs(text: str) -> list[TagProb]:
    """Load ``index entry-id likelihood`` records."""
    records: list[TagProb] = []
    seen = set()
    for lineno, line in enumerate(text.split("\n"), 1):
        parts = _strip_comment(line).split()
        if not parts:
            continue
        if len(parts) != 3:
            raise GrammarSyntaxError("expected 'index entry-id likelihood'", lineno, 1)
        try:
            index, value = int(parts[0]), float(parts[2])
        except ValueError:
            raise GrammarSyntaxError("malformed index or likelihood", lineno, 1) from None
        if index < 0:
            raise GrammarSyntaxError(f"negative token index {index}", lineno, 1)
        if not 0.0 <= value <= 1.0:
            raise GrammarSyntaxError(f"likelihood {value!r} outside [0, 1]", lineno, 1)
        if (index, parts[1]) in seen:
            raise GrammarSyntaxError(f"duplicate record for {parts[1]} at {index}", lineno, 1)
        seen.add((index, parts[1]))
        records.append(TagProb(index, parts[1], value))
    return records


TagProbFile = list


def lex_activations(records, tokens, lexicon) -> dict[tuple[int, str], float]:
    """Initial activations for one sentence.

    Likelihoods are used as activations directly.  Records whose index
    is past the end of the sentence, or whose entry belongs to a
    different word than the token at that index, are ignored.
    """
    words = {e.id: e.word for e in lexicon}
    out = {}
    for rec in records:
        if rec.index < len(tokens) and words.get(rec.entry) == tokens[rec.index]:
            out[(rec.index, rec.entry)] = rec.likelihood
    return out


# --- rendering --------------------------------------------------------------


def render_atom(atom: Atom) -> str:
    items = sorted(atom.items(), key=lambda kv: (-kv[1], kv[0]))
    if len(items) == 1 and items[0][1] == 1.0:
        return "{" + items[0][0] + "}"
    return "{" + ", ".join(f"{s}:{w!r}" for s, w in items) + "}"


def render_fs(fs: Node) -> str:
    """Render in the AVM syntax; ``parse_avm`` reads the result back.

    Nodes reached through more than one arc get a ``#n`` tag where they
    are first printed and a bare ``#n`` afterwards.
    """
    arcs: dict[int, int] = {}
    seen: set[int] = set()

    def count(node):
        if id(node) in seen or not isinstance(node, FeatureStructure):
            return
        seen.add(id(node))
        for feat in node:
            arcs[id(node[feat])] = arcs.get(id(node[feat]), 0) + 1
            count(node[feat])

    count(fs)
    tags: dict[int, int] = {}

    def go(node) -> str:
        prefix = ""
        if arcs.get(id(node), 0) > 1:
            if id(node) in tags:
                return f"#{tags[id(node)]}"
            tags[id(node)] = len(tags) + 1
            prefix = f"#{tags[id(node)]} "
        if isinstance(node, Atom):
            return prefix + render_atom(node)
        parts = []
        for feat in node:
            val = go(node[feat])
            prio = node.priority(feat)
            if prio is not None and prio != DEFAULT_PRIORITY:
                val += f"!{prio!r}"
            parts.append(f"{feat}: {val}")
        return prefix + "[" + " ".join(parts) + "]"

    return go(fs)
