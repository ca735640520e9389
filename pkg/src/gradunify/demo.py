"""The bundled reduced-relative experiment.

Two sentences differ only in the animacy of their subject::

    the van recognized by the spy took off
    the man recognized by the spy took off

The tag likelihoods favour the past tense reading of *recognized*.  The
past tense entry also asks for an animate subject.  With *van* that
request fails, so the unification strength drops and the main clause
reading falls behind the reduced relative.  With *man* nothing
penalizes the main clause.

Only the reduced relative can span a whole sentence.  The two readings
are therefore compared on the ``s`` edges that cover the prefix through
the *by*-phrase.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Optional

from .avm import TOLERANCE
from .chart import Edge, Grammar, LexEntry, ParseReport, ParserConfig, run_parse
from .grammar_io import TagProb, lex_activations, parse_grammar, parse_lexicon, parse_tagprobs

SENTENCES = (
    "the van recognized by the spy took off",
    "the man recognized by the spy took off",
)

LABELS = {
    "recognized/vbd": "main-clause",
    "recognized/vbn": "reduced-relative",
}

# Operating point for the demo.  The activation threshold has to admit the
# participle's lexical edge, which starts at its tag likelihood of 0.2.
DEMO_CONFIG = ParserConfig(
    unification_threshold=0.7,
    activation_threshold=0.15,
    weights=(0.4, 0.2, 0.4),
)


def _read(name: str) -> str:
    return (resources.files("gradunify") / "data" / name).read_text(encoding="utf-8")


def load_assets() -> tuple[Grammar, list[LexEntry], list[TagProb]]:
    return parse_grammar(_read("demo.gu")), parse_lexicon(_read("demo.gul")), parse_tagprobs(_read("demo.gup"))


def label(report: ParseReport, edge: Edge) -> Optional[str]:
    found = {LABELS[e] for e in report.tree(edge).entries() if e in LABELS}
    return found.pop() if len(found) == 1 else None


def analysis_race(report: ParseReport, end: int) -> dict[str, Edge]:
    """Best chart edge per reading among start-category edges over ``(0, end)``.

    Active and inactive edges both count, so a reading still waiting for
    more words competes with one that is already complete.
    """
    best: dict[str, Edge] = {}
    for edge in report.chart.chart_edges():
        if edge.start != 0 or edge.end != end or edge.category != report.start_category:
            continue
        name = label(report, edge)
        if name is None:
            continue
        if name not in best or edge.activation > best[name].activation:
            best[name] = edge
    return best


@dataclass
class RaceResult:
    sentence: str
    report: ParseReport
    boundary: int
    best: dict

    @property
    def winner(self) -> Optional[str]:
        if not self.best:
            return None
        if len(self.best) > 1 and self.margin <= TOLERANCE:
            return "tie"
        return max(self.best, key=lambda k: self.best[k].activation)

    @property
    def margin(self) -> float:
        acts = sorted((e.activation for e in self.best.values()), reverse=True)
        return acts[0] - acts[1] if len(acts) > 1 else (acts[0] if acts else 0.0)

    @property
    def top_parse(self) -> Optional[str]:
        if not self.report.parses:
            return None
        return label(self.report, self.report.parses[0])


def run_demo(cfg: ParserConfig = DEMO_CONFIG, sentences=SENTENCES) -> list[RaceResult]:
    grammar, lexicon, tagprobs = load_assets()
    results = []
    for sentence in sentences:
        tokens = sentence.split()
        report = run_parse(tokens, grammar, lexicon, cfg, lex_activations(tagprobs, tokens, lexicon))
        boundary = tokens.index("by") + 3
        results.append(RaceResult(sentence, report, boundary, analysis_race(report, boundary)))
    return results


def format_table(results: list[RaceResult]) -> str:
    rows = [("sentence", "winner at by-phrase", "main-clause", "reduced-relative", "margin", "top parse")]
    for r in results:
        def act(name):
            e = r.best.get(name)
            return f"{e.activation:.4f}" if e else "absent"

        rows.append((r.sentence, r.winner or "-", act("main-clause"), act("reduced-relative"),
                     f"{r.margin:.4f}", r.top_parse or "none"))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
