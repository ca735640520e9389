"""Command-line front end.

    gradunify parse --grammar G.gu --lexicon L.gul --input "the van left"
    gradunify demo

Exit status: 0 when every sentence got a spanning parse, 2 when some
sentence got none (including unknown words), 1 on usage or load errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from .chart import ParserConfig, ParseReport, UnknownWordError, extract_parses, run_parse
from .demo import DEMO_CONFIG, format_table, run_demo
from .grammar_io import (
    GrammarSyntaxError,
    lex_activations,
    parse_grammar,
    parse_lexicon,
    parse_tagprobs,
    render_fs,
)

EXIT_OK, EXIT_ERROR, EXIT_NO_PARSE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _unit(text: str) -> float:
    val = float(text)
    if not 0.0 <= val <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return val


def _weights(text: str) -> tuple:
    try:
        ws = tuple(float(w) for w in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad weights {text!r}") from None
    if len(ws) != 3 or any(w < 0 for w in ws) or abs(sum(ws) - 1.0) > 1e-9:
        raise argparse.ArgumentTypeError("weights must be three non-negative numbers summing to 1")
    return ws


def _positive(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return val


def _add_parser_flags(p, defaults: ParserConfig):
    p.add_argument("--uthresh", type=_unit, default=defaults.unification_threshold,
                   help="unification threshold (default %(default)s)")
    p.add_argument("--athresh", type=_unit, default=defaults.activation_threshold,
                   help="activation threshold (default %(default)s)")
    p.add_argument("--weights", type=_weights, default=defaults.weights, metavar="W1,W2,W3",
                   help="activation weights, summing to 1")
    p.add_argument("--max-steps", type=_positive, default=defaults.max_agenda_steps)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--trace", action="store_true", help="include the event trace")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gradunify", description="Graded unification chart parser.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", help="parse sentences with a grammar and lexicon")
    p.add_argument("--grammar", required=True, type=Path)
    p.add_argument("--lexicon", required=True, type=Path)
    p.add_argument("--tag-probs", type=Path)
    p.add_argument("--input", required=True,
                   help="a sentence, or a file with one sentence per line ('-' for stdin)")
    p.add_argument("--n-best", type=_positive, default=1)
    _add_parser_flags(p, ParserConfig())

    d = sub.add_parser("demo", help="run the bundled van/man experiment")
    _add_parser_flags(d, DEMO_CONFIG)
    return parser


def _config(args) -> ParserConfig:
    return ParserConfig(
        unification_threshold=args.uthresh,
        activation_threshold=args.athresh,
        weights=args.weights,
        max_agenda_steps=args.max_steps,
    )


def _sentences(source: str) -> list[str]:
    if source == "-":
        lines = sys.stdin.read().splitlines()
    elif Path(source).is_file():
        lines = Path(source).read_text(encoding="utf-8").splitlines()
    else:
        return [source]
    return [ln.strip() for ln in lines if ln.strip() and not ln.lstrip().startswith("%")]


def report_to_dict(report: ParseReport, n_best: int, with_trace: bool) -> dict:
    parses = []
    if report.parses:
        for rank, (tree, act, fs) in enumerate(extract_parses(report, n_best), 1):
            parses.append({
                "rank": rank,
                "edge": tree.edge,
                "activation": act,
                "tree": str(tree),
                "rules": tree.rules(),
                "structure": render_fs(fs),
            })
    return {
        "tokens": report.tokens,
        "truncated": report.truncated,
        "steps": report.steps,
        "parses": parses,
        "suspended": [
            {"edge": e.id, "span": [e.start, e.end], "kind": e.kind, "activation": e.activation,
             "strength": e.strength, "reason": reason}
            for e, reason in report.suspended
        ],
        "trace": [ev.to_dict() for ev in report.trace] if with_trace else [],
    }


def _print_text(entry: dict, index: int, report, out) -> None:
    print(f"sentence {index}: {entry['input']}", file=out)
    if entry["error"]:
        print(f"  error: {entry['error']}", file=out)
        return
    if not entry["parses"]:
        print("  no spanning parse", file=out)
    for p in entry["parses"]:
        print(f"  parse {p['rank']}  activation {p['activation']:.6f}", file=out)
        print(f"    {p['tree']}", file=out)
        print(f"    rules: {' '.join(p['rules'])}", file=out)
    if entry["truncated"]:
        print(f"  truncated after {entry['steps']} agenda steps", file=out)
    print(f"  {len(entry['suspended'])} suspended edge(s)", file=out)
    if entry["trace"] and report is not None:
        print("  trace:", file=out)
        for ev in report.trace:
            print("    " + ev.to_tsv(), file=out)


def cmd_parse(args, out=None) -> int:
    out = out or sys.stdout
    try:
        grammar = parse_grammar(args.grammar.read_text(encoding="utf-8"))
        lexicon = parse_lexicon(args.lexicon.read_text(encoding="utf-8"))
        tagprobs = parse_tagprobs(args.tag_probs.read_text(encoding="utf-8")) if args.tag_probs else []
        cfg = _config(args)
        sentences = _sentences(args.input)
    except (OSError, GrammarSyntaxError, ValueError) as exc:
        print(f"gradunify: {exc}", file=sys.stderr)
        return EXIT_ERROR

    status = EXIT_OK
    entries, reports = [], []
    for sentence in sentences:
        tokens = sentence.split()
        entry = {"input": sentence, "error": None}
        report = None
        try:
            report = run_parse(tokens, grammar, lexicon, cfg, lex_activations(tagprobs, tokens, lexicon))
            entry.update(report_to_dict(report, args.n_best, args.trace))
        except UnknownWordError as exc:
            print(f"gradunify: {exc}", file=sys.stderr)
            entry.update(tokens=tokens, truncated=False, steps=0, parses=[], suspended=[], trace=[],
                         error=str(exc))
        if not entry["parses"]:
            status = EXIT_NO_PARSE
        entries.append(entry)
        reports.append(report)

    if args.format == "json":
        doc = {
            "config": {**asdict(cfg), "start_category": grammar.start},
            "sentences": entries,
        }
        json.dump(doc, out, indent=2)
        out.write("\n")
    else:
        for i, (entry, report) in enumerate(zip(entries, reports), 1):
            _print_text(entry, i, report, out)
    return status


def cmd_demo(args, out=None) -> int:
    out = out or sys.stdout
    results = run_demo(_config(args))
    if args.format == "json":
        doc = {"config": asdict(_config(args)), "sentences": []}
        for r in results:
            doc["sentences"].append({
                "sentence": r.sentence,
                "boundary": r.boundary,
                "winner": r.winner,
                "margin": r.margin,
                "readings": {k: {"edge": e.id, "activation": e.activation} for k, e in sorted(r.best.items())},
                "top_parse": r.top_parse,
                "parses": report_to_dict(r.report, 1, args.trace)["parses"],
                "trace": [ev.to_dict() for ev in r.report.trace] if args.trace else [],
            })
        json.dump(doc, out, indent=2)
        out.write("\n")
    else:
        print(format_table(results), file=out)
        if args.trace:
            for r in results:
                print(f"\ntrace: {r.sentence}", file=out)
                out.write(r.report.trace_tsv())
    return EXIT_OK if all(r.report.parses for r in results) else EXIT_NO_PARSE


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "demo":
        return cmd_demo(args)
    return cmd_parse(args)


if __name__ == "__main__":
    sys.exit(main())
