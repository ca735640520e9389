"""Graded unification and an activation-scored chart parser."""

from .avm import (
    Atom,
    AvmError,
    FeatureStructure,
    atomic_paths,
    category,
    fs_equal,
    get_path,
    make_atom,
)
from .chart import (
    Chart,
    Edge,
    Grammar,
    LexEntry,
    ParseReport,
    ParserConfig,
    ParseTree,
    Rule,
    UnknownWordError,
    compute_activation,
    extract_parses,
    init_chart,
    run_parse,
)
from .grammar_io import (
    GrammarSyntaxError,
    parse_avm,
    parse_grammar,
    parse_lexicon,
    parse_tagprobs,
    render_fs,
)
from .unify import (
    UnificationClash,
    UnifyResult,
    actual_compatibility,
    atom_strength,
    perfect_compatibility,
    unify_atoms,
    unify_graded,
)

__version__ = "0.1.0"
