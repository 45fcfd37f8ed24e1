"""Grammar-driven synthesis of semantic parsing data."""

from synthparse._core import (
    Database,
    Error,
    Example,
    Grammar,
    GrammarError,
    ParseError,
    ProgramError,
    SchemaError,
    TransportError,
    UsageError,
    __version__,
    alpha_equal,
    canonical,
    enumerate,
    kendall_tau,
    logical_coverage,
    perplexity,
    read_jsonl,
    run_cli,
    run_pipeline,
    sample_validation,
    score,
    select_top_k,
    template_key,
    token_f1,
    write_jsonl,
)

__all__ = [
    "Database",
    "Error",
    "Example",
    "Grammar",
    "GrammarError",
    "ParseError",
    "ProgramError",
    "SchemaError",
    "TransportError",
    "UsageError",
    "__version__",
    "alpha_equal",
    "canonical",
    "enumerate",
    "kendall_tau",
    "logical_coverage",
    "perplexity",
    "read_jsonl",
    "run_cli",
    "run_pipeline",
    "sample_validation",
    "score",
    "select_top_k",
    "template_key",
    "token_f1",
    "write_jsonl",
]
