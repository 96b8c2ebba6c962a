from ._core import (
    EmptyModelError,
    Error,
    InvariantViolation,
    Model,
    NonTermination,
    ParameterError,
    ParseError,
    SchemaError,
    SessionLog,
    UndefinedProbability,
    build_first_order,
    build_ngram,
    clone,
    dropped_fraction,
    generate,
    load_sessions,
    pagerank,
    parse_sessions,
    run_cli,
    second_order_prob,
    theoretical_drop_fraction,
    zeta,
)

__all__ = [
    "EmptyModelError",
    "Error",
    "InvariantViolation",
    "Model",
    "NonTermination",
    "ParameterError",
    "ParseError",
    "SchemaError",
    "SessionLog",
    "UndefinedProbability",
    "build_first_order",
    "build_ngram",
    "clone",
    "dropped_fraction",
    "generate",
    "load_sessions",
    "pagerank",
    "parse_sessions",
    "run_cli",
    "second_order_prob",
    "theoretical_drop_fraction",
    "zeta",
]
