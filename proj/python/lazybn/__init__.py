"""Lazy propagation in discrete Bayesian networks (VE, SPI and arc-reversal backends)."""

from ._lazybn import (
    DomainError,
    ImpossibleEvidence,
    InvariantViolation,
    IoError,
    LazyBNError,
    Network,
    NumericError,
    ParseError,
    StructuralError,
    ValidationError,
    gen_evidence,
    gen_network,
    infer,
    junction_tree,
    load_network,
    oracle_posteriors,
    oracle_probability_of_evidence,
    parse_network,
    run_cli,
)

BACKENDS = ("ve", "spi", "ar")

__all__ = [
    "BACKENDS",
    "DomainError",
    "ImpossibleEvidence",
    "InvariantViolation",
    "IoError",
    "LazyBNError",
    "Network",
    "NumericError",
    "ParseError",
    "StructuralError",
    "ValidationError",
    "gen_evidence",
    "gen_network",
    "infer",
    "junction_tree",
    "load_network",
    "oracle_posteriors",
    "oracle_probability_of_evidence",
    "parse_network",
    "run_cli",
]
