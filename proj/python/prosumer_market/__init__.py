"""Competitive and Nash equilibria of a uniform-price prosumer market."""

from ._core import (
    CSV_HEADER,
    Allocation,
    BestResponseResult,
    BracketFailure,
    ConditionReport,
    ConfigError,
    DomainError,
    ExponentialUtility,
    InvalidBids,
    IoError,
    LoadedConfig,
    MarketConfig,
    Program,
    SolveResult,
    SweepRow,
    SweepSpec,
    TooLarge,
    UnboundedPayoff,
    best_response,
    brute_force_program,
    check_conditions,
    clearing_price,
    format_csv,
    load_config,
    parse_config,
    quantity_from_bid,
    run_sweep,
    solve_dual,
    strategic_payoff,
    welfare,
)

__all__ = [name for name in dir() if not name.startswith("_")]
