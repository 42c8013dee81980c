"""Restricted mean time lost estimation and two-sample tests for competing risks."""

from ._rmtl import (
    CifEstimate,
    DegenerateError,
    InputError,
    RcEstimate,
    RmtlEstimate,
    Sample,
    StepFunction,
    aalen_johansen,
    analyze,
    censoring_km,
    combined_tests,
    diff_star_test,
    diff_test,
    format_report,
    gray_test,
    kaplan_meier,
    parse_csv,
    rc,
    read_csv,
    rmst_test,
    rmtl,
    run_monte_carlo,
    select_tau,
    simulate_dataset,
)

__all__ = [name for name in dir() if not name.startswith("_")]
