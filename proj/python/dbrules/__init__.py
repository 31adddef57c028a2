"""Binary shift-register rules: de Bruijn rules, feasibility filters, census and classification."""

from ._dbrules import (
    ArityError,
    CapacityError,
    DataError,
    Dataset,
    DbrulesError,
    Model,
    NetworkConfig,
    NotDeBruijnError,
    NotFoundError,
    ParseError,
    RangeError,
    Rule,
    StructureError,
    canonical_rotation,
    constrained_pair,
    count_feasible,
    debruijn_count,
    detect_orbit,
    enumerate_feasible,
    evaluate,
    export_state_graph,
    extract_features,
    factorize_rule,
    generate_sequence,
    granddaddy,
    is_debruijn_rule,
    is_evil_odd,
    is_feasible,
    metrics_from_counts,
    mirror_rule,
    next_state,
    period_histogram,
    phi,
    reduction_table,
    rule_of_sequence,
    sample_feasible,
    sequence_of_rule,
    total_configuration_count,
    train,
    verify_debruijn_sequence,
    verify_predictions,
)

__all__ = [name for name in dir() if not name.startswith("_")]
