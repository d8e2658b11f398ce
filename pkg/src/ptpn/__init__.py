"""Priced timed Petri nets: exact simulation, region abstraction, and
cost-optimal coverability checking."""

from .model import Interval, ModelError, Place, PTPN, Transition, cmax, interval_contains
from .netformat import NetFormatError, parse_net, serialize_net
from .semantics import (
    Computation,
    Delay,
    Fire,
    Marking,
    ReplayError,
    RunResult,
    StepError,
    delay_step,
    decompose_delta,
    enabled_bindings,
    fire_step,
    is_delta_computation,
    is_delta_form,
    is_detailed_delay,
    parse_marking,
    parse_trace,
    run,
    split_delay,
    storage_rate,
)
from .regions import (
    OMEGA,
    Region,
    abstract,
    class_sat,
    concretize,
    fire_region,
    region_from_literal,
    region_to_literal,
    satisfies,
    succ_A,
    succ_type1,
    succ_type2,
    succ_typeB,
    token_cost,
)
from .order import (
    Basis,
    Configuration,
    Ordering,
    config_leq,
    cost_pad,
    member_upward,
    minimize,
    region_embeds,
)
from .solver import (
    OptResult,
    Query,
    SearchBounds,
    Verdict,
    Witness,
    acjt_fixpoint,
    bounded_pre_star,
    cost_optimal,
    cost_threshold,
    coverability,
    forward_search,
    pre_A,
    pre_B,
    pre_discrete,
    replay_witness,
    target_basis,
)

__all__ = [name for name in dir() if not name.startswith("_")]
