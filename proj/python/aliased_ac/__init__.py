"""Tabular POMDP lab: exact oracles, asymmetric and symmetric TD, natural actor-critic, bounds."""

from ._core import (
    AgentStateProcess,
    Error,
    Pomdp,
    TabularPolicy,
    ValidationError,
    aliasing_lemma_check,
    brute_force_optimal,
    cli,
    eps_actor,
    eps_alias,
    eps_nac,
    eps_shift,
    eps_td,
    exact_return,
    exact_tables,
    last_observation,
    load_pomdp,
    nac_run,
    random_pomdp,
    resolve_policy,
    sliding_window,
    state_revealing,
    td_learn,
    tiger,
    tv_distance,
    visitation,
)

__all__ = [
    "AgentStateProcess",
    "Error",
    "Pomdp",
    "TabularPolicy",
    "ValidationError",
    "aliasing_lemma_check",
    "brute_force_optimal",
    "cli",
    "eps_actor",
    "eps_alias",
    "eps_nac",
    "eps_shift",
    "eps_td",
    "exact_return",
    "exact_tables",
    "last_observation",
    "load_pomdp",
    "nac_run",
    "random_pomdp",
    "resolve_policy",
    "sliding_window",
    "state_revealing",
    "td_learn",
    "tiger",
    "tv_distance",
    "visitation",
]
