"""Sustainability economics of PoW/PoS and permissionless/permissioned blockchains."""

from .econ import (
    ABS_TOL,
    FD_TOL,
    REL_TOL,
    AttackValueModel,
    ConsensusKind,
    NetworkParams,
    NodeMode,
    SustainabilityVerdict,
    attack_profit,
    attack_value_threshold,
    budish_condition,
    elasticity_of_attack_value,
    fe_comparative_static,
    fe_nodes_pow,
    fe_stake_pos,
    ic_min_cost_pow,
    ic_min_stake_pos,
    ic_nodes_pow,
    min_block_reward,
    total_network_cost,
)
from .errors import (
    ChainEconError,
    ConfigError,
    DomainError,
    InfeasibleError,
    InvalidRegimeError,
    SpecError,
    UndefinedElasticityError,
)

__version__ = "0.1.0"
