"""Exception hierarchy shared by every chainecon module."""

from __future__ import annotations


class ChainEconError(Exception):
    """Base class for all errors raised by chainecon."""


class DomainError(ChainEconError, ValueError):
    """An input lies outside the domain where a formula is defined."""


class UndefinedElasticityError(DomainError):
    """Elasticity requested at a point where the attack value is zero."""


class InvalidRegimeError(DomainError):
    """Operation called under a reward regime it does not support."""


class InfeasibleError(DomainError):
    """No (cost, N) pair satisfies both deterrence and participation."""


class SpecError(ChainEconError, ValueError):
    """A sweep specification is malformed."""


class ConfigError(ChainEconError, ValueError):
    """A run configuration is invalid; ``field`` addresses the offending entry."""

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")
