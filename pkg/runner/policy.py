"""
Run policy: checks a :class:`RunConfig` before any work is dispatched.

Each ``check_*`` method returns a :class:`ConfigIssue` or ``None``;
``validate`` chains them and reports the first problem found.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

from pydantic import ValidationError

from shared.schemas import CONTINUOUS, Command, RunConfig

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Defaults
# ---------------------------------------------------------------------------

SIMULATION_COMMANDS: set[Command] = {
    Command.MEMORY,
    Command.PRECESS,
    Command.CLUSTERS,
    Command.ORACLE,
}

DEFAULT_GROUP_KEYS: set[str] = {"q", "q_bin", "T", "xy_binning", "L"}

DEFAULT_MAX_ORACLE_STATES = 10**6
DEFAULT_MAX_PARALLELISM = 256


class ConfigIssue(str, Enum):
    MISSING_TEMPERATURE = "missing_temperature"
    INVALID_MODEL = "invalid_model"
    FINITE_Q_REQUIRED = "finite_q_required"
    STATE_SPACE_TOO_LARGE = "state_space_too_large"
    MISSING_INPUT = "missing_input"
    MISSING_DOCUMENT = "missing_document"
    INVALID_GROUP_KEY = "invalid_group_key"
    INVALID_SAMPLING = "invalid_sampling"
    PARALLELISM_EXCEEDED = "parallelism_exceeded"


# ---------------------------------------------------------------------------
# Policy
# ---------------------------------------------------------------------------

@dataclass
class RunPolicy:
    """Limits and allowlists applied to every invocation."""

    max_parallelism: int = DEFAULT_MAX_PARALLELISM
    max_oracle_states: int = DEFAULT_MAX_ORACLE_STATES
    allowed_group_keys: set[str] = field(default_factory=lambda: set(DEFAULT_GROUP_KEYS))

    # ------------------------------------------------------------------
    # Checks
    # ------------------------------------------------------------------

    def check_temperature(self, config: RunConfig) -> ConfigIssue | None:
        if config.command in SIMULATION_COMMANDS and config.T is None:
            logger.warning("Command %s needs --T", config.command.value)
            return ConfigIssue.MISSING_TEMPERATURE
        return None

    def check_model(self, config: RunConfig) -> ConfigIssue | None:
        if config.command not in SIMULATION_COMMANDS:
            return None
        sizes = config.L_list if config.command == Command.CLUSTERS and config.L_list else [config.L]
        if config.command == Command.ORACLE:
            # the oracle accepts the 2x2 torus
            sizes = [s for s in sizes if s != 2]
        try:
            for L in sizes:
                config.model_params(L)
        except (ValidationError, ValueError) as exc:
            logger.warning("Invalid model parameters: %s", exc)
            return ConfigIssue.INVALID_MODEL
        return None

    def check_oracle(self, config: RunConfig) -> ConfigIssue | None:
        if config.command not in (Command.ORACLE, Command.TP):
            return None
        if config.q == CONTINUOUS:
            logger.warning("Command %s needs finite q", config.command.value)
            return ConfigIssue.FINITE_Q_REQUIRED
        if config.command == Command.ORACLE and config.q ** (config.L * config.L) > self.max_oracle_states:
            logger.warning(
                "Oracle state space %d^%d exceeds %d", config.q, config.L * config.L, self.max_oracle_states,
            )
            return ConfigIssue.STATE_SPACE_TOO_LARGE
        return None

    def check_inputs(self, config: RunConfig) -> ConfigIssue | None:
        if config.command == Command.FIT:
            missing = [p for p in config.inputs if not p.exists()]
            if not config.inputs or missing:
                logger.warning("Missing fit inputs: %s", missing or "none given")
                return ConfigIssue.MISSING_INPUT
            bad = [k for k in config.group if k not in self.allowed_group_keys]
            if bad:
                logger.warning("Group keys %s not allowed", bad)
                return ConfigIssue.INVALID_GROUP_KEY
        if config.command in (Command.REPLAY, Command.VERIFY):
            if config.doc is None or not config.doc.exists():
                logger.warning("Document %s not found", config.doc)
                return ConfigIssue.MISSING_DOCUMENT
        return None

    def check_sampling(self, config: RunConfig) -> ConfigIssue | None:
        if config.command == Command.PRECESS and config.duration < config.sampling_interval:
            logger.warning(
                "Duration %d shorter than sampling interval %d", config.duration, config.sampling_interval,
            )
            return ConfigIssue.INVALID_SAMPLING
        return None

    def check_parallelism(self, config: RunConfig) -> ConfigIssue | None:
        if config.parallelism > self.max_parallelism:
            logger.warning("Parallelism %d exceeds %d", config.parallelism, self.max_parallelism)
            return ConfigIssue.PARALLELISM_EXCEEDED
        return None

    def validate(self, config: RunConfig) -> ConfigIssue | None:
        """Run all policy checks.  Returns *None* on success."""
        return (
            self.check_temperature(config)
            or self.check_oracle(config)
            or self.check_model(config)
            or self.check_inputs(config)
            or self.check_sampling(config)
            or self.check_parallelism(config)
        )
