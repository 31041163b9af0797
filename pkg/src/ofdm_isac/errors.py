"""Exception types that map to CLI exit codes."""


class ConfigError(Exception):
    """Scenario configuration file is malformed or inconsistent (exit code 2)."""


class ScenarioInfeasibleError(Exception):
    """Scene violates a physical feasibility constraint (exit code 3)."""
