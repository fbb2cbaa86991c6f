"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Raised when a scenario configuration is malformed or out of range."""


class InfeasibleScenarioError(ValueError):
    """Raised when parameters describe a scenario that cannot be realized,
    e.g. a household infection probability above 1."""
