"""Exception hierarchy shared across the package."""


class ContractGraphError(Exception):
    """Base class for all package errors."""


class SchemaError(ContractGraphError):
    """Input data does not conform to a required schema."""


class AssemblyError(ContractGraphError):
    """Graph assembly violated a structural invariant."""


class ConfigError(ContractGraphError):
    """Invalid configuration value."""


class EmbedderError(ContractGraphError):
    """A pluggable text embedder failed on some input."""
