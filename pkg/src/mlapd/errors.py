"""Exception hierarchy shared across the package."""


class MlapdError(Exception):
    """Base class for all errors raised by this package."""


class InputError(MlapdError):
    """Malformed or inconsistent input data (files, ids, parameters)."""


class ValidationError(MlapdError):
    """A structural invariant does not hold (e.g. a service is not a
    root-containing subtree)."""


class ConfigurationError(MlapdError):
    """An algorithm or command was configured for an instance it does not
    support (e.g. the path-only algorithm on a branching tree)."""


class ContractViolation(MlapdError):
    """An algorithm returned a service that breaks the simulation contract."""


class OracleBoundError(InputError):
    """Instance exceeds the configured exhaustive-search size bound."""
