"""Exception hierarchy shared across the package.

Three roots so the CLI can map failures onto its stable exit codes:
input problems (bad files, malformed records), configuration problems
(invalid parameters, incompatible sizes), and computation problems
(failures raised while a pipeline is running).
"""


class CausalMdlError(Exception):
    """Base class for all package errors."""


class InputError(CausalMdlError):
    """Bad input data: missing files, malformed records, empty corpora."""


class ConfigError(CausalMdlError):
    """Invalid configuration: bad parameters, incompatible sizes."""


class ComputationError(CausalMdlError):
    """A pipeline step failed while running."""
