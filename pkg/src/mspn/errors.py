"""Exception hierarchy for the mspn package."""


class MspnError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(MspnError):
    """A schema is malformed: duplicate names, bad arity, unknown kind."""


class IngestError(MspnError):
    """A data file does not match its schema.

    Carries the offending position when known (0-based row index of the
    data portion, i.e. not counting the header line).
    """

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class DomainError(MspnError):
    """An argument is outside the domain an operation accepts."""


class EmptyInputError(DomainError):
    """An operation that needs at least one row/value got none."""


class ConfigError(MspnError):
    """A learning configuration value is out of range."""


class QueryError(MspnError):
    """Evidence or query arguments are invalid for the model."""


class ConditioningError(QueryError):
    """Conditioning on evidence that has probability zero under the model."""


class FormatError(MspnError):
    """A serialized model file is malformed."""


class VersionError(FormatError):
    """A serialized model declares an unsupported format version."""
