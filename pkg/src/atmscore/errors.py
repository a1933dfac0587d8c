"""Exception hierarchy. ``exit_code`` is what the CLI returns for each class."""


class AtmScoreError(Exception):
    exit_code = 3


class ValidationError(AtmScoreError):
    exit_code = 1


class SchemaError(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class DomainError(AtmScoreError, ValueError):
    exit_code = 3


class CapacityError(DomainError):
    pass
