"""Exception hierarchy shared by every module of the package."""


class AltCsitError(Exception):
    """Base class for all package errors."""


class DimensionError(AltCsitError, ValueError):
    pass


class RankDeficient(AltCsitError, ValueError):
    pass


class NotHermitian(AltCsitError, ValueError):
    pass


class NotPositiveDefinite(AltCsitError, ValueError):
    pass


class InvalidUserCount(AltCsitError, ValueError):
    pass


class InvalidPower(AltCsitError, ValueError):
    pass


class InsufficientPoints(AltCsitError, ValueError):
    pass


class ConfigError(AltCsitError, ValueError):
    """One or more configuration fields are invalid.

    ``errors`` holds ``(field, message)`` pairs, one per violated field.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{f}: {m}" for f, m in self.errors))

    def as_dict(self):
        return {"errors": [{"field": f, "message": m} for f, m in self.errors]}


class OutputError(AltCsitError, OSError):
    """Result file could not be written."""
