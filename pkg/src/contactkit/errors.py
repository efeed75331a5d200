"""Exception types raised across the toolkit."""


class ContactKitError(Exception):
    """Base class for all toolkit errors."""


class InvalidDepthError(ContactKitError, ValueError):
    pass


class BoundsError(ContactKitError, ValueError):
    pass


class BehindCameraError(ContactKitError, ValueError):
    pass


class TopologyError(ContactKitError, ValueError):
    """Raised when a query needs a watertight mesh and did not get one."""


class EmptyInputError(ContactKitError, ValueError):
    pass


class ShapeError(ContactKitError, ValueError):
    pass


class DegenerateBoxError(ContactKitError, ValueError):
    pass


class ProposalParseError(ContactKitError, ValueError):
    """Malformed proposal document. ``location`` names the offending field."""

    def __init__(self, message, location=""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class EmptyProposalError(ContactKitError, ValueError):
    pass


class MissingDepthError(ContactKitError, ValueError):
    pass


class DimensionError(ContactKitError, ValueError):
    pass


class DegenerateGeometryError(ContactKitError, ValueError):
    pass


class AssignmentError(ContactKitError, ValueError):
    pass


class NumericError(ContactKitError, ArithmeticError):
    pass


class MissingContactError(ContactKitError, ValueError):
    pass


class InsufficientDataError(ContactKitError, ValueError):
    pass


class StageError(ContactKitError):
    """Wraps an error raised inside one pipeline stage."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")


class ValidationError(ContactKitError, ValueError):
    """A scene bundle failed validation; ``findings`` lists every problem."""

    def __init__(self, findings):
        self.findings = list(findings)
        super().__init__("bundle failed validation:\n" + "\n".join(self.findings))
