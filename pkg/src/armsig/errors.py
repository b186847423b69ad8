"""Exception types raised across the package."""


class ArmsigError(Exception):
    """Base class for all armsig errors."""


class UnreachableError(ArmsigError):
    """Target pose lies outside the arm's workspace."""

    def __init__(self, message, sample_index=None):
        super().__init__(message)
        self.sample_index = sample_index


class SingularError(ArmsigError):
    """Wrist singularity (sin q5 ~ 0) with no previous angles to disambiguate."""


class MissingAnglesError(ArmsigError):
    """Raw or smoothed pen-angle mode requested but the device provided none."""


class TooShortError(ArmsigError):
    """Sequence too short for difference-based features."""


class ChannelMismatchError(ArmsigError):
    """Feature matrices disagree on channel count."""


class LengthMismatchError(ArmsigError):
    """Feature matrices disagree on sample count."""


class LayoutMismatchError(ArmsigError):
    """Histogram vectors disagree on segment layout."""


class DegenerateError(ArmsigError):
    """Trajectory collapses to a point; histograms undefined."""


class EmptyTemplateError(ArmsigError):
    """Template has no references."""


class EmptyScoresError(ArmsigError):
    """Score list required to be non-empty is empty."""


class InsufficientGenuineError(ArmsigError):
    """Signer has fewer genuine signatures than the protocol needs."""


class MissingManifestError(ArmsigError):
    """Dataset directory has no manifest."""


class ParseError(ArmsigError):
    """Malformed dataset file."""

    def __init__(self, path, line_no, reason):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = str(path)
        self.line_no = line_no
        self.reason = reason
