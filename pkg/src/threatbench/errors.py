"""Exception types shared across the pipeline."""


class ThreatbenchError(Exception):
    """Base class for all pipeline errors."""


# --- corpus / parsing ---

class SchemaMismatch(ThreatbenchError):
    """CSV header does not match the expected column set."""


class MalformedRow(ThreatbenchError):
    """A data row could not be parsed; carries the 1-based line number."""

    def __init__(self, message, line_number):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DanglingSupervisor(ThreatbenchError):
    """Supervisor id missing from the roster, or a self-loop."""


class DuplicateUser(ThreatbenchError):
    """Roster lists the same user id twice."""


class UnknownCategory(ThreatbenchError):
    """Domain category outside the supported set."""


class ValenceOutOfRange(ThreatbenchError):
    """Lexicon valence is zero or exceeds magnitude 5."""


class Unparseable(ThreatbenchError):
    """No host could be extracted from a URL or address."""


# --- synthetic corpus ---

class InvalidConfig(ThreatbenchError):
    """Generator configuration violates its invariants."""


class IoFailure(ThreatbenchError):
    """Corpus directory missing or unreadable."""


class TruthMismatch(ThreatbenchError):
    """Recomputed corpus counts disagree with the manifest."""


# --- feature extraction ---

class UnknownUser(ThreatbenchError):
    """Event user absent from the roster."""


class MissingTruth(ThreatbenchError):
    """A table key has no ground-truth label."""


# --- sampling ---

class EmptyClassSet(ThreatbenchError):
    """No rows to sample from."""


class InsufficientClassRows(ThreatbenchError):
    """A class has fewer rows than requested; names the class."""


class TooFewRows(ThreatbenchError):
    """Fewer rows than folds."""


# --- classifiers ---

class UnsupportedModel(ThreatbenchError):
    """Operation undefined for this model family."""


class EmptyNode(ThreatbenchError):
    """Impurity of an empty count vector is undefined."""


# --- bench ---

class EmptyMatrix(ThreatbenchError):
    """Confusion matrix has zero total."""


class NonPositiveTime(ThreatbenchError):
    """Wall times must be strictly positive."""


class NoRowsForClass(ThreatbenchError):
    """No rows with the requested actual classes."""


class BudgetExceedsRows(ThreatbenchError):
    """Triage budget K larger than the table."""


class NoThreats(ThreatbenchError):
    """PRI rates are undefined without at least one threat row."""


# --- cli ---

class UnknownKey(ThreatbenchError):
    """Config file key is not a recognized option."""
