"""Exception hierarchy shared across the package."""


class FairplaiError(Exception):
    """Base class for all package errors."""


# --- dataset ingest ---

class MissingHeader(FairplaiError):
    pass


class UnknownColumn(FairplaiError):
    pass


class TypeMismatch(FairplaiError):
    def __init__(self, row: int, column: str, value):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"row {row}, column {column!r}: cannot parse {value!r}")


class EmptyDataset(FairplaiError):
    pass


class UnseenCategory(FairplaiError):
    pass


class FractionOutOfRange(FairplaiError):
    pass


class TooFewRows(FairplaiError):
    pass


# --- metrics ---

class LengthMismatch(FairplaiError):
    pass


class SingleGroup(FairplaiError):
    pass


class ZeroReferenceRate(FairplaiError):
    pass


class UndefinedRate(FairplaiError):
    def __init__(self, group, which: str):
        self.group = group
        self.which = which
        super().__init__(f"group {group!r} has no {which} rows; rate undefined")


class AUCWithoutScores(FairplaiError):
    pass


# --- dp core ---

class NonPositiveParameter(FairplaiError):
    pass


class DeltaOutOfRange(FairplaiError):
    pass


class EpsilonOutOfRange(FairplaiError):
    pass


class MixedEntriesUnderAdvanced(FairplaiError):
    pass


class BudgetExceeded(FairplaiError):
    pass


# --- models ---

class SingleClassData(FairplaiError):
    pass


class NonFiniteLoss(FairplaiError):
    pass


class MissingBounds(FairplaiError):
    pass


class DepthTooLarge(FairplaiError):
    pass


class KOutOfRange(FairplaiError):
    pass


class DimensionMismatch(FairplaiError):
    pass


# --- fairness interventions ---

class OracleFailure(FairplaiError):
    pass


class AllZeroWeights(FairplaiError):
    pass


class GroupMissingScores(FairplaiError):
    pass


class DegenerateROC(FairplaiError):
    pass


# --- frontier ---

class InvalidGrid(FairplaiError):
    pass


class EmptyAxes(FairplaiError):
    pass


class VersionMismatch(FairplaiError):
    pass


class CorruptFile(FairplaiError):
    pass


# --- policy ---

class UnrecognizedIntent(FairplaiError):
    def __init__(self, span: str):
        self.span = span
        super().__init__(f"unrecognized fairness intent: {span!r}")


class ConflictingDescriptors(FairplaiError):
    pass


class MissingCriterion(FairplaiError):
    pass


class PolicyDeltaOutOfRange(FairplaiError):
    pass


class EmptyAttributeList(FairplaiError):
    pass


class AttributeMismatch(FairplaiError):
    pass


class StaleFrontier(FairplaiError):
    pass


class MissingArtifact(FairplaiError):
    pass


# --- service / store ---

class UnknownDataset(FairplaiError):
    pass


class UnknownJob(FairplaiError):
    pass


class UnknownFrontier(FairplaiError):
    pass


class InfeasibleChoice(FairplaiError):
    pass
