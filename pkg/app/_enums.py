import enum

__all__ = [
    "BreakingSchemes",
    "ErrorCodes",
    "EstimatorVariants",
    "MleMethods",
    "NoiseFamilies",
    "ObjectTypes",
    "PlSamplers",
    "RankingModels",
]

if hasattr(enum, "StrEnum"):
    _StrEnum = enum.StrEnum
else:  # Python 3.10 fallback matching enum.StrEnum's str()/format()

    class _StrEnum(str, enum.Enum):
        __str__ = str.__str__
        __format__ = str.__format__


class BreakingSchemes(_StrEnum):
    IB = "ib"
    FB = "fb"


class ErrorCodes(_StrEnum):
    EMPTY_ASSIGNMENT = "EMPTY_ASSIGNMENT"
    INVALID_ITEM_INDEX = "INVALID_ITEM_INDEX"
    INVALID_SUBSET = "INVALID_SUBSET"
    INVALID_SUBSET_SIZE = "INVALID_SUBSET_SIZE"
    INVALID_PARTITION = "INVALID_PARTITION"
    INVALID_RANKING = "INVALID_RANKING"
    INVALID_RANKING_FILE = "INVALID_RANKING_FILE"
    INVALID_THETA_FILE = "INVALID_THETA_FILE"
    INVALID_CONFIG = "INVALID_CONFIG"
    INVALID_INPUT = "INVALID_INPUT"
    NO_RANKINGS = "NO_RANKINGS"
    DISCONNECTED_GRAPH = "DISCONNECTED_GRAPH"
    DEGENERATE_ITEM = "DEGENERATE_ITEM"
    NUMERICAL_FAILURE = "NUMERICAL_FAILURE"
    OUTPUT_WRITE_ERROR = "OUTPUT_WRITE_ERROR"
    ESTIMATOR_NOT_FOUND = "ESTIMATOR_NOT_FOUND"


class EstimatorVariants(_StrEnum):
    ML = "ml"
    IB = "ib"
    FB = "fb"


class MleMethods(_StrEnum):
    MM_THEN_PROJECT = "mm-then-project"
    PROJECTED_GRADIENT = "projected-gradient"


class NoiseFamilies(_StrEnum):
    GUMBEL = "gumbel"
    GAUSSIAN = "gaussian"
    LOGISTIC = "logistic"


class ObjectTypes(_StrEnum):
    ESTIMATE = "estimate"
    BOUNDS = "bounds"
    GRAPH_STATS = "graph_stats"
    PAIRS = "pairs"


class PlSamplers(_StrEnum):
    SEQUENTIAL = "sequential"
    LATENT = "latent"


class RankingModels(_StrEnum):
    PL = "pl"
    THURSTONE_GUMBEL = "thurstone-gumbel"
    THURSTONE_GAUSSIAN = "thurstone-gaussian"
