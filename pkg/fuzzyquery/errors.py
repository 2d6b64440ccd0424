from typing import Any, Dict, Optional

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class FuzzyQueryError(Exception):
    """Base error; carries the CLI exit code and a structured context"""

    exit_code = EXIT_RUNTIME

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.context = context or {}


class ConfigError(FuzzyQueryError):
    exit_code = EXIT_CONFIG


class ParseError(ConfigError):
    def __init__(self, message: str, row: int, column: str):
        super().__init__(message, {"row": row, "column": column})
        self.row = row
        self.column = column


class ShapeError(FuzzyQueryError):
    pass


class DegenerateClusterError(FuzzyQueryError):
    def __init__(self, cluster: int):
        super().__init__(f"Cluster {cluster} has zero membership mass", {"cluster": cluster})
        self.cluster = cluster


class DegenerateSampleError(FuzzyQueryError):
    def __init__(self, cluster: int, sample_size: int):
        super().__init__(
            f"Sampled membership mass of cluster {cluster} is zero (m={sample_size})",
            {"cluster": cluster, "sample_size": sample_size},
        )
        self.cluster = cluster


class DegenerateStageError(FuzzyQueryError):
    def __init__(self, stage: int, message: Optional[str] = None):
        super().__init__(
            message or f"No unprocessed membership mass sampled at stage {stage}",
            {"stage": stage},
        )
        self.stage = stage


class CoincidentCentersError(FuzzyQueryError):
    pass


class BudgetExhaustedError(FuzzyQueryError):
    def __init__(self, query_type: str, ledger: Dict[str, Any]):
        super().__init__(
            f"Query budget for '{query_type}' exhausted",
            {"query_type": query_type, "ledger": ledger},
        )
        self.query_type = query_type
        self.ledger = ledger


class InvalidQueryError(FuzzyQueryError):
    pass


class CapabilityError(FuzzyQueryError):
    pass


class ConditioningError(FuzzyQueryError):
    pass


class RankError(FuzzyQueryError):
    pass


class DecompositionError(FuzzyQueryError):
    pass


class ReductionUnavailableError(FuzzyQueryError):
    pass
