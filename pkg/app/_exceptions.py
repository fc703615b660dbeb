from __future__ import annotations

from typing import Any

from app._enums import ErrorCodes
from app.utils.logger import logger

__all__ = [
    "CoreError",
    "DegenerateItemError",
    "DisconnectedGraphError",
    "EmptyAssignmentError",
    "EstimatorNotFoundError",
    "InvalidConfigError",
    "InvalidInputError",
    "InvalidItemIndexError",
    "InvalidPartitionError",
    "InvalidRankingError",
    "InvalidRankingFileError",
    "InvalidSubsetError",
    "InvalidSubsetSizeError",
    "InvalidThetaFileError",
    "NoRankingsError",
    "NumericalFailureError",
    "OutputWriteError",
]


class CoreError(Exception):
    """
    A custom exception class for handling application-specific errors.

    This exception includes an error message, an error code, and optional details.
    It also logs the error upon initialization.

    Attributes:
        message (str): A descriptive error message.
        code (ErrorCodes): An enumerated error code representing the specific error type.
        details (dict[str, Any] | list[Any] | str | None): Additional details about the error.
    """

    message: str
    code: ErrorCodes
    details: dict[str, Any] | list[Any] | str | None

    def __init__(
        self,
        message: str,
        code: ErrorCodes,
        details: dict[str, Any] | list[Any] | str | None = None,
    ) -> None:
        """
        Initialize a CoreError instance with an error message, code, and optional details.

        The error is logged automatically when an instance is created.

        Args:
            message (str): The error message.
            code (ErrorCodes): A predefined error code representing the error type.
            details (dict[str, Any] | list[Any] | str | None, optional): Additional information
                about the error. Defaults to None.
        """
        super().__init__(message)
        self.message = message
        self.code = code
        self.details = details

        logger.error(
            f"{self.__class__.__name__}: {message} [Code: {code}] Details: {details}"
        )

    def __str__(self) -> str:
        """
        Return a string representation of the error, including the message, code, and optional details.

        Returns:
            str: A formatted string describing the error.

        Example:
            >>> error = CoreError("empty assignment", ErrorCodes.EMPTY_ASSIGNMENT)
            >>> print(str(error))
            "CoreError: empty assignment [Code: EMPTY_ASSIGNMENT]"
        """
        detail_part = f" Details: {self.details}" if self.details else ""
        return f"{self.__class__.__name__}: {self.message} [Code: {self.code}]{detail_part}"

    def to_dict(self) -> dict[str, Any]:
        """
        Convert the CoreError instance into a dictionary format.

        This is used for the JSON error object printed by the CLI and returned by the API.

        Returns:
            dict[str, Any]: A dictionary containing error details.

        Example:
            >>> error = NoRankingsError("rankings.jsonl")
            >>> error.to_dict()
            {
                "error": "NoRankingsError",
                "message": "no rankings",
                "code": "NO_RANKINGS",
                "details": "File 'rankings.jsonl' contains no ranking lines."
            }
        """
        return {
            "error": self.__class__.__name__,
            "message": self.message,
            "code": self.code,
            "details": self.details or {},
        }


class EmptyAssignmentError(CoreError):
    def __init__(self) -> None:
        super().__init__(
            "empty assignment",
            ErrorCodes.EMPTY_ASSIGNMENT,
            "A ranking can only be drawn over a non-empty item subset.",
        )


class InvalidItemIndexError(CoreError):
    def __init__(self, index: int, n: int) -> None:
        super().__init__(
            f"Item index {index} is outside [0, {n}).",
            ErrorCodes.INVALID_ITEM_INDEX,
            {"index": index, "n": n},
        )


class InvalidSubsetError(CoreError):
    def __init__(self, details: str) -> None:
        super().__init__(
            "The item subset is invalid.",
            ErrorCodes.INVALID_SUBSET,
            details=details,
        )


class InvalidSubsetSizeError(CoreError):
    def __init__(self, size: int, n: int) -> None:
        super().__init__(
            f"Subset size {size} is outside [2, {n}].",
            ErrorCodes.INVALID_SUBSET_SIZE,
            {"size": size, "n": n},
        )


class InvalidPartitionError(CoreError):
    def __init__(self, n: int, k: int) -> None:
        super().__init__(
            f"Block size {k} does not divide the item count {n}.",
            ErrorCodes.INVALID_PARTITION,
            {"n": n, "k": k},
        )


class InvalidRankingError(CoreError):
    def __init__(self, details: Exception | str) -> None:
        super().__init__(
            "The ranking data is invalid.",
            ErrorCodes.INVALID_RANKING,
            details=str(details),
        )


class InvalidRankingFileError(CoreError):
    def __init__(self, path: str, problems: list[str]) -> None:
        super().__init__(
            f"The ranking file '{path}' contains malformed lines.",
            ErrorCodes.INVALID_RANKING_FILE,
            problems,
        )


class NoRankingsError(CoreError):
    def __init__(self, path: str) -> None:
        super().__init__(
            "no rankings",
            ErrorCodes.NO_RANKINGS,
            f"File '{path}' contains no ranking lines.",
        )


class InvalidThetaFileError(CoreError):
    def __init__(self, path: str, details: Exception | str) -> None:
        super().__init__(
            f"The theta file '{path}' is invalid.",
            ErrorCodes.INVALID_THETA_FILE,
            details=str(details),
        )


class InvalidConfigError(CoreError):
    def __init__(self, details: Exception | str) -> None:
        super().__init__(
            "The experiment configuration is invalid.",
            ErrorCodes.INVALID_CONFIG,
            details=str(details),
        )


class DisconnectedGraphError(CoreError):
    def __init__(self, components: list[list[int]]) -> None:
        super().__init__(
            f"The comparison graph is disconnected ({len(components)} components).",
            ErrorCodes.DISCONNECTED_GRAPH,
            {"components": components},
        )
        self.components = components


class DegenerateItemError(CoreError):
    def __init__(self, items: list[int]) -> None:
        super().__init__(
            "degenerate item; unconstrained MLE diverges",
            ErrorCodes.DEGENERATE_ITEM,
            {"items": items},
        )
        self.items = items


class NumericalFailureError(CoreError):
    def __init__(self, details: Exception | str) -> None:
        super().__init__(
            "The numerical computation failed.",
            ErrorCodes.NUMERICAL_FAILURE,
            details=str(details),
        )


class OutputWriteError(CoreError):
    def __init__(self, path: str, details: Exception | str) -> None:
        super().__init__(
            f"Could not write '{path}'.",
            ErrorCodes.OUTPUT_WRITE_ERROR,
            details=str(details),
        )


class EstimatorNotFoundError(CoreError):
    def __init__(self, variant: str) -> None:
        super().__init__(
            f"The estimator '{variant}' was not found.",
            ErrorCodes.ESTIMATOR_NOT_FOUND,
            "Ensure that the estimator is registered in the estimator registry.",
        )


class InvalidInputError(CoreError):
    def __init__(self, details: Exception | str) -> None:
        super().__init__(
            "The input is invalid.",
            ErrorCodes.INVALID_INPUT,
            details=str(details),
        )
