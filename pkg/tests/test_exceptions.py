from app._enums import ErrorCodes
from app._exceptions import (
    CoreError,
    DegenerateItemError,
    DisconnectedGraphError,
    EstimatorNotFoundError,
    InvalidPartitionError,
    NoRankingsError,
)


def test_to_dict():
    """Test the JSON error object of a domain error."""
    error = NoRankingsError("rankings.jsonl")
    assert error.to_dict() == {
        "error": "NoRankingsError",
        "message": "no rankings",
        "code": ErrorCodes.NO_RANKINGS,
        "details": "File 'rankings.jsonl' contains no ranking lines.",
    }


def test_to_dict_without_details():
    error = CoreError("empty assignment", ErrorCodes.EMPTY_ASSIGNMENT)
    assert error.to_dict()["details"] == {}
    assert str(error) == "CoreError: empty assignment [Code: EMPTY_ASSIGNMENT]"


def test_str_includes_details():
    error = InvalidPartitionError(10, 3)
    assert str(error) == (
        "InvalidPartitionError: Block size 3 does not divide the item count 10. "
        "[Code: INVALID_PARTITION] Details: {'n': 10, 'k': 3}"
    )


def test_structured_attributes():
    assert DisconnectedGraphError([[0], [1, 2]]).components == [[0], [1, 2]]
    assert DegenerateItemError([4]).items == [4]
    assert EstimatorNotFoundError("xx").code == ErrorCodes.ESTIMATOR_NOT_FOUND


def test_errors_are_exceptions():
    assert isinstance(NoRankingsError("x"), Exception)
    assert issubclass(DegenerateItemError, CoreError)
