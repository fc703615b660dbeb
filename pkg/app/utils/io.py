from __future__ import annotations

from collections.abc import Iterable
from pathlib import Path

from pydantic import ValidationError

from app._exceptions import (
    InvalidConfigError,
    InvalidRankingFileError,
    InvalidThetaFileError,
    NoRankingsError,
    OutputWriteError,
)
from app.models.models import PartialRanking, PreferenceVector, RankingDataset, WeightedPair
from app.models.request_models import ExperimentConfig, PairRecord, RankingRecord
from app.utils.logger import logger

__all__ = [
    "load_experiment_config",
    "load_rankings",
    "load_theta",
    "save_pairs",
    "save_rankings",
    "save_theta",
]


def _first_error(exc: ValidationError) -> str:
    error = exc.errors()[0]
    location = ".".join(str(part) for part in error["loc"])
    return f"{location}: {error['msg']}" if location else error["msg"]


def _write_text(path: Path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputWriteError(str(path), exc) from exc
    return path


def _jsonl(records: Iterable[str]) -> str:
    return "".join(f"{record}\n" for record in records)


def load_rankings(path: Path, n: int | None = None) -> RankingDataset:
    """
    Read a rankings file, reporting every malformed line by its number.

    Args:
        path (Path): The JSON Lines file.
        n (int | None, optional): Item count; defaults to the largest item index plus one.

    Returns:
        RankingDataset: The validated dataset.

    Raises:
        NoRankingsError: If the file holds no ranking line.
        InvalidRankingFileError: If the file cannot be read or any line is invalid (bad JSON,
            repeated item, negative or out-of-range index, fewer than two items).
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InvalidRankingFileError(str(path), [str(exc)]) from exc

    rankings: list[tuple[int, PartialRanking]] = []
    problems: list[str] = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            ranking = RankingRecord.model_validate_json(line).to_ranking()
        except ValidationError as exc:
            problems.append(f"line {number}: {_first_error(exc)}")
            continue
        if ranking.k < 2:
            problems.append(f"line {number}: a ranking needs at least two items")
            continue
        rankings.append((number, ranking))

    if not rankings and not problems:
        raise NoRankingsError(str(path))

    if n is not None:
        for number, ranking in rankings:
            worst = max(ranking.items)
            if worst >= n:
                problems.append(f"line {number}: item {worst} is outside [0, {n})")

    if problems:
        raise InvalidRankingFileError(str(path), problems)

    n = n if n is not None else 1 + max(max(ranking.items) for _, ranking in rankings)
    dataset = RankingDataset(n=n, rankings=tuple(ranking for _, ranking in rankings))
    logger.info(f"Loaded {dataset.m} rankings over {dataset.n} items from {path}")
    return dataset


def save_rankings(dataset: RankingDataset | Iterable[PartialRanking], path: Path) -> Path:
    """
    Write one `{"user", "ranking"}` object per line.

    The format does not store the item count: reading the file back infers `n` as the largest
    ranked item plus one, so a dataset whose highest-numbered items are never ranked must be
    reloaded with an explicit `n` (the `--n` flag on the command line).

    Args:
        dataset (RankingDataset | Iterable[PartialRanking]): The rankings to write.
        path (Path): Destination, parent directories are created.

    Returns:
        Path: The written file.

    Raises:
        OutputWriteError: If the file cannot be written.
    """
    rankings = dataset.rankings if isinstance(dataset, RankingDataset) else dataset
    if isinstance(dataset, RankingDataset):
        inferred = max(max(ranking.items) for ranking in dataset.rankings) + 1
        if inferred < dataset.n:
            logger.warning(
                f"Items {inferred}..{dataset.n - 1} are never ranked; load {path} with n={dataset.n}"
            )
    return _write_text(
        path,
        _jsonl(
            RankingRecord(user=ranking.user, ranking=list(ranking.items)).model_dump_json()
            for ranking in rankings
        ),
    )


def load_theta(path: Path) -> PreferenceVector:
    """
    Raises:
        InvalidThetaFileError: If the file is unreadable, not JSON, or violates the sum-zero and
            box invariants.
    """
    path = Path(path)
    try:
        return PreferenceVector.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidThetaFileError(str(path), exc) from exc
    except ValidationError as exc:
        raise InvalidThetaFileError(str(path), _first_error(exc)) from exc


def save_theta(theta: PreferenceVector, path: Path) -> Path:
    """
    Write `theta` as a single `{"n", "b", "theta"}` JSON object.

    Raises:
        OutputWriteError: If the file cannot be written.
    """
    return _write_text(path, theta.model_dump_json(indent=2) + "\n")


def save_pairs(pairs: Iterable[WeightedPair], path: Path) -> Path:
    """Write one `{"winner", "loser", "weight"}` object per line."""
    return _write_text(
        path,
        _jsonl(
            PairRecord(winner=pair.winner, loser=pair.loser, weight=pair.weight).model_dump_json()
            for pair in pairs
        ),
    )


def load_experiment_config(path: Path) -> ExperimentConfig:
    """
    Raises:
        InvalidConfigError: If the file is unreadable or fails validation.
    """
    path = Path(path)
    try:
        return ExperimentConfig.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidConfigError(exc) from exc
    except ValidationError as exc:
        raise InvalidConfigError(_first_error(exc)) from exc
