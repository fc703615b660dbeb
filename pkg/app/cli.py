import json
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated, Any

import logfire
import numpy as np
import typer
from pydantic import BaseModel, ConfigDict

from app._enums import BreakingSchemes, EstimatorVariants, RankingModels
from app._exceptions import (
    CoreError,
    DegenerateItemError,
    InvalidInputError,
    NumericalFailureError,
)
from app.core.bounds import bound_report
from app.core.breaking import break_dataset
from app.core.config import settings
from app.core.experiment import run_experiment
from app.core.graph import graph_stats as compute_graph_stats
from app.core.plackett_luce import gen_theta_star, random_subsets, sample_dataset
from app.core.registries import run_estimator
from app.core.reporting import emit_csv, emit_plot, emit_summary, summary_path
from app.models.models import PreferenceVector, RankingDataset
from app.models.request_models import PairRecord
from app.utils.io import (
    load_experiment_config,
    load_rankings,
    load_theta,
    save_pairs,
    save_rankings,
    save_theta,
)
from app.utils.logger import logger, set_quiet

__all__ = ["app"]

EXIT_INPUT_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3

app = typer.Typer(
    name="plrank",
    help="Plackett-Luce inference from partial rankings.",
    no_args_is_help=True,
    add_completion=False,
    pretty_exceptions_enable=False,
)


class CliState(BaseModel):
    """Global flags shared by every subcommand; `None` means not given on the command line."""

    seed: int | None = None
    threads: int | None = None

    model_config = ConfigDict(frozen=True)

    def resolve_seed(self, seed: int | None) -> int:
        """A subcommand `--seed` wins over the global one, which wins over `PL_SEED`."""
        if seed is not None:
            return seed
        return settings.seed if self.seed is None else self.seed


InputOption = Annotated[
    Path, typer.Option("--input", "-i", help="Rankings file, one JSON object per line.")
]
ItemsOption = Annotated[
    int | None,
    typer.Option("--n", min=1, help="Item count, defaults to the largest item index plus one."),
]
SeedOption = Annotated[
    int | None, typer.Option("--seed", min=0, help="Seed of this command, overrides the global one.")
]


def _state(ctx: typer.Context) -> CliState:
    return ctx.obj if isinstance(ctx.obj, CliState) else CliState()


def _emit(payload: BaseModel | dict[str, Any]) -> None:
    if isinstance(payload, BaseModel):
        typer.echo(payload.model_dump_json(indent=2))
    else:
        typer.echo(json.dumps(payload, indent=2, default=str))


@contextmanager
def _command(name: str, **attributes: Any) -> Iterator[None]:
    """
    Trace a subcommand and turn domain errors into a JSON error object and an exit code.
    """
    with logfire.span(f"cli {name}", **attributes):
        try:
            yield

        except (DegenerateItemError, NumericalFailureError) as exc:
            typer.echo(json.dumps(exc.to_dict(), default=str), err=True)
            raise typer.Exit(code=EXIT_NUMERICAL_FAILURE) from exc

        except CoreError as exc:
            typer.echo(json.dumps(exc.to_dict(), default=str), err=True)
            raise typer.Exit(code=EXIT_INPUT_ERROR) from exc

        except (ArithmeticError, np.linalg.LinAlgError) as exc:
            error = NumericalFailureError(details=exc)
            typer.echo(json.dumps(error.to_dict(), default=str), err=True)
            raise typer.Exit(code=EXIT_NUMERICAL_FAILURE) from exc


def _check_theta(theta: PreferenceVector, n: int) -> PreferenceVector:
    if theta.n != n:
        raise InvalidInputError(f"theta has {theta.n} entries for n={n} items")
    return theta


@app.callback()
def main(
    ctx: typer.Context,
    seed: Annotated[
        int | None, typer.Option("--seed", min=0, help="Master seed, defaults to PL_SEED.")
    ] = None,
    threads: Annotated[
        int | None,
        typer.Option("--threads", min=1, help="Worker threads, defaults to PL_THREADS."),
    ] = None,
    quiet: Annotated[
        bool, typer.Option("--quiet", "-q", help="Only log warnings and errors.")
    ] = False,
) -> None:
    """
    Plackett-Luce inference from partial rankings. Results are printed as JSON on stdout;
    errors end with exit code 2 for invalid input and 3 for numerical failures.
    """
    set_quiet(quiet or settings.quiet)
    ctx.obj = CliState(seed=seed, threads=threads)


@app.command()
def simulate(
    ctx: typer.Context,
    config: Annotated[Path, typer.Option("--config", "-c", help="Experiment configuration JSON.")],
    plot: Annotated[bool, typer.Option("--plot/--no-plot", help="Also render the SVG figure.")] = True,
) -> None:
    """
    Run the normalized-MSE experiment and write its CSV, summary CSV and SVG figure.
    """
    state = _state(ctx)
    with _command("simulate", config=str(config)):
        experiment = load_experiment_config(config)
        if state.seed is not None:
            experiment = experiment.model_copy(update={"seed": state.seed})

        rows = run_experiment(experiment, threads=state.threads)
        csv_path = emit_csv(rows, experiment.output_path)
        outputs = {
            "rows": len(rows),
            "csv": str(csv_path),
            "summary": str(emit_summary(rows, summary_path(csv_path))),
        }
        if plot:
            outputs["plot"] = str(emit_plot(rows, csv_path.with_suffix(".svg")))
        _emit(outputs)


@app.command()
def estimate(
    ctx: typer.Context,
    input_path: InputOption,
    b: Annotated[
        float, typer.Option("--b", min=0, help="Box bound, defaults to PL_ESTIMATOR_B.")
    ] = settings.estimator_b,
    method: Annotated[
        EstimatorVariants, typer.Option("--method", help="Estimator variant.")
    ] = EstimatorVariants.ML,
    seed: SeedOption = None,
    out: Annotated[
        Path | None, typer.Option("--out", "-o", help="Where to write the estimated theta.")
    ] = None,
    n: ItemsOption = None,
) -> None:
    """
    Estimate the preference vector of a rankings file.
    """
    seed = _state(ctx).resolve_seed(seed)
    with _command("estimate", method=method, b=b, seed=seed):
        dataset = load_rankings(input_path, n=n)
        result = run_estimator(dataset, method, b, seed)
        if out is not None:
            save_theta(result.theta_hat, out)
            logger.info(f"Wrote theta to {out}")
        _emit(result)


@app.command("break")
def break_command(
    ctx: typer.Context,
    input_path: InputOption,
    scheme: Annotated[
        BreakingSchemes, typer.Option("--scheme", help="Breaking scheme.")
    ] = BreakingSchemes.FB,
    seed: SeedOption = None,
    out: Annotated[
        Path | None,
        typer.Option("--out", "-o", help="Pairs file; pairs are printed when omitted."),
    ] = None,
    n: ItemsOption = None,
) -> None:
    """
    Break every ranking into weighted pairwise comparisons.
    """
    seed = _state(ctx).resolve_seed(seed)
    with _command("break", scheme=scheme, seed=seed):
        dataset = load_rankings(input_path, n=n)
        broken = break_dataset(dataset, scheme, np.random.default_rng(seed))
        if out is None:
            for pair in broken.pairs:
                typer.echo(
                    PairRecord(
                        winner=pair.winner, loser=pair.loser, weight=pair.weight
                    ).model_dump_json()
                )
            return

        save_pairs(broken.pairs, out)
        _emit({"scheme": scheme, "pairs": len(broken), "out": str(out)})


@app.command()
def bounds(
    ctx: typer.Context,
    input_path: InputOption,
    b: Annotated[float, typer.Option("--b", min=0, help="Box bound of the parameter space.")],
    theta: Annotated[
        Path | None,
        typer.Option("--theta", help="Preference vector at which to evaluate Fisher information."),
    ] = None,
    seed: SeedOption = None,
    n: ItemsOption = None,
) -> None:
    """
    Print every error bound for the assignment behind a rankings file.
    """
    seed = _state(ctx).resolve_seed(seed)
    with _command("bounds", b=b):
        dataset = load_rankings(input_path, n=n)
        vector = None if theta is None else _check_theta(load_theta(theta), dataset.n)
        _emit(bound_report(dataset, b, vector, np.random.default_rng(seed)))


@app.command("graph-stats")
def graph_stats(input_path: InputOption, n: ItemsOption = None) -> None:
    """
    Describe the comparison graph of a rankings file.
    """
    with _command("graph-stats"):
        _emit(compute_graph_stats(load_rankings(input_path, n=n)))


@app.command()
def sample(
    ctx: typer.Context,
    n: Annotated[int, typer.Option("--n", min=2, help="Number of items.")],
    m: Annotated[int, typer.Option("--m", min=1, help="Number of rankings.")],
    k: Annotated[int, typer.Option("--k", min=2, help="Items per ranking.")],
    out: Annotated[Path, typer.Option("--out", "-o", help="Where to write the rankings.")],
    b: Annotated[float, typer.Option("--b", min=0, help="Range of the drawn utilities.")] = 2.0,
    model: Annotated[
        RankingModels, typer.Option("--model", help="Ranking model.")
    ] = RankingModels.PL,
    theta: Annotated[
        Path | None, typer.Option("--theta", help="Use this preference vector instead of drawing one.")
    ] = None,
    theta_out: Annotated[
        Path | None, typer.Option("--theta-out", help="Where to write the preference vector.")
    ] = None,
    seed: SeedOption = None,
) -> None:
    """
    Draw a preference vector and one ranking per random subset of size `k`.
    """
    seed = _state(ctx).resolve_seed(seed)
    with _command("sample", n=n, m=m, k=k, model=model, seed=seed):
        rng = np.random.default_rng(seed)
        vector = gen_theta_star(n, b, rng) if theta is None else _check_theta(load_theta(theta), n)
        subsets = random_subsets(n, m, k, rng)
        dataset = RankingDataset(n=n, rankings=tuple(sample_dataset(vector, subsets, rng, model)))

        outputs = {"n": n, "m": m, "k": k, "model": model, "rankings": str(save_rankings(dataset, out))}
        if theta_out is not None:
            outputs["theta"] = str(save_theta(vector, theta_out))
        _emit(outputs)
