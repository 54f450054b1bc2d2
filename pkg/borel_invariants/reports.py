import pickle
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional

from pydantic import BaseModel, ConfigDict, Field

from .exactmat import Matrix
from .exactnum import Scalar, format_scalar
from .logging import logger


class Failure(BaseModel):
    """A counterexample with its full witness matrices and both sides of the broken identity."""

    trial: int
    witnesses: dict[str, list[list[str]]]
    lhs: str
    rhs: str
    generator: Optional[str] = None

    @classmethod
    def from_values(
        cls,
        trial: int,
        witnesses: dict[str, Matrix],
        lhs: Scalar,
        rhs: Scalar,
        generator: Optional[str] = None,
    ) -> "Failure":
        return cls(
            trial=trial,
            witnesses={name: m.to_strings() for name, m in witnesses.items()},
            lhs=format_scalar(lhs),
            rhs=format_scalar(rhs),
            generator=generator,
        )


class VerificationReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    check_name: str = Field(alias="check")
    n: int
    trials: int
    seed: int
    passes: int
    failures: list[Failure] = []

    @property
    def ok(self) -> bool:
        return not self.failures and self.passes == self.trials

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)


TrialFn = Callable[[int], Optional[Failure]]


def _is_picklable(obj) -> bool:
    try:
        pickle.dumps(obj)
    except (pickle.PicklingError, AttributeError, TypeError):
        return False

    return True


def run_trials(
    check_name: str, n: int, trials: int, seed: int, trial_fn: TrialFn, jobs: int = 1
) -> VerificationReport:
    """
    Run ``trial_fn`` for every trial index and merge by index. ``trial_fn`` returns
    ``None`` on a pass. An unpicklable ``trial_fn`` (a closure or lambda) runs serially.
    """
    if jobs > 1 and not _is_picklable(trial_fn):
        logger.warning(f"'{check_name}' trial function cannot be pickled. Running serially.")
        jobs = 1

    logger.info(f"Running '{check_name}' (n={n}, trials={trials}, seed={seed}, jobs={jobs}).")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(trial_fn, range(trials)))
    else:
        outcomes = [trial_fn(t) for t in range(trials)]

    failures = [f for f in outcomes if f is not None]
    report = VerificationReport(
        check=check_name,
        n=n,
        trials=trials,
        seed=seed,
        passes=trials - len(failures),
        failures=failures,
    )
    if failures:
        logger.warning(f"'{check_name}' failed {len(failures)} of {trials} trials.")
    else:
        logger.info(f"'{check_name}' passed all {trials} trials.")

    return report
