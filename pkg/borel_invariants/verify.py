"""
Exact verification suites. Every check draws its witnesses from the per-trial stream of
:mod:`borel_invariants.sampling` and compares both sides of an identity as exact rationals.
"""

import random
from enum import Enum
from fractions import Fraction
from functools import partial
from typing import Callable, Optional, Sequence, Union

from pydantic import BaseModel

from .characters import WeightVector, stage_lattice, weight_stage
from .exactmat import (
    COFACTOR_ORACLE_MAX_SIZE,
    Matrix,
    adjugate,
    cofactor_det,
    conjugate,
    det,
    pullback,
    rank,
    scalar_matrix,
)
from .exactnum import DualRational, Scalar, is_zero
from .exceptions import DegeneratePointError, IndexOutOfRange, SamplingExhaustedError
from .invariants import (
    STAGE_ORDER,
    GeneratorEvaluator,
    InvariantId,
    Stage,
    apply_step,
    b_system,
    chain_steps,
    chain_tables,
    combine_values,
    direct_final,
    homogeneity_degree,
    j_system,
    positions,
    stage_label,
)
from .logging import logger
from .reports import Failure, VerificationReport, run_trials
from .sampling import (
    DEFAULT_MAX_RETRIES,
    GroupElement,
    Subgroup,
    borel_factors,
    draw_group_element,
    draw_matrix,
    draw_nonzero,
    sample,
    trial_stream,
    with_resampling,
)

__all__ = [
    "GroupElement",
    "RankCertificate",
    "SUITES",
    "Subgroup",
    "SystemName",
    "VerificationReport",
    "certify_rank",
    "check_B_invariance",
    "check_U_invariance",
    "check_adjugate",
    "check_chain_identity",
    "check_homogeneity",
    "check_lattice_monomials",
    "check_n2_closed_forms",
    "check_semi_invariance",
    "expected_rank",
    "independence_rank",
    "jacobian",
    "run_suite",
    "sample",
    "system_generators",
]


def _resampled(trial: int, seed: int, max_retries: int, attempt: Callable, context: str):
    return with_resampling(trial_stream(seed, trial), attempt, max_retries, context=context)


def _first_mismatch(
    ids: Sequence[InvariantId], lhs: dict, rhs: dict
) -> Optional[tuple[InvariantId, Scalar, Scalar]]:
    for ident in ids:
        if lhs[ident] != rhs[ident]:
            return ident, lhs[ident], rhs[ident]

    return None


def _values(n: int, x: Matrix, ids: Sequence[InvariantId]) -> dict[InvariantId, Scalar]:
    evaluator = GeneratorEvaluator(n, x)
    return {ident: evaluator.value(ident) for ident in ids}


def _u_trial(trial: int, *, n: int, seed: int, bound: int, max_retries: int) -> Optional[Failure]:
    def attempt(rng: random.Random):
        u = draw_group_element(rng, Subgroup.U, n, bound)
        x = draw_matrix(rng, n, bound)
        return u, x

    u, x = _resampled(trial, seed, max_retries, attempt, f"U-invariance trial {trial}")
    system = j_system(n)
    moved = _values(n, pullback(u.matrix, x), system)
    fixed = _values(n, x, system)
    if mismatch := _first_mismatch(system, moved, fixed):
        ident, lhs, rhs = mismatch
        return Failure.from_values(trial, {"u": u.matrix, "X": x}, lhs, rhs, str(ident))

    return None


def check_U_invariance(
    n: int,
    trials: int = 50,
    seed: int = 0,
    bound: int = 10,
    max_retries: int = DEFAULT_MAX_RETRIES,
    jobs: int = 1,
) -> VerificationReport:
    """``J_{i,j}(u⁻¹·X·u) = J_{i,j}(X)`` for every generator, random unitriangular ``u``."""
    trial_fn = partial(_u_trial, n=n, seed=seed, bound=bound, max_retries=max_retries)
    return run_trials("u-invariance", n, trials, seed, trial_fn, jobs=jobs)


def _b_trial(
    trial: int, *, n: int, seed: int, bound: int, max_retries: int, subgroup: Subgroup
) -> Optional[Failure]:
    system = b_system(n)

    def attempt(rng: random.Random):
        b = draw_group_element(rng, subgroup, n, bound)
        x = draw_matrix(rng, n, bound)
        fixed = _values(n, x, system)
        moved = _values(n, pullback(b.matrix, x), system)
        witnesses = {"b": b.matrix, "X": x}
        sides = [(moved, fixed, "")]
        if subgroup is Subgroup.B:
            # b⁻¹Xb = u⁻¹(h⁻¹Xh)u
            h, u = borel_factors(b)
            torus = _values(n, pullback(h.matrix, x), system)
            witnesses.update({"h": h.matrix, "u": u.matrix})
            sides = [(moved, torus, " (U part)"), (torus, fixed, " (H part)")]

        return witnesses, sides

    witnesses, sides = _resampled(
        trial, seed, max_retries, attempt, f"B-invariance trial {trial}"
    )
    for lhs_values, rhs_values, part in sides:
        if mismatch := _first_mismatch(system, lhs_values, rhs_values):
            ident, lhs, rhs = mismatch
            return Failure.from_values(trial, witnesses, lhs, rhs, f"{ident}{part}")

    return None


def check_B_invariance(
    n: int,
    trials: int = 50,
    seed: int = 0,
    bound: int = 10,
    max_retries: int = DEFAULT_MAX_RETRIES,
    jobs: int = 1,
    subgroup: Subgroup = Subgroup.B,
) -> VerificationReport:
    """
    ``f(b⁻¹·X·b) = f(X)`` for ``f`` in ``{y_n} ∪ {Y_{i,j}}``. Borel witnesses are split as
    ``b = h·u`` and the chain ``f(b⁻¹Xb) = f(h⁻¹Xh) = f(X)`` is checked on the same draw.
    """
    if n < 2:
        raise IndexOutOfRange(f"B-invariance needs n >= 2. Received n={n}.")

    subgroup = Subgroup(subgroup)
    if subgroup is Subgroup.GL:
        raise ValueError("B-invariance is checked for the subgroups B, U and H only.")

    trial_fn = partial(
        _b_trial, n=n, seed=seed, bound=bound, max_retries=max_retries, subgroup=subgroup
    )
    return run_trials("b-invariance", n, trials, seed, trial_fn, jobs=jobs)


def _stage_weights(n: int) -> dict[InvariantId, WeightVector]:
    weights: dict[InvariantId, WeightVector] = {}
    for stage in STAGE_ORDER:
        for pos in positions(n):
            ident = stage_label(n, stage, pos)
            if ident not in weights:
                weights[ident] = weight_stage(n, stage, ident)

    return weights


def _merged(tables: dict[Stage, dict[InvariantId, Scalar]]) -> dict[InvariantId, Scalar]:
    merged: dict[InvariantId, Scalar] = {}
    for stage in STAGE_ORDER:
        merged.update(tables[stage])

    return merged


def _semi_trial(
    trial: int, *, n: int, seed: int, bound: int, max_retries: int
) -> Optional[Failure]:
    weights = _stage_weights(n)

    def attempt(rng: random.Random):
        h = draw_group_element(rng, Subgroup.H, n, bound)
        x = draw_matrix(rng, n, bound)
        fixed = _merged(chain_tables(n, x))
        moved = _merged(chain_tables(n, pullback(h.matrix, x)))
        return h, x, fixed, moved

    h, x, fixed, moved = _resampled(
        trial, seed, max_retries, attempt, f"semi-invariance trial {trial}"
    )
    for ident, weight in weights.items():
        expected = weight.character(h.diagonal) * fixed[ident]
        if moved[ident] != expected:
            return Failure.from_values(
                trial, {"h": h.matrix, "X": x}, moved[ident], expected, str(ident)
            )

    return None


def check_semi_invariance(
    n: int,
    trials: int = 50,
    seed: int = 0,
    bound: int = 10,
    max_retries: int = DEFAULT_MAX_RETRIES,
    jobs: int = 1,
) -> VerificationReport:
    """
    ``f(h⁻¹·X·h) = χ_h(f)·f(X)`` for every generator of every chain stage, each against
    its closed-form weight. Stages are evaluated by replaying the chain at both points.
    A single generator can be checked the same way with
    :func:`borel_invariants.characters.weight_verify`.
    """
    trial_fn = partial(_semi_trial, n=n, seed=seed, bound=bound, max_retries=max_retries)
    return run_trials("semi-invariance", n, trials, seed, trial_fn, jobs=jobs)


def _replay_discipline(n: int, x: Matrix) -> Optional[tuple[str, Scalar, Scalar]]:
    """Replay every step; each must change its target only and read an unmodified source."""
    table = GeneratorEvaluator(n, x).table()
    steps = chain_steps(n)
    for stage in STAGE_ORDER[1:]:
        start = dict(table)
        for step in (s for s in steps if s.stage is stage):
            if table[step.source] != start[step.source]:
                label = f"step {stage.value} {step.target}<-{step.source}: stale source"
                return label, table[step.source], start[step.source]

            updated = apply_step(table, step, combine_values)
            for pos in positions(n):
                if pos != step.target and updated[pos] != table[pos]:
                    label = f"step {stage.value} {step.target}: touched {pos}"
                    return label, updated[pos], table[pos]

            table = updated

    return None


def _chain_trial(
    trial: int, *, n: int, seed: int, bound: int, max_retries: int
) -> Optional[Failure]:
    def attempt(rng: random.Random):
        x = draw_matrix(rng, n, bound)
        return x, chain_tables(n, x)[Stage.FINAL], direct_final(n, x)

    x, chained, direct = _resampled(
        trial, seed, max_retries, attempt, f"chain-identity trial {trial}"
    )
    if violation := _replay_discipline(n, x):
        label, lhs, rhs = violation
        return Failure.from_values(trial, {"X": x}, lhs, rhs, label)

    if mismatch := _first_mismatch(list(direct), chained, direct):
        ident, lhs, rhs = mismatch
        return Failure.from_values(trial, {"X": x}, lhs, rhs, str(ident))

    return None


def check_chain_identity(
    n: int,
    trials: int = 50,
    seed: int = 0,
    bound: int = 10,
    max_retries: int = DEFAULT_MAX_RETRIES,
    jobs: int = 1,
) -> VerificationReport:
    """The final table reached by the elementary steps equals the direct ``y``/``Y`` values."""
    trial_fn = partial(_chain_trial, n=n, seed=seed, bound=bound, max_retries=max_retries)
    return run_trials("chain-identity", n, trials, seed, trial_fn, jobs=jobs)


def _matrix_mismatch(
    label: str, lhs: Matrix, rhs: Matrix
) -> Optional[tuple[str, Scalar, Scalar]]:
    for r in range(lhs.nrows):
        for c in range(lhs.ncols):
            if lhs[r, c] != rhs[r, c]:
                return f"{label} at ({r + 1},{c + 1})", lhs[r, c], rhs[r, c]

    return None


def _singular_draw(rng: random.Random, n: int, bound: int) -> Matrix:
    x = draw_matrix(rng, n, bound)
    if n == 1:
        return Matrix([[0]])

    # A repeated row forces det = 0 without making the adjugate trivially zero for n = 2.
    return Matrix([*x.rows[:-1], x.rows[0]])


def _adjugate_trial(trial: int, *, n: int, seed: int, bound: int) -> Optional[Failure]:
    rng = trial_stream(seed, trial)
    x = _singular_draw(rng, n, bound) if trial % 2 else draw_matrix(rng, n, bound)
    g = draw_group_element(rng, Subgroup.GL, n, bound).matrix
    adj = adjugate(x)
    determinant = det(x)
    d_e = scalar_matrix(n, determinant)
    witnesses = {"X": x, "g": g}
    checks = [
        ("X·adj(X)", x @ adj, d_e),
        ("adj(X)·X", adj @ x, d_e),
        ("adj(gXg⁻¹)", adjugate(conjugate(g, x)), conjugate(g, adj)),
    ]
    for label, lhs, rhs in checks:
        if mismatch := _matrix_mismatch(label, lhs, rhs):
            label, lhs_value, rhs_value = mismatch
            return Failure.from_values(trial, witnesses, lhs_value, rhs_value, label)

    if n <= COFACTOR_ORACLE_MAX_SIZE and (expansion := cofactor_det(x)) != determinant:
        return Failure.from_values(trial, witnesses, determinant, expansion, "det vs cofactor")

    return None


def check_adjugate(
    n: int,
    trials: int = 50,
    seed: int = 0,
    bound: int = 10,
    max_retries: int = DEFAULT_MAX_RETRIES,
    jobs: int = 1,
) -> VerificationReport:
    """
    ``X·X* = X*·X = det(X)·E`` and ``(gXg⁻¹)* = g·X*·g⁻¹``. Odd trials use a singular X;
    the Bareiss determinant is compared against cofactor expansion.
    """
    trial_fn = partial(_adjugate_trial, n=n, seed=seed, bound=bound)
    return run_trials("adjugate", n, trials, seed, trial_fn, jobs=jobs)


def _n2_trial(trial: int, *, seed: int, bound: int, max_retries: int) -> Optional[Failure]:
    def attempt(rng: random.Random):
        x = draw_matrix(rng, 2, bound)
        trace = x.trace()
        if x[1, 0] == 0 or trace == 0:
            raise DegeneratePointError("Closed forms need x21 != 0 and trace != 0.")

        return x, trace

    x, trace = _resampled(trial, seed, max_retries, attempt, f"n2 closed-form trial {trial}")
    evaluator = GeneratorEvaluator(2, x)
    determinant = det(x)
    checks = [
        ("J:1,0 = x21", evaluator.J(1, 0), x[1, 0]),
        ("J:2,0 = det", evaluator.J(2, 0), determinant),
        ("J:2,1 = x21·trace", evaluator.J(2, 1), x[1, 0] * trace),
        ("y:2 = trace", evaluator.y(2), trace),
        ("Y:2,0 = det/trace", evaluator.Y(2, 0), determinant / trace),
    ]
    for label, lhs, rhs in checks:
        if lhs != rhs:
            return Failure.from_values(trial, {"X": x}, lhs, rhs, label)

    return None


def check_n2_closed_forms(
    n: int = 2,
    trials: int = 100,
    seed: int = 0,
    bound: int = 10,
    max_retries: int = DEFAULT_MAX_RETRIES,
    jobs: int = 1,
) -> VerificationReport:
    """At n = 2: ``y_2`` is the trace and ``Y_{2,0}`` is det/trace."""
    if n != 2:
        raise IndexOutOfRange(f"The closed forms hold for n = 2 only. Received n={n}.")

    trial_fn = partial(_n2_trial, seed=seed, bound=bound, max_retries=max_retries)
    return run_trials("n2-closed-forms", n, trials, seed, trial_fn, jobs=jobs)


def _homogeneity_trial(trial: int, *, n: int, seed: int, bound: int) -> Optional[Failure]:
    rng = trial_stream(seed, trial)
    t = draw_nonzero(rng, bound)
    x = draw_matrix(rng, n, bound)
    scaled = GeneratorEvaluator(n, x.scale(t))
    plain = GeneratorEvaluator(n, x)
    for i, j in positions(n):
        expected = t ** homogeneity_degree(n, i, j) * plain.J(i, j)
        if (value := scaled.J(i, j)) != expected:
            witnesses = {"X": x, "t": scalar_matrix(1, t)}
            return Failure.from_values(trial, witnesses, value, expected, f"J:{i},{j}")

    return None


def check_homogeneity(
    n: int,
    trials: int = 50,
    seed: int = 0,
    bound: int = 10,
    max_retries: int = DEFAULT_MAX_RETRIES,
    jobs: int = 1,
) -> VerificationReport:
    """``J_{i,j}(t·X) = t^(i + j(n-2))·J_{i,j}(X)``."""
    trial_fn = partial(_homogeneity_trial, n=n, seed=seed, bound=bound)
    return run_trials("homogeneity", n, trials, seed, trial_fn, jobs=jobs)


def _monomial(values: dict[InvariantId, Scalar], labels: list[InvariantId], m: list[int]):
    product: Scalar = Fraction(1)
    for ident, exponent in zip(labels, m):
        if exponent < 0 and is_zero(values[ident]):
            raise DegeneratePointError(f"{ident} vanishes but carries exponent {exponent}.")

        if exponent:
            product = product * values[ident] ** exponent

    return product


def _lattice_trial(
    trial: int,
    *,
    n: int,
    seed: int,
    bound: int,
    max_retries: int,
    stage: Stage,
    labels: list[InvariantId],
    vectors: list[list[int]],
) -> Optional[Failure]:
    def attempt(rng: random.Random):
        h = draw_group_element(rng, Subgroup.H, n, bound)
        x = draw_matrix(rng, n, bound)
        fixed = chain_tables(n, x)[stage]
        moved = chain_tables(n, pullback(h.matrix, x))[stage]
        sides = [(_monomial(moved, labels, m), _monomial(fixed, labels, m)) for m in vectors]
        return h, x, sides

    h, x, sides = _resampled(trial, seed, max_retries, attempt, f"lattice trial {trial}")
    for index, (lhs, rhs) in enumerate(sides):
        if lhs != rhs:
            label = f"basis vector {index} {vectors[index]}"
            return Failure.from_values(trial, {"h": h.matrix, "X": x}, lhs, rhs, label)

    return None


def check_lattice_monomials(
    n: int,
    trials: int = 50,
    seed: int = 0,
    bound: int = 10,
    max_retries: int = DEFAULT_MAX_RETRIES,
    jobs: int = 1,
    stage: Stage = Stage.FINAL,
) -> VerificationReport:
    """Every kernel-lattice monomial of the stage system is H-invariant when evaluated."""
    stage = Stage(stage)
    basis = stage_lattice(n, stage)
    labels = [InvariantId.parse(label) for label in basis.labels or []]
    trial_fn = partial(
        _lattice_trial,
        n=n,
        seed=seed,
        bound=bound,
        max_retries=max_retries,
        stage=stage,
        labels=labels,
        vectors=basis.vectors,
    )
    return run_trials("lattice", n, trials, seed, trial_fn, jobs=jobs)


SuiteFn = Callable[..., VerificationReport]
SUITES: dict[str, SuiteFn] = {
    "u-invariance": check_U_invariance,
    "b-invariance": check_B_invariance,
    "semi-invariance": check_semi_invariance,
    "chain-identity": check_chain_identity,
    "adjugate": check_adjugate,
    "n2-closed-forms": check_n2_closed_forms,
    "homogeneity": check_homogeneity,
    "lattice": check_lattice_monomials,
}


def run_suite(name: str, n: int, **kwargs) -> VerificationReport:
    if name not in SUITES:
        raise KeyError(f"Unknown suite '{name}'. Choose from: {', '.join(SUITES)}.")

    return SUITES[name](n, **kwargs)


def _seeded(x0: Matrix, k: int, l: int) -> Matrix:
    return Matrix(
        [
            DualRational.variable(x0[r, c]) if (r, c) == (k, l) else DualRational(x0[r, c])
            for c in range(x0.ncols)
        ]
        for r in range(x0.nrows)
    )


def _derivative(value: Scalar) -> Fraction:
    return value.deriv if isinstance(value, DualRational) else Fraction(0)


def jacobian(system: Sequence[InvariantId], n: int, x0: Matrix) -> Matrix:
    """
    The ``|system| x n²`` Jacobian at ``x0``; column ``k·n + l`` (0-based) holds the
    partials along ``x_{k+1,l+1}``, each from one dual-number evaluation.
    """
    columns = []
    for k in range(n):
        for l in range(n):
            evaluator = GeneratorEvaluator(n, _seeded(x0, k, l))
            columns.append([_derivative(evaluator.value(ident)) for ident in system])

    return Matrix([[column[s] for column in columns] for s in range(len(system))], cols=n * n)


class SystemName(str, Enum):
    J = "J"
    B = "B"


def system_generators(name: Union[SystemName, str], n: int) -> list[InvariantId]:
    if SystemName(name) is SystemName.J:
        return j_system(n)

    return b_system(n)


def expected_rank(name: Union[SystemName, str], n: int) -> int:
    if SystemName(name) is SystemName.J:
        return n * (n + 1) // 2

    return n * (n - 1) // 2 + 1


class RankCertificate(BaseModel):
    """The Jacobian rank of a system, exhibited at ``point``."""

    system: str
    n: int
    seed: int
    rank: int
    expected: int
    attempts: int
    point: list[list[str]]

    @property
    def ok(self) -> bool:
        return self.rank >= self.expected

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)


def certify_rank(
    system: Union[SystemName, str, Sequence[InvariantId]],
    n: int,
    seed: int = 0,
    bound: int = 10,
    max_retries: int = DEFAULT_MAX_RETRIES,
) -> RankCertificate:
    """
    Jacobian rank at random rational points. A submaximal or degenerate point is
    resampled up to ``max_retries`` times; the best point seen is reported.
    """
    if isinstance(system, (SystemName, str)):
        name = SystemName(system).value
        generators = system_generators(system, n)
        expected = expected_rank(system, n)
    else:
        name = "custom"
        generators = list(system)
        expected = len(generators)

    best: Optional[tuple[int, Matrix]] = None
    attempts = 0
    for attempt in range(max_retries + 1):
        attempts += 1
        x0 = draw_matrix(trial_stream(seed, attempt), n, bound)
        try:
            observed = rank(jacobian(generators, n, x0))
        except DegeneratePointError as err:
            logger.debug(f"Degenerate rank point (attempt {attempt}): {err} Resampling.")
            continue

        if best is None or observed > best[0]:
            best = (observed, x0)

        if observed >= expected:
            break

        logger.debug(f"Rank {observed} < {expected} at attempt {attempt}. Resampling.")

    if best is None:
        raise SamplingExhaustedError(
            f"No non-degenerate point for the {name} system after {max_retries} resamples."
        )

    observed, point = best
    logger.info(f"{name} system, n={n}: rank {observed} (expected {expected}).")
    return RankCertificate(
        system=name,
        n=n,
        seed=seed,
        rank=observed,
        expected=expected,
        attempts=attempts,
        point=point.to_strings(),
    )


def independence_rank(
    system: Union[SystemName, str, Sequence[InvariantId]],
    n: int,
    seed: int = 0,
    bound: int = 10,
    max_retries: int = DEFAULT_MAX_RETRIES,
) -> int:
    return certify_rank(system, n, seed=seed, bound=bound, max_retries=max_retries).rank
