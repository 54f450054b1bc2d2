import json
import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import partial

import pytest

from borel_invariants.characters import WeightVector, weight_stage, weight_verify
from borel_invariants.exactmat import Matrix
from borel_invariants.exceptions import IndexOutOfRange
from borel_invariants.invariants import (
    J_id,
    Stage,
    Y_id,
    b_system,
    evaluate,
    j_system,
    stage_system,
    y_id,
)
from borel_invariants.sampling import Subgroup
from borel_invariants.verify import (
    SUITES,
    certify_rank,
    check_adjugate,
    check_B_invariance,
    check_chain_identity,
    check_homogeneity,
    check_lattice_monomials,
    check_n2_closed_forms,
    check_semi_invariance,
    check_U_invariance,
    independence_rank,
    jacobian,
    run_suite,
)


def assert_passes(report, trials):
    assert report.ok, report.to_json()
    assert report.passes == trials
    assert report.failures == []


@pytest.mark.parametrize("n", [2, 3, 4])
def test_U_invariance(n):
    assert_passes(check_U_invariance(n, trials=10, seed=1), 10)


def test_U_invariance_n3_full_scale():
    assert_passes(check_U_invariance(3, trials=50, bound=10), 50)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_B_invariance(n):
    assert_passes(check_B_invariance(n, trials=10, seed=2), 10)


@pytest.mark.parametrize("subgroup", [Subgroup.U, Subgroup.H])
def test_B_invariance_restricted_subgroups(subgroup):
    assert_passes(check_B_invariance(3, trials=10, subgroup=subgroup), 10)


def test_B_invariance_needs_n2():
    with pytest.raises(IndexOutOfRange):
        check_B_invariance(1, trials=1)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_semi_invariance(n):
    assert_passes(check_semi_invariance(n, trials=10, seed=3), 10)


def test_semi_invariance_reports_wrong_weight(mocker):
    mocker.patch("borel_invariants.verify.weight_stage", return_value=WeightVector.zero(3))
    report = check_semi_invariance(3, trials=10, seed=3)
    assert not report.ok
    failure = report.failures[0]
    assert set(failure.witnesses) == {"h", "X"}
    assert failure.generator is not None
    assert report.passes + len(report.failures) == 10


def test_semi_invariance_agrees_with_weight_verify():
    n = 3
    assert check_semi_invariance(n, trials=5, seed=4).ok
    for ident in stage_system(n, Stage.FINAL):
        f = partial(evaluate, ident, n)
        report = weight_verify(n, f, weight_stage(n, Stage.FINAL, ident), trials=5, seed=4)
        assert report.ok, report.to_json()


@pytest.mark.parametrize("n", [2, 3, 4])
def test_chain_identity(n):
    assert_passes(check_chain_identity(n, trials=20, seed=4), 20)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_adjugate_contract(n):
    assert_passes(check_adjugate(n, trials=20, seed=5), 20)


def test_n2_closed_forms():
    assert_passes(check_n2_closed_forms(2, trials=100, seed=6), 100)


def test_n2_closed_forms_only_at_n2():
    with pytest.raises(IndexOutOfRange):
        check_n2_closed_forms(3)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_homogeneity(n):
    assert_passes(check_homogeneity(n, trials=20, seed=7), 20)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_lattice_monomials(n):
    assert_passes(check_lattice_monomials(n, trials=10, seed=8), 10)


def test_suite_registry():
    assert set(SUITES) == {
        "u-invariance",
        "b-invariance",
        "semi-invariance",
        "chain-identity",
        "adjugate",
        "n2-closed-forms",
        "homogeneity",
        "lattice",
    }
    report = run_suite("adjugate", 2, trials=3)
    assert report.check_name == "adjugate"

    with pytest.raises(KeyError):
        run_suite("nope", 2)


def test_report_json_schema():
    report = check_U_invariance(2, trials=3, seed=1)
    data = json.loads(report.to_json())
    assert data["check"] == "u-invariance"
    assert (data["n"], data["trials"], data["seed"], data["passes"]) == (2, 3, 1, 3)
    assert data["failures"] == []


def test_reports_are_deterministic():
    first = check_B_invariance(3, trials=5, seed=7).to_json()
    second = check_B_invariance(3, trials=5, seed=7).to_json()
    assert first == second


def test_parallel_merge_matches_serial(mocker):
    serial = check_semi_invariance(3, trials=6, seed=9).to_json()
    mocker.patch("borel_invariants.reports.ProcessPoolExecutor", ThreadPoolExecutor)
    assert check_semi_invariance(3, trials=6, seed=9, jobs=3).to_json() == serial


def test_process_pool_matches_serial():
    serial = check_U_invariance(2, trials=4, seed=2).to_json()
    assert check_U_invariance(2, trials=4, seed=2, jobs=2).to_json() == serial


def test_suite_logging(caplog):
    with caplog.at_level(logging.INFO, logger="borel_invariants"):
        check_adjugate(2, trials=2)

    assert "Running 'adjugate'" in caplog.text
    assert "passed all 2 trials" in caplog.text


def test_jacobian_of_linear_generator(x3):
    jac = jacobian([J_id(1, 0)], 3, x3)
    assert jac.shape == (1, 9)
    # J_{1,0} = x_{3,1}: column (3 - 1)·3 + (1 - 1).
    assert list(jac.row(0)) == [int(c == 6) for c in range(9)]


def test_jacobian_of_det():
    a, b, c, d = Fraction(2), Fraction(-1, 3), Fraction(5), Fraction(7, 2)
    jac = jacobian([J_id(2, 0)], 2, Matrix([[a, b], [c, d]]))
    assert list(jac.row(0)) == [d, -c, -b, a]


def test_jacobian_of_J21_matches_symbolic_partials(x2):
    # J_{2,1} = c(a + d) at [[1, 2], [3, 4]].
    jac = jacobian([J_id(2, 1)], 2, x2)
    assert list(jac.row(0)) == [3, 0, 5, 3]


def test_jacobian_of_rational_generators(x2):
    # y_2 = a + d and Y_{2,0} = (ad - bc)/(a + d) at a=1, b=2, c=3, d=4.
    jac = jacobian([y_id(2), Y_id(2, 0)], 2, x2)
    assert list(jac.row(0)) == [1, 0, 0, 1]
    trace, determinant = Fraction(5), Fraction(-2)
    expected = [
        (4 * trace - determinant) / trace**2,
        Fraction(-3) / trace,
        Fraction(-2) / trace,
        (1 * trace - determinant) / trace**2,
    ]
    assert list(jac.row(1)) == expected


@pytest.mark.parametrize("n", [2, 3, 4])
def test_independence_ranks(n):
    assert independence_rank("J", n, seed=0) == n * (n + 1) // 2
    assert independence_rank("B", n, seed=0) == n * (n - 1) // 2 + 1


@pytest.mark.slow
def test_independence_ranks_n5():
    assert independence_rank("J", 5) == 15
    assert independence_rank("B", 5) == 11


def test_rank_of_a_subset_is_not_larger():
    subset = j_system(3)[:2]
    assert independence_rank(subset, 3) <= independence_rank(j_system(3), 3)
    assert independence_rank([J_id(1, 0)], 3) == 1


def test_rank_certificate():
    certificate = certify_rank("B", 3, seed=4)
    assert certificate.ok
    assert (certificate.system, certificate.rank, certificate.expected) == ("B", 4, 4)
    assert 1 <= certificate.attempts <= 17
    point = Matrix.from_strings(certificate.point)
    assert point.shape == (3, 3)
    assert json.loads(certificate.to_json())["rank"] == 4


def test_rank_certificate_custom_system():
    certificate = certify_rank(b_system(2), 2)
    assert certificate.system == "custom"
    assert certificate.rank == certificate.expected == 2


@pytest.mark.slow
@pytest.mark.parametrize("n", [5])
def test_acceptance_scale_suites(n):
    assert_passes(check_U_invariance(n, trials=50), 50)
    assert_passes(check_B_invariance(n, trials=50), 50)
    assert_passes(check_semi_invariance(n, trials=50), 50)
