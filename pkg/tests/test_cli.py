import json

import pytest
from pydantic import ValidationError

from borel_invariants._cli import cli, render_triangle
from borel_invariants.config import CliConfig, Command, OutputFormat
from borel_invariants.invariants import Stage
from borel_invariants.reports import Failure, VerificationReport

IDENTITY_3 = [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Run every command away from the repository's own ``borel-config.yaml``."""
    monkeypatch.chdir(tmp_path)
    for name in ("BOREL_FORMAT", "BOREL_SEED", "BOREL_N", "BOREL_TRIALS"):
        monkeypatch.delenv(name, raising=False)


def invoke(runner, *args, **kwargs):
    return runner.invoke(cli, [str(a) for a in args], **kwargs)


@pytest.mark.parametrize("n", [2, 3])
def test_table_text_matches_golden(runner, golden, n):
    result = invoke(runner, "table", "--n", n, "--format", "text")
    assert result.exit_code == 0, result.output
    assert result.output == golden(f"table_n{n}.txt")


def test_table_json(runner):
    result = invoke(runner, "table", "--n", 3)
    assert result.exit_code == 0, result.output
    data = json.loads(result.output)
    assert data["stage"] == "J"
    assert data["columns"] == [["J:1,0"], ["J:2,0", "J:2,1"], ["J:3,0", "J:3,1", "J:3,2"]]


def test_table_of_final_stage(runner):
    result = invoke(runner, "table", "--n", 2, "--stage", "Yfinal")
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["columns"] == [["y:1"], ["Y:2,0", "y:2"]]


def test_weights_text(runner):
    result = invoke(runner, "weights", "--n", 2, "--format", "text")
    assert result.exit_code == 0, result.output
    assert result.output == "       1\na1/a2  a1/a2\n"


def test_weights_json(runner):
    result = invoke(runner, "weights", "--n", 2)
    data = json.loads(result.output)
    assert data["columns"] == [[[1, -1]], [[0, 0], [1, -1]]]


def test_eval_at_identity(runner, write_matrix):
    path = write_matrix(IDENTITY_3)
    result = invoke(runner, "eval", "--n", 3, "--id", "J:1,0", "--matrix", path, "--format", "text")
    assert result.exit_code == 0, result.output
    assert result.output == "0\n"

    result = invoke(runner, "eval", "--n", 3, "--id", "J:1,0", "--matrix", path)
    assert json.loads(result.output) == {"id": "J:1,0", "n": 3, "value": "0"}


def test_eval_rational_value(runner, write_matrix):
    path = write_matrix([["1", "2"], ["3", "4"]])
    result = invoke(runner, "eval", "--n", 2, "--id", "Y:2,0", "--matrix", path, "--format", "text")
    assert result.exit_code == 0, result.output
    assert result.output == "-2/5\n"


def test_eval_id_out_of_range(runner, write_matrix):
    path = write_matrix(IDENTITY_3)
    result = invoke(runner, "eval", "--n", 3, "--id", "J:4,0", "--matrix", path)
    assert result.exit_code == 2


def test_eval_malformed_id(runner, write_matrix):
    path = write_matrix(IDENTITY_3)
    result = invoke(runner, "eval", "--n", 3, "--id", "Q:1,0", "--matrix", path)
    assert result.exit_code == 2


def test_eval_malformed_matrix(runner, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("[[1, 2], [3]")
    result = invoke(runner, "eval", "--n", 2, "--id", "J:1,0", "--matrix", path)
    assert result.exit_code == 2


def test_eval_wrong_shape(runner, write_matrix):
    path = write_matrix([["1", "2"], ["3", "4"]])
    result = invoke(runner, "eval", "--n", 3, "--id", "J:1,0", "--matrix", path)
    assert result.exit_code == 2


def test_eval_needs_id(runner, write_matrix):
    result = invoke(runner, "eval", "--n", 3, "--matrix", write_matrix(IDENTITY_3))
    assert result.exit_code == 2


def test_eval_at_degenerate_point(runner, write_matrix):
    # y_2 = J_{2,1}/J_{1,0} and J_{1,0} = x_{2,1} = 0 here.
    path = write_matrix([["1", "2"], ["0", "4"]])
    result = invoke(runner, "eval", "--n", 2, "--id", "y:2", "--matrix", path)
    assert result.exit_code == 1


def test_verify_passes(runner):
    result = invoke(runner, "verify", "--n", 3, "--suite", "u-invariance", "--trials", 5)
    assert result.exit_code == 0, result.output
    data = json.loads(result.output)
    assert data["check"] == "u-invariance"
    assert data["passes"] == 5
    assert data["failures"] == []


def test_verify_b_invariance_n4(runner):
    args = ("verify", "--n", 4, "--suite", "b-invariance", "--trials", 50, "--seed", 7)
    result = invoke(runner, *args)
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["passes"] == 50


def test_verify_text_format(runner):
    result = invoke(
        runner, "verify", "--n", 2, "--suite", "n2-closed-forms", "--trials", 10, "--format", "text"
    )
    assert result.exit_code == 0, result.output
    assert result.output == "n2-closed-forms: 10/10 passed (n=2, seed=0)\n"


def test_verify_failure_exits_1(runner, mocker):
    failure = Failure(
        trial=0, witnesses={"X": [["1"]]}, lhs="1", rhs="2", generator="J:1,0"
    )
    report = VerificationReport(
        check="u-invariance", n=2, trials=1, seed=0, passes=0, failures=[failure]
    )
    mocker.patch("borel_invariants._cli.run_suite", return_value=report)
    result = invoke(runner, "verify", "--n", 2, "--suite", "u-invariance", "--format", "text")
    assert result.exit_code == 1
    assert "trial 0 J:1,0: 1 != 2" in result.output


@pytest.mark.parametrize("args,stage", [((), Stage.FINAL), (("--stage", "J"), Stage.J)])
def test_verify_lattice_forwards_stage(runner, mocker, args, stage):
    report = VerificationReport(check="lattice", n=3, trials=1, seed=0, passes=1)
    run_suite = mocker.patch("borel_invariants._cli.run_suite", return_value=report)
    result = invoke(runner, "verify", "--n", 3, "--suite", "lattice", "--trials", 1, *args)
    assert result.exit_code == 0, result.output
    assert run_suite.call_args.kwargs["stage"] is stage


def test_verify_lattice_at_j_stage(runner):
    args = ("verify", "--n", 3, "--suite", "lattice", "--stage", "J", "--trials", 3)
    result = invoke(runner, *args)
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["passes"] == 3


def test_verify_unknown_suite(runner):
    result = invoke(runner, "verify", "--n", 2, "--suite", "nope")
    assert result.exit_code == 2


def test_verify_is_deterministic(runner):
    args = ("verify", "--n", 3, "--suite", "semi-invariance", "--trials", 5, "--seed", 3)
    assert invoke(runner, *args).output == invoke(runner, *args).output


def test_rank(runner):
    result = invoke(runner, "rank", "--n", 3, "--system", "B")
    assert result.exit_code == 0, result.output
    data = json.loads(result.output)
    assert (data["system"], data["rank"], data["expected"]) == ("B", 4, 4)


def test_rank_text(runner):
    result = invoke(runner, "rank", "--n", 2, "--system", "J", "--format", "text")
    assert result.exit_code == 0, result.output
    assert result.output.startswith("J system, n=2: rank 3 (expected 3")


def test_lattice_json(runner):
    result = invoke(runner, "lattice", "--n", 3)
    assert result.exit_code == 0, result.output
    data = json.loads(result.output)
    assert data["stage"] == "Yfinal"
    assert data["labels"][:3] == ["y:1", "y:2", "y:3"]
    assert len(data["labels"]) == 6
    assert data["basis"] == [[int(c == r) for c in range(6)] for r in range(2, 6)]


def test_lattice_text_lists_monomials(runner):
    result = invoke(runner, "lattice", "--n", 2, "--stage", "Yfinal", "--format", "text")
    assert result.exit_code == 0, result.output
    assert result.output.splitlines() == ["y:2", "Y:2,0"]


def test_large_n_needs_flag(runner):
    assert invoke(runner, "table", "--n", 7).exit_code == 2
    assert invoke(runner, "table", "--n", 7, "--allow-large").exit_code == 0


def test_format_from_environment(runner, golden, monkeypatch):
    monkeypatch.setenv("BOREL_FORMAT", "text")
    result = invoke(runner, "table", "--n", 2)
    assert result.output == golden("table_n2.txt")


def test_render_triangle_empty():
    assert render_triangle([]) == ""


def test_config_reads_yaml(tmp_path):
    (tmp_path / "borel-config.yaml").write_text("seed: 5\nformat: text\nmax_n: 8\n")
    config = CliConfig(command=Command.TABLE, n=7)
    assert config.seed == 5
    assert config.format is OutputFormat.TEXT
    assert config.max_n == 8


def test_config_precedence(tmp_path, monkeypatch):
    (tmp_path / "borel-config.yaml").write_text("seed: 5\n")
    monkeypatch.setenv("BOREL_SEED", "9")
    assert CliConfig(command=Command.TABLE, n=2).seed == 9
    assert CliConfig(command=Command.TABLE, n=2, seed=1).seed == 1


def test_config_defaults():
    config = CliConfig(command="lattice", n=3)
    assert (config.seed, config.trials, config.bound, config.jobs) == (0, 50, 10, 1)
    assert config.resolved_stage is Stage.FINAL
    assert CliConfig(command="table", n=3).resolved_stage is Stage.J
    assert CliConfig(command="verify", n=3, suite="lattice").resolved_stage is Stage.FINAL


@pytest.mark.parametrize(
    "overrides",
    [
        {"command": "table", "n": 0},
        {"command": "table", "n": 2, "bound": 0},
        {"command": "eval", "n": 2, "id": "J:1,0"},
        {"command": "verify", "n": 2},
        {"command": "verify", "n": 2, "suite": "unknown"},
        {"command": "rank", "n": 2},
        {"command": "rank", "n": 2, "system": "C"},
        {"command": "eval", "n": 2, "id": "bogus", "matrix_path": "m.json"},
    ],
)
def test_config_rejects(overrides):
    with pytest.raises(ValidationError):
        CliConfig(**overrides)


def test_verbosity_logs_run(runner, caplog):
    with caplog.at_level("INFO", logger="borel_invariants"):
        invoke(runner, "verify", "-v", "INFO", "--n", 2, "--suite", "adjugate", "--trials", 2)

    assert "Running 'adjugate'" in caplog.text
