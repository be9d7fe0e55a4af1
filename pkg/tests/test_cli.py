import json

import pytest

from fracwave.commands.deps import merge_config, parse_levels
from fracwave.main import main
from fracwave.numerics.solver import load_field


def test_parse_levels():
    assert parse_levels("4-7") == [4, 5, 6, 7]
    assert parse_levels("2,3,5") == [2, 3, 5]


def test_merge_config_prefers_flags():
    merged = merge_config({"J": 64, "levels": [2, 3]}, {"J": 32, "levels": None})
    assert merged == {"J": 32, "levels": [2, 3]}


def test_ml_command(capsys):
    assert main(["ml", "--alpha", "1.0", "--z", "0", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "0.0 1.0"
    assert lines[1].startswith("1.0 2.71828182845")


def test_solve_command_prints_summary_and_dumps(capsys, tmp_path):
    dump = tmp_path / "u.csv"
    code = main(["solve", "--alpha", "1.5", "--J", "16", "--N", "7", "--dump", str(dump)])
    assert code == 0
    assert capsys.readouterr().out.startswith("alpha=1.5 J=16 N=7 max_H1=")
    field = load_field(dump)
    assert (field.J, field.N, field.alpha) == (16, 7, 1.5)


def test_solve_stepping_and_custom_source(capsys):
    code = main(["solve", "--alpha", "1.3", "--mu-t", "0.5", "--mu-x", "0.0", "--J", "8", "--N", "3", "--solver", "stepping"])
    assert code == 0
    assert "J=8 N=3" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--alpha", "2.5"],
        ["solve", "--alpha", "1.5", "--mu-t", "0.5"],
        ["solve", "--alpha", "1.5", "--mu-t", "-1.5", "--mu-x", "0.0"],
        ["solve", "--alpha", "1.5", "--J", "0"],
        ["ml", "--alpha", "3.0", "--z", "1"],
        ["convergence", "--levels", "4-9"],
    ],
)
def test_configuration_errors_exit_2(argv):
    assert main(argv) == 2


def test_ml_overflow_exits_1():
    assert main(["ml", "--alpha", "1.5", "--z", "1e5"]) == 1


def test_convergence_command_with_config_file(capsys, tmp_path):
    config = tmp_path / "study.json"
    config.write_text(json.dumps({"levels": [2, 3], "J": 16, "ref-J": 32, "ref-N": 31, "e2-rule": "jump_quadrature"}))
    csv = tmp_path / "out.csv"
    code = main(["convergence", "--config", str(config), "--alpha", "1.5", "--csv", str(csv)])
    assert code == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 2 and out[0].startswith("alpha=1.5 space level=2")
    assert csv.exists()


def test_convergence_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["convergence", "--config", str(bad)]) == 2
    assert main(["convergence", "--config", str(tmp_path / "absent.json")]) == 2


def test_selftest_command(capsys):
    assert main(["selftest", "--suite", "semigroup"]) == 0
    assert "1 passed, 0 failed" in capsys.readouterr().out


def test_selftest_command_reports_injected_fault(capsys):
    assert main(["selftest", "--suite", "solver_equivalence", "--fault", "kappa1"]) == 1
    assert "0 passed, 1 failed" in capsys.readouterr().out


def test_unknown_command_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["plot"])
    assert info.value.code == 2
