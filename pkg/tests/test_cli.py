import polars as pl
import pytest
from conftest import SCENARIO_DIR

from cli.commands import check_rows, run_scenario
from cli.scenario import SweepSpec, Variant, load_scenario, scenario_from_mapping, scenario_from_text
from cli.tables import TRAILER_MARKER, format_cell, read_output, render_csv, rows_to_frame
from cli.verify import verify_file
from main import EXIT_CONFIG, EXIT_INVARIANT, EXIT_OK, EXIT_SOLVER, main
from utils.errors import ConfigError, InvariantViolation

SCENARIOS = sorted(SCENARIO_DIR.glob("*.txt"))

LINEAR = {
    "demand.family": "linear",
    "demand.c": "1",
    "demand.m": "0.5",
    "solver.b": "1",
}

#######################################################################
## Scenarios ##########################################################
#######################################################################


def test_scenario_defaults():
    scenario = scenario_from_mapping({**LINEAR, "solver.variant": "first_order"})
    assert scenario.variant == Variant.FIRST_ORDER
    assert scenario.number("tau") == 1.0
    assert scenario.tol == 1e-12
    assert scenario.b == 1.0
    assert scenario.demand().a_max == pytest.approx(3.96)
    resolved = scenario.resolved()
    assert list(resolved) == sorted(resolved)
    assert resolved["solver.variant"] == "first_order"


def test_learn_tolerance_default():
    scenario = scenario_from_mapping({**LINEAR, "solver.variant": "learn", "solver.prior": "1"})
    assert scenario.tol == 1e-10
    assert scenario.prior() == 1.0


@pytest.mark.parametrize(
    "values",
    [
        {**LINEAR, "demand.family": "cubic", "solver.variant": "ree"},
        {**LINEAR, "solver.variant": "ree", "demand.kappa": "1"},
        {"demand.family": "linear", "demand.c": "1", "solver.variant": "ree"},
        {**LINEAR, "solver.variant": "ree", "solver.colour": "red"},
        {**LINEAR, "solver.variant": "ree", "plot.kind": "line"},
        {**LINEAR, "solver.variant": "ree", "solver.tol": "-1"},
        {**LINEAR, "solver.variant": "ree", "solver.b": "one"},
        {**LINEAR, "solver.variant": "nash"},
        {**LINEAR},
        {
            **LINEAR,
            "solver.variant": "first_order",
            "sweep.parameter": "delta_b",
            "sweep.lo": "0",
            "sweep.hi": "1",
            "sweep.steps": "3",
        },
        {
            **LINEAR,
            "solver.variant": "first_order",
            "sweep.parameter": "tau",
            "sweep.lo": "2",
            "sweep.hi": "1",
            "sweep.steps": "3",
        },
        {
            **LINEAR,
            "solver.variant": "first_order",
            "sweep.parameter": "tau",
            "sweep.lo": "0",
            "sweep.hi": "1",
            "sweep.steps": "0",
        },
        {**LINEAR, "solver.variant": "ree", "output.format": "parquet"},
    ],
)
def test_invalid_scenarios(values):
    with pytest.raises(ConfigError):
        scenario_from_mapping(values)


def test_scenario_accessors_raise_config_errors():
    scenario = scenario_from_mapping({**LINEAR, "solver.variant": "learn", "solver.policy": "up"})
    with pytest.raises(ConfigError):
        scenario.policy()
    with pytest.raises(ConfigError):
        scenario.prior()
    with pytest.raises(ConfigError):
        scenario.population()
    random = scenario_from_mapping(
        {**LINEAR, "solver.variant": "learn", "solver.policy": "random:42"}
    )
    assert random.policy() == ("random", 42)


def test_sweep_values():
    assert SweepSpec("tau", 0.5, 2.0, 4).values() == [0.5, 1.0, 1.5, 2.0]
    assert SweepSpec("tau", 0.5, 2.0, 1).values() == [0.5]


def test_scenario_text_round_trip():
    scenario = load_scenario(SCENARIO_DIR / "first_order_tau_sweep.txt")
    text = "\n".join(f"{k} = {v}" for k, v in scenario.resolved().items())
    assert scenario_from_text(text).resolved() == scenario.resolved()


def test_missing_scenario_file(tmp_path):
    with pytest.raises(ConfigError):
        load_scenario(tmp_path / "missing.txt")


#######################################################################
## Tables #############################################################
#######################################################################


def test_format_cell():
    assert format_cell(1 / 3) == "0.33333333333333331"
    assert format_cell(True) == "true"
    assert format_cell(None) is None
    assert format_cell(Variant.REE) == "ree"
    assert format_cell(3) == "3"


def test_csv_trailer(tmp_path):
    df = rows_to_frame([{"a": 1.5, "b": None}], ["a", "b"])
    text = render_csv(df, {"solver.variant": "ree"}, ["a note"])
    assert text.splitlines() == ["a,b", "1.5,", "# a note", TRAILER_MARKER, "# solver.variant = ree"]
    path = tmp_path / "out.csv"
    path.write_text(text)
    read, trailer = read_output(path)
    assert read.columns == ["a", "b"]
    assert read["a"].to_list() == ["1.5"]
    assert trailer == "solver.variant = ree"


def test_check_rows_rejects_large_residuals():
    df = rows_to_frame([{"residual": 1e-3}], ["residual"])
    with pytest.raises(InvariantViolation) as excinfo:
        check_rows(df)
    assert excinfo.value.row == {"residual": "0.001"}
    assert check_rows(rows_to_frame([{"residual": 1e-14}, {}], ["residual"])) == 1


#######################################################################
## Runs ###############################################################
#######################################################################


def test_first_order_tau_sweep():
    df, notes = run_scenario(load_scenario(SCENARIO_DIR / "first_order_tau_sweep.txt"))
    assert df.height == 8
    assert df.group_by("tau").len()["len"].to_list() == [2, 2, 2, 2]
    assert (df["residual"].cast(pl.Float64) <= 1e-10).all()
    assert (df["valid"] == "true").all()
    assert notes == []


def test_param_change_sweep_loses_the_elevated_branch():
    df, notes = run_scenario(load_scenario(SCENARIO_DIR / "param_change_delta_b_sweep.txt"))
    numeric = df.with_columns(pl.col("delta_b", "delta_A").cast(pl.Float64))
    above = numeric.filter(pl.col("delta_b") > 1.0)
    below = numeric.filter((pl.col("delta_b") > 0.0) & (pl.col("delta_b") < 1.0))
    assert above.height > 0
    assert (above["delta_A"] < 0).all()
    assert (below["regime"] == "Elevated").any()
    assert any("Elevated" in note for note in notes)


def test_failing_grid_point_does_not_abort_the_sweep():
    scenario = scenario_from_mapping(
        {
            **LINEAR,
            "solver.variant": "param_change",
            "solver.delta_b": "0.5",
            "sweep.parameter": "tau",
            "sweep.lo": "0",
            "sweep.hi": "2",
            "sweep.steps": "3",
        }
    )
    df, _ = run_scenario(scenario)
    numeric = df.with_columns(pl.col("tau").cast(pl.Float64))
    failed = numeric.filter(pl.col("tau") == 0.0)
    assert failed.height == 1
    assert failed["valid"].to_list() == ["false"]
    assert failed["reason"].to_list()[0].startswith("ArgError")
    rest = numeric.filter(pl.col("tau") > 0.0)
    assert sorted(set(rest["tau"].to_list())) == [1.0, 2.0]
    assert (rest["valid"] == "true").any()
    assert check_rows(df) > 0

def test_bounds_rows():
    df, _ = run_scenario(load_scenario(SCENARIO_DIR / "bounds_linear.txt"))
    rows = {row["quantity"]: row for row in df.iter_rows(named=True)}
    assert float(rows["alt_delta_b1"]["value"]) == pytest.approx(2.5, abs=1e-10)
    assert rows["alt_delta_b2"]["valid"] == "false"
    assert float(rows["policy_existence"]["value"]) == pytest.approx(1.0, abs=1e-10)
    assert 0.0 < float(rows["policy_sign_change"]["value"]) < 1.0


@pytest.mark.parametrize("scenario", SCENARIOS, ids=lambda p: p.stem)
def test_scenarios_are_deterministic_and_verify(scenario, tmp_path):
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    assert main(["sweep", str(scenario), "--out", str(first)]) == EXIT_OK
    assert main(["sweep", str(scenario), "--out", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    assert verify_file(first) > 0
    assert main(["verify", str(first)]) == EXIT_OK


def test_direct_command_matches_the_scenario_file(tmp_path):
    direct, swept = tmp_path / "direct.csv", tmp_path / "swept.csv"
    flags = ["--family", "linear", "--c", "1", "--m", "0.5", "--b", "1"]
    assert main(["ree", *flags, "--out", str(direct)]) == EXIT_OK
    assert main(["sweep", str(SCENARIO_DIR / "ree_linear.txt"), "--out", str(swept)]) == EXIT_OK
    assert direct.read_bytes() == swept.read_bytes()


def test_polyeq_command(tmp_path):
    out = tmp_path / "alt.csv"
    flags = ["--family", "linear", "--c", "1", "--m", "0.5", "--b", "1"]
    assert main(["polyeq", "alt-discount", *flags, "--delta-b", "0.1", "--out", str(out)]) == EXIT_OK
    df, _ = read_output(out)
    assert df.height == 2
    assert set(df["equation"]) == {"alt_regime1", "alt_regime2"}


def test_learn_and_asyminfo_commands(tmp_path):
    learn, asym = tmp_path / "learn.csv", tmp_path / "asym.csv"
    flags = ["--family", "exp_convex", "--c", "1", "--alpha", "1"]
    assert main(["learn", *flags, "--prior", "0.1", "--out", str(learn)]) == EXIT_OK
    assert main(["asyminfo", *flags, "--density", "point:0.3", "--out", str(asym)]) == EXIT_OK
    summary = read_output(learn)[0].filter(pl.col("kind") == "summary")
    assert summary["converged"].to_list() == ["true"]
    assert verify_file(asym) == 1


def test_alternate_learning_command_stops_at_the_domain(tmp_path):
    out = tmp_path / "alternate.csv"
    flags = ["--family", "exp_convex", "--c", "1", "--alpha", "1", "--prior", "0.1"]
    assert main(["learn", *flags, "--policy", "alternate", "--out", str(out)]) == EXIT_OK
    summary = read_output(out)[0].filter(pl.col("kind") == "summary")
    assert summary["converged"].to_list() == ["false"]
    assert "outside demand domain" in summary["note"].to_list()[0]


#######################################################################
## Exit codes #########################################################
#######################################################################


def test_malformed_config_exits_2(tmp_path):
    scenario = tmp_path / "bad.txt"
    scenario.write_text("demand.family = cubic\ndemand.c = 1\nsolver.variant = ree\n")
    out = tmp_path / "out.csv"
    assert main(["sweep", str(scenario), "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()


def test_solver_error_exits_3(tmp_path):
    out = tmp_path / "out.csv"
    flags = ["--family", "linear", "--c", "1", "--m", "0.5", "--b", "1", "--a-max", "1"]
    assert main(["ree", *flags, "--out", str(out)]) == EXIT_SOLVER
    assert not out.exists()


def test_tampered_file_exits_4(tmp_path, capsys):
    out = tmp_path / "ree.csv"
    assert main(["sweep", str(SCENARIO_DIR / "ree_linear.txt"), "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    cells = lines[1].split(",")
    cells[1] = "1.5"
    lines[1] = ",".join(cells)
    out.write_text("\n".join(lines) + "\n")
    assert main(["verify", str(out)]) == EXIT_INVARIANT
    assert "offending row" in capsys.readouterr().err


def test_verify_prints_the_row_count(tmp_path, capsys):
    out = tmp_path / "ree.csv"
    main(["sweep", str(SCENARIO_DIR / "ree_linear.txt"), "--out", str(out)])
    capsys.readouterr()
    assert main(["verify", str(out)]) == EXIT_OK
    assert capsys.readouterr().out == "verified 1 rows\n"
