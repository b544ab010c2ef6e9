import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pitcast.cli import main
from pitcast.errors import InputFormatError, ValidationError
from pitcast.factor import PortfolioSnapshot
from pitcast.fileio import (
    read_config,
    read_snapshot,
    read_snapshot_table,
    read_table,
    read_transition_matrix,
    read_ttc_curves,
    table_to_csv,
    write_snapshot,
    write_table,
    write_transition_matrix,
)
from pitcast.ttc import TransitionMatrix


@pytest.fixture
def snap_path(tmp_path):
    """Figure-4 style snapshot: 100 obligors at 3%, 20 defaults."""
    path = tmp_path / "snap.csv"
    write_snapshot(path, PortfolioSnapshot(np.full(100, 0.03), 20))
    return path


@pytest.fixture
def matrix_path(tmp_path):
    path = tmp_path / "matrix.csv"
    write_transition_matrix(
        path, TransitionMatrix(("A", "B", "D"), [[0.9, 0.08, 0.02], [0.05, 0.85, 0.10], [0, 0, 1]])
    )
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestValidateParams:
    def test_ar2(self, capsys):
        code, out, _ = run(capsys, "validate-params", "--ar2", "1.3", "-0.65")
        assert code == 0
        assert "innovation_variance=0.21902" in out and "spectral_period=10.46" in out

    def test_ar1_with_preset(self, capsys, tmp_path):
        code, out, _ = run(capsys, "validate-params", "--ar1", "0.8", "--rho", "residential-mortgage", "-o", tmp_path / "p.csv")
        assert code == 0 and "rho=0.15" in out
        table = read_table(tmp_path / "p.csv")
        assert dict(zip(table["parameter"], table["value"]))["innovation_variance"] == pytest.approx(0.36)

    def test_named_restriction(self, capsys):
        code, _, err = run(capsys, "validate-params", "--ar2", "0.5", "0.6")
        assert code == 2 and err.startswith("error[validation]:") and "a2 + a1 < 1" in err

    def test_atypical_note(self, capsys):
        _, out, _ = run(capsys, "validate-params", "--ar1", "0.3")
        assert "typical range" in out

    def test_nothing_to_validate(self, capsys):
        assert run(capsys, "validate-params")[0] == 2

    def test_unknown_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code != 0


class TestEstimateFactor:
    def test_point_estimate(self, capsys, snap_path, tmp_path):
        code, out, _ = run(capsys, "estimate-factor", "--snapshot", snap_path, "--rho", "0.15", "-o", tmp_path / "f.csv")
        assert code == 0 and "psi_hat=-2.85" in out
        assert read_table(tmp_path / "f.csv")["psi_hat"][0] == pytest.approx(-2.8527, abs=1e-4)

    def test_zero_defaults(self, capsys, tmp_path):
        path = tmp_path / "zero.csv"
        write_snapshot(path, PortfolioSnapshot(np.full(50, 0.03), 0))
        code, _, err = run(capsys, "estimate-factor", "--snapshot", path, "--rho", "0.15")
        assert code == 3 and "error[boundary-evidence]" in err and "pitcast posterior" in err

    def test_low_default_warning(self, capsys, tmp_path):
        path = tmp_path / "low.csv"
        write_snapshot(path, PortfolioSnapshot(np.full(100, 0.03), 3))
        code, _, err = run(capsys, "estimate-factor", "--snapshot", path, "--rho", "0.15")
        assert code == 0 and err.startswith("warning:")

    def test_missing_rho(self, capsys, snap_path):
        code, _, err = run(capsys, "estimate-factor", "--snapshot", snap_path)
        assert code == 2 and "--rho" in err

    def test_malformed_csv(self, capsys, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("obligor_id,ttc_pd,defaulted\na,0.03,0\nb,abc,1\n")
        code, _, err = run(capsys, "estimate-factor", "--snapshot", path, "--rho", "0.15")
        assert code == 4 and "error[io]" in err and "row 3" in err and "ttc_pd" in err

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "estimate-factor", "--snapshot", tmp_path / "nope.csv", "--rho", "0.15")[0] == 4


class TestPosterior:
    def test_counts(self, capsys, tmp_path):
        out_path = tmp_path / "post.csv"
        code, out, _ = run(
            capsys, "posterior", "--n", "1000", "--defaults", "200", "--pd-ttc", "0.03", "--rho", "0.15", "-o", out_path
        )
        assert code == 0 and "posterior mean=" in out
        df = read_table(out_path)
        assert list(df.columns) == ["psi", "prior", "posterior", "posterior_approx"]
        assert len(df) == 4001
        assert df["psi"][df["posterior"].idxmax()] == pytest.approx(-2.85, abs=0.05)

    def test_snapshot_with_zero_defaults(self, capsys, tmp_path):
        path = tmp_path / "zero.csv"
        write_snapshot(path, PortfolioSnapshot(np.full(50, 0.03), 0))
        code, _, _ = run(capsys, "posterior", "--snapshot", path, "--rho", "0.15", "-o", tmp_path / "p.csv")
        assert code == 0

    def test_grid_too_coarse(self, capsys, tmp_path):
        code, _, err = run(
            capsys, "posterior", "--n", "10", "--defaults", "2", "--pd-ttc", "0.03", "--rho", "0.15",
            "--grid-nodes", "500", "-o", tmp_path / "p.csv",
        )
        assert code == 2 and "1001" in err

    def test_incomplete_evidence(self, capsys, tmp_path):
        assert run(capsys, "posterior", "--n", "10", "--rho", "0.15", "-o", tmp_path / "p.csv")[0] == 2


class TestForecast:
    def test_point_ar1(self, capsys, snap_path, tmp_path):
        out_path = tmp_path / "fc.csv"
        code, out, _ = run(
            capsys, "forecast", "--snapshot", snap_path, "--rho", "0.15", "--mode", "point", "--ar1", "0.8",
            "--horizons", "10", "-o", out_path,
        )
        assert code == 0 and "pit[10]=" in out
        df = read_table(out_path)
        assert len(df) == 10 and list(df["horizon"]) == list(range(1, 11))
        pit = df["mean_marginal_pit_pd"].to_numpy()
        assert np.all(np.diff(np.abs(pit - 0.03)) < 0)
        assert pit[-1] < pit[0]

    def test_bayes_and_obligor_output(self, capsys, snap_path, tmp_path):
        code, _, _ = run(
            capsys, "forecast", "--snapshot", snap_path, "--rho", "0.15", "--mode", "bayes", "--ar1", "0.8",
            "--horizons", "5", "-o", tmp_path / "fc.csv", "--obligor-output", tmp_path / "ob.csv",
        )
        assert code == 0
        ob = read_table(tmp_path / "ob.csv")
        assert len(ob) == 500 and ob["obligor_id"].iloc[0] == "0"

    def test_ar2_bayes_unsupported(self, capsys, snap_path, tmp_path):
        code, _, err = run(
            capsys, "forecast", "--snapshot", snap_path, "--previous-snapshot", snap_path, "--rho", "0.15",
            "--mode", "bayes", "--ar2", "1.3", "-0.65", "-o", tmp_path / "fc.csv",
        )
        assert code == 2 and "AR(1)" in err

    def test_ar2_point(self, capsys, snap_path, tmp_path):
        code, _, _ = run(
            capsys, "forecast", "--snapshot", snap_path, "--previous-snapshot", snap_path, "--rho", "0.15",
            "--ar2", "1.3", "-0.65", "--horizons", "30", "-o", tmp_path / "fc.csv",
        )
        assert code == 0

    def test_matrix_grades(self, capsys, matrix_path, tmp_path):
        snap = tmp_path / "graded.csv"
        snap.write_text("obligor_id,ttc_pd,defaulted,grade\n1,0.02,1,A\n2,0.10,0,B\n3,0.02,0,A\n")
        code, _, _ = run(
            capsys, "forecast", "--snapshot", snap, "--matrix", matrix_path, "--rho", "0.15", "--ar1", "0.0",
            "--horizons", "4", "-o", tmp_path / "fc.csv", "--obligor-output", tmp_path / "ob.csv",
        )
        assert code == 0
        ob = read_table(tmp_path / "ob.csv")
        first = ob[ob["horizon"] == 2].set_index("obligor_id")["ttc_pd"]
        assert first["1"] == pytest.approx(13 / 490, rel=1e-12)

    def test_config_and_flag_precedence(self, capsys, snap_path, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# forecast defaults\nrho = 0.15\nar1 = 0.5\nhorizons = 3\n")
        run(capsys, "--config", cfg, "forecast", "--snapshot", snap_path, "-o", tmp_path / "a.csv")
        run(capsys, "--config", cfg, "forecast", "--snapshot", snap_path, "--ar1", "0.8", "--horizons", "4", "-o", tmp_path / "b.csv")
        a, b = read_table(tmp_path / "a.csv"), read_table(tmp_path / "b.csv")
        assert len(a) == 3 and len(b) == 4
        assert b["mean_marginal_pit_pd"][0] > a["mean_marginal_pit_pd"][0]

    def test_flag_process_replaces_config_process(self, capsys, snap_path, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("rho = 0.15\nar2 = 1.3, -0.65\n")
        code, _, _ = run(capsys, "--config", cfg, "forecast", "--snapshot", snap_path, "--ar1", "0.8", "-o", tmp_path / "a.csv")
        assert code == 0

    def test_unknown_config_key(self, capsys, snap_path, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("colour = blue\n")
        assert run(capsys, "--config", cfg, "forecast", "--snapshot", snap_path, "-o", tmp_path / "a.csv")[0] == 2

    def test_inputs_not_mutated(self, capsys, snap_path, tmp_path):
        before = snap_path.read_bytes()
        run(capsys, "forecast", "--snapshot", snap_path, "--rho", "0.15", "--ar1", "0.8", "-o", tmp_path / "a.csv")
        assert snap_path.read_bytes() == before


class TestProjectTtc:
    def test_all_live_grades(self, capsys, matrix_path, tmp_path):
        code, _, _ = run(capsys, "project-ttc", "--matrix", matrix_path, "--horizons", "5", "-o", tmp_path / "t.csv")
        assert code == 0
        df = read_table(tmp_path / "t.csv")
        assert set(df["grade"]) == {"A", "B"} and len(df) == 10

    def test_default_grade(self, capsys, matrix_path, tmp_path):
        code, _, err = run(capsys, "project-ttc", "--matrix", matrix_path, "--grade", "D", "-o", tmp_path / "t.csv")
        assert code == 2 and "default state" in err

    def test_bad_row_sum(self, capsys, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("A,D\nA,0.9,0.05\nD,0,1\n")
        code, _, err = run(capsys, "project-ttc", "--matrix", path, "-o", tmp_path / "t.csv")
        assert code == 2 and "row 0" in err


class TestSimulate:
    def test_path_and_defaults(self, capsys, tmp_path):
        code, out, _ = run(
            capsys, "simulate", "--ar1", "0.8", "--length", "200", "--seed", "4", "--pd-ttc", "0.03",
            "--n", "1000", "--rho", "0.15", "-o", tmp_path / "s.csv",
        )
        assert code == 0 and "double_crossing_period=" in out
        df = read_table(tmp_path / "s.csv")
        assert list(df.columns) == ["year", "psi", "pit_pd", "defaults", "default_rate"]

    def test_byte_identical(self, capsys, tmp_path):
        for name in ("a", "b"):
            run(capsys, "simulate", "--ar2", "1.3", "-0.65", "--length", "300", "--seed", "9", "-o", tmp_path / f"{name}.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_partial_default_options(self, capsys, tmp_path):
        code, _, _ = run(capsys, "simulate", "--ar1", "0.8", "--length", "20", "--n", "10", "--rho", "0.1", "-o", tmp_path / "s.csv")
        assert code == 2


class TestReplicateFigure:
    def test_forecast_figure(self, capsys, tmp_path):
        code, out, _ = run(capsys, "replicate-figure", "--figure", "4", "--seed", "1", "--horizons", "12", "-o", tmp_path / "f.csv")
        assert code == 0 and "figure 4" in out
        df = read_table(tmp_path / "f.csv")
        assert df["year"].iloc[-1] == 12
        assert df.loc[df["year"] <= 0, "forecast_bayes"].isna().all()

    def test_byte_identical(self, capsys, tmp_path):
        for name in ("a", "b"):
            run(capsys, "replicate-figure", "--figure", "2", "--seed", "5", "-o", tmp_path / f"{name}.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


class TestFileFormats:
    def test_snapshot_round_trip(self, tmp_path):
        snap = PortfolioSnapshot(np.array([0.0123456789012345, 0.2]), 1, ("x1", "x2"))
        write_snapshot(tmp_path / "s.csv", snap)
        back = read_snapshot(tmp_path / "s.csv")
        assert back.obligor_ids == ("x1", "x2") and back.defaults == 1
        np.testing.assert_allclose(back.ttc_pds, snap.ttc_pds, rtol=1e-11)

    def test_grade_column(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("obligor_id,ttc_pd,defaulted,grade\n1,0.02,1,A\n")
        assert read_snapshot_table(path)[1] == ["A"]

    def test_missing_column(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("obligor_id,ttc_pd\n1,0.02\n")
        with pytest.raises(InputFormatError, match="defaulted"):
            read_snapshot(path)

    def test_bad_default_flag(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("obligor_id,ttc_pd,defaulted\n1,0.02,2\n")
        with pytest.raises(InputFormatError, match="row 2"):
            read_snapshot(path)

    def test_out_of_range_pd_is_validation(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("obligor_id,ttc_pd,defaulted\n1,1.5,0\n")
        with pytest.raises(ValidationError):
            read_snapshot(path)

    def test_matrix_round_trip(self, matrix_path):
        m = read_transition_matrix(matrix_path)
        assert m.grades == ("A", "B", "D") and m.probs[1, 2] == 0.1

    def test_matrix_without_corner_cell(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("A,D\nA,0.97,0.03\nD,0,1\n")
        assert read_transition_matrix(path).grades == ("A", "D")

    def test_matrix_label_mismatch(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("A,D\nB,0.97,0.03\nD,0,1\n")
        with pytest.raises(InputFormatError, match="row 2"):
            read_transition_matrix(path)

    def test_ttc_curves(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text("obligor_id,horizon,ttc_pd\n7,2,0.04\n7,1,0.03\n")
        np.testing.assert_array_equal(read_ttc_curves(path)["7"].marginal_pds, [0.03, 0.04])

    def test_ttc_curve_gap(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text("obligor_id,horizon,ttc_pd\n7,1,0.03\n7,3,0.04\n")
        with pytest.raises(InputFormatError, match="without gaps"):
            read_ttc_curves(path)

    def test_config(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("# comment\nPrior-Mean = -0.5  # trailing\n\nrho=retail-high\n")
        assert read_config(path) == {"prior_mean": "-0.5", "rho": "retail-high"}

    def test_config_bad_line(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("rho 0.1\n")
        with pytest.raises(InputFormatError, match="row 1"):
            read_config(path)

    def test_nan_written_empty(self):
        assert table_to_csv(pd.DataFrame({"a": [1.0, math.nan], "b": [2, 3]})) == "a,b\n1,2\n,3\n"

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=20))
    def test_twelve_digit_round_trip(self, values):
        text = table_to_csv(pd.DataFrame({"x": values}))
        back = [float(s) for s in text.splitlines()[1:]]
        for v, b in zip(values, back):
            assert b == float(f"{v:.12g}")

    def test_table_round_trip(self, tmp_path):
        df = pd.DataFrame({"obligor_id": ["007", "8"], "horizon": [1, 2], "value": [1 / 3, 2e-17]})
        write_table(tmp_path / "t.csv", df)
        back = read_table(tmp_path / "t.csv")
        assert list(back["obligor_id"]) == ["007", "8"]
        np.testing.assert_allclose(back["value"], df["value"], rtol=1e-11)
