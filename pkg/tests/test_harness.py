"""Harness: configs, presets, reports, CLI subcommands, verify plumbing."""

import json
import os

import numpy as np
import pytest

from siac import dgsolver as dg
from siac import filtercore as fc
from siac.harness import cli, config, runner, tables, verify
from siac.harness.config import ConfigError, RunConfig, load_preset


TINY = {
    "name": "tiny",
    "problem": {
        "dim": 1,
        "initial": "sin_2pi_x",
        "speed": [1.0],
        "final_time": 0.25,
        "domain": [[0.0, 1.0]],
    },
    "degrees": [1],
    "elements": [8, 16],
    "cfl": {"1": 0.05},
    "filters": [{"name": "central_bspline", "basis": "box", "nodes": "standard"}],
}


class TestConfig:
    def test_roundtrip(self):
        cfg = RunConfig.from_dict(TINY)
        again = RunConfig.from_json(cfg.to_json())
        assert again == cfg

    def test_preset_names(self):
        names = config.preset_names()
        assert names == ["table1_general", "table3_compact", "table4_boundary", "table5_2d"]

    @pytest.mark.parametrize("name", ["table1_general", "table3_compact", "table4_boundary", "table5_2d"])
    def test_presets_parse(self, name):
        cfg = load_preset(name)
        assert cfg.name == name
        assert cfg.reference and cfg.tolerances
        assert cfg.reference_value("dg", cfg.degrees[0], cfg.elements[0]) is not None

    def test_unknown_preset(self):
        with pytest.raises(ConfigError, match="unknown preset"):
            load_preset("table9")

    def test_bad_policy_named(self):
        d = dict(TINY, policy="reflecting")
        with pytest.raises(ConfigError, match="policy"):
            RunConfig.from_dict(d)

    def test_bad_epsilon_named(self):
        d = dict(TINY, filters=[{"name": "f", "nodes": "compact", "epsilon": "3/2"}])
        with pytest.raises(ConfigError, match=r"filters\[f\].epsilon"):
            RunConfig.from_dict(d)

    def test_bad_initial_named(self):
        d = dict(TINY, problem=dict(TINY["problem"], initial="gaussian"))
        cfg = RunConfig.from_dict(d)
        with pytest.raises(ConfigError, match="problem.initial"):
            cfg.problem.build()

    def test_elements_monotone(self):
        d = dict(TINY, elements=[16, 8])
        with pytest.raises(ConfigError, match="elements"):
            RunConfig.from_dict(d)

    def test_degree_range(self):
        d = dict(TINY, degrees=[5])
        with pytest.raises(ConfigError, match="degrees"):
            RunConfig.from_dict(d)

    def test_invalid_json_position(self):
        with pytest.raises(ConfigError, match="line"):
            RunConfig.from_json("{broken")

    def test_dim_mismatch(self):
        d = dict(TINY, problem=dict(TINY["problem"], initial="sin_x_plus_y"))
        cfg = RunConfig.from_dict(d)
        with pytest.raises(ConfigError, match="dimensional"):
            cfg.problem.build()


@pytest.fixture(scope="module")
def report():
    return runner.run_convergence(RunConfig.from_dict(TINY))


class TestReport:

    def test_orders(self, report):
        assert report.cell("dg", 1, 8, "order") is None
        order = report.cell("dg", 1, 16, "order")
        assert order == pytest.approx(2.0, abs=0.4)

    def test_csv_header_and_rows(self, report):
        text = tables.report_csv(report)
        lines = text.strip().split("\n")
        assert lines[0] == "degree,elements,dg_error,dg_order,central_bspline_error,central_bspline_order"
        assert len(lines) == 3
        first = lines[1].split(",")
        assert first[0] == "1" and first[1] == "8" and first[3] == ""

    def test_csv_floats_roundtrip(self, report):
        text = tables.report_csv(report)
        cell = text.strip().split("\n")[1].split(",")[2]
        assert float(cell) == report.cell("dg", 1, 8)

    def test_text_table_structure(self, report):
        txt = tables.report_text(report)
        assert "Degree" in txt and "Elements" in txt
        assert "k = 1" in txt
        assert "central bspline" in txt
        assert "Order" in txt

    def test_single_row_has_empty_order(self):
        cfg = RunConfig.from_dict(dict(TINY, elements=[8]))
        rep = runner.run_convergence(cfg)
        txt = tables.report_csv(rep)
        assert txt.strip().split("\n")[1].split(",")[3] == ""

    def test_determinism(self):
        cfg = RunConfig.from_dict(TINY)
        a = tables.report_csv(runner.run_convergence(cfg))
        b = tables.report_csv(runner.run_convergence(cfg))
        assert a == b

    def test_observed_order_general_ratio(self):
        assert runner.observed_order(1.0, 0.125, 10, 20) == pytest.approx(3.0)
        assert runner.observed_order(1.0, 1.0 / 81.0, 10, 30) == pytest.approx(4.0)


class TestCLI:
    def test_build_filter_frozen_coefficients(self, tmp_path, capsys):
        out = tmp_path / "k1.json"
        rc = cli.main(["build-filter", "--k", "1", "--basis", "box", "--out", str(out)])
        assert rc == 0
        captured = capsys.readouterr().out
        assert "-1/12 7/6 -1/12" in captured
        assert "support width: 4" in captured
        kern = fc.FilterKernel.load(out)
        assert np.allclose(kern.coefficients, [-1 / 12, 7 / 6, -1 / 12])

    def test_build_filter_compact_support_printed(self, tmp_path, capsys):
        out = tmp_path / "k3.json"
        rc = cli.main(
            ["build-filter", "--k", "3", "--nodes", "compact", "--epsilon", "1/6", "--out", str(out)]
        )
        assert rc == 0
        assert "support width: 5" in capsys.readouterr().out

    def test_build_filter_epsilon_zero_fails(self, capsys):
        rc = cli.main(["build-filter", "--k", "2", "--nodes", "compact", "--epsilon", "0"])
        assert rc == 2
        assert "0 < epsilon <= 1" in capsys.readouterr().err

    def test_convergence_writes_outputs(self, tmp_path, capsys):
        cfg_path = tmp_path / "tiny.json"
        cfg_path.write_text(json.dumps(dict(TINY, output_dir=str(tmp_path / "out"))))
        rc = cli.main(["convergence", "--config", str(cfg_path)])
        assert rc == 0
        assert (tmp_path / "out" / "tiny.csv").exists()
        assert (tmp_path / "out" / "tiny.txt").exists()
        assert "k = 1" in capsys.readouterr().out

    def test_convergence_determinism_byte_identical(self, tmp_path):
        cfg_path = tmp_path / "tiny.json"
        for sub in ("a", "b"):
            cfg_path.write_text(json.dumps(dict(TINY, output_dir=str(tmp_path / sub))))
            assert cli.main(["convergence", "--config", str(cfg_path)]) == 0
        a = (tmp_path / "a" / "tiny.csv").read_bytes()
        b = (tmp_path / "b" / "tiny.csv").read_bytes()
        assert a == b

    def test_run_dg_then_filter(self, tmp_path, capsys):
        cfg_path = tmp_path / "tiny.json"
        cfg_path.write_text(json.dumps(dict(TINY, output_dir=str(tmp_path / "out"))))
        field_path = tmp_path / "field.json"
        rc = cli.main(["run-dg", "--config", str(cfg_path), "--N", "16", "--field-out", str(field_path)])
        assert rc == 0
        assert field_path.exists()
        rc = cli.main(
            ["filter", "--config", str(cfg_path), "--field", str(field_path), "--csv-name", "f.csv"]
        )
        assert rc == 0
        csv = (tmp_path / "out" / "f.csv").read_text().strip().split("\n")
        assert csv[0] == "x,u_exact,u_h,u_star,abs_err_h,abs_err_star,policy"
        assert csv[1].endswith("symmetric")
        # element-major: 16 elements x (k+3)=4 points
        assert len(csv) == 1 + 16 * 4

    def test_pointwise_outputs_and_markers(self, tmp_path, capsys):
        cfg_path = tmp_path / "tiny.json"
        cfg_path.write_text(
            json.dumps(
                dict(TINY, policy="position_dependent", output_dir=str(tmp_path / "out"))
            )
        )
        rc = cli.main(["pointwise", "--config", str(cfg_path), "--N", "16", "--points", "6"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "position-dependent zone" in out
        files = os.listdir(tmp_path / "out")
        assert any(f.endswith(".csv") for f in files)
        assert any(f.endswith(".plt") for f in files)
        plt = next(f for f in files if f.endswith(".plt"))
        script = (tmp_path / "out" / plt).read_text()
        assert "plot" in script and "arrow" in script

    def test_pointwise_exact_column_at_t0(self, tmp_path):
        tiny0 = dict(TINY, problem=dict(TINY["problem"], final_time=0.0), output_dir=str(tmp_path))
        cfg = RunConfig.from_dict(tiny0)
        data = runner.pointwise_data(cfg, 1, 8, pts_per_element=4)
        u0 = np.sin(2 * np.pi * data["x"])
        assert np.array_equal(data["u_exact"], u0)

    def test_pointwise_error_scales(self, tmp_path):
        # dense-grid max errors: DG around 1e-4, filtered around 1e-7 for k=2, N=40
        cfg = RunConfig.from_dict(
            dict(
                TINY,
                degrees=[2],
                elements=[40],
                cfl={"2": 0.05},
                problem=dict(TINY["problem"], final_time=1.0),
            )
        )
        data = runner.pointwise_data(cfg, 2, 40)
        assert 1e-5 < float(np.max(data["dg_error"])) < 1e-3
        assert 1e-8 < float(np.max(data["filtered_error"]["central_bspline"])) < 1e-6

    def test_unknown_config_is_error(self, capsys):
        rc = cli.main(["convergence", "--config", "not_a_preset"])
        assert rc == 2
        assert "unknown preset" in capsys.readouterr().err


class TestVerifyPlumbing:
    def test_corrupted_kernel_named_in_failure(self):
        kern = fc.build_filter(fc.FilterConfig(k=1, basis="box"))
        bad = fc.FilterKernel(
            k=kern.k,
            basis=kern.basis,
            basis_kind=kern.basis_kind,
            nodes=kern.nodes,
            coefficients=kern.coefficients + np.array([0.0, 0.01, 0.0]),
            coefficients_exact=None,
            scaling=1.0,
        )
        results = verify.reproduction_checks({"good/k=1": kern, "bad/k=1": bad}, np.linspace(-2, 2, 9))
        by_name = {r.name: r for r in results}
        assert by_name["criterion-7/reproduction good/k=1"].passed
        assert not by_name["criterion-7/reproduction bad/k=1"].passed

    def test_check_result_line(self):
        line = verify.CheckResult("x", False, "boom").line()
        assert line.startswith("FAIL") and "boom" in line

    def test_smoothness_check_runs(self):
        ctx = verify.VerifyContext(quick=True)
        results = verify.check_smoothness(ctx)
        assert len(results) == 1 and results[0].passed

    def test_property2_residual_small(self):
        assert verify.property2_residual() < 1e-10

    def test_quick_context_element_list(self):
        assert verify.VerifyContext(quick=True).elements_1d() == (20, 40)
        assert verify.VerifyContext().elements_1d() == (20, 40, 80)
