"""Command-line interface: records, formats, determinism, exit codes."""

import io
import json
import re

import pytest

from trunkpool import erlang_b
from trunkpool.cli import EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, main


def run_cli(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


@pytest.fixture()
def intro_scenario(tmp_path):
    path = tmp_path / "intro.json"
    path.write_text("""
    {"system": {"n1": 85, "n2": 59, "lambda1": 88.0, "lambda2": 70.0,
                "mu1": 1.0, "mu2": 1.0},
     "model": "bo", "point": {"k1": 85, "k2": 59}}
    """)
    return str(path)


@pytest.fixture()
def table1_scenario(tmp_path):
    path = tmp_path / "table1.json"
    path.write_text("""
    {"system": {"n1": 100, "n2": 100, "standalone_b1": "6%",
                "standalone_b2": "1%", "mu1": 1.0, "mu2": 1.0},
     "model": "bo"}
    """)
    return str(path)


@pytest.fixture()
def sim_scenario(tmp_path):
    path = tmp_path / "sim.json"
    path.write_text("""
    {"system": {"n1": 6, "n2": 6, "lambda1": 5.0, "lambda2": 5.0,
                "mu1": 1.0, "mu2": 1.0},
     "model": "bo", "point": {"k1": 2.5, "k2": 3.0},
     "sim": {"seed": 11, "replications": 5, "warmup_arrivals": 2000,
             "measured_arrivals": 20000}}
    """)
    return str(path)


class TestBlock:
    def test_full_pooling_record(self, intro_scenario):
        code, out = run_cli("block", "--scenario", intro_scenario)
        assert code == EXIT_OK
        rec = json.loads(out)
        pooled = erlang_b(144, 158.0)
        assert rec["command"] == "block"
        assert rec["b1"] == pytest.approx(pooled, rel=1e-15)
        assert rec["b2"] == pytest.approx(pooled, rel=1e-15)

    def test_seventeen_significant_digits(self, intro_scenario):
        _, out = run_cli("block", "--scenario", intro_scenario)
        raw = re.search(r'"b1": ([0-9.eE+-]+)', out).group(1)
        # the printed text round-trips to the exact emitted double
        assert float(raw) == json.loads(out)["b1"]
        digits = raw.replace(".", "").lstrip("0")
        assert len(digits) >= 16

    def test_deterministic(self, intro_scenario):
        a = run_cli("block", "--scenario", intro_scenario)
        b = run_cli("block", "--scenario", intro_scenario)
        assert a == b


class TestPareto:
    def test_summary_and_rows(self, table1_scenario):
        code, out = run_cli("pareto", "--scenario", table1_scenario,
                            "--samples", "21")
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        summary = json.loads(lines[0])
        assert summary["case"] == "ONLY_P1_BENEFITS"
        rows = [json.loads(line) for line in lines[1:]]
        assert len(rows) == 21
        b1 = [r["b1"] for r in rows]
        # non-decreasing up to last-ulp wobble: on a large system the
        # differences fall below double resolution wherever a cap is
        # effectively never reached
        assert all(y >= x * (1.0 - 1e-14) for x, y in zip(b1, b1[1:]))
        assert b1[-1] > b1[0]

    def test_sweep_strictly_monotone_small_system(self, tmp_path):
        path = tmp_path / "small.json"
        path.write_text("""
        {"system": {"n1": 7, "n2": 5, "lambda1": 6.0, "lambda2": 4.5,
                    "mu1": 1.0, "mu2": 1.0}, "model": "bo"}
        """)
        _, out = run_cli("pareto", "--scenario", str(path), "--samples", "41")
        rows = [json.loads(line) for line in out.strip().splitlines()[1:]]
        b1 = [r["b1"] for r in rows]
        b2 = [r["b2"] for r in rows]
        assert all(x < y for x, y in zip(b1, b1[1:]))
        assert all(x > y for x, y in zip(b2, b2[1:]))

    def test_csv_table(self, table1_scenario):
        code, out = run_cli("pareto", "--scenario", table1_scenario,
                            "--samples", "5", "--out", "csv")
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        comments = [l for l in lines if l.startswith("#")]
        assert any("case" in c for c in comments)
        table = [l for l in lines if not l.startswith("#")]
        assert table[0] == "t,x1,x2,b1,b2,b_overall"
        assert len(table) == 6


class TestBargain:
    def test_all_concepts(self, table1_scenario):
        code, out = run_cli("bargain", "--scenario", table1_scenario,
                            "--concepts", "nbs,ksbs,es,us,lognbs,logksbs,loges")
        assert code == EXIT_OK
        recs = [json.loads(line) for line in out.strip().splitlines()]
        assert [r["concept"] for r in recs] == [
            "nbs", "ksbs", "es", "us", "lognbs", "logksbs", "loges"]
        by_name = {r["concept"]: r for r in recs}
        assert by_name["us"]["share2"] == pytest.approx(13.09, abs=0.05)
        assert by_name["nbs"]["share2"] == pytest.approx(5.52, abs=0.05)
        assert all(r["share1"] == 100 for r in recs)

    def test_unknown_concept(self, table1_scenario):
        code, _ = run_cli("bargain", "--scenario", table1_scenario,
                          "--concepts", "nbs,voodoo")
        assert code == EXIT_INPUT


class TestQed:
    def test_ratio_reported(self, tmp_path):
        path = tmp_path / "qed.json"
        path.write_text("""
        {"system": {"n1": 200, "n2": 200, "standalone_b1": 0.05,
                    "standalone_b2": 0.01, "mu1": 1.0, "mu2": 1.0},
         "point": {"k1": 20, "k2": 20}}
        """)
        code, out = run_cli("qed", "--scenario", str(path))
        assert code == EXIT_OK
        rec = json.loads(out)
        assert rec["n_scale"] == 200
        assert 0.9 <= rec["ratio1"] <= 1.1
        assert 0.9 <= rec["ratio2"] <= 1.1
        assert rec["b1_exact"] == pytest.approx(rec["ratio1"] * rec["b1_approx"])

    def test_exact_suppressed_beyond_limit(self, tmp_path):
        path = tmp_path / "qed.json"
        path.write_text("""
        {"system": {"n1": 200, "n2": 200, "standalone_b1": 0.05,
                    "standalone_b2": 0.01, "mu1": 1.0, "mu2": 1.0},
         "point": {"k1": 20, "k2": 20}}
        """)
        code, out = run_cli("qed", "--scenario", str(path), "--exact-limit", "100")
        assert code == EXIT_OK
        rec = json.loads(out)
        assert rec["b1_exact"] is None and rec["ratio1"] is None

    def test_rejects_probabilistic_point(self, tmp_path):
        path = tmp_path / "qed.json"
        path.write_text("""
        {"system": {"n1": 20, "n2": 20, "lambda1": 16.0, "lambda2": 16.0,
                    "mu1": 1.0, "mu2": 1.0},
         "point": {"x1": 0.5, "x2": 0.5}}
        """)
        code, _ = run_cli("qed", "--scenario", str(path))
        assert code == EXIT_INPUT


class TestSimulate:
    def test_record_and_seed_override(self, sim_scenario):
        code, out = run_cli("simulate", "--scenario", sim_scenario)
        assert code == EXIT_OK
        rec = json.loads(out)
        assert rec["seed"] == 11
        assert 0.0 < rec["b1"] < 1.0 and rec["ci99_b1"] > 0.0

        code, out2 = run_cli("simulate", "--scenario", sim_scenario,
                             "--seed", "99")
        rec2 = json.loads(out2)
        assert rec2["seed"] == 99
        assert rec2["b1"] != rec["b1"]

    def test_deterministic_given_seed(self, sim_scenario):
        _, a = run_cli("simulate", "--scenario", sim_scenario)
        _, b = run_cli("simulate", "--scenario", sim_scenario)
        ra, rb = json.loads(a), json.loads(b)
        ra.pop("wall_time_s")
        rb.pop("wall_time_s")
        assert ra == rb


class TestInvertErlang:
    def test_roundtrip_record(self):
        code, out = run_cli("invert-erlang", "--servers", "85",
                            "--target", "0.1")
        assert code == EXIT_OK
        rec = json.loads(out)
        assert rec["load"] == pytest.approx(88.0, abs=0.5)
        assert rec["achieved"] == pytest.approx(0.1, abs=1e-10)

    def test_bad_target(self):
        code, _ = run_cli("invert-erlang", "--servers", "85", "--target", "1.5")
        assert code == EXIT_INPUT


class TestExitCodes:
    def test_missing_file(self):
        code, _ = run_cli("block", "--scenario", "/nonexistent.json")
        assert code == EXIT_INPUT

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        code, _ = run_cli("block", "--scenario", str(path))
        assert code == EXIT_INPUT

    def test_missing_point(self, table1_scenario):
        code, _ = run_cli("block", "--scenario", table1_scenario)
        assert code == EXIT_INPUT

    def test_model_point_conflict(self, intro_scenario):
        code, _ = run_cli("block", "--scenario", intro_scenario,
                          "--model", "prob")
        assert code == EXIT_INPUT
