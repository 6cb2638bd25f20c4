import json

import pytest

from netcontrol.cli import main

FIG8 = "1 2\n2 3\n3 4\n4 5\n6 7\n7 8\n8 9\n9 10\n11 12\n12 13\n13 11\n1 3\n14\n"


@pytest.fixture
def fig8_file(tmp_path):
    path = tmp_path / "fig8.txt"
    path.write_text(FIG8)
    return str(path)


class TestGen:
    def test_er_writes_expected_count(self, tmp_path):
        out = tmp_path / "er.txt"
        assert main(["gen", "er", "--n", "1000", "--mu", "4", "--seed", "7", "--out", str(out)]) == 0
        lines = [l for l in out.read_text().splitlines() if l and not l.startswith("#")]
        edges = [l for l in lines if len(l.split()) >= 2]
        assert len(edges) == 2000

    def test_er_infeasible_exit_code(self, capsys):
        assert main(["gen", "er", "--n", "10", "--mu", "30"]) == 2
        assert "infeasible" in capsys.readouterr().err

    def test_ba_deterministic(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        main(["gen", "ba", "--n", "100", "--m", "3", "--seed", "7", "--out", str(a)])
        main(["gen", "ba", "--n", "100", "--m", "3", "--seed", "7", "--out", str(b)])
        assert a.read_text() == b.read_text()

    def test_usage_error_exit_code(self):
        assert main(["gen", "er", "--n", "10"]) == 1  # missing --mu


class TestCurve:
    def test_chain_of_four(self, tmp_path, capsys):
        graph = tmp_path / "chain.txt"
        graph.write_text("0 1\n1 2\n2 3\n")
        assert main(["curve", str(graph)]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out[0] == "M,rmax,frac_controllable,frac_drivers_normalized"
        assert out[1] == "1,4,1,1"
        assert len(out) == 2

    def test_edgeless_three(self, tmp_path, capsys):
        graph = tmp_path / "iso.txt"
        graph.write_text("0\n1\n2\n")
        assert main(["curve", str(graph)]) == 0
        rows = capsys.readouterr().out.strip().splitlines()[1:]
        assert rows == ["1,1,0.333333,0.333333", "2,2,0.666667,0.666667", "3,3,1,1"]

    def test_json_format(self, tmp_path, capsys):
        graph = tmp_path / "chain.txt"
        graph.write_text("0 1\n")
        assert main(["curve", str(graph), "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload[0]["rmax"] == 2

    def test_missing_file(self, capsys):
        assert main(["curve", "/nonexistent/graph.txt"]) == 1


class TestPlace:
    def test_edcp_worked_example(self, fig8_file, tmp_path):
        out = tmp_path / "placement.json"
        code = main(["place", fig8_file, "--algo", "edcp", "-M", "4", "-R", "12", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert {tuple(seg) for seg in payload["segments"]} == {
            (1, 2, 3), (4, 5), (6, 7, 8, 9), (11, 12, 13)
        }
        assert sorted(payload["drivers"]) == [1, 4, 6, 11]

    def test_elpgm_single_node(self, tmp_path, capsys):
        graph = tmp_path / "one.txt"
        graph.write_text("0\n")
        assert main(["place", str(graph), "--algo", "elpgm", "-M", "1", "-R", "1"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["drivers"] == [0]
        assert payload["controlled"] == [0]
        assert payload["E_exact"] == pytest.approx(0.5)

    def test_r_larger_than_graph(self, fig8_file):
        assert main(["place", fig8_file, "-M", "4", "-R", "20"]) == 2

    def test_m_larger_than_r(self, fig8_file):
        assert main(["place", fig8_file, "-M", "5", "-R", "4"]) == 2

    def test_fraction_resolution(self, fig8_file, tmp_path):
        out = tmp_path / "p.json"
        assert main(["place", fig8_file, "-M", "4", "--fraction", "0.85", "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert len(payload["controlled"]) == 12  # ceil(0.85 * 14)


class TestVerify:
    def test_edcp_output_verifies(self, fig8_file, tmp_path, capsys):
        placement = tmp_path / "p.json"
        main(["place", fig8_file, "-M", "4", "-R", "12", "--out", str(placement)])
        assert main(["verify", fig8_file, str(placement)]) == 0
        out = capsys.readouterr().out
        assert "controllable: true" in out
        residual = float(out.split("residual:")[1].strip())
        assert residual <= 1e-6

    def test_duplicate_driver_rejected(self, fig8_file, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"drivers": [1, 1], "controlled": [1, 2]}))
        assert main(["verify", fig8_file, str(bad)]) == 2

    def test_malformed_placement(self, fig8_file, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"nodes": [1]}))
        assert main(["verify", fig8_file, str(bad)]) == 1

    def test_wrong_direction_not_controllable(self, tmp_path, capsys):
        graph = tmp_path / "chain.txt"
        graph.write_text("0 1\n")
        placement = tmp_path / "p.json"
        placement.write_text(json.dumps({"drivers": [1], "controlled": [0]}))
        assert main(["verify", str(graph), str(placement)]) == 2
        assert "controllable: false" in capsys.readouterr().out

    def test_json_report(self, fig8_file, tmp_path, capsys):
        placement = tmp_path / "p.json"
        main(["place", fig8_file, "-M", "4", "-R", "12", "--out", str(placement)])
        assert main(["verify", fig8_file, str(placement), "--format", "json"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["controllable"] is True
        assert report["residual"] <= 1e-6


class TestBench:
    def test_small_grid(self, tmp_path):
        out = tmp_path / "bench.csv"
        code = main([
            "bench", "--network", "er", "--n", "40", "--mu", "4", "-M", "8",
            "--fractions", "0.5,0.75", "--seed", "1", "--out", str(out),
        ])
        assert code == 0
        rows = out.read_text().strip().splitlines()
        assert rows[0] == "network,n,edges,fraction,M,algorithm,E,wall_time_s"
        assert len(rows) == 1 + 2 * 2  # fractions x {edcp, naive}
        for row in rows[1:]:
            fields = row.split(",")
            assert fields[1] == "40"
            assert fields[5] in ("edcp", "naive")
            float(fields[6].replace("E", "e"))  # parseable cost

    def test_deterministic(self, tmp_path):
        args = ["bench", "--network", "er", "--n", "30", "--mu", "3", "-M", "6",
                "--fractions", "0.6", "--seed", "5"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(args + ["--out", str(a)])
        main(args + ["--out", str(b)])
        # wall-time column differs; compare everything else
        strip = lambda text: [row.rsplit(",", 1)[0] for row in text.splitlines()]
        assert strip(a.read_text()) == strip(b.read_text())

    def test_edcp_beats_naive_in_rows(self, tmp_path):
        out = tmp_path / "bench.csv"
        main(["bench", "--network", "er", "--n", "40", "--mu", "4", "-M", "8",
              "--fractions", "0.5,0.75", "--seed", "1", "--out", str(out)])
        rows = out.read_text().strip().splitlines()[1:]
        costs = {}
        for row in rows:
            fields = row.split(",")
            costs[(fields[3], fields[5])] = float(fields[6].replace("E", "e"))
        for frac in ("0.5", "0.75"):
            assert costs[(frac, "edcp")] <= costs[(frac, "naive")]


class TestScientificFormat:
    def test_cost_formatting(self):
        from netcontrol.cli import _format_cost

        assert _format_cost(23500.0) == "2.35E04"
        assert _format_cost(0.5) == "0.5"
        assert _format_cost(1.1e7) == "1.10E07"
