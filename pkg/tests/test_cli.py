import json

import pandas as pd
import pytest

from resurgent_pi.cli import cli
from resurgent_pi.exact_coeffs import exact_coeffs


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


@pytest.fixture
def cached(cache_file):
    return ["--cache", cache_file, "--max-n", "120"]


def test_coefficient_lookup(capsys, cached):
    code, out = run(capsys, "coeffs", "--kind", "c", "--n", "7", *cached)
    assert code == cli.EXIT_OK
    assert json.loads(out)["value"] == "7945866428953600"

    code, out = run(capsys, "coeffs", "--kind", "a", "--n", "1", *cached)
    assert json.loads(out)["value"] == "-1/48"

    code, out = run(capsys, "coeffs", "--kind", "q", "--n", "3", *cached)
    report = json.loads(out)
    assert report["value"] == "0" and report["z_exponent"] == -13


def test_coefficient_listing(capsys, cached):
    code, out = run(capsys, "coeffs", "--kind", "m", "--n", "4", "--upto", *cached)
    assert code == cli.EXIT_OK
    assert [row["value"] for row in json.loads(out)["rows"]] == ["1/13", "1", "14", "210", "3346"]


def test_coefficients_create_cache(capsys, tmp_path):
    path = tmp_path / "fresh.txt"
    code, _ = run(capsys, "coeffs", "--kind", "f+", "--n", "1", "--cache", str(path))
    assert code == cli.EXIT_OK
    assert exact_coeffs.load_table(str(path)).max_n >= 1


def test_borel_singularities(capsys, cached):
    code, out = run(capsys, "borel-sing", "--z", "1", "--radius-order", "100", *cached)
    assert code == cli.EXIT_OK
    report = json.loads(out)
    assert report["error"] <= 0.005
    assert report["pade_order"] == [20, 20]


def test_turning_point_is_a_usage_error(capsys, cached):
    code, _ = run(capsys, "borel-sing", "--t", "0", *cached)
    assert code == cli.EXIT_USAGE


def test_stokes_graph_is_deterministic(capsys, tmp_path):
    first, second = tmp_path / "first.json", tmp_path / "second.json"
    assert cli.main(["stokes-graph", "--alpha", "0", "-o", str(first)]) == cli.EXIT_OK
    assert cli.main(["stokes-graph", "--alpha", "0", "-o", str(second)]) == cli.EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    graph = json.loads(first.read_text())
    assert len(graph["tau_lines"]) == 5 and len(graph["z_lines"]) == 10
    assert graph["tau_lines"][0] == 0.0


def test_foliation_csv(capsys, tmp_path):
    target = tmp_path / "leaves.csv"
    code = cli.main(["foliation", "--alpha", "0", "--start", "1", "--start", "1+i", "--samples", "11",
                     "--format", "csv", "-o", str(target)])
    assert code == cli.EXIT_OK
    frame = pd.read_csv(target)
    assert len(frame) == 22
    assert frame.loc[frame["start_id"] == 0, "critical"].all()


def test_resum(capsys, cached):
    code, out = run(capsys, "resum", "--t", "5", "--alpha", "1.5707963", "--hbar", "0.05i", *cached)
    assert code == cli.EXIT_OK
    report = json.loads(out)
    assert len(report["q"]) == 1 and len(report["error"]) == 1


def test_resum_on_stokes_direction(capsys, cached):
    code, _ = run(capsys, "resum", "--t", "1", "--alpha", "0.7853981633974483", "--hbar", "0.1", *cached)
    assert code == cli.EXIT_USAGE


def test_verify(capsys, cached):
    code, out = run(capsys, "verify", "--t", "5", "--alpha", "1.5707963", "--hbar", "0.05i", *cached)
    assert code == cli.EXIT_OK
    assert json.loads(out)["passed"]
    code, _ = run(capsys, "verify", "--t", "5", "--alpha", "1.5707963", "--hbar", "0.05i",
                  "--threshold", "1e-30", *cached)
    assert code == cli.EXIT_THRESHOLD


def test_corrupt_cache(capsys, tmp_path):
    path = tmp_path / "broken.txt"
    path.write_text("not a cache\n")
    code, _ = run(capsys, "coeffs", "--kind", "c", "--n", "2", "--cache", str(path))
    assert code == cli.EXIT_IO


def test_bad_flag(capsys):
    assert cli.main(["coeffs", "--kind", "z", "--n", "1"]) == cli.EXIT_USAGE
    assert cli.main(["resum", "--t", "5"]) == cli.EXIT_USAGE
