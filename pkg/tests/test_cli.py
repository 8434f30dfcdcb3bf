import csv
import io
import json
import math

import pytest

from biloc import cli

WERNER_072 = '{"family": "werner", "V": 0.72}'
PHI = '{"family": "werner", "V": 1}'
PRODUCT = '{"family": "schmidt", "c0": 1, "c1": 0}'
HALF = math.sqrt(0.5)
MAXENT = json.dumps({"family": "schmidt", "c0": HALF, "c1": HALF})


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


def test_analyze_werner_table():
    code, text = run("analyze", "--ab", WERNER_072, "--bc", WERNER_072)
    assert code == 0
    fields = dict(line.split(None, 1) for line in text.splitlines())
    assert fields["s_max"] == "2.03646753"
    assert fields["violates"] == "true"


def test_analyze_product_csv():
    code, text = run("analyze", "--ab", PRODUCT, "--bc", MAXENT, "--format", "csv")
    assert code == 0
    row = next(csv.DictReader(io.StringIO(text)))
    assert float(row["s_max"]) == pytest.approx(2.0, abs=1e-12)
    assert row["violates"] == "false"


def test_analyze_oracle_json():
    code, text = run("analyze", "--ab", MAXENT, "--bc", MAXENT, "--oracle", "--format", "json", "--restarts", "4")
    assert code == 0
    payload = json.loads(text)
    assert abs(payload["oracleGap"]) <= 1e-6
    assert payload["report"]["sMax"] == pytest.approx(2 * math.sqrt(2), abs=1e-12)


def test_analyze_reads_files(tmp_path):
    path = tmp_path / "w.json"
    path.write_text(WERNER_072)
    assert run("analyze", "--ab", str(path), "--bc", WERNER_072) == run("analyze", "--ab", WERNER_072, "--bc", WERNER_072)


@pytest.mark.parametrize(
    "ab,code",
    [
        ("{not json", 2),
        ('{"family": "werner"}', 2),
        ('{"family": "sphere", "V": 1}', 2),
        ("/nonexistent/state.json", 2),
        ('{"family": "werner", "V": 1.5}', 3),
        ('{"family": "dense", "re": [[1,0,0,0],[0,1,0,0],[0,0,0,0],[0,0,0,0]]}', 3),
    ],
)
def test_analyze_error_codes(ab, code, capsys):
    assert run("analyze", "--ab", ab, "--bc", PHI)[0] == code
    assert "error" in capsys.readouterr().err


def test_json_round_trip_reproduces_report():
    code, text = run("analyze", "--ab", WERNER_072, "--bc", MAXENT, "--format", "json")
    report = json.loads(text)["report"]
    code2, text2 = run("analyze", "--ab", WERNER_072, "--bc", MAXENT, "--format", "json")
    assert code == code2 == 0 and json.loads(text2)["report"] == report


def test_sweep_werner_boundary():
    code, text = run("sweep", "--family", "werner", "--grid", "V=0.5:1.0:0.01")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 51
    assert list(rows[0]) == ["V", "s_max", "violates", "chsh_ab", "chsh_bc", "xi1", "xi2", "zeta1", "zeta2"]
    first = next(r for r in rows if r["violates"] == "true")
    assert first["V"] == "0.71"
    assert all(r["violates"] == "true" for r in rows[rows.index(first):])


def test_sweep_schmidt_grid_all_violate():
    code, text = run("sweep", "--family", "schmidt", "--grid", "c=0:1:0.1;q=0:1:0.1")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and len(rows) == 121
    assert [r["c"] for r in rows[:12]] == ["0"] * 11 + ["0.1"]
    for r in rows:
        entangled = float(r["c"]) > 0 and float(r["q"]) > 0
        assert (r["violates"] == "true") == entangled


def test_single_point_sweep_matches_analyze():
    _, sweep = run("sweep", "--family", "werner", "--grid", "V=0.72")
    _, analyze = run("analyze", "--ab", WERNER_072, "--bc", WERNER_072, "--format", "csv")
    row = next(csv.DictReader(io.StringIO(sweep)))
    row.pop("V")
    assert row == next(csv.DictReader(io.StringIO(analyze)))


def test_sweep_noisy_schmidt_two_visibilities():
    code, text = run("sweep", "--family", "noisy_schmidt", "--grid", "c=1;q=1;Vab=0.45,0.55;Vbc=1")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and [r["violates"] for r in rows] == ["false", "true"]


@pytest.mark.parametrize(
    "grid,code",
    [("V=0:1:1e-7", 4), ("V=0:1:0.001;W=0:1:0.0005", 4), ("V=1:0:0.1", 2), ("V", 2), ("c=0:1:0.5", 2)],
)
def test_sweep_bad_grids(grid, code):
    assert run("sweep", "--family", "werner", "--grid", grid)[0] == code


def test_sample_is_byte_identical():
    args = ("sample", "--ab", PHI, "--bc", PHI, "--shots", "2000", "--seed", "3")
    first, second = run(*args), run(*args)
    assert first == second and first[0] == 0


def test_sample_single_shot_unreliable():
    code, text = run("sample", "--ab", PHI, "--bc", PHI, "--shots", "1")
    assert code == 0 and "unreliable" in text
    code, text = run("sample", "--ab", PHI, "--bc", PHI, "--shots", "1", "--format", "json")
    payload = json.loads(text)
    assert payload["reliable"] is False and payload["stderr_S"] is None


def test_sample_optimal_million_shots():
    code, text = run("sample", "--ab", PHI, "--bc", PHI, "--shots", "1000000", "--optimal", "--format", "json")
    payload = json.loads(text)
    assert code == 0
    assert abs(payload["S"] - 2 * math.sqrt(2)) <= 5 * payload["stderr_S"]


def test_sample_explicit_angles_and_errors():
    code, text = run("sample", "--ab", PHI, "--bc", PHI, "--shots", "10", "--alpha", "0", "--format", "json")
    assert code == 0 and json.loads(text)["exact"]["I"] == pytest.approx(4.0)
    assert run("sample", "--ab", PHI, "--bc", PHI, "--shots", "0")[0] == 2
    assert run("sample", "--ab", PHI, "--bc", PHI, "--shots", "5", "--gamma", "0.3")[0] == 2
    assert run("sample", "--ab", PHI, "--bc", PHI, "--shots", "5", "--optimal", "--alpha", "0.3")[0] == 2


@pytest.mark.parametrize("mode", ["fixed-bsm", "general-bob", "two-input-bob"])
def test_search_modes(mode):
    code, text = run("search", "--mode", mode, "--ab", PHI, "--bc", PHI, "--restarts", "3", "--format", "json")
    payload = json.loads(text)
    assert code == 0 and payload["mode"] == mode
    assert payload["sBest"] == pytest.approx(2 * math.sqrt(2), abs=1e-4)


def test_search_activation_and_usage_errors():
    code, text = run("search", "--mode", "activation", "--ab", '{"family": "werner", "V": 0.6}', "--restarts", "3")
    assert code == 0 and "activated    false" in text
    assert run("search", "--mode", "fixed-bsm", "--ab", PHI)[0] == 2
    assert run("search", "--mode", "activation", "--ab", PHI, "--bc", PHI)[0] == 2
    assert run("search", "--mode", "fixed-bsm", "--ab", PHI, "--bc", PHI, "--restarts", "0")[0] == 2
    assert run("search", "--mode", "sideways", "--ab", PHI)[0] == 2


def test_search_seed_determinism():
    args = ("search", "--mode", "fixed-bsm", "--ab", WERNER_072, "--bc", MAXENT, "--restarts", "3", "--seed", "5")
    assert run(*args) == run(*args)


def test_verify_subset_and_fault_injection():
    code, text = run("verify", "--only", "AC-1,AC-6")
    assert code == 0
    assert text.count("PASS") == 2 and "expected:" in text and "computed:" in text
    code, text = run("verify", "--only", "AC-1", "--inject-fault", "j-sign")
    assert code == 1 and "FAIL AC-1" in text
    assert run("verify", "--only", "AC-99")[0] == 2


def test_no_command_is_parse_error():
    assert run()[0] == 2
