"""End-to-end tests of the command-line front end via subprocess.

Every assertion parses the emitted CSV/JSONL rather than library objects, so
these tests pin the external file formats: '#' config echo atop CSV, 17
significant digits, "n/2" half-integers, JSON-array words, and the
documented exit codes (2 invalid parameters, 3 non-convergence).
"""

import csv
import json
import math
import os
import subprocess
import sys

import pytest


def run_cli(*args, env_extra=None):
    env = os.environ.copy()
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "gammakernel", *args],
        capture_output=True,
        text=True,
        env=env,
        timeout=300,
    )


def parse_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    header, body = rows[0], rows[1:]
    return header, [dict(zip(header, r)) for r in body]


def config_echo(text):
    for ln in text.splitlines():
        if ln.startswith("# config: "):
            return json.loads(ln[len("# config: "):])
    raise AssertionError("no config echo found")


def stderr_error(res):
    return json.loads(res.stderr.strip().splitlines()[-1])["error"]


# ---------------------------------------------------------------------------
# weight
# ---------------------------------------------------------------------------

def test_weight_empty_partition():
    res = run_cli("weight", "--z", "0.5", "--zp", "0.5", "--xi", "0.3", "--lambda", "")
    assert res.returncode == 0, res.stderr
    header, rows = parse_csv(res.stdout)
    assert header == ["kind", "object", "log_weight", "weight"]
    assert float(rows[0]["weight"]) == pytest.approx(0.7 ** 0.25, rel=1e-15)
    assert config_echo(res.stdout)["command"] == "weight"


def test_weight_rerun_is_bit_identical():
    args = ("weight", "--xi", "0.2", "--lambda", "3,1")
    assert run_cli(*args).stdout == run_cli(*args).stdout


def test_weight_config_equals_partition():
    a = run_cli("weight", "--xi", "0.3", "--lambda", "1")
    b = run_cli("weight", "--xi", "0.3", "--config=-1/2,1/2")
    _, ra = parse_csv(a.stdout)
    _, rb = parse_csv(b.stdout)
    assert ra[0]["weight"] == rb[0]["weight"]


def test_weight_requires_exactly_one_input():
    res = run_cli("weight", "--xi", "0.3", "--lambda", "1", "--config=1/2,-1/2")
    assert res.returncode == 2
    assert stderr_error(res)["name"] == "weight_input"


def test_weight_rejects_unbalanced_config():
    res = run_cli("weight", "--xi", "0.3", "--config=1/2")
    assert res.returncode == 2
    assert stderr_error(res)["name"] == "config_balanced"


# ---------------------------------------------------------------------------
# kernel
# ---------------------------------------------------------------------------

def test_kernel_integrable_diagonal():
    res = run_cli("kernel", "--method", "integrable", "--z", "0.5", "--zp", "0.5",
                  "--x", "1/2", "--y", "1/2")
    assert res.returncode == 0, res.stderr
    _, rows = parse_csv(res.stdout)
    assert rows[0]["x"] == "1/2" and rows[0]["y"] == "1/2"
    assert float(rows[0]["value"]) == pytest.approx(0.5 - 4 / math.pi**2, rel=1e-12)


def test_kernel_integrable_vs_contour():
    point = ("--x", "1/2", "--y", "3/2")
    a = run_cli("kernel", "--method", "integrable", *point)
    b = run_cli("kernel", "--method", "contour-limit", *point)
    va = float(parse_csv(a.stdout)[1][0]["value"])
    vb = float(parse_csv(b.stdout)[1][0]["value"])
    assert va == pytest.approx(vb, abs=1e-8)


def test_kernel_prelimit_contour_vs_spectral():
    # The spectral route pads its diagonalization until the requested
    # entries stabilize, so no explicit --window is needed for accuracy.
    common = ("--xi", "0.5", "--x", "1/2", "--y", "1/2")
    a = run_cli("kernel", "--method", "contour-prelimit", *common)
    b = run_cli("kernel", "--method", "spectral", *common)
    va = float(parse_csv(a.stdout)[1][0]["value"])
    vb = float(parse_csv(b.stdout)[1][0]["value"])
    assert va == pytest.approx(vb, abs=1e-8)


def test_kernel_xi_flag_validation():
    res = run_cli("kernel", "--method", "integrable", "--x", "1/2", "--xi", "0.5")
    assert res.returncode == 2
    assert stderr_error(res)["name"] == "xi_forbidden"
    res = run_cli("kernel", "--method", "contour-prelimit", "--x", "1/2")
    assert res.returncode == 2
    assert stderr_error(res)["name"] == "xi_required"


def test_kernel_starved_quadrature_exits_3():
    res = run_cli("kernel", "--method", "contour-limit", "--x", "1/2", "--y", "1/2",
                  "--nodes", "8", "--tol", "1e-15", "--max-nodes", "16")
    assert res.returncode == 3
    err = stderr_error(res)
    assert err["name"].startswith("non_convergence:")
    assert err["exit_code"] == 3


def test_kernel_bad_half_integer():
    res = run_cli("kernel", "--method", "integrable", "--x", "0.5")
    assert res.returncode == 2
    assert stderr_error(res)["name"] == "half_integer_format"


# ---------------------------------------------------------------------------
# correlate
# ---------------------------------------------------------------------------

def test_correlate_all_rows_pass():
    res = run_cli("correlate", "--xi", "0.2", "--window", "2", "--order", "2",
                  "--max-size", "12")
    assert res.returncode == 0, res.stderr
    _, rows = parse_csv(res.stdout)
    assert len(rows) == 4 + 6  # four points, six pairs
    assert all(r["passed"] == "true" for r in rows)


# ---------------------------------------------------------------------------
# fredholm
# ---------------------------------------------------------------------------

def test_fredholm_routes_agree():
    res = run_cli("fredholm", "--xi", "0.2", "--f", '{"1/2": -0.5, "-3/2": 0.25}',
                  "--window", "32", "--max-size", "14")
    assert res.returncode == 0, res.stderr
    _, rows = parse_csv(res.stdout)
    by_route = {r["route"]: r for r in rows}
    assert set(by_route) == {"sum", "det", "difference"}
    assert float(by_route["difference"]["value"]) <= float(
        by_route["difference"]["error"]
    )
    assert float(by_route["det"]["error"]) == 0.0  # finite support, exact det


# ---------------------------------------------------------------------------
# rn
# ---------------------------------------------------------------------------

def test_rn_routes_agree():
    res = run_cli("rn", "--word", "[1,0]", "--config=-1/2,1/2", "--xi", "0.5")
    assert res.returncode == 0, res.stderr
    _, rows = parse_csv(res.stdout)
    by_route = {r["route"]: r for r in rows}
    exact = float(by_route["exact"]["value"])
    closed = float(by_route["closed_form"]["value"])
    assert exact == pytest.approx(closed, rel=1e-11)
    assert float(by_route["limit"]["xi"]) == 1.0


def test_rn_limit_add_value():
    res = run_cli("rn", "--word", "[0]", "--config", "", "--z", "0.5", "--zp", "0.5")
    _, rows = parse_csv(res.stdout)
    assert rows == [
        {"route": "limit", "xi": "1", "value": "0.25", "bound": "0"}
    ]


def test_rn_bad_word():
    res = run_cli("rn", "--word", "[1, oops]", "--config", "")
    assert res.returncode == 2
    assert stderr_error(res)["name"] == "word_format"


# ---------------------------------------------------------------------------
# transport
# ---------------------------------------------------------------------------

def test_transport_prelimit_passes():
    res = run_cli("transport", "--word", "[0]", "--f-contains", "1/2",
                  "--xi", "0.2", "--max-size", "12")
    assert res.returncode == 0, res.stderr
    _, rows = parse_csv(res.stdout)
    assert rows[0]["mode"] == "prelimit"
    assert rows[0]["passed"] == "true"


def test_transport_limit_passes():
    res = run_cli("transport", "--word", "[0]", "--f-contains", "1/2",
                  "--window", "64", "--atol", "1e-3")
    assert res.returncode == 0, res.stderr
    _, rows = parse_csv(res.stdout)
    assert rows[0]["mode"] == "limit"
    assert rows[0]["passed"] == "true"
    assert float(rows[0]["difference"]) < 1e-3


def test_transport_needs_exactly_one_f():
    res = run_cli("transport", "--word", "[0]", "--xi", "0.2")
    assert res.returncode == 2
    assert stderr_error(res)["name"] == "transport_f"


# ---------------------------------------------------------------------------
# converge
# ---------------------------------------------------------------------------

def test_converge_blocknorm_gaps_decrease():
    res = run_cli("converge", "--sweep", "0.9,0.99", "--report", "blocknorms",
                  "--window", "16")
    assert res.returncode == 0, res.stderr
    _, rows = parse_csv(res.stdout)
    trace_gaps = [float(r["trace_gap"]) for r in rows]
    hs_gaps = [float(r["hs_gap"]) for r in rows]
    assert trace_gaps[0] > trace_gaps[1] > 0
    assert hs_gaps[0] > hs_gaps[1] > 0


def test_converge_blockcauchy_increments_shrink():
    res = run_cli("converge", "--report", "blockcauchy", "--window", "64")
    assert res.returncode == 0, res.stderr
    _, rows = parse_csv(res.stdout)
    incs = [float(r["trace_increment"]) for r in rows[1:]]
    assert incs == sorted(incs, reverse=True)


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------

def test_sample_jsonl_deterministic_and_parseable():
    args = ("sample", "--window", "3", "--count", "50", "--seed", "9",
            "--involute", "--format", "jsonl")
    a = run_cli(*args)
    b = run_cli(*args)
    assert a.returncode == 0, a.stderr
    assert a.stdout == b.stdout
    lines = a.stdout.splitlines()
    meta = json.loads(lines[0])
    assert meta["config"]["command"] == "sample"
    assert meta["config"]["seed"] == 9
    assert len(lines) == 1 + 50
    for ln in lines[1:]:
        pts = json.loads(ln)
        assert all(json.loads(f'"{p}"') and p.endswith("/2") for p in pts)
        assert pts == sorted(pts, key=lambda s: int(s.split("/")[0]))


def test_sample_csv_estimates_match_exact():
    res = run_cli("sample", "--window", "3", "--count", "4000", "--seed", "9",
                  "--involute")
    assert res.returncode == 0, res.stderr
    _, rows = parse_csv(res.stdout)
    for r in rows:
        err = abs(float(r["estimate"]) - float(r["exact"]))
        assert err <= 5 * float(r["se"]) + 1e-3


def test_sample_output_file(tmp_path):
    out = tmp_path / "batch.jsonl"
    res = run_cli("sample", "--window", "2", "--count", "10", "--seed", "1",
                  "--format", "jsonl", "--output", str(out))
    assert res.returncode == 0, res.stderr
    assert res.stdout == ""
    assert len(out.read_text().splitlines()) == 11


# ---------------------------------------------------------------------------
# shared behaviour
# ---------------------------------------------------------------------------

def test_invalid_params_exit_2():
    res = run_cli("weight", "--z", "3", "--zp", "3", "--xi", "0.3", "--lambda", "")
    assert res.returncode == 2
    assert stderr_error(res)["name"] == "params_admissible"


def test_gk_threads_env_accepted():
    res = run_cli("kernel", "--method", "integrable", "--x", "1/2",
                  env_extra={"GK_THREADS": "1"})
    assert res.returncode == 0, res.stderr
