import csv
import io
import json
import math
import subprocess
import sys

import pytest

from besselorbit.cli import main

ARC = '[{"kind":"circle","density":"1"}]'
COS = '[{"kind":"circle","density":"1 + 0.5*cos(theta)"}]'
MIXED = ('[{"kind":"atoms","atoms":[{"re":0.3,"im":0.2,"mass":0.5}]},'
         '{"kind":"disk","density":"1+0.3*cos(theta)","r_max":0.9}]')
DISCRETE = json.dumps([{"kind": "atoms", "atoms": [{"re": 1 - 1 / n, "mass": 2.0 ** (-2 * n)} for n in range(1, 61)]}])
HEAT = json.dumps([{"kind": "interval", "lower": math.exp(-0.25), "upper": 1.0,
                    "density": "1/(t*sqrt(1.0)*sqrt(-log(t)))", "singular": "upper"}])


@pytest.fixture
def write(tmp_path):
    def _write(text, name="spec.json"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return _write


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_heat_spec_is_not_bessel(write, capsys):
    code, out, _ = run(capsys, "--input", write(HEAT), "--command", "analyze")
    doc = json.loads(out)
    assert code == 1
    assert doc["result"]["witness"] == "tail_ratio_sup"
    assert doc["schema_version"] == "1.0"


def test_discrete_example_is_bessel(write, capsys):
    code, out, _ = run(capsys, "--input", write(DISCRETE))
    doc = json.loads(out)["result"]
    assert code == 0
    assert doc["bound"] == pytest.approx(0.3742188235973124, abs=1e-12)
    assert doc["witness"] == "sufficient_integral_bound"


def test_support_violation(write, capsys):
    code, out, _ = run(capsys, "--input", write('[{"kind":"atoms","atoms":[{"re":1.5,"mass":1}]}]'))
    assert code == 1 and json.loads(out)["result"]["witness"] == "support_radius"


def test_inconclusive_exit_code(write, capsys, monkeypatch):
    import besselorbit.criteria as crit

    real = crit.verdict
    monkeypatch.setattr(crit, "verdict", lambda mu, cfg: crit.BesselVerdict(
        "INCONCLUSIVE", None, None, None, "normal", real(mu, cfg).reports))
    code, _, _ = run(capsys, "--input", write(ARC))
    assert code == 2


@pytest.mark.parametrize("doc", [ARC, COS])
def test_verify_passes_on_circle_measures(write, capsys, doc):
    code, out, _ = run(capsys, "--input", write(doc), "--command", "verify")
    checks = {c["id"]: c["pass"] for c in json.loads(out)["result"]["checks"]}
    assert code == 0 and all(checks.values())
    assert {"poisson_resolvent_link", "stieltjes_inversion", "toeplitz_symbol", "synthesis_gram"} <= set(checks)


def test_verify_mixed_flags_agree(write, capsys):
    code, out, _ = run(capsys, "--input", write(MIXED), "--command", "verify")
    checks = {c["id"]: c for c in json.loads(out)["result"]["checks"]}
    assert code == 0
    assert checks["carleson_resolvent_agreement"]["pass"]
    assert checks["carleson_kernel_resolvent"]["pass"]


def test_json_is_deterministic(write, capsys):
    path = write(COS)
    _, a, _ = run(capsys, "--input", path, "--command", "criteria")
    _, b, _ = run(capsys, "--input", path, "--command", "criteria")
    assert a == b


def test_csv_and_text_outputs(write, capsys):
    path = write(ARC)
    code, out, _ = run(capsys, "--input", path, "--command", "gram-profile", "--format", "csv", "--max-size", "64")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["criterion", "grid_point", "value"]
    assert [r[1] for r in rows[1:]] == ["8", "16", "32", "64"]
    code, out, _ = run(capsys, "--input", path, "--format", "text")
    assert "verdict: BESSEL" in out and code == 0


def test_heat_command_tables(capsys):
    code, out, _ = run(capsys, "--command", "heat", "--format", "csv", "--eps-min", "1e-6")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 1
    kinds = {r[0] for r in rows[1:]}
    assert kinds == {"moment", "tail"}
    tails = [r for r in rows if r[0] == "tail"]
    assert float(tails[-1][1]) >= 1e-6 / 2


def test_output_file(write, capsys, tmp_path):
    dest = tmp_path / "out.json"
    code, out, _ = run(capsys, "--input", write(ARC), "--output", str(dest))
    assert out == "" and json.loads(dest.read_text())["result"]["status"] == "BESSEL"


@pytest.mark.parametrize(
    "text, needle",
    [
        ('[{"kind":"circle","density":"1"},{"kind":"disk","density":"1","r_max":2}]', "component 1"),
        ('[{"kind":"circle","density":"cos("}]', "component 0"),
        ("{not json", "invalid JSON"),
    ],
)
def test_malformed_spec_gives_diagnostic(write, capsys, text, needle):
    code, out, err = run(capsys, "--input", write(text))
    assert code >= 3 and needle in err and out == ""


def test_missing_file_and_usage_errors(capsys, tmp_path):
    assert run(capsys, "--input", str(tmp_path / "none.json"))[0] == 3
    assert run(capsys, "--command", "analyze")[0] == 3
    assert run(capsys, "--input", "x", "--tol", "-1")[0] == 3
    with pytest.raises(SystemExit) as info:
        main(["--unknown-flag"])
    assert info.value.code == 3


def test_negative_density_is_reported_per_criterion(write, capsys):
    code, out, _ = run(capsys, "--input", write('[{"kind":"circle","density":"cos(theta)"}]'),
                       "--command", "criteria")
    reports = json.loads(out)["result"]["reports"]
    assert any(r["status"] == "error" and "negative" in r["message"] for r in reports)


def test_module_entry_point(write):
    proc = subprocess.run([sys.executable, "-m", "besselorbit", "--input", write(ARC), "--format", "text"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "BESSEL" in proc.stdout
