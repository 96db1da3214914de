import json
import subprocess
import sys
from pathlib import Path

import pytest

try:
    import jsonschema
except ImportError:                 # pragma: no cover
    jsonschema = None

SCHEMA_DIR = Path(__file__).resolve().parents[1] / "src" / "isingtri" / "schemas"


def run_cli(*args):
    proc = subprocess.run([sys.executable, "-m", "isingtri.cli", *args],
                          capture_output=True, text=True, timeout=600)
    return proc


def load_schema(name):
    return json.loads((SCHEMA_DIR / f"{name}.schema.json").read_text())


def validate(payload, name):
    if jsonschema is not None:
        jsonschema.validate(payload, load_schema(name))


def test_critical_nu_c_exact_string():
    proc = run_cli("critical", "--nu", "nu_c")
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    assert out["result"]["rho_exact"] == "-55/864 + 25/864*sqrt7"
    assert out["result"]["regime"] == "critical"
    validate(out["result"], "critical")
    validate(out["manifest"], "manifest")


def test_unknown_flag_exits_2():
    proc = run_cli("critical", "--nu", "1", "--bogus")
    assert proc.returncode == 2


def test_bad_input_structured_error():
    proc = run_cli("coeffs", "--nu", "0", "--target", "sphere", "--order", "5")
    assert proc.returncode == 1
    err = json.loads(proc.stderr.strip().splitlines()[-1])
    assert "error" in err and "message" in err


def test_coeffs_json_and_rerun_bit_identical():
    args = ("coeffs", "--nu", "2", "--target", "word:++", "--order", "7")
    a = run_cli(*args)
    b = run_cli(*args)
    assert a.returncode == b.returncode == 0
    pa, pb = json.loads(a.stdout), json.loads(b.stdout)
    assert pa["result"] == pb["result"]
    assert pa["manifest"]["output_hashes"] == pb["manifest"]["output_hashes"]
    validate(pa["result"], "coeffs")
    series = pa["result"]["series"]
    assert series["coeffs"]["1"] == "2"


def test_coeffs_csv():
    proc = run_cli("coeffs", "--nu", "1/2", "--target", "U", "--order", "9",
                   "--out", "csv")
    out = json.loads(proc.stdout)
    assert out["result"]["csv"].splitlines()[0] == "exponent,coefficient,float"
    assert "3,1," in out["result"]["csv"]       # [t^3] U = 4 nu^2 = 1 at nu = 1/2


def test_oracle_subcommand_with_dump():
    proc = run_cli("oracle", "--nu", "2", "--target", "word:++", "--order", "4",
                   "--dump-maps")
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    validate(out["result"], "oracle")
    assert out["result"]["series"]["coeffs"]["1"] == "2"
    assert any(line.startswith("alpha=") for line in out["result"]["maps"])


def test_verify_subcommand_green():
    proc = run_cli("verify", "--nu", "2", "--order", "8")
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    assert out["result"]["all_ok"] is True
    validate(out["result"], "verify")


def test_spectral_small_order():
    proc = run_cli("spectral", "--nu", "nu_c", "--order", "34")
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    validate(out["result"], "spectral")
    lo, hi = out["result"]["radius"]
    assert 0.9 < lo <= hi < 1.05


def test_sample_exact_with_output(tmp_path):
    outdir = tmp_path / "runs"
    proc = run_cli("sample", "exact", "--nu", "2", "--n", "1", "--seed", "99",
                   "--reps", "5", "--out", str(outdir),
                   "--output", str(tmp_path / "batch.json"))
    assert proc.returncode == 0
    batch = json.loads((tmp_path / "batch.json").read_text())
    validate(batch, "sample")
    manifest = json.loads((tmp_path / "batch.json.manifest.json").read_text())
    validate(manifest, "manifest")
    assert len(list(outdir.glob("sample_*.json"))) == 5

    # stats recomputation from the stored samples agrees
    proc2 = run_cli("stats", "--in", str(outdir))
    out2 = json.loads(proc2.stdout)
    assert out2["result"]["count"] == 5
    assert out2["result"]["root_degree"] == batch["stats"]["root_degree"]
    validate(out2["result"], "stats")


def test_sample_determinism():
    args = ("sample", "exact", "--nu", "2", "--n", "1", "--seed", "4242", "--reps", "3")
    a = json.loads(run_cli(*args).stdout)
    b = json.loads(run_cli(*args).stdout)
    assert a["manifest"]["output_hashes"] == b["manifest"]["output_hashes"]


def test_report_quick_single_criterion():
    proc = run_cli("report", "--criteria", "1", "--quick")
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    validate(out["result"], "report")
    assert out["result"]["all_passed"] is True
    assert "criterion 1" in out["result"]["text"]
