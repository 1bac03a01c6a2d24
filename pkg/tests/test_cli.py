from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from momentsep.cli import generate, main
from momentsep.io import density_to_json, dump

from conftest import dicke


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_entangled_exit_code(capsys):
    code, out, _ = run(["certify", "--gen", "dicke:2"], capsys)
    doc = json.loads(out)
    assert code == 2 and doc["verdict"] == "ENTANGLED" and doc["order"] == 2


def test_separable_exit_code(capsys):
    code, out, _ = run(["certify", "--gen", "coherent:2"], capsys)
    doc = json.loads(out)
    assert code == 0 and len(doc["atoms"]) == 1
    np.testing.assert_allclose(doc["atoms"][0]["point"], [0, 0, 1], atol=1e-6)


def test_inconclusive_exit_code(capsys):
    code, _, _ = run(["certify", "--gen", "sep:3", "--kmax", "2", "--objectives", "1"], capsys)
    assert code == 3


def test_partial_local_never_entangled(capsys):
    code, _, _ = run(["certify", "--gen", "dicke:2", "--partial", "local"], capsys)
    assert code == 0


def test_witness_round_trip(tmp_path, capsys):
    cert = tmp_path / "cert.json"
    assert main(["certify", "--gen", "dicke:2", "--out", str(cert)]) == 2
    capsys.readouterr()
    code, out, _ = run(["witness-verify", "--gen", "dicke:2", "--certificate", str(cert)], capsys)
    assert code == 0 and json.loads(out)["valid"]

    code, _, _ = run(["witness-verify", "--gen", "dicke:3", "--certificate", str(cert)], capsys)
    assert code == 1

    doc = json.loads(cert.read_text())
    doc["witness"]["blocks"] = [np.zeros_like(np.array(b)).tolist() for b in doc["witness"]["blocks"]]
    doc["witness"]["equality_certificate"] = None
    cert.write_text(json.dumps(doc))
    code, out, _ = run(["witness-verify", "--gen", "dicke:2", "--certificate", str(cert)], capsys)
    assert code == 1


def test_input_file(tmp_path, capsys):
    path = tmp_path / "rho.json"
    dump(density_to_json(dicke(3)), path)
    code, _, _ = run(["certify", "--input", str(path), "--symmetric", "3"], capsys)
    assert code == 2


def test_decompose(capsys):
    code, out, _ = run(["decompose", "--gen", "ps:2"], capsys)
    doc = json.loads(out)
    assert code == 0 and len(doc["atoms"]) == 4
    assert doc["reconstruction_error"] <= 1e-8 and doc["verified"]


def test_decompose_entangled(capsys):
    code, _, _ = run(["decompose", "--gen", "dicke:2"], capsys)
    assert code == 2


def test_bench_csv(capsys):
    code, out, _ = run(["bench", "--ns", "2", "--samples", "2", "--protocol", "minrank", "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows[0]["N"] == "2" and rows[0]["separable"] == "2"


def test_human_format(capsys):
    code, out, _ = run(["certify", "--gen", "dicke:2", "--format", "human"], capsys)
    assert code == 2 and "ENTANGLED" in out


@pytest.mark.parametrize("args", [
    ["certify", "--gen", "nope:2"],
    ["certify", "--gen", "dicke:x"],
    ["certify"],
    ["certify", "--input", "/nonexistent/file.json"],
    ["certify", "--gen", "dicke:2", "--partial", "degree:x"],
    ["certify", "--gen", "dicke:2", "--kmax", "0"],
    ["witness-verify", "--gen", "dicke:2", "--certificate", "/nonexistent.json"],
])
def test_bad_input(args, capsys):
    code, _, err = run(args, capsys)
    assert code == 1 and err.startswith("error:")


def test_bad_json_input(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{oops")
    assert run(["certify", "--input", str(path)], capsys)[0] == 1


def test_generators_are_seeded():
    a, _ = generate("haar:3", 5)
    b, _ = generate("haar:3", 5)
    np.testing.assert_array_equal(a.matrix, b.matrix)
    rho, spec = generate("product:2,3", 1, pure=False)
    assert rho.dims == (2, 3) and spec.parties == (2, 3)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "momentsep", "certify", "--gen", "coherent:2", "--format", "human"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0 and "SEPARABLE" in proc.stdout


def test_bench_haar_two_qubits_mostly_entangled(capsys):
    code, out, _ = run(["bench", "--ns", "2", "--samples", "100", "--protocol", "timing"], capsys)
    rows = {r["kind"]: r for r in json.loads(out)["rows"]}
    assert code == 0
    assert rows["entangled"]["verdicts"].get("ENTANGLED", 0) >= 95
    assert rows["entangled"]["orders"].get("2", 0) >= 95
    assert rows["separable"]["min_r"] == 4
