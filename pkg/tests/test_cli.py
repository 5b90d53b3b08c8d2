from __future__ import annotations

import json
import subprocess
import sys

import jsonschema
import pytest

from midlayer.cli import COMMANDS, main
from midlayer.schemas import SCHEMAS


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def run_doc(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 0, err
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMAS[" ".join(argv[:2])])
    return doc


CASES = [
    ["graph", "info", "--d", "3"],
    ["iso", "check", "--d", "3", "--vertices", "0,1"],
    ["count", "exact", "--d", "2", "--q", "4", "--brute"],
    ["flaw", "analyze", "--d", "2", "--q", "4", "--coloring", "1,3,4,2,2,1"],
    ["polymers", "enumerate", "--d", "3", "--max-size", "2"],
    ["polymers", "weight", "--d", "3", "--q", "4", "--vertices", "0"],
    ["xi", "compute", "--d", "2", "--q", "4"],
    ["capture", "check", "--d", "2", "--q", "3"],
    ["clusters", "lk", "--d", "3", "--q", "4", "--k", "2"],
    ["expansion", "approx", "--d", "3", "--q", "4"],
    ["expansion", "compare", "--d", "2", "--q", "4"],
    ["expansion", "logcheck", "--d", "2", "--q", "4", "--max-size", "2", "--k", "4"],
    ["kp", "check", "--d", "2", "--q", "4", "--max-size", "2"],
    ["containers", "cover", "--d", "3"],
    ["containers", "cover", "--d", "4", "--vertices", "0,1,2"],
    ["containers", "pair", "--d", "4", "--psi", "1", "--vertices", "0,1"],
    ["sample", "stats", "--d", "2", "--q", "4", "--samples", "200", "--seed", "7"],
]


def test_every_command_has_a_schema_and_a_case():
    names = {f"{g} {a}" for g, a in COMMANDS}
    # 'sample run' streams one "sample record" document per line
    assert names - {"sample run"} <= set(SCHEMAS) and "sample record" in SCHEMAS
    assert names - {"sample run", "containers verify"} <= {" ".join(c[:2]) for c in CASES}


@pytest.mark.parametrize("argv", CASES, ids=lambda a: " ".join(a[:2]))
def test_command_outputs_validate(argv, capsys):
    doc = run_doc(argv, capsys)
    # pure given the config
    assert run_doc(argv, capsys) == doc


def test_spec_examples(capsys):
    assert run_doc(["count", "exact", "--d", "2", "--q", "4"], capsys)["c_q"] == "732"
    assert run_doc(["clusters", "lk", "--d", "3", "--q", "4", "--k", "1"], capsys)["L_k"] == "5/2"
    info = run_doc(["graph", "info", "--d", "3"], capsys)
    assert (info["N"], info["edges"], info["regular"]) == (20, 30, 3)


def test_values_in_outputs(capsys):
    assert run_doc(["xi", "compute", "--d", "2", "--q", "4"], capsys)["xi"] == "183/16"
    doc = run_doc(["capture", "check", "--d", "2", "--q", "4", "--max-size", "1"], capsys)
    assert doc["captured"] == doc["brute_force_captured"]
    assert all(doc["asserted"].values())
    doc = run_doc(["expansion", "logcheck", "--d", "2", "--q", "4", "--max-size", "2", "--k", "4"], capsys)
    assert doc["all_match"]


def test_containers_verify_from_file(tmp_path, capsys):
    pair = tmp_path / "pair.json"
    code, out, _ = run(["containers", "pair", "--d", "3", "--psi", "1", "--vertices", "0", "--out", str(pair)], capsys)
    assert code == 0 and out == ""
    doc = run_doc(["containers", "verify", "--d", "3", "--input", str(pair)], capsys)
    assert doc["valid"] and doc["consistent"]
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(["containers", "verify", "--d", "3", "--input", str(bad)], capsys)
    assert code == 2 and json.loads(err)["kind"] == "invalid"


def test_sample_run_jsonl_and_stats(tmp_path, capsys):
    path = tmp_path / "s.jsonl"
    argv = ["sample", "run", "--d", "2", "--q", "4", "--samples", "50", "--seed", "3", "--out", str(path)]
    assert run(argv, capsys)[0] == 0
    lines = path.read_text().splitlines()
    assert len(lines) == 50
    for line in lines:
        jsonschema.validate(json.loads(line), SCHEMAS["sample record"])
    first = path.read_text()
    assert run(argv + ["--workers", "2"], capsys)[0] == 0
    assert path.read_text() == first
    doc = run_doc(["sample", "stats", "--d", "2", "--input", str(path)], capsys)
    assert doc["samples"] == 50


@pytest.mark.parametrize(
    "argv",
    [
        ["graph", "info", "--d", "9"],
        ["count", "exact", "--d", "2", "--q", "1"],
        ["polymers", "enumerate", "--d", "3", "--max-size", "-1"],
        ["clusters", "lk", "--d", "3", "--q", "4", "--k", "0"],
        ["sample", "run", "--d", "2", "--q", "4", "--seed", "-1"],
        ["sample", "run", "--d", "2", "--q", "4", "--workers", "0"],
        ["expansion", "approx", "--d", "3", "--q", "4", "--precision", "10"],
        ["polymers", "weight", "--d", "3", "--q", "4", "--vertices", "0,19"],
        ["flaw", "analyze", "--d", "2", "--q", "4", "--coloring", "1,1,1,1,1,1"],
        ["containers", "pair", "--d", "3", "--psi", "2", "--vertices", "0"],
        ["kp", "check", "--d", "2", "--q", "4", "--vertex", "6"],
    ],
)
def test_validation_errors_exit_2(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2 and out == ""
    doc = json.loads(err)
    jsonschema.validate(doc, SCHEMAS["error"])
    assert doc["kind"] == "invalid"


@pytest.mark.parametrize(
    "argv",
    [
        ["count", "exact", "--d", "5", "--q", "6"],
        ["clusters", "lk", "--d", "3", "--q", "4", "--k", "7"],
        ["sample", "stats", "--d", "3", "--q", "4", "--samples", "1"],
    ],
)
def test_resource_errors_exit_3(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 3
    assert json.loads(err)["kind"] == "resource"


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["graph"],
        ["nosuch", "thing"],
        ["graph", "draw"],
        ["graph", "info", "--bogus"],
        ["count", "exact", "--d", "2"],
    ],
)
def test_usage_errors_exit_1(argv, capsys):
    code, out, _ = run(argv, capsys)
    assert code == 1 and out == ""


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "midlayer", "graph", "info", "--d", "2"], capture_output=True, text=True, check=False
    )
    assert res.returncode == 0
    assert json.loads(res.stdout)["N"] == 6
