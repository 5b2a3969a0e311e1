import json
import os

import pytest

from revspec import cli
from revspec.experiments import EXPERIMENTS, ConfigError, validate_config

FAST = {
    "sphere-validate": {"dims": [2], "radii": [1.0], "mesh": 600, "distinct": 3},
    "spheroid-pinch-sweep": {"deltas": [0.2, 0.1], "kmax": 1, "mesh": 600, "tau_limit": 0.2},
    "dumbbell-sweep": {"eps": [0.2, 0.1], "mesh": 600, "lam1_limit": 0.3},
    "neck-tune": {"L": [2.5, 5.0], "mesh": 1500},
    "model-spectrum": {"d": [1, 2], "lam_max": 12.0, "mesh": 600},
    "identity-audit": {"dims": [2], "kmax": 2, "points": 20},
}


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_every_experiment_has_a_fast_config():
    assert set(FAST) == set(EXPERIMENTS)


def test_list_experiments(capsys):
    assert cli.main(["list-experiments"]) == 0
    out = capsys.readouterr().out
    for name in EXPERIMENTS:
        assert name in out


def test_validate_prints_normalized_config(tmp_path, capsys):
    path = write(tmp_path, {"experiment": "neck-tune"})
    assert cli.main(["validate", path]) == 0
    norm = json.loads(capsys.readouterr().out)
    assert norm["parameters"]["target"] == 3.0
    assert norm["output"]["directory"] == "neck-tune"


@pytest.mark.parametrize("cfg,pointer", [
    ({"experiment": "dumbbell-sweep", "parameters": {"family": "bispherical", "a": 0.1,
                                                     "eps": [0.05, 0.2]}}, "parameters.eps[1]"),
    ({"experiment": "nope"}, "experiment"),
    ({"experiment": "neck-tune", "parameters": {"rho": -1.0}}, "parameters.rho"),
    ({"experiment": "neck-tune", "parameters": {"bogus": 1}}, "parameters.bogus"),
    ({"experiment": "sphere-validate", "parameters": {"dims": 2}}, "parameters.dims"),
    ({"experiment": "sphere-validate", "seed": -3}, "seed"),
    ({"experiment": "sphere-validate", "output": {"formats": ["xml"]}}, "output.formats"),
    ({"experiment": "dumbbell-sweep", "parameters": {"family": "bispherical", "n": 3, "k": 2}},
     "parameters.k"),
])
def test_invalid_configs_exit_2_with_key_path(tmp_path, capsys, cfg, pointer):
    path = write(tmp_path, cfg)
    assert cli.main(["validate", path]) == 2
    assert cli.main(["run", path]) == 2
    err = capsys.readouterr().err
    assert pointer + ":" in err
    with pytest.raises(ConfigError):
        validate_config(cfg)


def test_missing_and_malformed_files(tmp_path):
    assert cli.main(["validate", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["run", str(bad)]) == 2


@pytest.mark.parametrize("name", sorted(FAST))
def test_run_writes_outputs(tmp_path, monkeypatch, name):
    monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path / "root"))
    path = write(tmp_path, {"experiment": name, "parameters": FAST[name]})
    assert cli.main(["run", path]) == 0
    out = tmp_path / "root" / name
    doc = json.loads((out / "results.json").read_text())
    assert doc["experiment"] == name and doc["assertions"]
    assert all(a["passed"] for a in doc["assertions"])
    assert list(out.glob("*.csv"))
    assert not (out / "failures.json").exists()
    for dat in out.glob("*.dat"):
        lines = dat.read_text().splitlines()
        assert lines[0].startswith("# x: ") and lines[1].startswith("# y: ")
        assert all(len(line.split()) == 2 for line in lines[2:])


def _provenance_ok(obj):
    if isinstance(obj, dict):
        if "value" in obj and set(obj) == {"value", "quantity", "module"}:
            return obj["module"] in ("geometry", "spectral", "pinching", "harmonic_poly")
        return all(_provenance_ok(v) for v in obj.values())
    if isinstance(obj, list):
        return all(_provenance_ok(v) for v in obj)
    return True


def test_results_are_reproducible_apart_from_timestamp(tmp_path):
    cfg = write(tmp_path, {"experiment": "spheroid-pinch-sweep", "parameters": FAST["spheroid-pinch-sweep"]})
    texts = []
    for i in range(2):
        out = tmp_path / f"run{i}"
        assert cli.main(["run", cfg, "-o", str(out)]) == 0
        doc = json.loads((out / "results.json").read_text())
        assert _provenance_ok(doc["results"])
        doc.pop("timestamp")
        texts.append(json.dumps(doc, sort_keys=True))
        texts.append((out / "minimal_tau.csv").read_text())
    assert texts[0] == texts[2] and texts[1] == texts[3]


def test_failed_assertions_exit_1_with_manifest(tmp_path):
    params = dict(FAST["dumbbell-sweep"], lam1_limit=1e-6)
    cfg = write(tmp_path, {"experiment": "dumbbell-sweep", "parameters": params})
    out = tmp_path / "out"
    assert cli.main(["run", cfg, "-o", str(out)]) == 1
    manifest = json.loads((out / "failures.json").read_text())
    assert [f["name"] for f in manifest["failures"]] == ["lambda_1 at smallest eps < 1e-06"]
    # a later passing run clears the manifest
    cfg = write(tmp_path, {"experiment": "dumbbell-sweep", "parameters": FAST["dumbbell-sweep"]})
    assert cli.main(["run", cfg, "-o", str(out)]) == 0
    assert not (out / "failures.json").exists()


def test_format_selection(tmp_path):
    cfg = write(tmp_path, {"experiment": "identity-audit", "parameters": FAST["identity-audit"],
                           "output": {"formats": ["csv"]}})
    out = tmp_path / "o"
    assert cli.main(["run", cfg, "-o", str(out)]) == 0
    assert not (out / "results.json").exists()
    assert (out / "harmonic_identities.csv").exists()


@pytest.mark.parametrize("path", sorted(p for p in os.listdir(os.path.join(os.path.dirname(__file__), "..",
                                                                              "scripts", "configs"))))
def test_shipped_configs_validate(path):
    full = os.path.join(os.path.dirname(__file__), "..", "scripts", "configs", path)
    expected = 2 if path.startswith("invalid") else 0
    assert cli.main(["validate", full]) == expected
