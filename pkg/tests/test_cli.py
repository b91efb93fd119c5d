import csv
import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from stablebip.cli import main, parse_config, ConfigError

ROOT = Path(__file__).resolve().parents[1]
CANONICAL = ROOT / "configs" / "canonical_deconvolution.json"
SMALL_PRIOR = {"alpha": 1.0, "gamma": {"law": "power", "scale": 0.1, "exponent": 2.0},
               "basis": "difference", "grid_size": 16}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def run(tmp_path, cfg, out="out"):
    return main([cfg["experiment"], "--config", write(tmp_path, cfg), "--out", str(tmp_path / out)])


def rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_sample_stable_degenerate(tmp_path):
    cfg = {"experiment": "sample-stable", "stable": {"alpha": 0.7, "gamma": 0.0, "delta": -1.25, "count": 6}}
    assert run(tmp_path, cfg) == 0
    body = rows(tmp_path / "out" / "samples.csv")
    assert body[0] == ["index", "value"]
    assert [r[1] for r in body[1:]] == ["-1.25"] * 6


def test_posterior_without_likelihood_has_uniform_weights(tmp_path):
    cfg = {"experiment": "posterior", "prior": SMALL_PRIOR, "model": {"kind": "zero"},
           "sampling": {"draws": 8}}
    assert run(tmp_path, cfg) == 0
    w = [float(r[2]) for r in rows(tmp_path / "out" / "weights.csv")[1:]]
    assert w == [1 / 8] * 8


def test_manifest_lists_every_artifact(tmp_path):
    cfg = {"experiment": "sample-prior", "prior": SMALL_PRIOR, "sampling": {"draws": 3}, "seed": 4}
    assert run(tmp_path, cfg) == 0
    out = tmp_path / "out"
    m = json.loads((out / "manifest.json").read_text())
    files = {p.name for p in out.iterdir()} - {"manifest.json"}
    assert set(m["artifacts"]) == files
    for name, digest in m["artifacts"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
    assert m["seed"] == 4 and m["config"]["prior"]["grid_size"] == 16


def test_seed_flag_overrides_config(tmp_path):
    cfg = {"experiment": "sample-stable", "seed": 1, "stable": {"count": 5}}
    path = write(tmp_path, cfg)
    assert main(["sample-stable", "--config", path, "--out", str(tmp_path / "a"), "--seed", "9"]) == 0
    m = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert m["seed"] == 9


def test_round_trip_through_manifest(tmp_path):
    cfg = {"experiment": "hellinger", "prior": SMALL_PRIOR, "model": {"noise_scale": 0.3},
           "data": {"seed": 2}, "sampling": {"draws": 2000}}
    assert run(tmp_path, cfg, "a") == 0
    resolved = json.loads((tmp_path / "a" / "manifest.json").read_text())["config"]
    assert main(["hellinger", "--config", write(tmp_path, resolved, "r.json"),
                 "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "metrics.csv").read_bytes() == (tmp_path / "b" / "metrics.csv").read_bytes()


def test_other_experiments_run(tmp_path):
    base = {"prior": SMALL_PRIOR, "model": {"noise_scale": 0.2}, "data": {"seed": 1}}
    cases = [
        {"experiment": "lipschitz-scan", "sampling": {"draws": 2000}},
        {"experiment": "map", "map": {"regulariser": "quadratic", "weight": 1.0, "tol": 1e-8}},
        {"experiment": "mcmc", "chain": {"steps": 5000, "burn_in": 1000, "thin": 10}},
    ]
    for i, extra in enumerate(cases):
        assert run(tmp_path, {**base, **extra}, f"o{i}") == 0
    scan = rows(tmp_path / "o0" / "scan.csv")
    assert scan[0] == ["step", "distance", "d_H", "std_error", "ratio"] and len(scan) == 5
    q = rows(tmp_path / "o2" / "quantiles.csv")
    assert q[0] == ["x", "q0.05", "q0.5", "q0.95"] and len(q) == 17


def test_invariance_conjugate(tmp_path):
    cfg = {"experiment": "invariance", "model": {"noise_scale": 0.03}, "data": {"seed": 1},
           "invariance": {"summary": "conjugate", "alpha": 2.0, "sizes": [32, 64]}}
    assert run(tmp_path, cfg) == 0
    drift = rows(tmp_path / "out" / "drift.csv")
    assert drift[0] == ["n_coarse", "n_fine", "relative_l2"] and float(drift[1][2]) < 0.05


@pytest.mark.parametrize("text, where", [
    ('{"experiment": "mcmc",\n "seed": 0,,}', ":2:"),
    ('{"experiment": "mcmc", "seed": "x"}', "config.seed"),
    ('{"experiment": "mcmc", "chian": {}}', "config.chian"),
    ('{"experiment": "fit"}', "config.experiment"),
    ('{"seed": 1}', "config.experiment"),
])
def test_parse_errors_name_location(text, where):
    with pytest.raises(ConfigError) as err:
        parse_config(text, "f.json")
    assert where in str(err.value)


def test_exit_codes(tmp_path):
    bad_json = tmp_path / "bad.json"
    bad_json.write_text('{"experiment": ')
    assert main(["mcmc", "--config", str(bad_json)]) == 2
    assert run(tmp_path, {"experiment": "sample-stable", "stable": {"alpha": 2.5}}) == 3
    divergent = dict(SMALL_PRIOR, gamma={"law": "power", "scale": 1.0, "exponent": 1.0})
    assert run(tmp_path, {"experiment": "sample-prior", "prior": divergent}) == 3
    stuck = {"experiment": "map", "prior": SMALL_PRIOR, "data": {"seed": 1},
             "map": {"tol": 1e-300, "max_sweeps": 1}}
    assert run(tmp_path, stuck) == 4


def test_command_must_match_config(tmp_path):
    path = write(tmp_path, {"experiment": "sample-stable"})
    assert main(["mcmc", "--config", path]) == 2


def test_canonical_config_reproduces_golden(tmp_path):
    golden = json.loads((ROOT / "tests" / "golden" / "canonical_deconvolution.json").read_text())
    assert main(["mcmc", "--config", str(CANONICAL), "--out", str(tmp_path / "c")]) == 0
    m = json.loads((tmp_path / "c" / "manifest.json").read_text())
    assert m["artifacts"] == golden["artifacts"]
    chain = np.loadtxt(tmp_path / "c" / "chain.csv", delimiter=",", skiprows=1)
    assert chain.shape == (3000, 65)
