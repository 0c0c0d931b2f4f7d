import json

import numpy as np
import pytest

from multikink.cli import main


SG_SINGLE = """
[run]
seed = 42

[potential]
kind = sine_gordon

[chain]
labels = 0, 1

[multikink]
velocities = 0.3
shifts = 0.0

[grid]
x_min = -25
x_max = 25
dx = 0.05
t_start = 0
t_end = 8
snapshot_every = 20

[construct]
T = 2.0
delta = 0.5
t_final = 20.0
tol = 1e-8

[kink]
n = 0
n_prime = 1

[boost]
v = 0.2

[verify]
window_t = 3.0

[output]
directory = out
"""


@pytest.fixture()
def sg_config(tmp_path):
    path = tmp_path / "sg.cfg"
    path.write_text(SG_SINGLE)
    return path


def test_cmd_kink(tmp_path, sg_config):
    out = tmp_path / "o"
    assert main(["kink", "--config", str(sg_config), "--out", str(out)]) == 0
    data = np.loadtxt(out / "profile.csv", delimiter=",", skiprows=1)
    mid = len(data) // 2
    assert abs(data[mid, 0]) <= 1e-12
    assert abs(data[mid, 1] - np.pi) <= 1e-12
    energy = json.loads((out / "energy.json").read_text())
    assert abs(energy["energy"] - 8.0) <= 1e-6
    assert energy["artifact_version"]
    assert energy["config"]["potential"]["kind"] == "sine_gordon"
    tails = json.loads((out / "tails.json").read_text())
    assert abs(tails["right"]["fitted_rate"] - 1.0) <= 0.02


def test_cmd_multikink_and_evolve(tmp_path, sg_config):
    out = tmp_path / "o"
    assert main(["multikink", "--config", str(sg_config), "--out", str(out)]) == 0
    sector = json.loads((out / "sector.json").read_text())
    assert sector["sector"] == [0, 1]
    assert main(["evolve", "--config", str(sg_config), "--out", str(out)]) == 0
    ev = json.loads((out / "evolve.json").read_text())
    assert ev["energy_drift"] <= 1e-5
    assert (out / "slab" / "manifest.json").is_file()
    series = np.loadtxt(out / "energy_series.csv", delimiter=",", skiprows=1)
    gamma = 1.0 / np.sqrt(1.0 - 0.09)
    assert abs(series[0, 1] - 8.0 * gamma) <= 1e-3


def test_cmd_construct(tmp_path, sg_config):
    out = tmp_path / "o"
    assert main(["construct", "--config", str(sg_config), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())["report"]
    assert report["converged"]
    # K=1: the error vanishes; the residual sits at the measurement cadence
    assert report["iterate_norms"][0] <= 1e-12
    assert report["final_residual"] <= 1e-3
    assert (out / "psi_slab" / "manifest.json").is_file()


def test_cmd_boost_and_spectrum(tmp_path, sg_config):
    out = tmp_path / "o"
    assert main(["boost", "--config", str(sg_config), "--out", str(out)]) == 0
    boosted = json.loads((out / "boosted_params.json").read_text())
    assert abs(boosted["velocities"][0] - (0.3 - 0.2) / (1 - 0.06)) <= 1e-14
    assert boosted["round_trip_error"] <= 1e-13
    assert main(["spectrum", "--config", str(sg_config), "--out", str(out)]) == 0
    spec = json.loads((out / "spectrum.json").read_text())
    assert abs(spec["eigenvalues"][0]) <= 1e-4
    assert spec["kernel_cosine_similarity"] >= 0.9999


def test_cmd_verify(tmp_path, sg_config):
    out = tmp_path / "o"
    assert main(["verify", "--config", str(sg_config), "--out", str(out)]) == 0
    doc = json.loads((out / "verification.json").read_text())
    assert doc["covariance"]["discrepancy"] <= 1e-4
    assert doc["energy_drift"]["max_drift"] <= 1e-5
    assert doc["coercivity"]["min_rayleigh_ratio"] >= 0.05


def test_determinism(tmp_path, sg_config):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert main(["verify", "--config", str(sg_config), "--out", str(out)]) == 0
    assert (out1 / "verification.json").read_bytes() == (out2 / "verification.json").read_bytes()


def test_seed_override_changes_samples(tmp_path, sg_config):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["spectrum", "--config", str(sg_config), "--out", str(out1)]) == 0
    assert main(["spectrum", "--config", str(sg_config), "--out", str(out2),
                 "--seed", "7"]) == 0
    d1 = json.loads((out1 / "spectrum.json").read_text())
    d2 = json.loads((out2 / "spectrum.json").read_text())
    assert d1["seed"] == 42 and d2["seed"] == 7
    assert d1["coercivity_lambda0"] != d2["coercivity_lambda0"]


def test_missing_config_exit_2(tmp_path):
    assert main(["kink", "--config", str(tmp_path / "nope.cfg")]) == 2


def test_invalid_chain_exit_2(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text(SG_SINGLE.replace("labels = 0, 1", "labels = 0, 2"))
    assert main(["multikink", "--config", str(path), "--out", str(tmp_path / "o")]) == 2
    assert "(0, 2)" in capsys.readouterr().err


def test_missing_boost_section_exit_2(tmp_path):
    path = tmp_path / "noboost.cfg"
    path.write_text(SG_SINGLE.replace("[boost]\nv = 0.2\n", ""))
    assert main(["boost", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


def test_missing_required_key_exit_2(tmp_path):
    path = tmp_path / "nokind.cfg"
    path.write_text(SG_SINGLE.replace("kind = sine_gordon", ""))
    assert main(["kink", "--config", str(path), "--out", str(tmp_path / "o")]) == 2
