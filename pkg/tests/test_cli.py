import csv
import json

import pytest

from ekmanqg.cli import main


def _run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_profile(tmp_path, capsys):
    assert _run(tmp_path, "profile") == 0
    rep = json.loads((tmp_path / "profile" / "profile.json").read_text())
    assert rep["closed_form_max_error"] < 1e-8
    with open(tmp_path / "profile" / "profile.csv") as fh:
        assert len(list(csv.reader(fh))) > 128
    assert "kappa" in capsys.readouterr().out


def test_profile_other_gamma(tmp_path):
    assert _run(tmp_path, "profile", "--gamma", "1.5") == 0


def test_bad_gamma_is_config_error(tmp_path, capsys):
    assert _run(tmp_path, "profile", "--gamma", "0.5") == 2
    assert "configuration error" in capsys.readouterr().err


def test_bad_config_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"grid": {"N_h": 30}}))
    assert main(["qg", "--config", str(p), "--out", str(tmp_path)]) == 2


def test_qg_modes(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"grid": {"N_h": 16}, "t_end": 0.1}))
    assert main(["qg", "--modes", "2", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    with open(tmp_path / "qg" / "modes.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 5
    assert max(float(r["rel_err"]) for r in rows) < 1e-6


def test_qg_trajectory_idempotent(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"grid": {"N_h": 16}, "t_end": 0.05}))
    outs = []
    for sub in ("a", "b"):
        assert main(["qg", "--config", str(cfg), "--out", str(tmp_path / sub), "--seed", "3"]) == 0
        outs.append([(tmp_path / sub / "qg" / n).read_bytes() for n in ("energy.csv", "Q_final.bin")])
    assert outs[0] == outs[1]


def test_identities(tmp_path, capsys):
    assert _run(tmp_path, "identities") == 0
    rep = json.loads((tmp_path / "identities" / "identities.json").read_text())
    assert all(v["pass"] for v in rep.values())
    assert capsys.readouterr().out.count("PASS") == len(rep)


def test_ansatz_residual(tmp_path):
    assert _run(tmp_path, "ansatz-residual", "--eps", "0.1", "0.05") == 0
    rep = json.loads((tmp_path / "ansatz" / "residuals.json").read_text())
    assert rep["eps"] == [0.1, 0.05] and "slope_mass_left" in rep


def test_converge_rejects_unknown_study_key(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"study": {"nope": 1}}))
    assert main(["converge", "--config", str(p), "--out", str(tmp_path)]) == 2


@pytest.mark.slow
def test_converge_small(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"study": {"N": 8, "K": 8, "t_end": 0.02, "dt": 1e-2,
                                       "eps_list": [0.2, 0.1], "sample_every": 1}}))
    assert main(["converge", "--config", str(p), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "converge" / "study.json").read_text())
    assert len(rep["runs"]) == 2
