import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from orlicz import cli

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def run(tmp_path, sub, name, *extra):
    out = tmp_path / sub / name
    code = cli.main([sub, "--scenario", str(SCENARIOS / f"{name}.json"), "--out", str(out), *extra])
    return code, out


def load(out, sub):
    return json.loads((out / f"{sub}.json").read_text())


def statuses(report):
    return {(v["criterion"], v["reference"].split(" ")[0]): v["status"] for v in report["verdicts"]}


@pytest.mark.parametrize("name", sorted(p.stem for p in SCENARIOS.glob("*.json") if p.stem != "invalid"))
def test_every_scenario_runs(tmp_path, name):
    data = json.loads((SCENARIOS / f"{name}.json").read_text())
    sub = "sweep" if "sweep" in data else "norm" if "function" in data else "classify"
    code, out = run(tmp_path, sub, name)
    assert code == 0
    assert (out / f"{sub}.json").exists()


def test_invalid_scenario_exit_2(tmp_path, capsys):
    code, out = run(tmp_path, "classify", "invalid")
    assert code == 2
    assert not out.exists()
    assert "invalid scenario" in capsys.readouterr().err


def test_unbounded_exit_3(tmp_path):
    sc = {"young": {"family": "power", "p": 2},
          "space": {"kind": "block_geometric", "ratios": [2.0, 0.5], "scales": [1.0, 1.0]},
          "transform": {"kind": "shift", "step": 1}}
    path = tmp_path / "unb.json"
    path.write_text(json.dumps(sc))
    out = tmp_path / "o"
    assert cli.main(["classify", "--scenario", str(path), "--out", str(out)]) == 3
    rep = load(out, "classify")
    assert rep["certificates"]["boundedness"]["status"] == "Unbounded"
    assert rep["verdicts"] == []


def test_byte_identical_reruns(tmp_path):
    for sub, name in (("classify", "geometric_half_power2"), ("probe", "geometric_half_power2"),
                      ("sweep", "sweep_r"), ("stability", "two_sided_exp_power2")):
        _, a = run(tmp_path / "a", sub, name)
        _, b = run(tmp_path / "b", sub, name)
        files = sorted(os.listdir(a))
        assert files == sorted(os.listdir(b))
        for f in files:
            assert (a / f).read_bytes() == (b / f).read_bytes()


def test_norm_example(tmp_path):
    code, out = run(tmp_path, "norm", "norm_example")
    norms = load(out, "norm")["norms"]
    # f = 3 chi_0 with mu = 4, Phi = t^2: gauge = 3 * 4^(1/2)
    assert norms["gauge"] == pytest.approx(6.0, rel=1e-12)
    assert norms["indicator"] == pytest.approx(6.0, rel=1e-12)
    assert norms["amemiya"] == pytest.approx(12.0, rel=1e-9)


def test_classify_geometric_half(tmp_path):
    _, out = run(tmp_path, "classify", "geometric_half_power2")
    rep = load(out, "classify")
    st = {v["criterion"]: v["status"] for v in rep["verdicts"]}
    assert st.pop("structural_instability") == "Undetermined"
    assert set(st.values()) == {"Holds"}
    assert (out / "ratio_sequence.csv").exists() and (out / "exponents.csv").exists()
    assert rep["exponents"]["exponents"]["inf_z"]["closed_form"] == pytest.approx(2 ** 0.5)


def test_classify_constant_exp(tmp_path):
    _, out = run(tmp_path, "classify", "constant_exp_minus_one")
    st = statuses(load(out, "classify"))
    assert st[("expansive", "general")] == "Fails"
    assert st[("uniformly_expansive", "dissipative")] == "Undetermined"


def test_sweep_flips_at_one(tmp_path):
    _, out = run(tmp_path, "sweep", "sweep_r")
    pts = load(out, "sweep")["points"]
    by_r = {p["value"]: p for p in pts}
    for r in (0.25, 0.5):
        assert by_r[r]["positively_expansive"] == "Holds"
        assert by_r[r]["strong_structural_stability_condition"] == "uniform_expansion"
    for r in (2.0, 4.0):
        assert by_r[r]["positively_expansive"] == "Fails"
        assert by_r[r]["expansive"] == "Holds"
        assert by_r[r]["strong_structural_stability_condition"] == "uniform_contraction"
    header = (out / "sweep.csv").read_text().splitlines()[0].split(",")
    assert header[0] == "value" and "lambda_sup_z" in header


def test_sweep_p_constant_statuses(tmp_path):
    _, out = run(tmp_path, "sweep", "sweep_p")
    pts = load(out, "sweep")["points"]
    keys = [k for k in pts[0] if not k.startswith("lambda_") and k != "value"]
    for k in keys:
        assert len({p[k] for p in pts}) == 1, k


def test_single_point_sweep_matches_classify(tmp_path):
    data = json.loads((SCENARIOS / "sweep_r.json").read_text())
    data["sweep"] = {"parameter": "space.r", "values": [0.5], "workers": 1}
    path = tmp_path / "one.json"
    path.write_text(json.dumps(data))
    cli.main(["sweep", "--scenario", str(path), "--out", str(tmp_path / "s")])
    point = load(tmp_path / "s", "sweep")["points"][0]
    _, out = run(tmp_path, "classify", "geometric_half_power2")
    for (crit, fam), status in statuses(load(out, "classify")).items():
        key = crit + "_dissipative" if fam == "dissipative" else crit
        assert point[key] == status


def test_horizon_override_recorded(tmp_path):
    _, out = run(tmp_path, "classify", "geometric_half_power2", "--horizon", "64")
    assert load(out, "classify")["exponents"]["horizon"] == 64


def test_console_script_version():
    res = subprocess.run([sys.executable, "-m", "orlicz.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "orlicz" in res.stdout
