import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mmred.cli import main
from mmred.errors import FileFormatError
from mmred.files import (FOURDISK_SHA256, fourdisk_checksum, load_fourdisk, load_generator,
                         load_system, loads, save_generator, save_system, system_from_dict)
from mmred.lti import Realization
from mmred.siggen import make_jordan

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(st.integers(1, 5).flatmap(lambda n: st.tuples(
    arrays(float, (n, n), elements=finite), arrays(float, (n, 1), elements=finite),
    arrays(float, (1, n), elements=finite), arrays(float, (1, 1), elements=finite))))
@settings(max_examples=50, deadline=None)
def test_system_roundtrip_bit_exact(tmp_path_factory, mats):
    A, B, C, D = mats
    path = tmp_path_factory.mktemp("rt") / "sys.json"
    save_system(path, Realization(A, B, C, D, name="x"))
    back = load_system(path)
    for a, b in zip((A, B, C, D), (back.A, back.B, back.C, back.D)):
        assert np.array_equal(a, b)
    assert back.name == "x"


def test_generator_roundtrip(tmp_path):
    g = make_jordan(0.5 + 1j, 2)
    save_generator(tmp_path / "g.json", g)
    back = load_generator(tmp_path / "g.json")
    assert np.array_equal(back.S, g.S) and np.array_equal(back.L, g.L)
    assert np.array_equal(back.omega0, g.omega0)


def test_fourdisk_checksum_pinned():
    assert fourdisk_checksum() == FOURDISK_SHA256
    assert load_fourdisk().plant.n == 8


@pytest.mark.parametrize("obj,msg", [
    ({"B": [[1.0]], "C": [[1.0]]}, "missing key 'A'"),
    ({"A": [[1.0, 2.0], [1.0]], "B": [[1.0]], "C": [[1.0]]}, "not rectangular"),
    ({"A": [["x"]], "B": [[1.0]], "C": [[1.0]]}, "non-numeric"),
    ({"A": [[1.0]], "B": [[1.0], [2.0]], "C": [[1.0]]}, "B"),
])
def test_malformed_system(obj, msg):
    with pytest.raises(FileFormatError, match=msg):
        system_from_dict(obj)


def test_loads_reports_position():
    with pytest.raises(FileFormatError, match=r"f.json:2:\d+"):
        loads('{"A":\n  [1,, 2]}', where="f.json")


@pytest.fixture
def lag_file(tmp_path):
    path = tmp_path / "lag.json"
    save_system(path, Realization([[-1.0]], [[1.0]], [[1.0]], name="lag"))
    return path


def test_cli_moments(lag_file, tmp_path, capsys):
    out = tmp_path / "m.json"
    assert main(["moments", str(lag_file), "--jordan", "0", "2", "--json", str(out)]) == 0
    data = json.loads(out.read_text())
    assert [r["eta"][0] for r in data["moments"]] == pytest.approx([1.0, 1.0])
    assert data["CPi"] == pytest.approx([1.0, -1.0])
    assert "eta_k" in capsys.readouterr().out


def test_cli_moments_overlap_exit_2(tmp_path):
    path = tmp_path / "int.json"
    save_system(path, Realization([[0.0]], [[1.0]], [[1.0]]))
    assert main(["moments", str(path), "--step"]) == 2


def test_cli_malformed_json_exit_1(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"A": [[1.0]],\n "B": [[1.0]] "C": [[1.0]]}')
    assert main(["moments", str(path)]) == 1
    err = capsys.readouterr().err
    assert "bad.json:2:" in err


def test_cli_missing_file_and_bad_args(tmp_path):
    assert main(["moments", str(tmp_path / "nope.json")]) == 1
    assert main(["reduce"]) == 1
    assert main(["simulate", "--loop", "x.json", "--ref", "poly"]) == 1


def test_cli_design_simulate_reduce_certify(tmp_path):
    plant = tmp_path / "plant.json"
    save_system(plant, Realization([[-1.0, 0.0], [1.0, -2.0]], [[1.0], [0.0]], [[0.0, 1.0]]))
    comp = tmp_path / "comp.json"
    loop = tmp_path / "loop.json"
    assert main(["design", "--plant", str(plant), "--poles", "-1", "-2", "-3", "-4",
                 "--out", str(comp), "--loop-out", str(loop)]) == 0
    csv = tmp_path / "tr.csv"
    assert main(["simulate", "--loop", str(loop), "--ref", "step", "--horizon", "50", "--csv", str(csv)]) == 0
    assert csv.read_text().startswith("t,theta,y,eps")
    out = tmp_path / "design"
    code = main(["reduce", "--plant", str(plant), "--controller", str(comp), "--nuc", "1",
                 "--ref", "step", "--point", "-7", "--seed", "2", "--out", str(out)])
    assert code == 0
    for name in ("design.json", "report.json", "reduced_loop.json", "controller.json",
                 "trajectory_reference.csv"):
        assert (out / name).exists()
    assert main(["certify", "--design", str(out)]) == 0
    assert json.loads((out / "certify.json").read_text())["verdict"] is True
    # an absurd tolerance makes certification fail with exit 3
    assert main(["certify", "--design", str(out), "--tol", "1e-300"]) == 3


def test_cli_seed_from_environment(tmp_path, monkeypatch):
    plant = tmp_path / "plant.json"
    comp = tmp_path / "comp.json"
    save_system(plant, Realization([[-1.0, 0.0], [1.0, -2.0]], [[1.0], [0.0]], [[0.0, 1.0]]))
    assert main(["design", "--plant", str(plant), "--poles", "-1", "-2", "-3", "-4", "--out", str(comp)]) == 0
    args = ["reduce", "--plant", str(plant), "--controller", str(comp), "--nuc", "1", "--point", "-7"]
    monkeypatch.setenv("MMRED_SEED", "5")
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--seed", "5", "--out", str(tmp_path / "b")]) == 0
    a = json.loads((tmp_path / "a" / "design.json").read_text())
    b = json.loads((tmp_path / "b" / "design.json").read_text())
    assert a["config"]["seed"] == 5 and a == b


def test_cli_demo_paper_literal_exit_3(tmp_path):
    assert main(["demo", "fourdisk", "--seed", "7", "--paper-literal", "--out", str(tmp_path / "lit")]) == 3


def test_cli_bundle(tmp_path):
    assert main(["bundle", "--out", str(tmp_path)]) == 0
    assert load_system(tmp_path / "kalman16.json").n == 8
    assert load_system(tmp_path / "fourdisk_full.json").n == 16


def test_module_entry_point(tmp_path, lag_file):
    res = subprocess.run([sys.executable, "-m", "mmred", "moments", str(lag_file), "--step"],
                         capture_output=True, text=True, env={**os.environ})
    assert res.returncode == 0
    assert "C Pi + D L = 1" in res.stdout
