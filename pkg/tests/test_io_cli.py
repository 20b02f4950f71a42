import json
import struct

import numpy as np
import pytest

from ostrovsky_lab.cli import RunConfig, load_config, main
from ostrovsky_lab.errors import ConfigError, MissingData
from ostrovsky_lab.io import HEADER, read_fields, read_trajectory, write_fields, write_trajectory
from ostrovsky_lab.limit import fv_simulate
from ostrovsky_lab.spectral import make_grid

from conftest import TWO_PI, sine_run


def write_cfg(path, **kw):
    path.write_text(json.dumps(kw))
    return str(path)


# -- file formats -------------------------------------------------------------------------------

def test_fields_header_layout(tmp_path):
    u = np.arange(24, dtype=float).reshape(3, 8)
    write_fields(tmp_path / "f.bin", u)
    raw = (tmp_path / "f.bin").read_bytes()
    assert HEADER.size == 16 and len(raw) == 16 + 24 * 8
    assert raw[:6] == b"OSTR1\0"
    assert struct.unpack_from("<II", raw, 8) == (8, 0)
    assert np.array_equal(read_fields(tmp_path / "f.bin", rows=3), u)


def test_fields_truncated(tmp_path):
    write_fields(tmp_path / "f.bin", np.zeros((3, 8)))
    raw = (tmp_path / "f.bin").read_bytes()
    (tmp_path / "f.bin").write_bytes(raw[:-8])
    with pytest.raises(MissingData):
        read_fields(tmp_path / "f.bin")
    (tmp_path / "g.bin").write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(MissingData):
        read_fields(tmp_path / "g.bin")


def test_trajectory_round_trip(tmp_path):
    _, prm, tr = sine_run()
    write_trajectory(tmp_path / "run", tr)
    back = read_trajectory(tmp_path / "run")
    assert np.array_equal(back.times, tr.times)
    assert np.array_equal(back.u, tr.u)
    for k, v in tr.integrals.items():
        assert np.array_equal(back.integrals[k], v)
    assert back.params == prm and back.kind == "regularized"
    assert back.meta["C0"] == tr.meta["C0"]
    header = (tmp_path / "run" / "trajectory.csv").read_text().splitlines()[0]
    assert header.startswith("t,l2,l4,linf,grad_l2_int,")


def test_limit_round_trip(tmp_path):
    g = make_grid(64, TWO_PI)
    tr = fv_simulate(np.sin(g.x), 0.5, 0.5, 0.05, grid=g)
    write_trajectory(tmp_path / "lim", tr)
    back = read_trajectory(tmp_path / "lim")
    assert back.kind == "limit" and back.params is None
    assert np.array_equal(back.u, tr.u)


def test_truncated_trajectory(tmp_path):
    _, _, tr = sine_run()
    d = write_trajectory(tmp_path / "run", tr)
    lines = (d / "trajectory.csv").read_text().splitlines()
    (d / "trajectory.csv").write_text("\n".join(lines[:-5]) + "\n")
    with pytest.raises(MissingData):
        read_trajectory(d)
    (d / "meta.json").unlink()
    with pytest.raises(MissingData):
        read_trajectory(d)


# -- config ------------------------------------------------------------------------------------

def test_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="nope.json"):
        load_config(tmp_path / "nope.json")
    (tmp_path / "bad.json").write_text('{"n": 64,\n "eps": }')
    with pytest.raises(ConfigError, match="line 2"):
        load_config(tmp_path / "bad.json")
    with pytest.raises(ConfigError, match="'n'"):
        load_config(write_cfg(tmp_path / "c.json", n=63, eps=0.1, beta=0.0))
    with pytest.raises(ConfigError, match="unknown field"):
        load_config(write_cfg(tmp_path / "c.json", eps=0.1, beta=0.0, viscosity=2))
    with pytest.raises(ConfigError, match="eps_list"):
        load_config(write_cfg(tmp_path / "c.json", coupling={"c": 1, "p": 2}), sweep=True)


def test_config_coupled_params():
    cfg = RunConfig.from_dict({"eps": 0.1, "coupling": {"c": 2.0, "p": 3}})
    cfg.validate()
    assert cfg.params().beta == pytest.approx(2e-3)


# -- commands ----------------------------------------------------------------------------------

def test_simulate_missing_config(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == 1
    assert "missing.json" in capsys.readouterr().err


def test_simulate_zero(tmp_path):
    cfg = write_cfg(tmp_path / "z.json", n=64, profile="zero", eps=0.1, beta=0.01, T=0.5)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "z")]) == 0
    tr = read_trajectory(tmp_path / "z")
    assert not np.any(tr.u)
    rep = json.loads((tmp_path / "z" / "audit.json").read_text())
    assert rep["pass"] is True
    assert main(["audit", str(tmp_path / "z")]) == 0


def test_simulate_sine_audit_passes(tmp_path):
    cfg = write_cfg(tmp_path / "s.json", n=256, profile="sine", eps=0.05, beta=0.0025, T=1.0)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "s")]) == 0
    rep = json.loads((tmp_path / "s" / "audit.json").read_text())
    assert rep["checks"]["lm:l2-u"]["pass"] is True
    assert rep["schema"] == "ostrovsky-lab/audit-report/1"


def test_simulate_blowup_exit_code(tmp_path):
    cfg = write_cfg(tmp_path / "b.json", n=64, profile="sine:2e6,1", eps=0.1, beta=0.01, T=0.1)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "b")]) == 2


def test_audit_truncated(tmp_path):
    _, _, tr = sine_run()
    d = write_trajectory(tmp_path / "run", tr)
    (d / "fields.bin").write_bytes((d / "fields.bin").read_bytes()[:-100])
    assert main(["audit", str(d)]) == 1


def test_audit_without_dealiasing_fails_l2(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "a.json", n=32, profile="sine", eps=0.02, coupling={"c": 1, "p": 2},
                    T=1.5, dealias=False)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["audit", str(tmp_path / "a")]) == 2
    assert "lm:l2-u" in capsys.readouterr().err
    # same run with dealiasing passes
    cfg = write_cfg(tmp_path / "d.json", n=32, profile="sine", eps=0.02, coupling={"c": 1, "p": 2}, T=1.5)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "d")]) == 0
    assert main(["audit", str(tmp_path / "d")]) == 0


def test_limit_simulate_and_audit(tmp_path):
    cfg = write_cfg(tmp_path / "l.json", kind="limit", n=1024, profile="sine", gamma=0.0, T=3.0,
                    save_every=0.01)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "l")]) == 0
    assert main(["audit", str(tmp_path / "l")]) == 0


def test_sweep_single_eps(tmp_path):
    cfg = write_cfg(tmp_path / "w.json", eps_list=[0.1], coupling={"c": 1, "p": 2}, n=64, T=0.5)
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "w")]) == 0
    table = json.loads((tmp_path / "w" / "table.json").read_text())
    assert len(table["rows"]) == 1


def test_sweep_outside_regime_reports_flag(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "w.json", eps_list=[0.1, 0.05, 0.025], coupling={"c": 1, "p": 1}, n=128, T=1.0)
    code = main(["sweep", "--config", cfg, "--out", str(tmp_path / "w")])
    out = capsys.readouterr().out
    assert "regime_ok=False" in out
    table = json.loads((tmp_path / "w" / "table.json").read_text())
    assert table["regime_ok"] is False
    assert code == (0 if table["monotone_ok"] else 2)


def test_sweep_deterministic_across_threads(tmp_path):
    cfg = write_cfg(tmp_path / "w.json", eps_list=[0.1, 0.05, 0.025], coupling={"c": 1, "p": 2}, n=128, T=1.0)
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["--threads", "3", "sweep", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    for name in ("table.csv", "table.json", "err_u_l1.dat"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_compare(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "s.json", n=64, eps=0.1, beta=0.01, T=0.5)
    main(["simulate", "--config", cfg, "--out", str(tmp_path / "s")])
    capsys.readouterr()
    assert main(["compare", str(tmp_path / "s"), str(tmp_path / "s"), "--window", "0.05", "0.5",
                 "--out", str(tmp_path / "c")]) == 0
    doc = json.loads((tmp_path / "c" / "compare.json").read_text())
    assert all(v == 0 for v in doc["errors"].values())
    assert main(["compare", str(tmp_path / "s"), str(tmp_path / "s"), "--window", "0", "9"]) == 1


def test_usage_errors():
    assert main([]) == 1
    assert main(["frobnicate"]) == 1
