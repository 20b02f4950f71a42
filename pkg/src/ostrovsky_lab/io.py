"""On-disk trajectory sets.

A trajectory directory holds

* ``meta.json``: grid, parameters, run metadata and the column list;
* ``trajectory.csv``: one row per save time with ``t``, ``l2``, ``l4``,
  ``linf`` and the running time integrals (``grad_l2_int``, ...), written
  with ``repr`` so that floats round-trip exactly;
* ``fields.bin``: a 16-byte header (magic ``b"OSTR1\\0"`` padded with two zero
  bytes, little-endian u32 ``n``, u32 reserved) followed by the saved fields
  as little-endian float64, one row of ``n`` values per save time.
"""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .errors import MissingData
from .regularized import INTEGRANDS, Coupling, RegParams, Trajectory
from .spectral import make_grid

MAGIC = b"OSTR1\0"
HEADER = struct.Struct("<8sII")
FORMAT_VERSION = 1


def write_fields(path, u: np.ndarray):
    u = np.ascontiguousarray(u, dtype="<f8")
    n = u.shape[-1]
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, n, 0))
        fh.write(u.tobytes())


def read_fields(path, rows=None) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise MissingData(f"missing field dump {path}")
    raw = path.read_bytes()
    if len(raw) < HEADER.size:
        raise MissingData(f"{path}: truncated header")
    magic, n, _ = HEADER.unpack_from(raw)
    if magic[: len(MAGIC)] != MAGIC:
        raise MissingData(f"{path}: bad magic {magic!r}")
    body = len(raw) - HEADER.size
    if n == 0 or body % (8 * n):
        raise MissingData(f"{path}: body of {body} bytes is not a whole number of rows of {n}")
    data = np.frombuffer(raw, dtype="<f8", offset=HEADER.size).reshape(-1, n)
    if rows is not None and data.shape[0] != rows:
        raise MissingData(f"{path}: expected {rows} rows, found {data.shape[0]}")
    return data.astype(float)


def _params_dict(p):
    if p is None:
        return None
    d = {"eps": p.eps, "beta": p.beta, "gamma": p.gamma}
    if p.coupling is not None:
        d["coupling"] = {"c": p.coupling.c, "p": p.coupling.p}
    return d


def _params_from(d):
    if d is None:
        return None
    cp = d.get("coupling")
    return RegParams(d["eps"], d["beta"], d["gamma"], Coupling(cp["c"], cp["p"]) if cp else None)


def _json_safe(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    return v


def write_trajectory(directory, traj: Trajectory) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    names = [k for k in INTEGRANDS if k in traj.integrals] + sorted(set(traj.integrals) - set(INTEGRANDS))
    cols = ["t", "l2", "l4", "linf", *(k + "_int" for k in names)]
    meta = {
        "format": FORMAT_VERSION,
        "kind": traj.kind,
        "n": traj.grid.n,
        "L": traj.grid.length,
        "n_saves": len(traj.times),
        "params": _params_dict(traj.params),
        "meta": _json_safe(traj.meta),
        "columns": cols,
    }
    (d / "meta.json").write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")
    dx = traj.grid.dx
    l2 = np.sqrt(dx * np.sum(traj.u ** 2, axis=1))
    l4 = (dx * np.sum(traj.u ** 4, axis=1)) ** 0.25
    linf = np.max(np.abs(traj.u), axis=1)
    with open(d / "trajectory.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for i, t in enumerate(traj.times):
            w.writerow([repr(float(v)) for v in (t, l2[i], l4[i], linf[i], *(traj.integrals[k][i] for k in names))])
    write_fields(d / "fields.bin", traj.u)
    return d


def read_trajectory(directory) -> Trajectory:
    d = Path(directory)
    for name in ("meta.json", "trajectory.csv", "fields.bin"):
        if not (d / name).exists():
            raise MissingData(f"{d}: missing {name}")
    try:
        meta = json.loads((d / "meta.json").read_text())
    except json.JSONDecodeError as exc:
        raise MissingData(f"{d / 'meta.json'}: {exc}") from exc
    for key in ("kind", "n", "L", "n_saves", "columns"):
        if key not in meta:
            raise MissingData(f"{d / 'meta.json'}: missing key {key!r}")
    with open(d / "trajectory.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != meta["columns"]:
        raise MissingData(f"{d / 'trajectory.csv'}: header does not match meta.json")
    body = rows[1:]
    if len(body) != meta["n_saves"] or any(len(r) != len(rows[0]) for r in body):
        raise MissingData(f"{d / 'trajectory.csv'}: expected {meta['n_saves']} complete rows, found {len(body)}")
    table = np.array([[float(v) for v in r] for r in body]).reshape(len(body), len(rows[0]))
    u = read_fields(d / "fields.bin", rows=meta["n_saves"])
    if u.shape[1] != meta["n"]:
        raise MissingData(f"{d / 'fields.bin'}: n={u.shape[1]} but meta says {meta['n']}")
    cols = rows[0]
    integrals = {name.removesuffix("_int"): table[:, i] for i, name in enumerate(cols) if i >= 4}
    return Trajectory(grid=make_grid(meta["n"], meta["L"]), times=table[:, 0], u=u, integrals=integrals,
                      params=_params_from(meta.get("params")), kind=meta["kind"], meta=meta.get("meta", {}))


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")
