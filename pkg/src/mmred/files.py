"""JSON serialization of systems and generators, and the bundled benchmark.

System files are JSON objects ``{"name", "A", "B", "C", "D"}`` with matrices
as arrays of row arrays.  Python's float repr is the shortest string that
round-trips, so ``load(save(x))`` is bit-exact for finite doubles.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import FileFormatError
from .lti import Realization
from .siggen import SignalGenerator

FOURDISK_SHA256 = "e1e1d52eca975b55c4591ae84cc81fb2089016f842447a70eff75f2b1971af81"


def _rows(m) -> list:
    m = np.asarray(m, dtype=float)
    return [[float(v) for v in row] for row in m.reshape(m.shape[0], -1)] if m.size else []


def system_to_dict(sys: Realization) -> dict:
    return {"name": sys.name, "A": _rows(sys.A), "B": _rows(sys.B),
            "C": _rows(sys.C), "D": _rows(sys.D)}


def _matrix(obj, key, where):
    if key not in obj:
        raise FileFormatError(f"{where}: missing key {key!r}")
    rows = obj[key]
    if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
        raise FileFormatError(f"{where}: {key} must be an array of row arrays")
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise FileFormatError(f"{where}: {key} is not rectangular (row lengths {sorted(widths)})")
    try:
        return np.array(rows, dtype=float).reshape(len(rows), widths.pop() if widths else 0)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"{where}: {key} has non-numeric entries") from exc


def system_from_dict(obj, where="<system>") -> Realization:
    if not isinstance(obj, dict):
        raise FileFormatError(f"{where}: expected a JSON object")
    A = _matrix(obj, "A", where)
    B = _matrix(obj, "B", where)
    C = _matrix(obj, "C", where)
    D = _matrix(obj, "D", where) if "D" in obj else np.zeros((1, 1))
    try:
        return Realization(A, B, C, D, name=str(obj.get("name", "")))
    except ValueError as exc:
        raise FileFormatError(f"{where}: {exc}") from exc


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, fixed indentation)."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def loads(text: str, where="<string>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{where}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def read_json(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc.strerror}") from exc
    return loads(text, where=str(path))


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def save_system(path, sys: Realization) -> None:
    write_json(path, system_to_dict(sys))


def load_system(path) -> Realization:
    return system_from_dict(read_json(path), where=str(path))


def generator_to_dict(g: SignalGenerator) -> dict:
    return {"name": g.name, "S": _rows(g.S), "L": _rows(g.L), "omega0": [float(v) for v in g.omega0]}


def generator_from_dict(obj, where="<generator>") -> SignalGenerator:
    if not isinstance(obj, dict):
        raise FileFormatError(f"{where}: expected a JSON object")
    S = _matrix(obj, "S", where)
    L = _matrix(obj, "L", where)
    w0 = obj.get("omega0")
    if w0 is None:
        w0 = np.zeros(S.shape[0])
    try:
        return SignalGenerator(S, L, np.asarray(w0, dtype=float), name=str(obj.get("name", "")))
    except ValueError as exc:
        raise FileFormatError(f"{where}: {exc}") from exc


def save_generator(path, g: SignalGenerator) -> None:
    write_json(path, generator_to_dict(g))


def load_generator(path) -> SignalGenerator:
    return generator_from_dict(read_json(path), where=str(path))


# ---------------------------------------------------------------------------
# bundled four-disk drive benchmark

@dataclass(frozen=True, eq=False)
class FourDisk:
    plant: Realization
    regulator_poles: tuple
    observer_poles: tuple

    @property
    def poles(self):
        return self.regulator_poles + self.observer_poles


def _fourdisk_bytes() -> bytes:
    return resources.files("mmred").joinpath("data/fourdisk.json").read_bytes()


def fourdisk_checksum() -> str:
    return hashlib.sha256(_fourdisk_bytes()).hexdigest()


def load_fourdisk() -> FourDisk:
    obj = loads(_fourdisk_bytes().decode(), where="fourdisk.json")
    return FourDisk(system_from_dict(obj["plant"], where="fourdisk.json"),
                    tuple(obj["regulator_poles"]), tuple(obj["observer_poles"]))
