"""Scene files: JSON documents holding a cone, named bodies, named
measures and solver overrides.

Example::

    {
      "cone": {"generators": [[1, 0], [0, 1]]},
      "bodies": {"A": {"constraints": [{"u": [-0.7071067811865475, -0.7071067811865475], "f": 1.0}]}},
      "measures": {"phi": {"atoms": [{"u": [-0.7071067811865475, -0.7071067811865475], "mass": 2.0}]}},
      "config": {"tol_residual": 1e-10}
    }

``bodies`` and ``measures`` may also be lists of objects carrying a ``name``
field. Directions are normalized on load (with a warning when the norm is off
by more than 1e-12); :func:`dumps` writes the canonical form, so
``dumps(loads(dumps(loads(text))))`` equals ``dumps(loads(text))``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import CFullBody, DiscreteMeasure, validate_measure, wulff_shape
from .exceptions import ParseError
from .geometry import UNIT_TOL, PolyhedralCone, validate_cone


class NormalizationWarning(UserWarning):
    """A direction vector was rescaled to unit length on load."""


@dataclass
class Scene:
    cone: PolyhedralCone
    generators: np.ndarray
    bodies: dict = field(default_factory=dict)
    measures: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def body(self, name: str) -> CFullBody:
        try:
            return self.bodies[name]
        except KeyError:
            raise ParseError(f"no body named {name!r}; scene has {sorted(self.bodies)}") from None

    def measure(self, name: str) -> DiscreteMeasure:
        try:
            return self.measures[name]
        except KeyError:
            raise ParseError(f"no measure named {name!r}; scene has {sorted(self.measures)}") from None


def _vector(value, n, where) -> np.ndarray:
    if not isinstance(value, list) or (n is not None and len(value) != n):
        want = f"a list of {n} numbers" if n else "a list of numbers"
        raise ParseError(f"{where}: expected {want}, got {value!r}")
    try:
        v = np.array([float(x) for x in value])
    except (TypeError, ValueError):
        raise ParseError(f"{where}: non-numeric entry in {value!r}") from None
    if any(isinstance(x, bool) for x in value) or not np.all(np.isfinite(v)):
        raise ParseError(f"{where}: entries must be finite numbers")
    return v


def _number(value, where) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: expected a number, got {value!r}")
    x = float(value)
    if not math.isfinite(x):
        raise ParseError(f"{where}: expected a finite number, got {value!r}")
    return x


def _direction(value, n, where) -> np.ndarray:
    u = _vector(value, n, where)
    norm = float(np.linalg.norm(u))
    if norm == 0.0:
        raise ParseError(f"{where}: zero direction")
    if abs(norm - 1.0) > UNIT_TOL:
        warnings.warn(f"{where}: direction normalized (norm was {norm!r})", NormalizationWarning, stacklevel=3)
        u = u / norm
    return u


def _named(section, where) -> dict:
    if section is None:
        return {}
    if isinstance(section, dict):
        return dict(section)
    if isinstance(section, list):
        out = {}
        for i, item in enumerate(section):
            if not isinstance(item, dict) or not isinstance(item.get("name"), str):
                raise ParseError(f"{where}[{i}]: list entries need a string 'name'")
            if item["name"] in out:
                raise ParseError(f"{where}: duplicate name {item['name']!r}")
            out[item["name"]] = item
        return out
    raise ParseError(f"{where}: expected an object or a list")


def _field(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{where}: missing field {key!r}")
    return obj[key]


def parse_scene(data: dict) -> Scene:
    """Build a :class:`Scene` from decoded JSON, validating every object."""
    if not isinstance(data, dict):
        raise ParseError("scene must be a JSON object")
    cone_spec = _field(data, "cone", "scene")
    raw = _field(cone_spec, "generators", "cone")
    if not isinstance(raw, list) or not raw:
        raise ParseError("cone.generators: expected a nonempty list of vectors")
    n = len(raw[0]) if isinstance(raw[0], list) else None
    if not n or n < 2:
        raise ParseError("cone.generators: vectors must have at least 2 entries")
    G = np.array([_direction(g, n, f"cone.generators[{i}]") for i, g in enumerate(raw)])
    C = validate_cone(G)

    bodies = {}
    for name, spec in _named(data.get("bodies"), "bodies").items():
        cons = _field(spec, "constraints", f"bodies.{name}")
        if not isinstance(cons, list) or not cons:
            raise ParseError(f"bodies.{name}.constraints: expected a nonempty list")
        where = [f"bodies.{name}[{i}]" for i in range(len(cons))]
        U = np.array([_direction(_field(c, "u", w), n, w + ".u") for c, w in zip(cons, where)])
        f = np.array([_number(_field(c, "f", w), w + ".f") for c, w in zip(cons, where)])
        bodies[name] = wulff_shape(C, U, f)

    measures = {}
    for name, spec in _named(data.get("measures"), "measures").items():
        atoms = _field(spec, "atoms", f"measures.{name}")
        if not isinstance(atoms, list) or not atoms:
            raise ParseError(f"measures.{name}.atoms: expected a nonempty list")
        where = [f"measures.{name}[{i}]" for i in range(len(atoms))]
        U = np.array([_direction(_field(a, "u", w), n, w + ".u") for a, w in zip(atoms, where)])
        m = np.array([_number(_field(a, "mass", w), w + ".mass") for a, w in zip(atoms, where)])
        measures[name] = validate_measure(C, DiscreteMeasure(U, m))

    config = data.get("config", {})
    if not isinstance(config, dict):
        raise ParseError("config: expected an object")
    return Scene(cone=C, generators=G, bodies=bodies, measures=measures, config=dict(config))


def loads(text: str) -> Scene:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return parse_scene(data)


def load(path) -> Scene:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read scene file: {exc}") from None
    return loads(text)


def body_to_dict(body: CFullBody) -> dict:
    return {"constraints": [{"u": u.tolist(), "f": float(f)} for u, f in zip(body.directions, body.offsets)]}


def measure_to_dict(measure: DiscreteMeasure) -> dict:
    return {"atoms": [{"u": u.tolist(), "mass": float(m)} for u, m in zip(measure.directions, measure.masses)]}


def scene_to_dict(scene: Scene) -> dict:
    return {
        "cone": {"generators": scene.generators.tolist()},
        "bodies": {k: body_to_dict(b) for k, b in scene.bodies.items()},
        "measures": {k: measure_to_dict(m) for k, m in scene.measures.items()},
        "config": scene.config,
    }


def dumps(scene: Scene) -> str:
    """Canonical text: sorted keys, two-space indent, shortest float repr."""
    return json.dumps(scene_to_dict(scene), sort_keys=True, indent=2) + "\n"


def dump(scene: Scene, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(scene))
