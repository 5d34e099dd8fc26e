"""JSON input for towers, complete intersections and fans.

Every check runs up front and errors name the offending field, e.g.
``stages[1].twists[0]`` or ``rays[3]``.
"""

import json

from .bott import BottTower, CISpec
from .errors import ConfigError
from .qseries import rational
from .toric import DegreeFunction, Fan


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _int(x, where):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"{where}: expected an integer, got {x!r}")
    return x


def _int_list(x, where):
    if not isinstance(x, list):
        raise ConfigError(f"{where}: expected a list of integers")
    return [_int(v, f"{where}[{i}]") for i, v in enumerate(x)]


def _obj(x, where, keys):
    if not isinstance(x, dict):
        raise ConfigError(f"{where}: expected an object")
    extra = sorted(set(x) - set(keys))
    if extra:
        raise ConfigError(f"{where}: unknown field {extra[0]!r}")
    return x


def parse_tower(obj):
    _obj(obj, "tower", ("stages",))
    stages = obj.get("stages")
    if not isinstance(stages, list) or not stages:
        raise ConfigError("stages: expected a non-empty list")
    out = []
    for k, st in enumerate(stages):
        where = f"stages[{k}]"
        _obj(st, where, ("fiber_dim", "twists"))
        if "fiber_dim" not in st:
            raise ConfigError(f"{where}.fiber_dim: missing")
        n = _int(st["fiber_dim"], f"{where}.fiber_dim")
        if n < 1:
            raise ConfigError(f"{where}.fiber_dim: must be positive, got {n}")
        tw = st.get("twists", [] if k == 0 else None)
        if tw is None:
            raise ConfigError(f"{where}.twists: missing (stage {k} needs {n} rows of length {k})")
        if not isinstance(tw, list):
            raise ConfigError(f"{where}.twists: expected a list of rows")
        if k == 0 and tw and any(r != [] for r in tw):
            raise ConfigError(f"{where}.twists: the first stage has no twists")
        if k > 0:
            if len(tw) != n:
                raise ConfigError(f"{where}.twists: expected {n} rows, got {len(tw)}")
            rows = []
            for j, row in enumerate(tw):
                row = _int_list(row, f"{where}.twists[{j}]")
                if len(row) != k:
                    raise ConfigError(
                        f"{where}.twists[{j}]: row length must be {k} (stage index), got {len(row)}")
                rows.append(row)
            tw = rows
        else:
            tw = ()
        out.append((n, tw))
    return BottTower(out)


def parse_ci(obj, tower=None):
    _obj(obj, "ci", ("classes",))
    classes = obj.get("classes", [])
    if not isinstance(classes, list):
        raise ConfigError("classes: expected a list")
    cl = []
    for s, c in enumerate(classes):
        c = _int_list(c, f"classes[{s}]")
        if not any(c):
            raise ConfigError(f"classes[{s}]: zero class")
        if tower is not None and len(c) != tower.n:
            raise ConfigError(f"classes[{s}]: expected {tower.n} coefficients, got {len(c)}")
        cl.append(tuple(c))
    ci = CISpec(tuple(cl))
    if tower is not None and len(cl) > tower.dim:
        raise ConfigError("classes: more classes than the ambient dimension")
    return ci


def parse_degree(values, nrays, where="deg"):
    if not isinstance(values, list):
        raise ConfigError(f"{where}: expected a list")
    if len(values) != nrays:
        raise ConfigError(f"{where}: expected {nrays} values (one per ray), got {len(values)}")
    out = []
    for i, v in enumerate(values):
        if isinstance(v, list):
            if len(v) != 2 or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
                raise ConfigError(f"{where}[{i}]: expected a rational string or a [re, im] pair")
            out.append(complex(float(v[0]), float(v[1])))
        elif isinstance(v, (str, int)) and not isinstance(v, bool):
            try:
                out.append(rational(v))
            except (ValueError, ZeroDivisionError, TypeError):
                raise ConfigError(f"{where}[{i}]: not a rational number: {v!r}") from None
        else:
            raise ConfigError(f"{where}[{i}]: expected a rational string or a [re, im] pair")
    return DegreeFunction(out)


def parse_fan(obj):
    """Fan (with optional tower and divisor map) and its degree function (or None)."""
    _obj(obj, "fan", ("rank", "rays", "max_cones", "deg", "tower", "divisor_map"))
    for key in ("rank", "rays", "max_cones"):
        if key not in obj:
            raise ConfigError(f"{key}: missing")
    rank = _int(obj["rank"], "rank")
    if rank < 1:
        raise ConfigError(f"rank: must be positive, got {rank}")
    if not isinstance(obj["rays"], list) or not obj["rays"]:
        raise ConfigError("rays: expected a non-empty list")
    rays = [_int_list(r, f"rays[{i}]") for i, r in enumerate(obj["rays"])]
    for i, r in enumerate(rays):
        if len(r) != rank:
            raise ConfigError(f"rays[{i}]: expected {rank} coordinates, got {len(r)}")
    if not isinstance(obj["max_cones"], list):
        raise ConfigError("max_cones: expected a list")
    cones = [_int_list(c, f"max_cones[{i}]") for i, c in enumerate(obj["max_cones"])]
    try:
        fan = Fan(rank, rays, cones)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if "tower" in obj or "divisor_map" in obj:
        if "tower" not in obj or "divisor_map" not in obj:
            raise ConfigError("tower and divisor_map must be given together")
        tower = parse_tower(obj["tower"])
        dm = obj["divisor_map"]
        if not isinstance(dm, list) or len(dm) != len(rays):
            raise ConfigError(f"divisor_map: expected {len(rays)} entries (one per ray)")
        dmap = []
        for i, v in enumerate(dm):
            v = _int_list(v, f"divisor_map[{i}]")
            if len(v) != tower.n:
                raise ConfigError(f"divisor_map[{i}]: expected {tower.n} coefficients")
            dmap.append(tuple(v))
        fan.tower = tower
        fan.divisor_map = tuple(dmap)
    deg = parse_degree(obj["deg"], len(rays)) if "deg" in obj else None
    return fan, deg


__all__ = ["load_json", "parse_tower", "parse_ci", "parse_fan", "parse_degree"]
