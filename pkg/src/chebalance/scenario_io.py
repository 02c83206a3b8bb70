"""Line-oriented scenario / stance files.

Unindented lines open a section (``robot``, ``estimator``, ``contact <id>``,
``state <name>``, ``validate``) or set a one-line value (``tick <s>``,
``noise <N>``). Indented ``key value...`` lines fill the open section.
``#`` starts a comment. All units SI, angles in radians.

    robot
      mass 40
      gravity 9.81
    contact RF
      position 0 -0.1 0
      rotation 1 0 0 0 1 0 0 0 1      # row-major; or: axis_angle ax ay az angle
      mode fixed
      mu 0.7
      sigma 0.1 0.05
      fz 0 800
      tz -20 20
    state stand
      duration 100
      mode RF fixed
      com 0 0 0.75
      force RH 10
      path RH circle 0.10 400
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from chebalance.contacts import ContactError, ContactLimits, Mode
from chebalance.harness import ContactSpec, EstimatorConfig, FsmState, PathSpec, Scenario, ScenarioError
from chebalance.spatial import axis_angle, is_rotation


class ParseError(ValueError):
    def __init__(self, line: int, field: str, message: str):
        super().__init__(f"line {line}: field {field!r}: {message}")
        self.line = line
        self.field = field


def _floats(lineno, key, args, count=None):
    if count is not None and len(args) != count:
        raise ParseError(lineno, key, f"expected {count} value(s), got {len(args)}")
    try:
        return [float(a) for a in args]
    except ValueError:
        raise ParseError(lineno, key, f"expected numbers, got {' '.join(args)!r}") from None


def _mode(lineno, key, word):
    try:
        return Mode(word.lower())
    except ValueError:
        raise ParseError(lineno, key, f"unknown mode {word!r} (fixed, sliding, inactive)") from None


_CONTACT_KEYS = {"position", "rotation", "axis_angle", "mode", "mu", "mu_dynamic", "sigma", "fz", "tz",
                 "velocity", "fz_des"}
_STATE_KEYS = {"duration", "mode", "com", "force", "path"}


def loads(text: str) -> Scenario:
    robot: Dict[str, object] = {}
    estimator: Dict[str, float] = {}
    tick = 0.005
    noise = 0.0
    corrupt = None
    contacts: List[dict] = []
    states: List[dict] = []
    section: Optional[str] = None
    current: Optional[dict] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        words = line.split()
        if not raw[0].isspace():
            head, args = words[0], words[1:]
            current = None
            if head == "robot" and not args:
                section = "robot"
            elif head == "estimator" and not args:
                section = "estimator"
            elif head == "validate" and not args:
                section = "validate"
            elif head == "contact":
                if len(args) != 1:
                    raise ParseError(lineno, "contact", "expected exactly one contact id")
                section = "contact"
                current = {"id": args[0], "line": lineno}
                contacts.append(current)
            elif head == "state":
                if len(args) != 1:
                    raise ParseError(lineno, "state", "expected exactly one state name")
                section = "state"
                current = {"name": args[0], "modes": {}, "forces": {}, "paths": {}, "line": lineno}
                states.append(current)
            elif head == "tick":
                (tick,) = _floats(lineno, "tick", args, 1)
                section = None
            elif head == "noise":
                (noise,) = _floats(lineno, "noise", args, 1)
                section = None
            else:
                raise ParseError(lineno, head, "unknown section")
            continue

        key, args = words[0], words[1:]
        if section is None:
            raise ParseError(lineno, key, "indented line outside any section")
        if section == "robot":
            if key in ("mass", "gravity"):
                (robot[key],) = _floats(lineno, key, args, 1)
            elif key == "com":
                robot[key] = _floats(lineno, key, args, 3)
            else:
                raise ParseError(lineno, key, "unknown key in robot section")
        elif section == "estimator":
            if key not in ("gamma", "fz_threshold", "initial_guess"):
                raise ParseError(lineno, key, "unknown key in estimator section")
            (estimator[key],) = _floats(lineno, key, args, 1)
        elif section == "validate":
            if key != "corrupt_row":
                raise ParseError(lineno, key, "unknown key in validate section")
            j, factor = _floats(lineno, key, args, 2)
            corrupt = (int(j), factor)
        elif section == "contact":
            if key not in _CONTACT_KEYS:
                raise ParseError(lineno, key, f"unknown key in contact {current['id']!r}")
            if key == "mode":
                if len(args) != 1:
                    raise ParseError(lineno, key, "expected one mode")
                current["mode"] = _mode(lineno, key, args[0])
            else:
                counts = {"position": 3, "rotation": 9, "axis_angle": 4, "mu": 1, "mu_dynamic": 1,
                          "sigma": 2, "fz": 2, "tz": 2, "velocity": 2, "fz_des": 1}
                current[key] = _floats(lineno, key, args, counts[key])
                current[key + "_line"] = lineno
        elif section == "state":
            if key not in _STATE_KEYS:
                raise ParseError(lineno, key, f"unknown key in state {current['name']!r}")
            if key == "duration":
                (d,) = _floats(lineno, key, args, 1)
                if d != int(d) or d <= 0:
                    raise ParseError(lineno, key, "duration must be a positive whole number of ticks")
                current["duration"] = int(d)
            elif key == "com":
                current["com"] = _floats(lineno, key, args, 3)
            elif key == "mode":
                if len(args) != 2:
                    raise ParseError(lineno, key, "expected: mode <contact> <fixed|sliding|inactive>")
                current["modes"][args[0]] = _mode(lineno, key, args[1])
            elif key == "force":
                if len(args) != 2:
                    raise ParseError(lineno, key, "expected: force <contact> <newtons>")
                current["forces"][args[0]] = _floats(lineno, key, args[1:], 1)[0]
            elif key == "path":
                if len(args) < 2:
                    raise ParseError(lineno, key, "expected: path <contact> <kind> <params...>")
                try:
                    current["paths"][args[0]] = PathSpec(args[1], tuple(_floats(lineno, key, args[2:])))
                except ScenarioError as e:
                    raise ParseError(lineno, key, str(e)) from None

    if "mass" not in robot:
        raise ParseError(0, "mass", "robot section with a mass is required")
    if not contacts:
        raise ParseError(0, "contact", "at least one contact is required")

    specs = [_contact_spec(c) for c in contacts]
    fsm = []
    for s in states:
        if "duration" not in s:
            raise ParseError(s["line"], "duration", f"state {s['name']!r} needs a duration")
        fsm.append(FsmState(
            name=s["name"],
            duration_ticks=s["duration"],
            contact_modes=s["modes"],
            com_target=None if "com" not in s else np.array(s["com"]),
            force_targets=s["forces"],
            sliding_paths=s["paths"],
        ))
    try:
        est = EstimatorConfig(**estimator)
    except TypeError as e:  # pragma: no cover - keys are filtered above
        raise ParseError(0, "estimator", str(e)) from None
    scenario = Scenario(
        mass=float(robot["mass"]),
        gravity=float(robot.get("gravity", 9.81)),
        contacts=specs,
        states=fsm,
        com=np.array(robot.get("com", [0.0, 0.0, 0.75])),
        noise=noise,
        tick=tick,
        estimator=est,
        corrupt_row=corrupt,
    )
    try:
        scenario.validate()
    except ScenarioError as e:
        raise ParseError(0, "scenario", str(e)) from None
    return scenario


def _contact_spec(c: dict) -> ContactSpec:
    line = c["line"]
    if "position" not in c:
        raise ParseError(line, "position", f"contact {c['id']!r} needs a position")
    if "rotation" in c and "axis_angle" in c:
        raise ParseError(c["axis_angle_line"], "axis_angle", "give either rotation or axis_angle, not both")
    if "axis_angle" in c:
        ax = c["axis_angle"]
        try:
            R = axis_angle(ax[:3], ax[3])
        except ValueError as e:
            raise ParseError(c["axis_angle_line"], "axis_angle", str(e)) from None
    elif "rotation" in c:
        R = np.array(c["rotation"]).reshape(3, 3)
        if not is_rotation(R, tol=1e-9):
            raise ParseError(c["rotation_line"], "rotation", "matrix is not a proper rotation")
    else:
        R = np.eye(3)
    kw = {}
    if "mu" in c:
        kw["mu"] = c["mu"][0]
    if "sigma" in c:
        kw["sigma_x"], kw["sigma_y"] = c["sigma"]
    if "fz" in c:
        kw["fz_min"], kw["fz_max"] = c["fz"]
    if "tz" in c:
        kw["tz_min"], kw["tz_max"] = c["tz"]
    try:
        limits = ContactLimits(**kw)
    except ContactError as e:
        raise ParseError(line, "limits", f"contact {c['id']!r}: {e}") from None
    return ContactSpec(
        id=c["id"],
        rotation=R,
        position=c["position"],
        mode=c.get("mode", Mode.FIXED),
        limits=limits,
        mu_dynamic=c["mu_dynamic"][0] if "mu_dynamic" in c else None,
        velocity=c.get("velocity"),
        fz_des=c["fz_des"][0] if "fz_des" in c else None,
    )


def load(path) -> Scenario:
    return loads(Path(path).read_text(encoding="utf-8"))


def _num(x: float) -> str:
    return repr(float(x))


def _nums(xs) -> str:
    return " ".join(_num(x) for x in xs)


def dumps(sc: Scenario) -> str:
    out = ["robot", f"  mass {_num(sc.mass)}", f"  gravity {_num(sc.gravity)}", f"  com {_nums(sc.com)}",
           f"tick {_num(sc.tick)}", f"noise {_num(sc.noise)}", "estimator",
           f"  gamma {_num(sc.estimator.gamma)}",
           f"  fz_threshold {_num(sc.estimator.fz_threshold)}",
           f"  initial_guess {_num(sc.estimator.initial_guess)}"]
    for c in sc.contacts:
        lim = c.limits
        out += [f"contact {c.id}",
                f"  position {_nums(c.position)}",
                f"  rotation {_nums(c.rotation.reshape(-1))}",
                f"  mode {c.mode.value}",
                f"  mu {_num(lim.mu)}",
                f"  sigma {_num(lim.sigma_x)} {_num(lim.sigma_y)}",
                f"  fz {_num(lim.fz_min)} {_num(lim.fz_max)}",
                f"  tz {_num(lim.tz_min)} {_num(lim.tz_max)}"]
        if c.mu_dynamic is not None:
            out.append(f"  mu_dynamic {_num(c.mu_dynamic)}")
        if c.velocity is not None:
            out.append(f"  velocity {_nums(c.velocity)}")
        if c.fz_des is not None:
            out.append(f"  fz_des {_num(c.fz_des)}")
    for s in sc.states:
        out += [f"state {s.name}", f"  duration {s.duration_ticks}"]
        out += [f"  mode {cid} {m.value}" for cid, m in s.contact_modes.items()]
        if s.com_target is not None:
            out.append(f"  com {_nums(s.com_target)}")
        out += [f"  force {cid} {_num(f)}" for cid, f in s.force_targets.items()]
        out += [f"  path {cid} {p.kind} {_nums(p.params)}" for cid, p in s.sliding_paths.items()]
    if sc.corrupt_row is not None:
        out += ["validate", f"  corrupt_row {sc.corrupt_row[0]} {_num(sc.corrupt_row[1])}"]
    return "\n".join(out) + "\n"


def dump(sc: Scenario, path) -> None:
    Path(path).write_text(dumps(sc), encoding="utf-8")
