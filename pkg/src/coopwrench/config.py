"""Scenario data model, validation, and the built-in experiment scenarios.

A scenario bundles the rigid object being carried, the manipulators grasping
it, the trajectory it must follow, and the solver settings.  Scenario files
are YAML documents; the exact grammar is documented in the README and the
built-in texts below double as annotated examples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

SCHEMA_VERSION = 1

MODES = ("baseline", "improved-fixed-alpha", "improved-joint", "both")
BETA_POLICIES = ("proportional", "uniform")
TRAJECTORY_KINDS = ("circle", "static-hold")

STANDARD_GRAVITY = 9.8067


class ScenarioError(Exception):
    """Base class for scenario loading problems."""


class ScenarioSyntaxError(ScenarioError):
    """Malformed scenario text; carries the offending position when known."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class ScenarioValidationError(ScenarioError):
    """A structurally valid document that violates a scenario invariant."""


def _freeze(values, shape, name):
    """Coerce to a read-only float array of the given shape."""
    arr = np.array(values, dtype=float)
    if arr.shape != shape:
        raise ScenarioValidationError(
            f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ScenarioValidationError(f"{name} must be finite")
    arr.flags.writeable = False
    return arr


def _set(obj, name, value):
    # frozen dataclass: assign through object.__setattr__ during __post_init__
    object.__setattr__(obj, name, value)


@dataclass(frozen=True, eq=False)
class Wrench:
    """A spatial force: 3-vector force paired with a 3-vector torque."""

    force: np.ndarray
    torque: np.ndarray

    def __post_init__(self):
        _set(self, "force", _freeze(self.force, (3,), "wrench force"))
        _set(self, "torque", _freeze(self.torque, (3,), "wrench torque"))

    @classmethod
    def zero(cls):
        return cls(np.zeros(3), np.zeros(3))

    @classmethod
    def from_vector(cls, vec):
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (6,):
            raise ValueError("wrench vector must have 6 components")
        return cls(vec[:3], vec[3:])

    def as_vector(self):
        return np.concatenate([self.force, self.torque])


@dataclass(frozen=True, eq=False)
class ObjectState:
    """Pose and its first two derivatives for the carried object."""

    position: np.ndarray
    orientation: np.ndarray
    linear_velocity: np.ndarray
    angular_velocity: np.ndarray
    linear_accel: np.ndarray
    angular_accel: np.ndarray

    def __post_init__(self):
        _set(self, "position", _freeze(self.position, (3,), "position"))
        _set(self, "orientation", _freeze(self.orientation, (3, 3), "orientation"))
        _set(self, "linear_velocity",
             _freeze(self.linear_velocity, (3,), "linear velocity"))
        _set(self, "angular_velocity",
             _freeze(self.angular_velocity, (3,), "angular velocity"))
        _set(self, "linear_accel", _freeze(self.linear_accel, (3,), "linear accel"))
        _set(self, "angular_accel", _freeze(self.angular_accel, (3,), "angular accel"))
        R = self.orientation
        if np.max(np.abs(R.T @ R - np.eye(3))) > 1e-12:
            raise ScenarioValidationError("orientation must be orthonormal")
        if abs(np.linalg.det(R) - 1.0) > 1e-12:
            raise ScenarioValidationError("orientation must be right-handed")


@dataclass(frozen=True, eq=False)
class ManipulatorModel:
    """A fixed-base serial chain moving in the world X-Z plane.

    Link ``j`` is a rigid body of length ``link_lengths[j]`` with its center
    of mass ``link_com_offsets[j]`` along the link and rotational inertia
    ``link_inertias[j]`` about the axis normal to the motion plane.  The
    ``approximate`` flag marks placeholder physical parameters that were not
    measured on hardware.
    """

    id: int
    base_position: np.ndarray
    link_lengths: np.ndarray
    link_masses: np.ndarray
    link_com_offsets: np.ndarray
    link_inertias: np.ndarray
    torque_limits: np.ndarray
    velocity_limits: np.ndarray
    approximate: bool = False

    def __post_init__(self):
        n = np.asarray(self.link_lengths).size
        if n < 2:
            raise ScenarioValidationError(
                f"manipulator {self.id}: joint count must be at least 2")
        _set(self, "base_position",
             _freeze(self.base_position, (3,), "base_position"))
        for name in ("link_lengths", "link_masses", "link_com_offsets",
                     "link_inertias", "torque_limits", "velocity_limits"):
            _set(self, name, _freeze(getattr(self, name), (n,), name))
        for name in ("link_lengths", "link_masses", "torque_limits",
                     "velocity_limits"):
            if np.any(getattr(self, name) <= 0.0):
                raise ScenarioValidationError(
                    f"manipulator {self.id}: {name} must be strictly positive")
        if np.any(self.link_inertias < 0.0):
            raise ScenarioValidationError(
                f"manipulator {self.id}: link_inertias must be non-negative")
        if np.any(self.link_com_offsets < 0.0) or np.any(
                self.link_com_offsets > self.link_lengths):
            raise ScenarioValidationError(
                f"manipulator {self.id}: link_com_offsets must lie on the link")

    @property
    def joint_count(self):
        return self.link_lengths.size


@dataclass(frozen=True, eq=False)
class RigidObjectModel:
    """The carried rigid body and where each manipulator grasps it.

    ``grasp_points`` are expressed in the object body frame, relative to the
    center of mass.  ``dimensions`` is documentation only; the inertia tensor
    is what the dynamics consume.
    """

    mass: float
    inertia: np.ndarray
    grasp_points: np.ndarray
    dimensions: np.ndarray | None = None

    def __post_init__(self):
        if self.mass <= 0.0:
            raise ScenarioValidationError("mass must be positive")
        _set(self, "inertia", _freeze(self.inertia, (3, 3), "inertia"))
        pts = np.array(self.grasp_points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 1:
            raise ScenarioValidationError("grasp_points must be an N x 3 array")
        if not np.all(np.isfinite(pts)):
            raise ScenarioValidationError("grasp_points must be finite")
        pts.flags.writeable = False
        _set(self, "grasp_points", pts)
        if self.dimensions is not None:
            _set(self, "dimensions", _freeze(self.dimensions, (3,), "dimensions"))
        I = self.inertia
        if np.max(np.abs(I - I.T)) > 1e-9 * max(1.0, np.max(np.abs(I))):
            raise ScenarioValidationError("inertia must be symmetric")
        if np.any(np.linalg.eigvalsh(I) <= 0.0):
            raise ScenarioValidationError("inertia must be positive definite")

    @property
    def grasp_count(self):
        return self.grasp_points.shape[0]


def cuboid_inertia(mass, dimensions):
    """Inertia tensor of a uniform solid cuboid about its center of mass."""
    lx, ly, lz = np.asarray(dimensions, dtype=float)
    return np.diag([
        mass * (ly ** 2 + lz ** 2) / 12.0,
        mass * (lx ** 2 + lz ** 2) / 12.0,
        mass * (lx ** 2 + ly ** 2) / 12.0,
    ])


@dataclass(frozen=True, eq=False)
class TrajectorySpec:
    """Reference motion for the object; orientation is held at identity.

    ``circle`` traces center + radius * [cos(rate * t), 0, sin(rate * t)] in
    the X-Z plane.  ``static-hold`` keeps the object fixed at the center.
    """

    kind: str
    center: np.ndarray
    radius: float = 0.0
    angular_rate: float = 0.0

    def __post_init__(self):
        if self.kind not in TRAJECTORY_KINDS:
            raise ScenarioValidationError(
                f"trajectory kind must be one of {TRAJECTORY_KINDS}")
        _set(self, "center", _freeze(self.center, (3,), "trajectory center"))
        if self.radius < 0.0:
            raise ScenarioValidationError("trajectory radius must be non-negative")
        if self.kind == "circle" and self.angular_rate == 0.0:
            raise ScenarioValidationError(
                "circle trajectory needs a nonzero angular_rate")

    def period(self):
        """Duration of one repetition of the motion."""
        if self.angular_rate != 0.0:
            return 2.0 * math.pi / abs(self.angular_rate)
        return 1.0


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """Everything a run needs: models, trajectory, and solver settings.

    ``mode`` selects which capability series a run produces; ``both`` pairs
    the baseline solve with the fixed-share counterbalance solve on the same
    states.  ``beta_policy`` chooses how the load-share vector is formed and
    ``beta_iterations`` adds optional fixed-point refinement passes of the
    share vector (0 keeps the single two-pass evaluation).
    """

    manipulators: tuple[ManipulatorModel, ...]
    object: RigidObjectModel
    trajectory: TrajectorySpec
    gravity: float = STANDARD_GRAVITY
    dt: float = 0.01
    cycles: int = 2
    mode: str = "both"
    unbounded_cap: float = 1e6
    beta_policy: str = "proportional"
    beta_iterations: int = 0

    def __post_init__(self):
        _set(self, "manipulators", tuple(self.manipulators))
        if len(self.manipulators) < 1:
            raise ScenarioValidationError("at least one manipulator is required")
        if len(self.manipulators) != self.object.grasp_count:
            raise ScenarioValidationError(
                f"manipulator count ({len(self.manipulators)}) does not match "
                f"grasp point count ({self.object.grasp_count})")
        ids = [m.id for m in self.manipulators]
        if len(set(ids)) != len(ids):
            raise ScenarioValidationError("manipulator ids must be unique")
        if self.dt <= 0.0:
            raise ScenarioValidationError("dt must be positive")
        if int(self.cycles) != self.cycles or self.cycles < 1:
            raise ScenarioValidationError("cycles must be an integer >= 1")
        _set(self, "cycles", int(self.cycles))
        if self.mode not in MODES:
            raise ScenarioValidationError(f"mode must be one of {MODES}")
        if self.beta_policy not in BETA_POLICIES:
            raise ScenarioValidationError(
                f"beta_policy must be one of {BETA_POLICIES}")
        if self.unbounded_cap <= 0.0:
            raise ScenarioValidationError("unbounded_cap must be positive")
        if int(self.beta_iterations) != self.beta_iterations or \
                self.beta_iterations < 0:
            raise ScenarioValidationError("beta_iterations must be >= 0")
        _set(self, "beta_iterations", int(self.beta_iterations))

    def with_overrides(self, mode=None, dt=None, cycles=None):
        """A copy with run-time overrides applied (None keeps the field)."""
        cfg = self
        if mode is not None:
            cfg = replace(cfg, mode=mode)
        if dt is not None:
            cfg = replace(cfg, dt=dt)
        if cycles is not None:
            cfg = replace(cfg, cycles=cycles)
        return cfg


def _require(mapping, key, context):
    if key not in mapping:
        raise ScenarioValidationError(f"{context}: missing required key '{key}'")
    return mapping[key]


def _check_keys(mapping, allowed, context):
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise ScenarioValidationError(
            f"{context}: unknown key(s) {sorted(unknown)}")


def parse_scenario(text):
    """Parse scenario YAML text into a validated ScenarioConfig."""
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        line = mark.line + 1 if mark is not None else None
        column = mark.column + 1 if mark is not None else None
        raise ScenarioSyntaxError(
            f"invalid scenario syntax: {exc.problem or exc}", line, column
        ) from exc
    except yaml.YAMLError as exc:
        raise ScenarioSyntaxError(f"invalid scenario syntax: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioValidationError("scenario document must be a mapping")

    _check_keys(doc, ("schema_version", "mode", "gravity", "dt", "cycles",
                      "unbounded_cap", "beta_policy", "beta_iterations",
                      "object", "trajectory", "manipulators"), "scenario")
    version = _require(doc, "schema_version", "scenario")
    if version != SCHEMA_VERSION:
        raise ScenarioValidationError(
            f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION}")

    obj_doc = _require(doc, "object", "scenario")
    _check_keys(obj_doc, ("mass", "inertia", "dimensions", "grasp_points"),
                "object")
    mass = float(_require(obj_doc, "mass", "object"))
    if mass <= 0.0:
        raise ScenarioValidationError("mass must be positive")
    dimensions = obj_doc.get("dimensions")
    if "inertia" in obj_doc:
        inertia = np.array(obj_doc["inertia"], dtype=float)
    elif dimensions is not None:
        inertia = cuboid_inertia(mass, dimensions)
    else:
        raise ScenarioValidationError(
            "object: provide 'inertia' or 'dimensions' to derive it from")
    obj = RigidObjectModel(
        mass=mass,
        inertia=inertia,
        grasp_points=np.array(_require(obj_doc, "grasp_points", "object"),
                              dtype=float),
        dimensions=dimensions,
    )

    traj_doc = _require(doc, "trajectory", "scenario")
    _check_keys(traj_doc, ("kind", "center", "radius", "angular_rate"),
                "trajectory")
    traj = TrajectorySpec(
        kind=_require(traj_doc, "kind", "trajectory"),
        center=traj_doc.get("center", (0.0, 0.0, 0.0)),
        radius=float(traj_doc.get("radius", 0.0)),
        angular_rate=float(traj_doc.get("angular_rate", 0.0)),
    )

    arm_docs = _require(doc, "manipulators", "scenario")
    if not isinstance(arm_docs, list):
        raise ScenarioValidationError("manipulators must be a list")
    arms = []
    for idx, arm in enumerate(arm_docs):
        context = f"manipulators[{idx}]"
        _check_keys(arm, ("id", "base_position", "link_lengths", "link_masses",
                          "link_com_offsets", "link_inertias", "torque_limits",
                          "velocity_limits", "approximate"), context)
        arms.append(ManipulatorModel(
            id=int(_require(arm, "id", context)),
            base_position=_require(arm, "base_position", context),
            link_lengths=_require(arm, "link_lengths", context),
            link_masses=_require(arm, "link_masses", context),
            link_com_offsets=_require(arm, "link_com_offsets", context),
            link_inertias=_require(arm, "link_inertias", context),
            torque_limits=_require(arm, "torque_limits", context),
            velocity_limits=_require(arm, "velocity_limits", context),
            approximate=bool(arm.get("approximate", False)),
        ))

    return ScenarioConfig(
        manipulators=tuple(arms),
        object=obj,
        trajectory=traj,
        gravity=float(doc.get("gravity", STANDARD_GRAVITY)),
        dt=float(doc.get("dt", 0.01)),
        cycles=doc.get("cycles", 2),
        mode=doc.get("mode", "both"),
        unbounded_cap=float(doc.get("unbounded_cap", 1e6)),
        beta_policy=doc.get("beta_policy", "proportional"),
        beta_iterations=doc.get("beta_iterations", 0),
    )


def scenario_dict(config):
    """Plain-data document for a ScenarioConfig (the scenario file schema)."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "mode": config.mode,
        "gravity": config.gravity,
        "dt": config.dt,
        "cycles": config.cycles,
        "unbounded_cap": config.unbounded_cap,
        "beta_policy": config.beta_policy,
        "beta_iterations": config.beta_iterations,
        "object": {
            "mass": config.object.mass,
            "inertia": [[float(v) for v in row] for row in config.object.inertia],
            "grasp_points": [[float(v) for v in p]
                             for p in config.object.grasp_points],
        },
        "trajectory": {
            "kind": config.trajectory.kind,
            "center": [float(v) for v in config.trajectory.center],
            "radius": config.trajectory.radius,
            "angular_rate": config.trajectory.angular_rate,
        },
        "manipulators": [
            {
                "id": arm.id,
                "base_position": [float(v) for v in arm.base_position],
                "link_lengths": [float(v) for v in arm.link_lengths],
                "link_masses": [float(v) for v in arm.link_masses],
                "link_com_offsets": [float(v) for v in arm.link_com_offsets],
                "link_inertias": [float(v) for v in arm.link_inertias],
                "torque_limits": [float(v) for v in arm.torque_limits],
                "velocity_limits": [float(v) for v in arm.velocity_limits],
                "approximate": arm.approximate,
            }
            for arm in config.manipulators
        ],
    }
    if config.object.dimensions is not None:
        doc["object"]["dimensions"] = [float(v)
                                       for v in config.object.dimensions]
    return doc


def serialize_scenario(config):
    """Render a ScenarioConfig back to YAML; parse(serialize(c)) == c."""
    return yaml.safe_dump(scenario_dict(config), sort_keys=False,
                          default_flow_style=None)


# Four planar arms around a 2 kg plate, holding it through a slow circle.
# Base and grasp placements plus object mass, dimensions, torque bound,
# gravity, and the trajectory are published values for this setup; the link
# lengths/masses/inertias are unpublished, so the ones below are placeholder
# values (uniform slender-rod inertia, CoM at mid-link) chosen to keep every
# grasp target reachable, and are flagged approximate.
REFERENCE_SCENARIO_TEXT = """\
# Built-in reference scenario: four planar 3R arms carry a 2 kg plate
# counterclockwise around a 0.05 m circle in the X-Z plane, twice.
schema_version: 1
mode: both
gravity: 9.8067
dt: 0.01
cycles: 2
unbounded_cap: 1000000.0
beta_policy: proportional
beta_iterations: 0
object:
  mass: 2.0
  dimensions: [0.2, 0.02, 0.15]
  # uniform-cuboid tensor from the dimensions above; override if measured
  inertia:
    - [0.0038166666666666666, 0.0, 0.0]
    - [0.0, 0.010416666666666666, 0.0]
    - [0.0, 0.0, 0.006733333333333334]
  # body-frame grasp points relative to the object CoM; they sum to zero
  grasp_points:
    - [0.1, 0.0, 0.0]
    - [0.0, 0.0, -0.075]
    - [-0.1, 0.0, 0.0]
    - [0.0, 0.0, 0.075]
trajectory:
  kind: circle
  center: [0.35, 0.0, 0.35]
  radius: 0.05
  angular_rate: 1.2566370614359172  # 0.4 * pi rad/s, 5 s period
manipulators:
  # Arm bases surround the object: right, below, left, above.  Link data are
  # approximate placeholders (not measured on hardware): slender-rod inertia
  # m * l^2 / 12 about the mid-link CoM.
  - id: 1
    base_position: [0.7, 0.0, 0.35]
    link_lengths: [0.2, 0.2, 0.05]
    link_masses: [0.08, 0.07, 0.04]
    link_com_offsets: [0.1, 0.1, 0.025]
    link_inertias: [0.00026666666666666673, 0.0002333333333333334, 8.333333333333335e-06]
    torque_limits: [1.0, 1.0, 1.0]
    velocity_limits: [4.8, 4.8, 4.8]
    approximate: true
  - id: 2
    base_position: [0.35, 0.0, 0.0]
    link_lengths: [0.2, 0.2, 0.05]
    link_masses: [0.08, 0.07, 0.04]
    link_com_offsets: [0.1, 0.1, 0.025]
    link_inertias: [0.00026666666666666673, 0.0002333333333333334, 8.333333333333335e-06]
    torque_limits: [1.0, 1.0, 1.0]
    velocity_limits: [4.8, 4.8, 4.8]
    approximate: true
  - id: 3
    base_position: [0.0, 0.0, 0.35]
    link_lengths: [0.2, 0.2, 0.05]
    link_masses: [0.08, 0.07, 0.04]
    link_com_offsets: [0.1, 0.1, 0.025]
    link_inertias: [0.00026666666666666673, 0.0002333333333333334, 8.333333333333335e-06]
    torque_limits: [1.0, 1.0, 1.0]
    velocity_limits: [4.8, 4.8, 4.8]
    approximate: true
  - id: 4
    base_position: [0.35, 0.0, 0.7]
    link_lengths: [0.2, 0.2, 0.05]
    link_masses: [0.08, 0.07, 0.04]
    link_com_offsets: [0.1, 0.1, 0.025]
    link_inertias: [0.00026666666666666673, 0.0002333333333333334, 8.333333333333335e-06]
    torque_limits: [1.0, 1.0, 1.0]
    velocity_limits: [4.8, 4.8, 4.8]
    approximate: true
"""

# Same arms and object, but the left grasp point is pulled inboard so the
# grasp set is deliberately lopsided: the grasp points no longer sum to zero,
# the load-share centroid is offset from the CoM, and the induced moment is
# nonzero along the whole trajectory.
ASYMMETRIC_SCENARIO_TEXT = REFERENCE_SCENARIO_TEXT.replace(
    """\
  grasp_points:
    - [0.1, 0.0, 0.0]
    - [0.0, 0.0, -0.075]
    - [-0.1, 0.0, 0.0]
    - [0.0, 0.0, 0.075]
""",
    """\
  grasp_points:
    - [0.1, 0.0, 0.0]
    - [0.0, 0.0, -0.075]
    - [-0.04, 0.0, 0.0]
    - [0.0, 0.0, 0.075]
""",
).replace(
    "# Built-in reference scenario: four planar 3R arms carry a 2 kg plate\n"
    "# counterclockwise around a 0.05 m circle in the X-Z plane, twice.",
    "# Asymmetric grasp variant of the reference scenario: the third grasp\n"
    "# point sits inboard, so the share-weighted grasp centroid is offset\n"
    "# from the object CoM and the induced moment is nonzero."
)

SCENARIO_TEXTS = {
    "reference": REFERENCE_SCENARIO_TEXT,
    "asymmetric": ASYMMETRIC_SCENARIO_TEXT,
}


def reference_scenario():
    """The built-in four-arm reference scenario."""
    return parse_scenario(REFERENCE_SCENARIO_TEXT)


def asymmetric_scenario():
    """Reference scenario with a deliberately lopsided grasp set."""
    return parse_scenario(ASYMMETRIC_SCENARIO_TEXT)
