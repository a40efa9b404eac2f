"""Scenario schema, validation, and the built-in scenario texts."""
import dataclasses
import math

import numpy as np
import pytest
import yaml

from coopwrench import (ManipulatorModel, ObjectState, RigidObjectModel,
                        ScenarioSyntaxError, ScenarioValidationError,
                        TrajectorySpec, Wrench, asymmetric_scenario,
                        cuboid_inertia, parse_scenario, reference_scenario,
                        scenario_dict, serialize_scenario)
from coopwrench.config import REFERENCE_SCENARIO_TEXT, SCENARIO_TEXTS


def reparse(doc):
    return parse_scenario(yaml.safe_dump(doc))


def test_reference_scenario_published_values():
    config = reference_scenario()
    assert len(config.manipulators) == 4
    assert config.object.mass == 2.0
    assert config.gravity == 9.8067
    assert config.dt == 0.01
    assert config.cycles == 2
    assert config.mode == "both"
    np.testing.assert_array_equal(config.manipulators[0].base_position,
                                  [0.7, 0.0, 0.35])
    np.testing.assert_array_equal(config.manipulators[2].base_position,
                                  [0.0, 0.0, 0.35])
    np.testing.assert_array_equal(config.object.grasp_points[1],
                                  [0.0, 0.0, -0.075])
    # symmetric grasp set: offsets cancel exactly
    np.testing.assert_array_equal(config.object.grasp_points.sum(axis=0),
                                  np.zeros(3))
    for arm in config.manipulators:
        assert arm.approximate is True
        np.testing.assert_array_equal(arm.torque_limits, np.ones(3))
        np.testing.assert_array_equal(arm.link_lengths, [0.2, 0.2, 0.05])
    np.testing.assert_allclose(
        config.object.inertia,
        cuboid_inertia(2.0, config.object.dimensions), rtol=0, atol=0)
    assert config.trajectory.kind == "circle"
    assert config.trajectory.radius == 0.05
    assert config.trajectory.angular_rate == pytest.approx(0.4 * math.pi)


def test_asymmetric_variant_moves_one_grasp_point():
    config = asymmetric_scenario()
    np.testing.assert_array_equal(config.object.grasp_points[2],
                                  [-0.04, 0.0, 0.0])
    assert np.linalg.norm(config.object.grasp_points.sum(axis=0)) > 0.0
    reference = reference_scenario()
    for ours, theirs in zip(config.manipulators, reference.manipulators):
        np.testing.assert_array_equal(ours.base_position, theirs.base_position)
    assert set(SCENARIO_TEXTS) == {"reference", "asymmetric"}


def test_serialize_parse_round_trip():
    for config in (reference_scenario(), asymmetric_scenario()):
        again = parse_scenario(serialize_scenario(config))
        assert scenario_dict(again) == scenario_dict(config)


def test_reference_text_parses_to_itself_through_dict():
    config = parse_scenario(REFERENCE_SCENARIO_TEXT)
    assert reparse(scenario_dict(config)).mode == "both"


def test_cuboid_inertia_hand_values():
    np.testing.assert_allclose(cuboid_inertia(12.0, [1.0, 2.0, 3.0]),
                               np.diag([13.0, 10.0, 5.0]), rtol=0, atol=0)
    # thin plate: the axis through the two large faces dominates
    I = cuboid_inertia(2.0, [0.2, 0.02, 0.15])
    assert I[1, 1] > I[0, 0] and I[1, 1] > I[2, 2]


def test_trajectory_period():
    circle = reference_scenario().trajectory
    assert circle.period() == pytest.approx(5.0, rel=1e-15)
    hold = TrajectorySpec(kind="static-hold", center=[0.35, 0.0, 0.35])
    assert hold.period() == 1.0


def test_trajectory_validation():
    with pytest.raises(ScenarioValidationError, match="kind"):
        TrajectorySpec(kind="spline", center=[0.0, 0.0, 0.0])
    with pytest.raises(ScenarioValidationError, match="angular_rate"):
        TrajectorySpec(kind="circle", center=[0.0, 0.0, 0.0], radius=0.1)
    with pytest.raises(ScenarioValidationError, match="radius"):
        TrajectorySpec(kind="static-hold", center=[0.0, 0.0, 0.0],
                       radius=-0.1)


def test_syntax_error_carries_position():
    with pytest.raises(ScenarioSyntaxError) as info:
        parse_scenario("object: {mass: [unclosed\n")
    assert info.value.line is not None
    assert f"line {info.value.line}" in str(info.value)
    with pytest.raises(ScenarioValidationError, match="mapping"):
        parse_scenario("- 1\n- 2\n")


def test_schema_version_is_required_and_checked():
    doc = scenario_dict(reference_scenario())
    del doc["schema_version"]
    with pytest.raises(ScenarioValidationError, match="schema_version"):
        reparse(doc)
    doc = scenario_dict(reference_scenario())
    doc["schema_version"] = 2
    with pytest.raises(ScenarioValidationError, match="schema_version"):
        reparse(doc)


def test_unknown_keys_rejected_per_section():
    doc = scenario_dict(reference_scenario())
    doc["turbo"] = True
    with pytest.raises(ScenarioValidationError, match="turbo"):
        reparse(doc)
    doc = scenario_dict(reference_scenario())
    doc["object"]["color"] = "red"
    with pytest.raises(ScenarioValidationError, match="color"):
        reparse(doc)
    doc = scenario_dict(reference_scenario())
    doc["manipulators"][0]["payload"] = 1.0
    with pytest.raises(ScenarioValidationError, match="payload"):
        reparse(doc)


def test_nonpositive_mass_rejected():
    doc = scenario_dict(reference_scenario())
    doc["object"]["mass"] = -1.0
    with pytest.raises(ScenarioValidationError, match="mass must be positive"):
        reparse(doc)


def test_inertia_derived_from_dimensions_when_absent():
    doc = scenario_dict(reference_scenario())
    del doc["object"]["inertia"]
    config = reparse(doc)
    np.testing.assert_allclose(config.object.inertia,
                               cuboid_inertia(2.0, [0.2, 0.02, 0.15]),
                               rtol=0, atol=0)
    del doc["object"]["dimensions"]
    with pytest.raises(ScenarioValidationError, match="inertia"):
        reparse(doc)


def test_grasp_count_must_match_manipulator_count():
    doc = scenario_dict(reference_scenario())
    doc["object"]["grasp_points"] = doc["object"]["grasp_points"][:3]
    with pytest.raises(ScenarioValidationError, match="does not match"):
        reparse(doc)


def test_duplicate_manipulator_ids_rejected():
    doc = scenario_dict(reference_scenario())
    doc["manipulators"][1]["id"] = 1
    with pytest.raises(ScenarioValidationError, match="unique"):
        reparse(doc)


def test_solver_setting_invariants():
    base = scenario_dict(reference_scenario())
    for key, value, pattern in [
        ("dt", 0.0, "dt"),
        ("cycles", 0, "cycles"),
        ("mode", "fastest", "mode"),
        ("beta_policy", "greedy", "beta_policy"),
        ("unbounded_cap", -5.0, "unbounded_cap"),
        ("beta_iterations", -1, "beta_iterations"),
    ]:
        doc = dict(base)
        doc[key] = value
        with pytest.raises(ScenarioValidationError, match=pattern):
            reparse(doc)


def test_manipulator_invariants():
    def arm(**overrides):
        fields = dict(
            id=1, base_position=[0.0, 0.0, 0.0],
            link_lengths=[0.2, 0.2], link_masses=[0.1, 0.1],
            link_com_offsets=[0.1, 0.1], link_inertias=[1e-4, 1e-4],
            torque_limits=[1.0, 1.0], velocity_limits=[4.0, 4.0])
        fields.update(overrides)
        return ManipulatorModel(**fields)

    assert arm().joint_count == 2
    with pytest.raises(ScenarioValidationError, match="at least 2"):
        arm(link_lengths=[0.2], link_masses=[0.1], link_com_offsets=[0.1],
            link_inertias=[1e-4], torque_limits=[1.0], velocity_limits=[4.0])
    with pytest.raises(ScenarioValidationError, match="lie on the link"):
        arm(link_com_offsets=[0.3, 0.1])
    with pytest.raises(ScenarioValidationError, match="strictly positive"):
        arm(torque_limits=[0.0, 1.0])
    with pytest.raises(ScenarioValidationError, match="link_masses"):
        arm(link_masses=[0.1, -0.1])
    with pytest.raises(ScenarioValidationError, match="shape"):
        arm(torque_limits=[1.0, 1.0, 1.0])


def test_object_model_invariants():
    good = RigidObjectModel(mass=1.0, inertia=np.eye(3),
                            grasp_points=[[0.1, 0.0, 0.0]])
    assert good.grasp_count == 1
    with pytest.raises(ScenarioValidationError, match="symmetric"):
        RigidObjectModel(mass=1.0, inertia=[[1, 0.5, 0], [0, 1, 0], [0, 0, 1]],
                         grasp_points=[[0.1, 0.0, 0.0]])
    with pytest.raises(ScenarioValidationError, match="positive definite"):
        RigidObjectModel(mass=1.0, inertia=np.diag([1.0, -1.0, 1.0]),
                         grasp_points=[[0.1, 0.0, 0.0]])
    with pytest.raises(ScenarioValidationError, match="N x 3"):
        RigidObjectModel(mass=1.0, inertia=np.eye(3),
                         grasp_points=[0.1, 0.0, 0.0])


def test_object_state_orientation_checks():
    def state(R):
        zero = np.zeros(3)
        return ObjectState(position=zero, orientation=R,
                           linear_velocity=zero, angular_velocity=zero,
                           linear_accel=zero, angular_accel=zero)

    state(np.eye(3))
    with pytest.raises(ScenarioValidationError, match="orthonormal"):
        state(np.eye(3) + 1e-6)
    with pytest.raises(ScenarioValidationError, match="right-handed"):
        state(np.diag([1.0, 1.0, -1.0]))


def test_wrench_vector_round_trip():
    w = Wrench(force=[1.0, 2.0, 3.0], torque=[4.0, 5.0, 6.0])
    np.testing.assert_array_equal(w.as_vector(), [1, 2, 3, 4, 5, 6])
    again = Wrench.from_vector(w.as_vector())
    np.testing.assert_array_equal(again.force, w.force)
    np.testing.assert_array_equal(again.torque, w.torque)
    np.testing.assert_array_equal(Wrench.zero().as_vector(), np.zeros(6))
    with pytest.raises(ValueError, match="6 components"):
        Wrench.from_vector([1.0, 2.0, 3.0])


def test_with_overrides_touches_only_requested_fields():
    config = reference_scenario()
    derived = config.with_overrides(mode="improved-joint", dt=0.05, cycles=1)
    assert derived.mode == "improved-joint"
    assert derived.dt == 0.05
    assert derived.cycles == 1
    assert derived.gravity == config.gravity
    assert derived.object is config.object
    assert config.mode == "both" and config.dt == 0.01
    assert config.with_overrides().mode == "both"
    with pytest.raises(ScenarioValidationError, match="mode"):
        config.with_overrides(mode="joint")


def test_config_is_frozen_and_arrays_read_only():
    config = reference_scenario()
    with pytest.raises(dataclasses.FrozenInstanceError):
        config.dt = 0.5
    assert not config.object.grasp_points.flags.writeable
    assert not config.manipulators[0].link_lengths.flags.writeable
    with pytest.raises(ValueError):
        config.object.grasp_points[0, 0] = 9.9
