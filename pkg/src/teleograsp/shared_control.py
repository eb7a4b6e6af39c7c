"""Alternating shared control.

A single effector is driven either by the operator's tracked hand (manual
mode) or by a planned trajectory (automatic mode). Switching into manual mode
re-anchors the positional mapping so the effector never jumps, and orientation
re-engages through per-sample SLERP blending instead of snapping.

All operations are pure: they take a ControlState and return values or a new
state, so any input trace replays to identical outputs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidInputError, ModeViolationError
from .geometry import (
    Pose,
    UnitQuaternion,
    Vec3,
    as_vec3,
    rotation_angle_between,
    slerp,
)

DEFAULT_ALPHA = 0.2
DEFAULT_BLEND_EPSILON = 1e-3
DEFAULT_SAMPLE_RATE = 50.0


class Mode(enum.Enum):
    MANUAL = "manual"
    AUTOMATIC = "automatic"


@dataclass(frozen=True)
class HandSample:
    """One tracker reading: hand pose in the tracker frame plus a sample index."""

    position: Vec3
    orientation: UnitQuaternion
    step_index: int

    def __post_init__(self):
        object.__setattr__(self, "position", as_vec3(self.position))
        if not isinstance(self.orientation, UnitQuaternion):
            raise InvalidInputError("hand orientation must be a UnitQuaternion")
        if not isinstance(self.step_index, int) or self.step_index < 0:
            raise InvalidInputError(f"step_index must be a non-negative int, got {self.step_index!r}")


@dataclass(frozen=True)
class CalibrationFrame:
    """Fixed rotation taking tracker-frame orientations into the robot base frame."""

    rotation_tracker_to_base: UnitQuaternion

    def __post_init__(self):
        if not isinstance(self.rotation_tracker_to_base, UnitQuaternion):
            raise InvalidInputError("calibration rotation must be a UnitQuaternion")


@dataclass(frozen=True)
class ControlAnchors:
    """Reference points captured at the last switch into manual mode."""

    effector_anchor: Vec3
    hand_anchor: Vec3

    def __post_init__(self):
        object.__setattr__(self, "effector_anchor", as_vec3(self.effector_anchor))
        object.__setattr__(self, "hand_anchor", as_vec3(self.hand_anchor))


@dataclass(frozen=True)
class SharedControlConfig:
    alpha: float = DEFAULT_ALPHA
    blend_epsilon: float = DEFAULT_BLEND_EPSILON
    sample_rate: float = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidInputError(f"alpha must be in (0, 1], got {self.alpha!r}")
        if not self.blend_epsilon > 0.0:
            raise InvalidInputError(f"blend_epsilon must be > 0, got {self.blend_epsilon!r}")
        if not self.sample_rate > 0.0:
            raise InvalidInputError(f"sample_rate must be > 0, got {self.sample_rate!r}")


@dataclass(frozen=True)
class ControlState:
    """Full shared-control state between samples.

    last_step_index tracks sample ordering; step() rejects regressions so a
    shuffled trace cannot silently replay differently.
    """

    mode: Mode
    anchors: ControlAnchors
    calibration: CalibrationFrame
    last_commanded: Pose
    blending_active: bool = False
    last_step_index: int = -1

    def __post_init__(self):
        if self.blending_active and self.mode is not Mode.MANUAL:
            raise InvalidInputError("blending_active requires manual mode")


def initial_state(last_commanded: Pose, calibration: CalibrationFrame | None = None) -> ControlState:
    """Fresh session state: automatic mode, effector resting at last_commanded.

    A session that should begin under manual control takes this state through
    switch_to_manual with its first hand sample, which also starts blending.
    """
    if calibration is None:
        calibration = CalibrationFrame(UnitQuaternion.identity())
    anchors = ControlAnchors(
        effector_anchor=np.array(last_commanded.position),
        hand_anchor=np.zeros(3),
    )
    return ControlState(
        mode=Mode.AUTOMATIC,
        anchors=anchors,
        calibration=calibration,
        last_commanded=last_commanded,
    )


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ModeViolationError(message)


def map_position(state: ControlState, hand: HandSample) -> Vec3:
    """Relative positional mapping: effector anchor plus hand displacement."""
    _require(state.mode is Mode.MANUAL, "map_position requires manual mode")
    return state.anchors.effector_anchor + (hand.position - state.anchors.hand_anchor)


def map_orientation(state: ControlState, hand: HandSample) -> UnitQuaternion:
    """Absolute orientation mapping: calibration rotation composed with the hand's."""
    _require(state.mode is Mode.MANUAL, "map_orientation requires manual mode")
    _require(not state.blending_active, "map_orientation requires blending to have finished")
    return state.calibration.rotation_tracker_to_base * hand.orientation


def switch_to_manual(state: ControlState, hand: HandSample) -> ControlState:
    """Enter manual mode, re-anchoring so the commanded position is continuous.

    The effector anchor is the last commanded position and the hand anchor is
    the hand's position right now, so the first mapped position equals the
    pose the effector already holds. Orientation blending starts.
    """
    _require(state.mode is Mode.AUTOMATIC, "switch_to_manual requires automatic mode")
    anchors = ControlAnchors(
        effector_anchor=np.array(state.last_commanded.position),
        hand_anchor=np.array(hand.position),
    )
    return replace(state, mode=Mode.MANUAL, anchors=anchors, blending_active=True)


def switch_to_automatic(state: ControlState) -> ControlState:
    """Enter automatic mode. No remapping: planned motion starts from last_commanded."""
    _require(state.mode is Mode.MANUAL, "switch_to_automatic requires manual mode")
    return replace(state, mode=Mode.AUTOMATIC, blending_active=False)


def blended_orientation_step(
    state: ControlState, hand: HandSample, config: SharedControlConfig
) -> UnitQuaternion:
    """One SLERP step from the last commanded orientation toward the live target.

    The residual angle shrinks by factor (1 - alpha) per step. The caller
    stores the result as last_commanded.orientation and clears blending once
    the residual drops below config.blend_epsilon.
    """
    _require(state.mode is Mode.MANUAL, "blended_orientation_step requires manual mode")
    _require(state.blending_active, "blended_orientation_step requires active blending")
    target = state.calibration.rotation_tracker_to_base * hand.orientation
    return slerp(state.last_commanded.orientation, target, config.alpha)


def step(
    state: ControlState,
    hand: HandSample,
    config: SharedControlConfig,
    automatic_pose: Pose | None = None,
) -> tuple[ControlState, Pose]:
    """Consume one hand sample and produce the commanded effector pose.

    Manual mode combines the positional map with either the blending step or
    the direct orientation map. Automatic mode passes through automatic_pose
    (the trajectory module's output), holding the last commanded pose when
    none is supplied. Samples must arrive with strictly increasing
    step_index.
    """
    if hand.step_index <= state.last_step_index:
        raise InvalidInputError(
            f"hand sample step_index {hand.step_index} does not advance past "
            f"{state.last_step_index}"
        )
    if state.mode is Mode.MANUAL:
        position = map_position(state, hand)
        if state.blending_active:
            orientation = blended_orientation_step(state, hand, config)
            target = state.calibration.rotation_tracker_to_base * hand.orientation
            blending = rotation_angle_between(orientation, target) >= config.blend_epsilon
        else:
            orientation = map_orientation(state, hand)
            blending = False
        commanded = Pose(position, orientation)
    else:
        commanded = automatic_pose if automatic_pose is not None else state.last_commanded
        blending = False
    new_state = replace(
        state,
        last_commanded=commanded,
        blending_active=blending,
        last_step_index=hand.step_index,
    )
    return new_state, commanded
