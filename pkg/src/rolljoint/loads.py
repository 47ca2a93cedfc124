"""External load models and their derivatives with respect to body-frame
perturbations T -> T (I + [delta_xi]).

`target_link` is 1-based (link 1 is the fixed base link), matching design
files and solver reports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Pose2, Wrench2, cross2, skew2, _frozen_vec2


@dataclass(frozen=True)
class ExternalLoad:
    target_link: int

    def body_wrench(self, pose: Pose2) -> Wrench2:
        raise NotImplementedError

    def body_wrench_derivative(self, pose: Pose2) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantBody(ExternalLoad):
    """Wrench fixed in the link's own frame (covers the unloaded case)."""

    wrench: Wrench2 = Wrench2.zero()

    variant = "constant_body"

    def body_wrench(self, pose: Pose2) -> Wrench2:
        return self.wrench

    def body_wrench_derivative(self, pose: Pose2) -> np.ndarray:
        return np.zeros((3, 3))


@dataclass(frozen=True)
class ConstantWorkspace(ExternalLoad):
    """Wrench fixed in the world frame, acting at a body-fixed point `attach`
    (defaults to the body origin); covers gravity-style pulls."""

    wrench: Wrench2 = Wrench2.zero()
    attach: np.ndarray = (0.0, 0.0)

    variant = "constant_workspace"

    def __post_init__(self):
        object.__setattr__(self, "attach", _frozen_vec2(self.attach))

    def body_wrench(self, pose: Pose2) -> Wrench2:
        force = pose.rotation.T @ self.wrench.f
        moment = self.wrench.m + cross2(self.attach, force)
        return Wrench2(moment, force)

    def body_wrench_derivative(self, pose: Pose2) -> np.ndarray:
        # only the rotation perturbation moves the body-frame image of the
        # world-fixed force; the moment offset is constant
        rot_t = pose.rotation.T
        col = rot_t @ skew2(self.wrench.f)
        out = np.zeros((3, 3))
        out[0, 0] = -skew2(self.attach) @ col
        out[1:, 0] = col
        return out


@dataclass(frozen=True)
class LinearSpring(ExternalLoad):
    """Linear spring from the link origin to a fixed world anchor."""

    stiffness: float = 0.0
    anchor: np.ndarray = (0.0, 0.0)

    variant = "linear_spring"

    def __post_init__(self):
        if self.stiffness < 0.0:
            raise ValueError("spring stiffness must be non-negative")
        object.__setattr__(self, "anchor", _frozen_vec2(self.anchor))

    def body_wrench(self, pose: Pose2) -> Wrench2:
        force = -self.stiffness * (pose.rotation.T @ (pose.translation - self.anchor))
        return Wrench2(0.0, force)

    def body_wrench_derivative(self, pose: Pose2) -> np.ndarray:
        out = np.zeros((3, 3))
        stretch = pose.translation - self.anchor
        out[1:, 0] = -self.stiffness * (pose.rotation.T @ skew2(stretch))
        out[1:, 1:] = -self.stiffness * np.eye(2)
        return out


def evaluate(load: ExternalLoad, pose: Pose2) -> Wrench2:
    """Body-frame wrench exerted by the load on a link at `pose`."""
    return load.body_wrench(pose)


def derivative(load: ExternalLoad, pose: Pose2) -> np.ndarray:
    """3x3 derivative of the body-frame wrench w.r.t. the body twist."""
    return load.body_wrench_derivative(pose)


def check_targets(loads, link_count: int) -> None:
    """Reject loads aimed at links the mechanism does not have."""
    for load in loads:
        if not 1 <= load.target_link <= link_count:
            raise ValueError(
                f"load target_link {load.target_link} outside 1..{link_count}"
            )


def net_wrench(loads, link_number: int, pose: Pose2) -> np.ndarray:
    """Summed body-frame wrench 3-array on 1-based link `link_number`."""
    total = np.zeros(3)
    for load in loads:
        if load.target_link == link_number:
            total += load.body_wrench(pose).as_array()
    return total


def net_derivative(loads, link_number: int, pose: Pose2) -> np.ndarray:
    total = np.zeros((3, 3))
    for load in loads:
        if load.target_link == link_number:
            total += load.body_wrench_derivative(pose)
    return total
