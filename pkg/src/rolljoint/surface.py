"""Arc-length-parameterized rolling-contact surfaces.

A surface supplies, for every arc length s in its domain, a frame expressed
in the owning link's body coordinates whose x-axis is tangent to the surface
and whose y-axis is normal to it, plus the arc-length twist (u(s), (1, 0))
where u is the signed curvature.  Frames obey dT/ds = T [twist].
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DomainError
from .geometry import Pose2, Twist2

# grid refinement for curvature-profile integration: step <= width / PROFILE_STEPS
PROFILE_STEPS = 1000


class ContactSurface(ABC):
    """Common interface of rolling-surface geometries."""

    kind: str
    s_min: float
    s_max: float

    @property
    def domain(self) -> tuple[float, float]:
        return (self.s_min, self.s_max)

    @property
    def width(self) -> float:
        return self.s_max - self.s_min

    def _checked(self, s: float) -> float:
        slack = 1e-9 * self.width
        if s < self.s_min - slack or s > self.s_max + slack:
            raise DomainError(
                f"arc length {s} outside [{self.s_min}, {self.s_max}] of {self.kind}"
            )
        return min(max(s, self.s_min), self.s_max)

    @abstractmethod
    def frame_at(self, s: float) -> Pose2:
        """Surface frame at arc length s, in link body coordinates."""

    @abstractmethod
    def curvature_at(self, s: float) -> float:
        """Signed curvature u(s)."""

    def twist_at(self, s: float) -> Twist2:
        return Twist2(self.curvature_at(s), (1.0, 0.0))


@dataclass(frozen=True)
class CircularArc(ContactSurface):
    """Circular surface: position = center + radius * (cos phi, sin phi) with
    phi(s) = reference_angle + orientation_sign * s / radius."""

    center: np.ndarray
    radius: float
    reference_angle: float
    orientation_sign: int
    s_min: float
    s_max: float

    kind = "circular_arc"

    def __post_init__(self):
        object.__setattr__(self, "center", np.array(self.center, dtype=float).reshape(2))
        self.center.setflags(write=False)
        if self.radius <= 0.0:
            raise ValueError("circular arc radius must be positive")
        if self.orientation_sign not in (-1, 1):
            raise ValueError("orientation_sign must be +1 or -1")
        if self.s_max <= self.s_min:
            raise ValueError("surface domain must have positive width")

    def frame_at(self, s: float) -> Pose2:
        s = self._checked(s)
        phi = self.reference_angle + self.orientation_sign * s / self.radius
        position = self.center + self.radius * np.array([math.cos(phi), math.sin(phi)])
        return Pose2(phi + self.orientation_sign * math.pi / 2.0, position)

    def curvature_at(self, s: float) -> float:
        self._checked(s)
        return self.orientation_sign / self.radius


def _profile_rhs(s: float, state: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    theta = state[0]
    return np.array([npoly.polyval(s, coeffs), math.cos(theta), math.sin(theta)])


def _rk4_step(s: float, state: np.ndarray, h: float, coeffs: np.ndarray) -> np.ndarray:
    k1 = _profile_rhs(s, state, coeffs)
    k2 = _profile_rhs(s + 0.5 * h, state + 0.5 * h * k1, coeffs)
    k3 = _profile_rhs(s + 0.5 * h, state + 0.5 * h * k2, coeffs)
    k4 = _profile_rhs(s + h, state + h * k3, coeffs)
    return state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass(frozen=True)
class CurvatureProfile(ContactSurface):
    """Surface defined by a polynomial curvature u(s) (ascending coefficients).

    The frame at s = 0 equals `reference_frame`; other frames come from RK4
    integration of (theta', x', y') = (u, cos theta, sin theta), cached on a
    dense grid at construction and locally re-integrated per query.
    """

    reference_frame: Pose2
    curvature_coeffs: np.ndarray
    s_min: float
    s_max: float

    kind = "curvature_profile"

    def __post_init__(self):
        coeffs = np.atleast_1d(np.array(self.curvature_coeffs, dtype=float))
        coeffs.setflags(write=False)
        object.__setattr__(self, "curvature_coeffs", coeffs)
        if self.s_max <= self.s_min:
            raise ValueError("surface domain must have positive width")
        object.__setattr__(self, "_grid", self._integrate_grid())

    def _integrate_grid(self) -> tuple[np.ndarray, np.ndarray]:
        # the integration hull always contains 0 where the reference frame sits
        lo = min(0.0, self.s_min)
        hi = max(0.0, self.s_max)
        h_max = self.width / PROFILE_STEPS
        start = np.array(
            [self.reference_frame.angle, *self.reference_frame.translation]
        )
        nodes: list[float] = [0.0]
        states: list[np.ndarray] = [start]
        for bound, direction in ((hi, 1.0), (lo, -1.0)):
            span = abs(bound)
            if span == 0.0:
                continue
            count = max(1, math.ceil(span / h_max))
            h = direction * span / count
            state = start
            s = 0.0
            for _ in range(count):
                state = _rk4_step(s, state, h, self.curvature_coeffs)
                s += h
                nodes.append(s)
                states.append(state)
        order = np.argsort(nodes)
        grid_s = np.array(nodes)[order]
        grid_states = np.array(states)[order]
        grid_s.setflags(write=False)
        grid_states.setflags(write=False)
        return grid_s, grid_states

    def _state_at(self, s: float) -> np.ndarray:
        grid_s, grid_states = self._grid
        idx = int(np.searchsorted(grid_s, s, side="right")) - 1
        idx = min(max(idx, 0), len(grid_s) - 1)
        s0 = grid_s[idx]
        state = grid_states[idx]
        if s != s0:
            state = _rk4_step(s0, state, s - s0, self.curvature_coeffs)
        return state

    def frame_at(self, s: float) -> Pose2:
        s = self._checked(s)
        theta, x, y = self._state_at(s)
        return Pose2(theta, (x, y))

    def curvature_at(self, s: float) -> float:
        s = self._checked(s)
        return float(npoly.polyval(s, self.curvature_coeffs))
