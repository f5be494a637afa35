"""Spatial disturbance environment: quadrant friction field and speed breakers.

The arena scales every wheel friction coefficient of a robot by the friction
ratio of the quadrant it is in, and injects localized force/torque
disturbances inside circular speed-breaker bands.
"""

from __future__ import annotations

from dataclasses import dataclass

from .vehicle import RobotState, smooth_sign


@dataclass(frozen=True)
class SpeedBreaker:
    """Disturbance band: inside `half_width` of (x, y) the robot sees an
    opposing longitudinal force of magnitude amp_force and a yaw torque
    amp_torque."""

    x: float
    y: float
    half_width: float
    amp_force: float = 2.0
    amp_torque: float = 0.2

    def validate(self) -> None:
        if not self.half_width > 0:
            raise ValueError(f"half_width must be > 0, got {self.half_width}")


@dataclass(frozen=True)
class Arena:
    """Quadrant friction multipliers (Q1..Q4) plus speed breakers.

    quadrant_mu holds the surface friction value per quadrant; the scale
    applied to a robot's wheel friction coefficients is mu_quadrant / mu_1.
    mu_lateral is recorded for completeness but unused: the longitudinal model
    holds lateral grip constant, so there is no lateral slip channel.
    """

    quadrant_mu: tuple[float, float, float, float] = (0.1, 0.1, 0.13, 0.1)
    mu_lateral: float = 0.1
    speed_breakers: tuple[SpeedBreaker, ...] = ()

    def validate(self) -> None:
        if len(self.quadrant_mu) != 4:
            raise ValueError(f"quadrant_mu needs 4 values, got {len(self.quadrant_mu)}")
        for i, mu in enumerate(self.quadrant_mu, start=1):
            if not mu > 0:
                raise ValueError(f"quadrant_mu[{i}] must be > 0, got {mu}")
        if not self.mu_lateral > 0:
            raise ValueError(f"mu_lateral must be > 0, got {self.mu_lateral}")
        for b in self.speed_breakers:
            b.validate()

    def friction_scales(self) -> tuple[float, float, float, float]:
        base = self.quadrant_mu[0]
        return tuple(mu / base for mu in self.quadrant_mu)


def quadrant_of(x: float, y: float) -> int:
    """Quadrant index 1..4 under the half-open convention:
    Q1 x>=0,y>=0; Q2 x<0,y>=0; Q3 x<0,y<0; Q4 x>=0,y<0."""
    if x >= 0.0:
        return 1 if y >= 0.0 else 4
    return 2 if y >= 0.0 else 3


def friction_scale_at(arena: Arena, x: float, y: float) -> float:
    """Friction multiplier (mu_quadrant / mu_1) at a position; applied to all
    four wheel friction coefficients of a robot located there."""
    return arena.friction_scales()[quadrant_of(x, y) - 1]


def breaker_disturbance(arena: Arena, state: RobotState) -> tuple[float, float]:
    """Additive disturbance (d_v in N, d_w in N m) from any breaker bands
    containing the robot. The force term opposes the direction of travel via
    the smoothed sign, so it vanishes at rest; the torque term is the
    configured amplitude. Overlapping bands sum."""
    d_v = 0.0
    d_w = 0.0
    for b in arena.speed_breakers:
        dx = state.x - b.x
        dy = state.y - b.y
        if dx * dx + dy * dy <= b.half_width * b.half_width:
            d_v += b.amp_force * smooth_sign(state.v)
            d_w += b.amp_torque
    return d_v, d_w
