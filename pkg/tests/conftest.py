from __future__ import annotations

import math

import pytest

from ragdrive.scenes import EgoPose


def straight_poses(
    speed: float = 8.0,
    duration: float = 3.0,
    dt: float = 0.25,
    start_speed: float | None = None,
) -> list[EgoPose]:
    """Constant-heading trajectory along +x; speed ramps linearly if asked."""
    v0 = speed if start_speed is None else start_speed
    poses = []
    x = 0.0
    t = 0.0
    n = int(round(duration / dt))
    for i in range(n + 1):
        frac = i / n if n else 0.0
        v = v0 + (speed - v0) * frac
        poses.append(EgoPose(t=t, x=x, y=0.0, heading=0.0, speed=v))
        x += v * dt
        t += dt
    return poses


def arc_poses(
    total_heading: float,
    speed: float = 8.0,
    duration: float = 3.0,
    dt: float = 0.1,
) -> list[EgoPose]:
    """Constant-speed arc accumulating total_heading radians of yaw."""
    poses = []
    x = y = 0.0
    heading = 0.0
    t = 0.0
    n = int(round(duration / dt))
    rate = total_heading / duration
    for _ in range(n + 1):
        poses.append(EgoPose(t=t, x=x, y=y, heading=_wrap(heading), speed=speed))
        x += speed * math.cos(heading) * dt
        y += speed * math.sin(heading) * dt
        heading += rate * dt
        t += dt
    return poses


def lateral_poses(
    offset: float,
    speed: float = 8.0,
    duration: float = 3.0,
    dt: float = 0.25,
) -> list[EgoPose]:
    """Straight-ahead motion that drifts linearly to a lateral offset."""
    poses = []
    t = 0.0
    n = int(round(duration / dt))
    for i in range(n + 1):
        frac = i / n if n else 0.0
        poses.append(
            EgoPose(t=t, x=speed * t, y=offset * frac, heading=0.0, speed=speed)
        )
        t += dt
    return poses


def _wrap(a: float) -> float:
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


@pytest.fixture
def rng_seed() -> int:
    return 20240811
