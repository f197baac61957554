"""Extracting ground-truth meta-actions from ego pose sequences.

Run: python demos/02_labeling_trajectories.py
"""

import math

from ragdrive import EgoPose, LabelingConfig, extract_meta_action


def arc(total_heading, speed=8.0, duration=3.0, dt=0.1):
    """Constant-speed arc accumulating total_heading radians of yaw."""
    poses, x, y, heading = [], 0.0, 0.0, 0.0
    rate = total_heading / duration
    for i in range(int(duration / dt) + 1):
        poses.append(EgoPose(t=i * dt, x=x, y=y, heading=heading, speed=speed))
        x += speed * math.cos(heading) * dt
        y += speed * math.sin(heading) * dt
        heading += rate * dt
    return poses


def drift(offset, speed=8.0, duration=3.0, dt=0.25):
    """Straight motion with a linear lateral drift (lane change / shift)."""
    n = int(duration / dt)
    return [
        EgoPose(t=i * dt, x=speed * i * dt, y=offset * i / n, heading=0.0,
                speed=speed)
        for i in range(n + 1)
    ]


def ramp(v0, v1, duration=3.0, dt=0.25):
    """Straight motion with a linear speed ramp."""
    n = int(duration / dt)
    poses, x = [], 0.0
    for i in range(n + 1):
        v = v0 + (v1 - v0) * i / n
        poses.append(EgoPose(t=i * dt, x=x, y=0.0, heading=0.0, speed=v))
        x += v * dt
    return poses


examples = [
    ("quarter turn left", arc(math.pi / 2)),
    ("quarter turn right", arc(-math.pi / 2)),
    ("gentle curve", arc(0.3)),
    ("u-turn", arc(math.pi)),
    ("lane change left", drift(3.5)),
    ("slight shift right", drift(-0.5)),
    ("hard braking", ramp(12.0, 4.0)),
    ("gentle acceleration", ramp(8.0, 10.0)),
    ("crawl", ramp(1.5, 1.5)),
]

for name, poses in examples:
    print(f"{name:22s} -> {extract_meta_action(poses).value}")

# Every threshold is configurable; a stricter turn threshold demotes the
# gentle curve to a plain straight drive.
strict = LabelingConfig(curve_heading=0.5)
print(f"\ngentle curve with curve_heading=0.5 -> "
      f"{extract_meta_action(arc(0.3), strict).value}")
