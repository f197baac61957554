"""Rule-based extraction of the executed meta-action from consecutive ego poses.

Geometry is evaluated in the frame of the first pose (x forward, y left,
left positive), so labels are invariant under rigid world-frame transforms
and uniform time shifts. Rule precedence: stop > reverse > turn_around >
turn > curve > lane change > slight shift > speed change > straight default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import InsufficientPosesError
from .scenes import EgoPose
from .taxonomy import MetaAction


@dataclass(frozen=True)
class LabelingConfig:
    window: float = 3.0          # seconds of trajectory examined
    stop_disp: float = 0.5       # meters of path length below which the car "stopped"
    turn_heading: float = 0.6    # radians of heading change for a turn
    curve_heading: float = 0.15  # radians of heading change for a curve
    lane_shift: float = 1.0      # meters of lateral offset for a lane change
    slight_shift: float = 0.3    # meters of lateral offset for a slight shift
    accel_ratio: float = 1.15    # end/start speed ratio for speed_up
    rapid_ratio: float = 1.4     # end/start speed ratio for speed_up_rapidly
    decel_ratio: float = 0.85    # end/start speed ratio for slow_down
    rapid_decel_ratio: float = 0.6
    slow_speed: float = 2.0      # m/s mean-speed boundary for the slow default

    def __post_init__(self):
        if not (self.rapid_ratio > self.accel_ratio > 1.0 > self.decel_ratio > self.rapid_decel_ratio):
            raise ValueError("speed ratios must satisfy rapid > accel > 1 > decel > rapid_decel")
        for name in ("window", "stop_disp", "turn_heading", "curve_heading",
                     "lane_shift", "slight_shift", "slow_speed"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


def _wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


def extract_meta_action(
    poses: Sequence[EgoPose], cfg: LabelingConfig | None = None
) -> MetaAction:
    """Label the maneuver executed over the configured window of poses.

    Requires at least two poses spanning >= cfg.window seconds from the
    first pose; poses beyond the window are ignored.
    """
    cfg = cfg or LabelingConfig()
    if len(poses) < 2:
        raise InsufficientPosesError(f"need >= 2 poses, got {len(poses)}")
    t0 = poses[0].t
    # examine up to and including the first pose at or beyond the window
    cutoff = next(
        (i for i, p in enumerate(poses) if p.t - t0 >= cfg.window - 1e-9), None
    )
    if cutoff is None or cutoff == 0:
        raise InsufficientPosesError(
            f"poses span {poses[-1].t - t0:.3f}s < window {cfg.window}s"
        )
    used = list(poses[: cutoff + 1])

    first, last = used[0], used[-1]
    cos0, sin0 = math.cos(first.heading), math.sin(first.heading)

    def to_local(p: EgoPose) -> tuple[float, float]:
        dx, dy = p.x - first.x, p.y - first.y
        return (dx * cos0 + dy * sin0, -dx * sin0 + dy * cos0)

    path_len = sum(
        math.hypot(b.x - a.x, b.y - a.y) for a, b in zip(used, used[1:])
    )
    if path_len < cfg.stop_disp:
        return MetaAction.STOP

    x_end, y_end = to_local(last)
    if x_end < 0.0:
        return MetaAction.REVERSE

    dh = _wrap_angle(last.heading - first.heading)
    if abs(dh) >= math.pi - cfg.turn_heading:
        return MetaAction.TURN_AROUND
    if abs(dh) >= cfg.turn_heading:
        return MetaAction.TURN_LEFT if dh > 0 else MetaAction.TURN_RIGHT
    if abs(dh) >= cfg.curve_heading:
        return MetaAction.DRIVE_ALONG_CURVE

    if abs(y_end) >= cfg.lane_shift:
        return MetaAction.CHANGE_LANE_LEFT if y_end > 0 else MetaAction.CHANGE_LANE_RIGHT
    if abs(y_end) >= cfg.slight_shift:
        return (
            MetaAction.SHIFT_SLIGHTLY_LEFT if y_end > 0 else MetaAction.SHIFT_SLIGHTLY_RIGHT
        )

    eps = 1e-9
    if first.speed < eps:
        ratio = math.inf if last.speed > eps else 1.0
    else:
        ratio = last.speed / first.speed
    if ratio >= cfg.rapid_ratio:
        return MetaAction.SPEED_UP_RAPIDLY
    if ratio >= cfg.accel_ratio:
        return MetaAction.SPEED_UP
    if ratio <= cfg.rapid_decel_ratio:
        return MetaAction.SLOW_DOWN_RAPIDLY
    if ratio <= cfg.decel_ratio:
        return MetaAction.SLOW_DOWN

    mean_speed = sum(p.speed for p in used) / len(used)
    if mean_speed < cfg.slow_speed:
        return MetaAction.GO_STRAIGHT_SLOWLY
    return MetaAction.GO_STRAIGHT_CONSTANTLY
