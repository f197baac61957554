"""Bird's-eye-view rasterization of scene annotations.

Renders the ego-centred top-down image: ego as a blue rectangle at the
origin, vehicles as red oriented rectangles (dark-red motion arrow when
moving), pedestrians as green dots (dark-green arrow when moving), static
obstacles as black dots, on a white background. x points up (ahead), y
points left. Painting is pure numpy over pixel centers, so output is
byte-deterministic; Pillow is used only to encode PNG.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .scenes import ObjectAnnotation, SceneRecord

MOVING_SPEED = 0.1  # m/s below which no motion arrow is drawn

DEFAULT_COLORS: dict[str, tuple[int, int, int]] = {
    "background": (255, 255, 255),
    "ego": (0, 0, 255),
    "vehicle": (255, 0, 0),
    "pedestrian": (0, 160, 0),
    "static_obstacle": (0, 0, 0),
    "vehicle_arrow": (150, 0, 0),
    "pedestrian_arrow": (0, 80, 0),
}


@dataclass(frozen=True)
class BevConfig:
    ahead: float = 60.0
    behind: float = 30.0
    left: float = 30.0
    right: float = 30.0
    pixels_per_meter: float = 8.0
    ego_length: float = 4.5
    ego_width: float = 2.0
    dot_radius: float = 0.4      # glyph radius for pedestrians / static obstacles
    arrow_head: float = 0.5      # meters
    colors: dict[str, tuple[int, int, int]] = field(
        default_factory=lambda: dict(DEFAULT_COLORS)
    )

    def __post_init__(self):
        for name in ("ahead", "behind", "left", "right"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.pixels_per_meter < 1:
            raise ValueError("pixels_per_meter must be >= 1")

    @property
    def width_px(self) -> int:
        return int(round((self.left + self.right) * self.pixels_per_meter))

    @property
    def height_px(self) -> int:
        return int(round((self.ahead + self.behind) * self.pixels_per_meter))


@dataclass(frozen=True)
class BevTransform:
    """Affine map between ego-frame meters and continuous pixel coordinates.

    Integer pixel coordinates are cell corners; the center of image cell
    (r, c) is at continuous (r + 0.5, c + 0.5).
    """

    ahead: float
    left: float
    ppm: float

    def to_pixel(self, x: float, y: float) -> tuple[float, float]:
        return ((self.ahead - x) * self.ppm, (self.left - y) * self.ppm)

    def to_meters(self, row: float, col: float) -> tuple[float, float]:
        return (self.ahead - row / self.ppm, self.left - col / self.ppm)

    @property
    def matrix(self) -> np.ndarray:
        """2x3 matrix M with (row, col) = M @ (x, y, 1)."""
        return np.array(
            [[-self.ppm, 0.0, self.ahead * self.ppm],
             [0.0, -self.ppm, self.left * self.ppm]]
        )


@dataclass(frozen=True)
class DrawnObject:
    index: int               # position in scene.annotations, -1 for ego
    object_class: str
    center: tuple[float, float]
    centroid_px: tuple[float, float]  # mean of painted pixel centers (row, col)
    pixels: int


@dataclass
class BevRender:
    image: np.ndarray        # H x W x 3 uint8
    transform: BevTransform
    drawn: list[DrawnObject]
    skipped_outside: int
    degenerate: int


class _Canvas:
    def __init__(self, cfg: BevConfig):
        self.cfg = cfg
        self.h = cfg.height_px
        self.w = cfg.width_px
        self.img = np.empty((self.h, self.w, 3), dtype=np.uint8)
        self.img[:] = cfg.colors["background"]
        self.tf = BevTransform(ahead=cfg.ahead, left=cfg.left, ppm=cfg.pixels_per_meter)

    def _cell_block(self, x_lo, x_hi, y_lo, y_hi):
        """Pixel-index block covering a meter-space bbox, with center coords."""
        row_min, col_min = self.tf.to_pixel(x_hi, y_hi)  # larger x/y -> smaller px
        row_max, col_max = self.tf.to_pixel(x_lo, y_lo)
        r0 = max(0, int(math.floor(row_min)))
        r1 = min(self.h, int(math.ceil(row_max)))
        c0 = max(0, int(math.floor(col_min)))
        c1 = min(self.w, int(math.ceil(col_max)))
        if r0 >= r1 or c0 >= c1:
            return None
        rows = np.arange(r0, r1, dtype=np.float64) + 0.5
        cols = np.arange(c0, c1, dtype=np.float64) + 0.5
        xs = self.cfg.ahead - rows / self.cfg.pixels_per_meter
        ys = self.cfg.left - cols / self.cfg.pixels_per_meter
        return r0, r1, c0, c1, xs[:, None], ys[None, :]

    def _paint(self, block, mask, color) -> tuple[int, tuple[float, float]]:
        r0, r1, c0, c1 = block[:4]
        n = int(mask.sum())
        if n == 0:
            return 0, (math.nan, math.nan)
        sub = self.img[r0:r1, c0:c1]
        sub[mask] = color
        rr, cc = np.nonzero(mask)
        centroid = (float(rr.mean()) + r0 + 0.5, float(cc.mean()) + c0 + 0.5)
        return n, centroid

    def rect(self, cx, cy, length, width, ux, uy, color):
        """Filled rectangle centred at (cx, cy), long axis along unit (ux, uy)."""
        half_diag = 0.5 * math.hypot(length, width)
        block = self._cell_block(cx - half_diag, cx + half_diag,
                                 cy - half_diag, cy + half_diag)
        if block is None:
            return 0, (math.nan, math.nan)
        xs, ys = block[4], block[5]
        dx, dy = xs - cx, ys - cy
        along = dx * ux + dy * uy
        across = -dx * uy + dy * ux
        mask = (np.abs(along) <= length / 2) & (np.abs(across) <= width / 2)
        return self._paint(block, mask, color)

    def disc(self, cx, cy, radius, color):
        block = self._cell_block(cx - radius, cx + radius, cy - radius, cy + radius)
        if block is None:
            return 0, (math.nan, math.nan)
        xs, ys = block[4], block[5]
        mask = (xs - cx) ** 2 + (ys - cy) ** 2 <= radius**2
        return self._paint(block, mask, color)

    def segment(self, x0, y0, x1, y1, half_width, color):
        block = self._cell_block(min(x0, x1) - half_width, max(x0, x1) + half_width,
                                 min(y0, y1) - half_width, max(y0, y1) + half_width)
        if block is None:
            return
        xs, ys = block[4], block[5]
        vx, vy = x1 - x0, y1 - y0
        seg_len2 = vx * vx + vy * vy
        if seg_len2 == 0.0:
            mask = (xs - x0) ** 2 + (ys - y0) ** 2 <= half_width**2
        else:
            t = np.clip(((xs - x0) * vx + (ys - y0) * vy) / seg_len2, 0.0, 1.0)
            px, py = x0 + t * vx, y0 + t * vy
            mask = (xs - px) ** 2 + (ys - py) ** 2 <= half_width**2
        self._paint(block, mask, color)

    def arrow(self, cx, cy, vx, vy, color):
        """Motion arrow: one second of displacement at current velocity."""
        speed = math.hypot(vx, vy)
        ex, ey = cx + vx, cy + vy
        half_width = 1.0 / self.cfg.pixels_per_meter
        self.segment(cx, cy, ex, ey, half_width, color)
        head = min(self.cfg.arrow_head, 0.5 * speed)
        ux, uy = vx / speed, vy / speed
        for sign in (1.0, -1.0):
            # barbs swept back 30 degrees from the shaft on each side
            c30, s30 = math.cos(math.pi * 5 / 6), math.sin(math.pi * 5 / 6) * sign
            bx = ux * c30 - uy * s30
            by = ux * s30 + uy * c30
            self.segment(ex, ey, ex + bx * head, ey + by * head, half_width, color)


def _footprint_bbox(ann: ObjectAnnotation, cfg: BevConfig) -> tuple[float, float, float, float]:
    cx, cy = ann.center
    if ann.object_class == "vehicle":
        half = 0.5 * math.hypot(ann.size[0], ann.size[1])
    else:
        half = cfg.dot_radius
    return cx - half, cx + half, cy - half, cy + half


def _inside_view(bbox, cfg: BevConfig) -> bool:
    x_lo, x_hi, y_lo, y_hi = bbox
    return not (
        x_hi < -cfg.behind or x_lo > cfg.ahead or y_hi < -cfg.right or y_lo > cfg.left
    )


def _orientation(ann: ObjectAnnotation) -> tuple[float, float]:
    if ann.speed > MOVING_SPEED:
        return ann.velocity[0] / ann.speed, ann.velocity[1] / ann.speed
    return 1.0, 0.0  # stationary objects face forward


def render_bev(scene: SceneRecord, cfg: BevConfig | None = None) -> BevRender:
    """Rasterize a scene's annotations to the ego-centred BEV image.

    Objects wholly outside the configured extent are omitted; annotations
    that paint zero pixels are counted as degenerate. Returns the image,
    the meters->pixels transform, and per-object draw records.
    """
    cfg = cfg or BevConfig()
    canvas = _Canvas(cfg)
    drawn: list[DrawnObject] = []
    skipped = 0
    degenerate = 0

    for idx, ann in enumerate(scene.annotations):
        if not _inside_view(_footprint_bbox(ann, cfg), cfg):
            skipped += 1
            continue
        cx, cy = ann.center
        if ann.object_class == "vehicle":
            ux, uy = _orientation(ann)
            n, centroid = canvas.rect(cx, cy, ann.size[0], ann.size[1], ux, uy,
                                      cfg.colors["vehicle"])
        elif ann.object_class == "pedestrian":
            n, centroid = canvas.disc(cx, cy, cfg.dot_radius, cfg.colors["pedestrian"])
        else:
            n, centroid = canvas.disc(cx, cy, cfg.dot_radius,
                                      cfg.colors["static_obstacle"])
        if n == 0:
            degenerate += 1
            continue
        if ann.speed > MOVING_SPEED and ann.object_class != "static_obstacle":
            arrow_color = cfg.colors[f"{ann.object_class}_arrow"]
            canvas.arrow(cx, cy, ann.velocity[0], ann.velocity[1], arrow_color)
        drawn.append(DrawnObject(index=idx, object_class=ann.object_class,
                                 center=ann.center, centroid_px=centroid, pixels=n))

    n, centroid = canvas.rect(0.0, 0.0, cfg.ego_length, cfg.ego_width, 1.0, 0.0,
                              cfg.colors["ego"])
    drawn.append(DrawnObject(index=-1, object_class="ego", center=(0.0, 0.0),
                             centroid_px=centroid, pixels=n))

    return BevRender(image=canvas.img, transform=canvas.tf, drawn=drawn,
                     skipped_outside=skipped, degenerate=degenerate)


def _fmt_m(v: float) -> str:
    return f"{v:g}"


def legend_text(cfg: BevConfig | None = None) -> str:
    """Describe the raster's glyph semantics for use as a prompt system text."""
    cfg = cfg or BevConfig()
    return (
        f"Top-down view of a driving scene covering {_fmt_m(cfg.ahead)} meters "
        f"ahead, {_fmt_m(cfg.behind)} meters behind, and {_fmt_m(cfg.left)} / "
        f"{_fmt_m(cfg.right)} meters to the left and right of the ego vehicle. "
        "Longitudinal and lateral coordinates are in meters. The blue rectangle "
        "at the center [0,0] is the ego vehicle. Red rectangles are vehicles "
        "(cars, trucks, and similar); a dark-red arrow on a vehicle shows where "
        "it is moving. Green dots are pedestrians, with dark-green arrows "
        "showing their direction of motion. Black dots are static obstacles "
        "such as roadblocks or traffic cones."
    )


def save_png(image: np.ndarray, path: str | Path) -> None:
    Image.fromarray(image, mode="RGB").save(Path(path), format="PNG")


def load_png(path: str | Path) -> np.ndarray:
    with Image.open(Path(path)) as im:
        return np.asarray(im.convert("RGB"))


def render_scene_to_file(scene: SceneRecord, out_dir: str | Path,
                         cfg: BevConfig | None = None) -> tuple[Path, BevRender]:
    """Render and write `<scene_id>_bev.png`, returning the path and render."""
    render = render_bev(scene, cfg)
    out = Path(out_dir) / f"{scene.scene_id}_bev.png"
    save_png(render.image, out)
    return out, render
