"""Rendering the bird's-eye-view raster from object annotations.

Run: python demos/03_bev_rendering.py   (writes demo_bev.png)
"""

from ragdrive import BevConfig, ObjectAnnotation, SceneRecord, render_bev
from ragdrive.bev import legend_text, save_png

scene = SceneRecord(
    scene_id="demo",
    front_image="unused.png",
    annotations=(
        # a vehicle ahead-left, moving forward-right
        ObjectAnnotation("vehicle", (7.6, 8.9), (4.5, 2.0, 1.6), (4.0, -1.0)),
        # a parked vehicle far ahead
        ObjectAnnotation("vehicle", (35.0, -3.0), (4.8, 2.1, 1.7), (0.0, 0.0)),
        # a pedestrian crossing from the left
        ObjectAnnotation("pedestrian", (12.0, 6.0), (0.7, 0.7, 1.8), (0.0, -1.2)),
        # a roadblock
        ObjectAnnotation("static_obstacle", (24.5, 17.2), (0.8, 0.8, 1.0), (0.0, 0.0)),
        # outside the 60 m forward extent: omitted
        ObjectAnnotation("static_obstacle", (100.0, 0.0), (0.8, 0.8, 1.0), (0.0, 0.0)),
    ),
)

cfg = BevConfig()  # 60 m ahead, 30 m behind/left/right, 8 px/m
render = render_bev(scene, cfg)
save_png(render.image, "demo_bev.png")

print(f"image: {render.image.shape[1]}x{render.image.shape[0]} px "
      f"({cfg.pixels_per_meter} px/m)")
print(f"objects drawn: {len(render.drawn) - 1} + ego, "
      f"omitted outside extent: {render.skipped_outside}")

# The returned transform maps meters to pixels and back exactly.
for drawn in render.drawn:
    x, y = render.transform.to_meters(*drawn.centroid_px)
    print(f"  {drawn.object_class:16s} annotated {drawn.center} "
          f"drawn centroid ({x:.2f}, {y:.2f})")

print("\nlegend handed to the vision-language model:")
print(legend_text(cfg))
