"""The composite spatial-perception training objective.

Run: python demos/06_spatial_loss.py
"""

import math

from ragdrive import SpatialSample, batch_loss

# Each sample carries three gated terms: class cross-entropy, size MSE over
# (length, width, height), and squared distance error.
perfect = SpatialSample(
    lambda1=1, lambda2=1, lambda3=1,
    y=(0.0, 1.0, 0.0), p=(0.0, 1.0, 0.0),
    z=(4.5, 2.0, 1.6), z_star=(4.5, 2.0, 1.6),
    x=12.3, x_star=12.3,
)
print(f"perfect sample            J = {batch_loss([perfect]):.6f}")

half_confident = SpatialSample(
    lambda1=1, lambda2=0, lambda3=0,
    y=(0.0, 1.0, 0.0), p=(0.25, 0.5, 0.25),
    z=(0, 0, 0), z_star=(0.1, 0.1, 0.1), x=0.0, x_star=0.0,
)
print(f"true class at p=0.5       J = {batch_loss([half_confident]):.6f} "
      f"(ln 2 = {math.log(2):.6f})")

size_off = SpatialSample(
    lambda1=0, lambda2=1, lambda3=0,
    y=(1.0, 0.0), p=(1.0, 0.0),
    z=(2.0, 2.0, 2.0), z_star=(1.0, 2.0, 2.0), x=0.0, x_star=0.0,
)
print(f"size off by 1 m in one dim J = {batch_loss([size_off]):.6f} (1/3)")

# Gating: a zeroed lambda makes that term's inputs irrelevant.
gated = SpatialSample(
    lambda1=1, lambda2=0, lambda3=0,
    y=(0.0, 1.0, 0.0), p=(0.25, 0.5, 0.25),
    z=(99.0, 99.0, 99.0), z_star=(0.1, 0.1, 0.1), x=1e6, x_star=0.0,
)
print(f"same CE, absurd gated terms J = {batch_loss([gated]):.6f} (unchanged)")

# The batch loss is the mean of per-sample losses.
print(f"batch of all four         J = "
      f"{batch_loss([perfect, half_confident, size_off, gated]):.6f}")
