"""
Hyperbolic paraboloid: why the ruled directions win
===================================================

z = x^2 - y^2 contains two families of straight lines, at 45 and 135
degrees in plan.  A net whose guidelines follow them has straight bars
along the guidelines, and the compass method bends the rest far less than
with guidelines along the axes.

    python demos/03_hypar_ruled_lines.py
"""

import math

import numpy as np

from gridshell import surface as S
from gridshell.genome import Genome
from gridshell.net import map_surface, net_stats, validate_net

spec = S.hypar()
w = 0.3

for a1, b1 in ((0, 90), (45, 135), (30, 120), (60, 150)):
    genome = Genome.straight(0.0, 0.0, math.radians(a1), math.radians(b1))
    net = map_surface(spec, genome, w)
    st = net_stats(net)
    ok = validate_net(net, spec, w).valid
    print(f"guidelines at {a1:3d}/{b1:3d} deg: c_max {st.c_max:.3f}, c_mean {st.c_mean:.3f}, valid={ok}")

# Along a ruling the guideline nodes are collinear, so their curvature is
# exactly zero; the curvature concentrates at the corners of the square.
net = map_surface(spec, Genome.straight(0, 0, math.pi / 4, 3 * math.pi / 4), w)
L = net.half
row = net.positions[:, L]
ok = net.status[:, L] > 0
print("\nD1 guideline at 45 deg, z of each node:", np.round(row[ok, 2], 6))
