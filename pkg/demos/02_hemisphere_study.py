"""
Hemisphere: trial and error, random lots, and the genetic algorithm
==================================================================

A hemisphere of radius 10 meshed with bars of length 2.  Three ways of
choosing the two guidelines are compared by the largest bar curvature they
produce (lower is better: bars that bend less are easier to erect).

    python demos/02_hemisphere_study.py [seed]

Takes a minute or two.  Histories and the best net are written to
``demo_output/hemisphere``.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np

from gridshell import surface as S
from gridshell.baseline import angle_sweep, random_lots
from gridshell.evolve import GAConfig, evolve_run
from gridshell.export import export_obj, history_csv, history_svg
from gridshell.net import map_surface

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 1
spec = S.hemisphere()
w = 2.0
out = Path("demo_output/hemisphere")
out.mkdir(parents=True, exist_ok=True)

# 1. Trial and error: two straight guidelines through the apex, one along x,
# the other rotated by phi.  Mirror angles (phi, 180 - phi) give the same net.
sweep = angle_sweep(spec, w)
print("straight guidelines through the apex")
for phi, f in sweep.all_values[::2]:
    bar = "" if not math.isfinite(f) else "#" * int(200 * (f - 0.15))
    print(f"  {math.degrees(phi):5.0f} deg  {f:8.4f}  {bar}")
print(f"  best: {sweep.best.fitness:.4f} at {math.degrees(sweep.best_parameter):.0f} deg\n")

# 2. Random lots: draw genomes (seed point, four start angles, 44 turn
# angles) uniformly and keep the best valid one.
t0 = time.perf_counter()
lots = random_lots(spec, w, GAConfig(seed=seed), 2000)
vals = np.array([v for _, v in lots.all_values])
print(f"random lots: {np.isfinite(vals).sum()} of {vals.size} draws give a valid net, "
      f"best {lots.best.fitness:.4f} ({time.perf_counter() - t0:.0f}s)\n")

# 3. The genetic algorithm: 100 genomes, tournament selection, uniform
# crossover, mutation, and steady-state replacement of the two worst.
t0 = time.perf_counter()
run = evolve_run(spec, w, GAConfig(seed=seed), progress=lambda g, b, m: print(f"  gen {g:3d}  best {b:.4f}  mean {m:.4f}") if g % 5 == 1 else None)
print(f"GA: best {run.best.fitness:.4f} after {run.generations_run} generations "
      f"(converged={run.converged}, {run.evaluations} evaluations, {time.perf_counter() - t0:.0f}s)")

g = run.best.genome
print(f"  seed point A = ({g.x_a:.2f}, {g.y_a:.2f}), "
      f"angle between guidelines = {math.degrees((g.beta1 - g.alpha1) % math.pi):.1f} deg")

(out / "history.csv").write_text(history_csv(run.history))
(out / "history.svg").write_text(history_svg(run.history))
(out / "best_net.obj").write_bytes(export_obj(map_surface(spec, g, w), spec.text, g.digest()))
