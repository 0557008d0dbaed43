"""
A spin walking around a circle of analyzers
===========================================

Eight analyzers point along Z, Y, -Z, -Y twice over. Measures of a few
large events come out of the ancilla protocol and match the direct sum.
"""
import time

import numpy as np

from qmeasure import Event, ExperimentConfig, measure, measure_the_measure
from qmeasure.histories import interference
from qmeasure.spinor import Direction

dirs = tuple(Direction.named(a) for a in ["Z", "Y", "-Z", "-Y"] * 2)
cfg = ExperimentConfig(np.array([1, 1j]) / np.sqrt(2), dirs)

rng = np.random.default_rng(8)
for k in (2, 16, 100):
    picks = rng.choice(256, size=k, replace=False)
    e = Event([format(int(i), "08b") for i in picks])
    t0 = time.perf_counter()
    r = measure_the_measure(cfg, e)
    dt = time.perf_counter() - t0
    print(f"k={k:3}  k*P = {r.inferred_measure:.10f}  mu = {measure(cfg, e):.10f}  ({dt * 1e3:.1f} ms)")

# level-2 theory: the third-order interference term vanishes
perm = rng.permutation(256)
sets = [Event([format(int(i), "08b") for i in part]) for part in np.split(perm, [60, 150])]
print("I3 =", interference(cfg, sets, 3).value)
print("I2 =", interference(cfg, sets[:2], 2).value)
