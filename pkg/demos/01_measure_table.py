"""
Measures of every event for two analyzers
=========================================

A spin enters a Z analyzer and then an X analyzer. Each of the four paths
gets an amplitude, and each of the 16 sets of paths gets a quantum measure.
"""
import numpy as np

from qmeasure import Event, ExperimentConfig, all_events, amplitude, measure
from qmeasure.spinor import Direction

alpha, beta = 0.6, 0.8
cfg = ExperimentConfig(np.array([alpha, beta], dtype=complex), (Direction.named("Z"), Direction.named("X")))

print("path  |A|     phase")
for chain in ("00", "01", "10", "11"):
    a = amplitude(cfg, chain)
    print(f"{chain}    {abs(a):.4f}  {np.angle(a):+.4f}")

print("\nevent          mu(E)")
for e in all_events(2):
    print(f"{str(e):14} {measure(cfg, e):.4f}")

# the measure is not additive: {00} and {10} interfere
pair = measure(cfg, Event(["00", "10"]))
parts = measure(cfg, Event(["00"])) + measure(cfg, Event(["10"]))
print(f"\nmu({{00,10}}) = {pair:.4f}, mu({{00}}) + mu({{10}}) = {parts:.4f}")
print(f"closed form |alpha+beta|^2/2 = {abs(alpha + beta) ** 2 / 2:.4f}")
