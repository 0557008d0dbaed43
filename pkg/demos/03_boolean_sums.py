"""
Shrinking the event measurement with XOR gates
==============================================

Bits that are constant over the chains of E can be read one by one. Groups
of bits that flip together collapse to a single residual bit after a chain
of XOR gates, leaving a small joint measurement.
"""
import numpy as np

from qmeasure import (Event, ExperimentConfig, alpha_bounds, boolean_sum_plan, execute_plan, measure_the_measure,
                      partition)
from qmeasure.spinor import Direction

rng = np.random.default_rng(11)
dirs = tuple(Direction.from_cartesian(*rng.normal(size=3)) for _ in range(7))
cfg = ExperimentConfig(np.array([0.6, 0.8j]), dirs)

e = Event(["0011000", "0100100", "0101011"])
part = partition(e)
print("common bits:", part.common)
print("groups:", part.groups, "alpha =", part.alpha, "bounds", alpha_bounds(len(e), 7))

plan = boolean_sum_plan(e)
print("\nXOR gates (target, control):", plan.xor_gates)
print("bases:", plan.bases)
print("expected:", plan.expected)
print("residual qubits:", plan.residual_qubits, "vector:", np.round(plan.residual_vector.real, 4))
for c in e:
    print("  ", "".join(map(str, c)), "->", "".join(map(str, plan.apply_to_chain(c))))

reduced = execute_plan(cfg, plan, e)
direct = measure_the_measure(cfg, e)
print(f"\nreduced P = {reduced.probability:.12f}")
print(f"direct  P = {direct.probability:.12f}")
print("plan as JSON:", plan.to_json())
