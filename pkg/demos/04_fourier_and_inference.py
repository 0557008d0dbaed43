"""
Fourier basis and what an outcome tells us
==========================================

A Fourier transform on the chains of E sends |E> to one chain, so plain Z
readout of the ancillas finds it. Every outcome of that basis also gives a
definite answer to "did E happen?", unlike a generic basis containing |E>.
"""
import numpy as np

from qmeasure import Event, ExperimentConfig, execute_plan, measure, subspace_fourier
from qmeasure.histories import chain_str, index_chain
from qmeasure.interpret import classify_outcome
from qmeasure.simulator import AncillaProjector
from qmeasure.spinor import Direction
from qmeasure.synth import fourier_target

alpha, beta = 0.6, 0.8
cfg = ExperimentConfig(np.array([alpha, beta]), (Direction.named("Z"), Direction.named("X")))
e = Event(["00", "01", "10"])

u = subspace_fourier(e)
r = execute_plan(cfg, u, e)
print("U|E> lands on", chain_str(fourier_target(e)))
print(f"Fourier route: 3 * P = {r.inferred_measure:.6f}, mu(E) = {measure(cfg, e):.6f}")

print("\nFourier basis outcomes")
for idx in range(4):
    pre = u.adjoint().apply(np.eye(4)[idx])
    c = classify_outcome(cfg, e, AncillaProjector(2, vector=pre))
    print(f"  {chain_str(index_chain(idx, 2))}: {c.verdict.value:13} {c.probability_relation}")

r3 = 1 / np.sqrt(3)
generic = {
    "|1>": [1, 1, 1, 0],
    "|2>": [1, -1, 0, 1],
    "|3>": [1, 0, -1, -1],
    "|4>": [0, 1, -1, 1],
}
print("\nhand-picked basis outcomes")
for name, v in generic.items():
    c = classify_outcome(cfg, e, AncillaProjector(2, vector=np.array(v) * r3))
    print(f"  {name}: {c.verdict.value:13} P = {c.probability:.6f}")
print(f"  (|a+b|^2+|a|^2)/6 = {(abs(alpha + beta) ** 2 + alpha ** 2) / 6:.6f}")
print(f"  (|a-b|^2+|b|^2)/6 = {(abs(alpha - beta) ** 2 + beta ** 2) / 6:.6f}")
