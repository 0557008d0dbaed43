"""
Reading a measure off an ancilla outcome
========================================

Every analyzer gets an ancilla qubit that records the beam. Projecting the
ancillas on the uniform superposition of the chains of E happens with
probability mu(E)/k, so k times the observed probability recovers mu(E).
"""
import numpy as np

from qmeasure import Event, ExperimentConfig, measure, measure_the_measure, run_coupled
from qmeasure.protocol import coarse_measurement, post_measurement_particle_state
from qmeasure.simulator import purity, reduced_density
from qmeasure.spinor import Direction

rng = np.random.default_rng(5)
psi = rng.normal(size=2) + 1j * rng.normal(size=2)
cfg = ExperimentConfig(psi / np.linalg.norm(psi), tuple(Direction.from_cartesian(*rng.normal(size=3)) for _ in range(4)))

state = run_coupled(cfg)
print("joint state has", state.amplitudes.size, "amplitudes")
print("particle purity after coupling:", purity(reduced_density(state)))

for chains in (["0000"], ["0000", "1111"], ["0011", "0101", "1001"], ["0000", "0001", "0010", "0100", "1000"]):
    e = Event(chains)
    r = measure_the_measure(cfg, e)
    print(f"{str(e):38} P = {r.probability:.6f}  k*P = {r.inferred_measure:.6f}  mu = {measure(cfg, e):.6f}")

# the coarse yes/no measurement and the state left behind
e = Event(["0000", "1111"])
c = coarse_measurement(cfg, e)
print(f"\nP(|E>) = {c.p_event:.6f}, P(not |E>) = {c.p_rest:.6f}")
print("particle after |E>:", np.round(post_measurement_particle_state(cfg, e), 6))
