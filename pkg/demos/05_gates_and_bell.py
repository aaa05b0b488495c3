"""Gate algebra and a pulsed Bell pair on two stacked dots.

CNOT is assembled from Hadamards around the controlled phase. The SWAP-in
sequence moves an exciton qubit into a spin prepared in |0>. The Bell
pair comes from a pi/2 pulse on QDA followed by a pi pulse that only
addresses QDB when QDA is occupied, thanks to the Coulomb shift.
"""

import numpy as np

from dotchain.gates import BellPrepSpec, bell_prepare_pulsed, cnot, run_gate_checks

print(np.round(cnot().real, 12))
for r in run_gate_checks(seed=1):
    print(r.line())

print("\npulsed Bell preparation, shift 4 meV")
for rabi_pi in (0.02, 0.1, 0.4, 2.0):
    state, f = bell_prepare_pulsed(BellPrepSpec(coulomb_shift=4.0, rabi_half=1.0, rabi_pi=rabi_pi))
    print(f"  pi-pulse rabi {rabi_pi:>4} meV: fidelity {f:.5f}, amplitudes {np.round(state, 3)}")

_, f0 = bell_prepare_pulsed(BellPrepSpec(coulomb_shift=0.0, rabi_pi=0.1))
print(f"  no shift: fidelity {f0:.3f} (the second pulse is no longer conditional)")
