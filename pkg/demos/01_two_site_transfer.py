"""Two and three coupled dots: exciton transfer checked against closed forms.

An exciton placed on one end of a two-dot chain oscillates with
P_2(t) = sin^2(V_F t / hbar). Three dots transfer perfectly at
t = pi hbar / (sqrt(2) V_F).
"""

import numpy as np

from dotchain.evolve import evolve_static, first_resonance, site_population
from dotchain.hamiltonian import chain_hamiltonian
from dotchain.model import HBAR, ChainSpec, Sector, basis_state, build_basis

V_F = 0.2  # meV

# %% two dots
basis = build_basis(2, Sector.exactly(1))
h = chain_hamiltonian(ChainSpec.uniform(2, V_F), basis)
print("two-dot Hamiltonian (meV):\n", h.real)

times = np.linspace(0.0, 20.0, 1001)
traj = evolve_static(h, basis_state(basis, "10"), times, {"P2": site_population(basis, 1)})
err = np.abs(traj["P2"] - np.sin(V_F * times / HBAR) ** 2).max()
print(f"max deviation from sin^2: {err:.2e}")

res = first_resonance(traj, "P2")
print(f"first full transfer at {res.time:.4f} ps (closed form {np.pi * HBAR / (2 * V_F):.4f} ps)")

# %% three dots
basis3 = build_basis(3, Sector.exactly(1))
h3 = chain_hamiltonian(ChainSpec.uniform(3, V_F), basis3)
print("three-dot spectrum / V_F:", np.round(np.linalg.eigvalsh(h3) / V_F, 6))
traj3 = evolve_static(h3, basis_state(basis3, "100"), np.arange(0, 12, 0.01), {"P3": site_population(basis3, 2)})
res3 = first_resonance(traj3, "P3")
print(f"three-dot transfer: P = {res3.value:.8f} at {res3.time:.4f} ps "
      f"(closed form {np.pi * HBAR / (np.sqrt(2) * V_F):.4f} ps)")
