"""How well a uniform chain moves an exciton end to end.

The first maximum of the end-site population falls slowly with chain
length. Two ways of quoting it are printed: the raw population and the
average fidelity of a qubit encoded as vacuum / exciton.
"""

from dotchain.figures import transfer_scan

points, claim = transfer_scan(n_min=2, n_max=11, v_f=0.2)
print(" N   t (ps)   population   avg-state fidelity")
for p in points:
    print(f"{p.n_sites:>2}  {p.time:7.3f}   {p.fidelity:.4f}       {p.average_fidelity:.4f}")
print()
print(claim.describe())
