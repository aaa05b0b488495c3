"""Distributing a Bell pair down two buses, start to finish.

The pair is made on (QDA, QDB), the buses are unblocked for one transfer
resonance and the excitons are caught on (QDC, QDD). The report lists the
delivered entanglement, the timing of each step and the fidelity budget.
"""

from dotchain.protocol import ArmSpec, run_distribution

for bus in (1, 3, 5):
    rep = run_distribution(ArmSpec(bus), ArmSpec(bus))
    print(f"bus of {bus} dots: arm transfer {rep.transfer[0]:.4f}, concurrence {rep.concurrence:.4f}, "
          f"elapsed {rep.elapsed:.2f} ps")

print("\nfive-dot buses with recombination (T1 = 1 ns), pulsed controls and explicit blocking:\n")
arm = ArmSpec(5, v_f=0.2, shift=4.0, decay_rate=0.001)
rep = run_distribution(arm, arm, ideal_controls=False, explicit_blocking=True)
print(rep.text())
for seg in rep.timeline.segments:
    print(f"  step {seg.step} {seg.configuration:<9} {seg.duration:7.3f} ps  {seg.label}")
