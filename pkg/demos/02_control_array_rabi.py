"""Driving a five-dot control array into the fully excited state.

Every dot is driven at once with Rabi coupling Omega. When Omega dominates
the Foerster coupling the dots flop almost independently and the array
reaches |XXXXX> near the single-dot pi time. A weak drive is corrupted by
the inter-dot hopping.
"""

from dotchain.figures import control_array_curves, rabi_summary_csv
from dotchain.gates import rect_pulse_time
from dotchain.svgplot import line_chart

V_F = 0.2

curves = control_array_curves(n_dots=5, v_f=V_F, rabi_over_vf=(1, 5, 25, 50))
print(rabi_summary_csv(curves))

for c in curves:
    t_pi = rect_pulse_time(c.rabi, 3.141592653589793)
    print(f"Omega = {c.rabi_over_vf:>4g} V_F: peak P(XXXXX) = {c.peak:.4f} at {c.peak_time:.3f} ps "
          f"(single-dot pi time {t_pi:.3f} ps)")

# each curve is plain CSV and can be drawn without any plotting library
fast = curves[2]
svg = line_chart(fast.trajectory.csv_text(), "t_ps", ["P_ground", "P_all_excited"],
                 title="Omega = 25 V_F", xlabel="t (ps)", ylabel="population")
print(f"SVG for the fast drive: {len(svg)} characters")
