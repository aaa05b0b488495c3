import numpy as np
import pytest

from dotchain.figures import (
    average_state_fidelity,
    blocking_inset,
    blocking_main_csv,
    blocking_sweep,
    chain_transfer,
    control_array_curves,
    rabi_summary_csv,
    transfer_scan,
    transfer_scan_csv,
)
from dotchain.model import HBAR
from dotchain.svgplot import line_chart, read_columns


def test_control_array_fast_and_slow_drive():
    fast, slow = control_array_curves(5, 0.2, (25, 1))
    assert fast.peak >= 0.99 and fast.peak_time < 1.0
    assert fast.peak_time == pytest.approx(0.207, abs=0.01)
    assert slow.peak < 0.9


def test_uncoupled_control_array_is_exact_rabi():
    (curve,) = control_array_curves(3, 0.0, (2.0,), dt=0.005)
    t = curve.trajectory.times
    s2 = np.sin(2.0 * t / HBAR) ** 2
    np.testing.assert_allclose(curve.trajectory["P_all_excited"], s2**3, atol=1e-7)
    np.testing.assert_allclose(curve.trajectory["P_ground"], (1 - s2) ** 3, atol=1e-7)


def test_rabi_summary_csv_header():
    curves = control_array_curves(3, 0.2, (25,), t_max=0.5)
    assert rabi_summary_csv(curves).splitlines()[0] == "rabi_over_vf,rabi_meV,peak_P_all_excited,peak_time_ps"


def test_blocking_sweep_monotone_and_lengths_agree():
    points = blocking_sweep((5, 7), 0.2)
    for n in (5, 7):
        vals = [p.overlap for p in points if p.n_sites == n]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert vals[0] == min(vals)
    by = {(p.n_sites, p.ratio): p.overlap for p in points}
    assert by[(5, 20.0)] >= 0.99
    assert by[(5, 20.0)] == pytest.approx(by[(7, 20.0)], abs=1e-6)


def test_blocking_main_csv_flags():
    csv = blocking_main_csv(blocking_sweep((5,), 0.2, (20,)))
    header, row = csv.splitlines()
    assert header == "ratio,n_sites,t_a_ps,overlap_at_ta,flag"
    assert row.endswith(",")


def test_blocking_inset_columns():
    inset = blocking_inset((5, 7), 0.2, t_max=1.0)
    assert set(inset.observables) == {"overlap_N5", "overlap_N7"}
    assert inset.csv_text().splitlines()[0] == "t_ps,overlap_N5,overlap_N7"


@pytest.mark.parametrize("n, t, f", [(2, 5.169, 1.0), (3, 7.31, 1.0)])
def test_chain_transfer_analytic(n, t, f):
    p = chain_transfer(n)
    assert p.time == pytest.approx(t, abs=5e-3)
    assert p.fidelity == pytest.approx(f, abs=1e-8)


def test_average_state_fidelity():
    assert average_state_fidelity(1.0) == pytest.approx(1.0, abs=1e-15)
    assert average_state_fidelity(0.0) == 0.5


def test_transfer_scan_claim():
    points, claim = transfer_scan(2, 11)
    assert [p.n_sites for p in points] == list(range(2, 12))
    assert claim.time_bus_only == pytest.approx(points[7].time)
    assert claim.within_factor_two
    assert not claim.under_limit
    csv = transfer_scan_csv(points, claim)
    lines = csv.splitlines()
    assert lines[0] == "n_sites,first_resonance_time_ps,fidelity,average_state_fidelity"
    assert lines[-1].startswith("# 9-dot bus: 9 sites ->")
    assert "11 sites" in lines[-1]


def test_fidelity_decreases_with_length():
    points, _ = transfer_scan(3, 11)
    f = [p.fidelity for p in points]
    assert all(b < a for a, b in zip(f, f[1:]))


def test_svg_from_csv():
    csv = "x,y\n0,0\n1,0.5\n2,1\n# note\n"
    cols = read_columns(csv)
    np.testing.assert_array_equal(cols["y"], [0, 0.5, 1])
    svg = line_chart(csv, "x", ["y"], title="a < b")
    assert svg.startswith("<svg") and "a &lt; b" in svg
    assert svg == line_chart(csv, "x", ["y"], title="a < b")
