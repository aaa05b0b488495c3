import pytest

from dotchain.cli import EXIT_CHECK, EXIT_OK, EXIT_VALIDATION, load_config, main
from dotchain.errors import ConfigError


def write(tmp_path, text, name="scenario.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_defaults():
    cfg = load_config(None)
    assert cfg["chain"]["v_f_mev"] == 0.2
    assert cfg["blocking"]["ratios"] == (0.0, 2.0, 5.0, 10.0, 20.0, 40.0)


def test_config_parsing(tmp_path):
    cfg = load_config(write(tmp_path, "[chain]\nv_f_mev = 0.3\nlengths = 5, 9\n[output]\nplots = no\n"))
    assert cfg["chain"]["v_f_mev"] == 0.3
    assert cfg["chain"]["lengths"] == (5, 9)
    assert cfg["output"]["plots"] is False


@pytest.mark.parametrize("text", ["[chain]\nvf = 0.2\n", "[magic]\nx = 1\n", "[chain]\nv_f_mev = fast\n",
                                  "v_f_mev = 0.2\n"])
def test_config_rejects(tmp_path, text):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, text))


def test_bad_config_exit_code(tmp_path, capsys):
    assert main(["fig3", "--config", write(tmp_path, "[chain]\nbogus = 1\n"), "--out-dir", str(tmp_path)]) \
        == EXIT_VALIDATION
    assert "bogus" in capsys.readouterr().err


def test_gates_check(tmp_path, capsys):
    assert main(["gates-check", "--out-dir", str(tmp_path), "--seed", "5"]) == EXIT_OK
    first = (tmp_path / "gates_check.txt").read_text()
    assert "FAIL" not in first
    main(["gates-check", "--out-dir", str(tmp_path), "--seed", "5"])
    assert (tmp_path / "gates_check.txt").read_text() == first


def test_gates_check_corrupted_tolerance(tmp_path):
    assert main(["gates-check", "--out-dir", str(tmp_path), "--tolerance", "-1"]) == EXIT_CHECK


def test_fig3_files(tmp_path):
    cfg = write(tmp_path, "[drive]\nrabi_over_vf = 1, 25\n")
    out = tmp_path / "out"
    assert main(["fig3", "--config", cfg, "--out-dir", str(out)]) == EXIT_OK
    assert (out / "fig3_rabi_25vf.csv").read_text().startswith("t_ps,P_ground,P_all_excited\n")
    assert (out / "fig3_rabi_1vf.svg").read_text().startswith("<svg")
    assert (out / "fig3_summary.csv").exists()


def test_fig4_files_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["fig4", "--out-dir", str(a)]) == EXIT_OK
    main(["fig4", "--out-dir", str(b)])
    for name in ("fig4_main.csv", "fig4_inset.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert (a / "fig4_inset.csv").read_text().startswith("t_ps,overlap_N5,overlap_N7")
    assert not list(a.glob(".*"))


def test_transfer_scan_flags_discrepancy(tmp_path, capsys):
    code = main(["transfer-scan", "--out-dir", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == EXIT_CHECK
    assert "9 sites" in out and "11 sites" in out
    assert (tmp_path / "transfer_scan.csv").read_text().startswith("n_sites,first_resonance_time_ps,fidelity")


def test_transfer_scan_short_chains_pass(tmp_path):
    cfg = write(tmp_path, "[chain]\nn_min = 2\nn_max = 5\n")
    assert main(["transfer-scan", "--config", cfg, "--out-dir", str(tmp_path)]) == EXIT_OK


def test_distribute(tmp_path, capsys):
    cfg = write(tmp_path, "[protocol]\nbus_length_a = 1\nbus_length_b = 1\ndecay_rate_per_ps = 0\n"
                          "[output]\ntrajectories = yes\n")
    assert main(["distribute", "--config", cfg, "--out-dir", str(tmp_path), "--format", "csv"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("arm_lengths,")
    report = (tmp_path / "distribution_report.txt").read_text()
    assert "concurrence = 1.000000" in report
    assert (tmp_path / "transfer_arm_A.csv").exists()
