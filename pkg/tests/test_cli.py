"""CLI: exit codes, output files, config handling, replay determinism."""

import pytest

from bqcsim.cli import ConfigError, main, parse_config, DEFAULTS


def run(argv):
    return main(argv)


def test_run_pad_hadamard_exit_zero(tmp_path):
    code = run(["run", "pad-hadamard", "--seed", "1",
                "--out", str(tmp_path)])
    assert code == 0
    log = (tmp_path / "pad-hadamard.log").read_text()
    assert log.endswith("verdict\tpass\t\n")


def test_run_writes_stage_reports(tmp_path):
    code = run(["run", "gdgprep-basic", "--seed", "2",
                "--out", str(tmp_path)])
    assert code == 0
    stages = (tmp_path / "gdgprep-basic.stages.tsv").read_text()
    assert stages.splitlines()[0] == "stage\tin\tout\thelpers\tverdict\tqueries"
    assert "\tpass\t" in stages


def test_run_full_pipeline(tmp_path):
    code = run(["run", "gdgprep-full", "--seed", "3", "--out", str(tmp_path),
                "--set", "L=4"])
    assert code == 0
    assert (tmp_path / "gdgprep-full.stages.tsv").exists()


def test_seed_replay_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run(["run", "gdgprep-basic", "--seed", "9",
                    "--out", str(out)]) == 0
    assert ((a / "gdgprep-basic.log").read_bytes()
            == (b / "gdgprep-basic.log").read_bytes())


def test_unknown_protocol_exit_two():
    assert run(["run", "no-such-thing", "--seed", "1"]) == 2


def test_missing_seed_exit_two():
    assert run(["run", "pad-hadamard"]) == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("# comment\nkappa_out = 10\npad_len=5\n")
    parsed = parse_config(cfg.read_text(), DEFAULTS)
    assert parsed["kappa_out"] == 10 and parsed["pad_len"] == 5
    code = run(["run", "pad-hadamard", "--seed", "4", "--out", str(tmp_path),
                "--config", str(cfg), "--set", "kappa_out=12"])
    assert code == 0


def test_config_rejects_unknown_key():
    with pytest.raises(ConfigError):
        parse_config("no_such_knob=1", DEFAULTS)
    with pytest.raises(ConfigError):
        parse_config("kappa_out=ten", DEFAULTS)


def test_bad_config_file_exit_two(tmp_path):
    cfg = tmp_path / "bad.txt"
    cfg.write_text("garbage line without equals\n")
    assert run(["run", "pad-hadamard", "--seed", "1",
                "--config", str(cfg)]) == 2


def test_attack_free_lunch_unpermuted(tmp_path):
    code = run(["attack", "free-lunch-unpermuted", "--seed", "1",
                "--trials", "10", "--set", "kappa_out=12",
                "--out", str(tmp_path)])
    assert code == 0
    stats = (tmp_path / "free-lunch-unpermuted.tsv").read_text()
    assert "\t10\t10\t1.000000\t" in stats


def test_attack_hadamard_cheat(tmp_path):
    code = run(["attack", "hadamard-cheat", "--seed", "2", "--trials", "50",
                "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "hadamard-cheat.tsv").exists()


def test_ubqc_zero_circuit_outputs_zero(tmp_path):
    # one J(0) = H gate: H|+> = |0>, the histogram concentrates on 0
    circ = tmp_path / "circ.txt"
    circ.write_text("0\n")
    code = run(["ubqc", str(circ), "--seed", "5", "--out", str(tmp_path),
                "--set", "shots=200", "--set", "L=2", "--set", "N=2"])
    assert code == 0
    hist = (tmp_path / "ubqc.hist.tsv").read_text()
    line1 = [l for l in hist.splitlines() if l.startswith("1\t")][0]
    assert line1.split("\t")[1] == "0"


def test_ubqc_missing_file_exit_two(tmp_path):
    assert run(["ubqc", str(tmp_path / "none.txt"), "--seed", "1"]) == 2


def test_ubqc_bad_circuit_token(tmp_path):
    circ = tmp_path / "circ.txt"
    circ.write_text("1 two 3\n")
    assert run(["ubqc", str(circ), "--seed", "1"]) == 2
