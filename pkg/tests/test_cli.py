import json

import pytest

from cli import main, parse_args
from eve import AttackKind
from protocols import ProtocolName


def test_parse_args_example():
    campaign = parse_args(
        "--protocol one_way --pairs 64 --check-fraction 0.25 --attack none --trials 1000 --seed 42".split()
    )
    assert campaign.protocol is ProtocolName.ONE_WAY
    assert campaign.config.n_pairs == 64
    assert campaign.config.check_fraction == 0.25
    assert campaign.config.attack is AttackKind.NONE
    assert campaign.trials == 1000
    assert campaign.config.seed == 42


@pytest.mark.parametrize("argv,flag", [
    (["--check-fraction", "1.5"], "--check-fraction"),
    (["--pairs", "1"], "--pairs"),
    (["--protocol", "one_way", "--attack", "intercept_resend_epr"], "--attack"),
    (["--pairs", "4", "--check-fraction", "0.5", "--message-hex", "ffff"], "--message-hex"),
    (["--max-attempts", "0"], "--max-attempts"),
])
def test_invalid_values_exit_with_usage_error(argv, flag, capsys):
    with pytest.raises(SystemExit) as excinfo:
        parse_args(argv + ["--seed", "1"])
    assert excinfo.value.code == 2
    assert flag in capsys.readouterr().err


def test_unknown_flag(capsys):
    with pytest.raises(SystemExit) as excinfo:
        parse_args(["--teleport"])
    assert excinfo.value.code == 2


def test_omitted_seed_is_drawn_and_echoed(tmp_path):
    out = tmp_path / "run.jsonl"
    assert main(["--pairs", "8", "--trials", "2", "--out", str(out)]) == 0
    aggregate = json.loads(out.read_text().splitlines()[-1])
    assert aggregate["type"] == "aggregate"
    assert isinstance(aggregate["seed"], int)
    assert 0 <= aggregate["seed"] < 2 ** 64


def test_config_file_is_overridden_by_flags(tmp_path):
    path = tmp_path / "campaign.json"
    path.write_text(json.dumps({"PROTOCOL": "dialogue", "PAIRS": 32, "TRIALS": 7, "SEED": 5}))
    campaign = parse_args(["--config", str(path), "--pairs", "16"])
    assert campaign.protocol is ProtocolName.DIALOGUE
    assert campaign.config.n_pairs == 16
    assert campaign.trials == 7
    assert campaign.config.seed == 5


def test_python_config_file(tmp_path):
    path = tmp_path / "campaign.cfg"
    path.write_text('ATTACK = "measure_resend_z"\nNOISE_P = 0.02\nTHRESHOLD = 0.5\nSEED = 9\n')
    campaign = parse_args(["--config", str(path)])
    assert campaign.config.attack is AttackKind.MEASURE_RESEND_Z
    assert campaign.config.noise.p == 0.02
    assert campaign.config.abort_threshold == 0.5


def test_missing_config_file(tmp_path, capsys):
    with pytest.raises(SystemExit) as excinfo:
        parse_args(["--config", str(tmp_path / "absent.json")])
    assert excinfo.value.code == 2
    assert "--config" in capsys.readouterr().err


def test_disable_permutation_flag():
    assert not parse_args(["--disable-permutation", "--seed", "1"]).config.permute
    assert parse_args(["--seed", "1"]).config.permute


def test_main_is_byte_identical_per_seed(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["--protocol", "one_way", "--pairs", "16", "--trials", "10", "--seed", "3",
            "--attack", "intercept_bell_guess", "--format", "csv"]
    assert main(argv + ["--out", str(first)]) == 0
    assert main(argv + ["--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert first.read_text().startswith("# seed=3\n")


def test_aborts_are_not_errors(tmp_path):
    out = tmp_path / "run.jsonl"
    code = main(["--attack", "measure_resend_z", "--pairs", "64", "--trials", "3", "--seed", "1", "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text().splitlines()[-1])["abort_rate"] == 1.0


def test_unwritable_output(tmp_path):
    target = tmp_path / "missing" / "dir" / "run.jsonl"
    assert main(["--pairs", "8", "--trials", "1", "--seed", "1", "--out", str(target)]) == 1


def test_dump_transcripts(tmp_path):
    directory = tmp_path / "logs"
    main(["--pairs", "8", "--trials", "2", "--seed", "1", "--out", str(tmp_path / "o.jsonl"),
          "--dump-transcripts", str(directory)])
    assert sorted(p.name for p in directory.iterdir()) == ["trial-000000.json", "trial-000001.json"]


def test_dry_run_prints_prediction(capsys):
    code = main(["--pairs", "64", "--attack", "intercept_resend_epr", "--threshold", "0.15", "--seed", "1",
                 "--dry-run"])
    assert code == 0
    prediction = json.loads(capsys.readouterr().out)
    assert prediction["attack_error_rate"] == pytest.approx(0.75 * 63 / 64)
    assert prediction["detection_probability"] >= 0.999
