import csv
import io
import json
import os

import pytest

import config as settings
from campaign import (
    TRIAL_FIELDS,
    Campaign,
    build_campaign,
    emit,
    run_campaign,
    write_transcripts,
)
from channel import MESSAGE_ORDER_KINDS
from errors import CapacityError, ConfigurationError
from protocols import ProtocolName

DEFAULTS = vars(settings)


def _campaign(**values):
    values.setdefault("seed", 42)
    return build_campaign(values, DEFAULTS)


def _emitted(summary, fmt="jsonl"):
    buffer = io.StringIO()
    emit(summary, fmt, buffer)
    return buffer.getvalue()


class TestBuildCampaign:
    def test_defaults_come_from_config(self):
        campaign = _campaign()
        assert campaign.protocol.value == settings.DEFAULT_PROTOCOL
        assert campaign.config.n_pairs == settings.DEFAULT_PAIRS
        assert campaign.trials == settings.DEFAULT_TRIALS
        assert campaign.config.seed == 42

    def test_explicit_values(self):
        campaign = _campaign(protocol="one_way", pairs=64, check_fraction=0.25, attack="none", trials=1000)
        assert campaign.protocol is ProtocolName.ONE_WAY
        assert campaign.config.check_size == 16
        assert campaign.trials == 1000

    @pytest.mark.parametrize("values,field", [
        ({"check_fraction": 1.5}, "check_fraction"),
        ({"pairs": 1}, "pairs"),
        ({"threshold": -0.1}, "threshold"),
        ({"noise_p": 2}, "noise_p"),
        ({"trials": 0}, "trials"),
        ({"attack": "teleport"}, "attack"),
        ({"protocol": "one_way", "attack": "intercept_resend_epr"}, "attack"),
        ({"protocol": "round_trip", "attack": "intercept_bell_guess"}, "attack"),
        ({"pairs": "many"}, "pairs"),
        ({"pairs": 16.7}, "pairs"),
        ({"trials": 2.5}, "trials"),
        ({"disable_permutation": "maybe"}, "disable_permutation"),
        ({"max_attempts": 0}, "max_attempts"),
        ({"message_hex": "zz"}, "message_hex"),
        ({"message_hex": "\u0663"}, "message_hex"),
    ])
    def test_errors_name_the_setting(self, values, field):
        with pytest.raises(ConfigurationError) as excinfo:
            _campaign(**values)
        assert excinfo.value.field == field

    def test_trial_limit_applies_only_when_given(self):
        assert _campaign(trials=10 ** 6).trials == 10 ** 6
        with pytest.raises(ConfigurationError) as excinfo:
            build_campaign({"seed": 1, "trials": 501}, DEFAULTS, trial_limit=500)
        assert excinfo.value.field == "trials"
        assert build_campaign({"seed": 1, "trials": 500}, DEFAULTS, trial_limit=500).trials == 500

    def test_integral_floats_are_accepted(self):
        assert _campaign(pairs=16.0).config.n_pairs == 16

    @pytest.mark.parametrize("raw,permute", [
        (True, False), (False, True), ("true", False), ("false", True), ("0", True), ("off", True), (1, False),
    ])
    def test_disable_permutation_is_read_as_a_boolean(self, raw, permute):
        assert _campaign(disable_permutation=raw).config.permute is permute

    def test_fixed_message_must_fit(self):
        with pytest.raises(CapacityError):
            _campaign(pairs=4, check_fraction=0.5, message_hex="ffff")


class TestRunCampaign:
    def test_same_seed_is_byte_identical(self):
        campaign = _campaign(protocol="round_trip", pairs=16, trials=20, attack="measure_resend_z", noise_p=0.02)
        assert _emitted(run_campaign(campaign)) == _emitted(run_campaign(campaign))
        assert _emitted(run_campaign(campaign), "csv") == _emitted(run_campaign(campaign), "csv")

    def test_different_seeds_differ(self):
        a = _campaign(pairs=16, trials=5, attack="measure_resend_z", seed=1)
        b = _campaign(pairs=16, trials=5, attack="measure_resend_z", seed=2)
        assert _emitted(run_campaign(a)) != _emitted(run_campaign(b))

    @pytest.mark.parametrize("protocol", ["round_trip", "one_way", "dialogue"])
    def test_honest_noiseless_campaign(self, protocol):
        summary = run_campaign(_campaign(protocol=protocol, pairs=64, trials=100))
        aggregate = summary.aggregate()
        assert aggregate["abort_rate"] == 0.0
        assert aggregate["mean_error_rate"] == 0.0
        assert aggregate["fidelity"] == 1.0
        assert aggregate["eve_dibit_accuracy"] is None

    @pytest.mark.slow
    @pytest.mark.parametrize("protocol", ["round_trip", "one_way", "dialogue"])
    def test_honest_noiseless_campaign_at_scale(self, protocol):
        aggregate = run_campaign(_campaign(protocol=protocol, pairs=64, trials=1000)).aggregate()
        assert aggregate["abort_rate"] == 0.0
        assert aggregate["fidelity"] == 1.0

    def test_fixed_message_is_recovered(self):
        summary = run_campaign(_campaign(protocol="one_way", pairs=16, trials=5, message_hex="c0ffee"))
        assert all(r.fidelity_exact for r in summary.records)
        assert all(r.message_bits == 24 for r in summary.records)

    def test_intercept_resend_campaign_aborts(self):
        campaign = _campaign(protocol="round_trip", pairs=64, threshold=0.15, attack="intercept_resend_epr", trials=200)
        aggregate = run_campaign(campaign).aggregate()
        assert aggregate["abort_rate"] >= 0.999
        assert aggregate["fidelity"] is None
        assert aggregate["eve_dibit_accuracy_aborted"] == pytest.approx(0.25, abs=0.03)

    def test_retries_until_a_session_passes(self):
        campaign = _campaign(protocol="round_trip", pairs=8, trials=30, noise_p=0.1, max_attempts=5)
        summary = run_campaign(campaign)
        assert any(r.attempts > 1 for r in summary.records)
        for record in summary.records:
            assert 1 <= record.attempts <= 5
            if record.aborted:
                assert record.attempts == 5
            assert record.particle_transits == 16 * record.attempts

    def test_retries_stop_at_max_attempts(self):
        campaign = _campaign(pairs=128, trials=3, attack="measure_resend_z", max_attempts=3)
        for record in run_campaign(campaign).records:
            assert record.aborted
            assert record.attempts == 3

    def test_worker_pool_keeps_trial_order(self):
        values = dict(protocol="dialogue", pairs=16, trials=12, noise_p=0.05, threshold=0.5)
        sequential = _emitted(run_campaign(_campaign(**values)))
        pooled = _emitted(run_campaign(_campaign(workers=2, **values)))
        assert pooled == sequential

    def test_bits_per_transit(self):
        aggregate = run_campaign(_campaign(protocol="one_way", pairs=16, trials=3)).aggregate()
        # 12 message pairs carry 24 bits over 32 particle transits.
        assert aggregate["bits_per_transit"] == pytest.approx(24 / 32)


class TestEmit:
    def test_jsonl_has_one_line_per_trial_plus_aggregate(self):
        summary = run_campaign(_campaign(pairs=8, trials=2))
        lines = _emitted(summary).splitlines()
        assert len(lines) == 3
        objects = [json.loads(line) for line in lines]
        assert [o["type"] for o in objects] == ["trial", "trial", "aggregate"]
        assert objects[-1]["seed"] == 42
        assert objects[-1]["config"]["n_pairs"] == 8

    def test_jsonl_round_trips_numeric_fields(self):
        summary = run_campaign(_campaign(pairs=16, trials=4, noise_p=0.1, threshold=1.0))
        objects = [json.loads(line) for line in _emitted(summary).splitlines()]
        for record, obj in zip(summary.records, objects):
            assert obj["error_rate"] == record.error_rate
            assert obj["particle_transits"] == record.particle_transits
        assert objects[-1]["mean_error_rate"] == summary.aggregate()["mean_error_rate"]

    def test_csv_schema(self):
        summary = run_campaign(_campaign(pairs=64, trials=3, attack="measure_resend_z"))
        text = _emitted(summary, "csv")
        lines = text.splitlines()
        assert lines[0] == "# seed=42"
        rows = list(csv.DictReader(line for line in lines[1:] if not line.startswith("#")))
        assert len(rows) == 3
        for column in ("trial", "aborted", "error_rate", "fidelity_exact", "eve_dibit_accuracy"):
            assert column in rows[0]
        assert list(rows[0]) == list(TRIAL_FIELDS)
        footer = [line for line in lines[1:] if line.startswith("# ")]
        assert "# abort_rate=1.0" in footer

    def test_unknown_format(self):
        with pytest.raises(ConfigurationError):
            _emitted(run_campaign(_campaign(pairs=8, trials=1)), "xml")


def test_aborted_transcripts_never_disclose_the_message_order(tmp_path):
    campaign = _campaign(protocol="one_way", pairs=16, trials=10, attack="intercept_bell_guess")
    summary = run_campaign(campaign)
    write_transcripts(summary, str(tmp_path))
    files = sorted(os.listdir(tmp_path))
    assert len(files) == 10
    for record, name in zip(summary.records, files):
        with open(tmp_path / name) as f:
            transcript = json.load(f)
        kinds = {entry["kind"] for entry in transcript}
        if record.aborted:
            assert not kinds & MESSAGE_ORDER_KINDS


def test_campaign_rejects_bad_workers():
    base = _campaign(pairs=8, trials=1)
    with pytest.raises(ConfigurationError):
        Campaign(protocol=base.protocol, config=base.config, trials=1, workers=0)
