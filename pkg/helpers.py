import io
import secrets

from flask import current_app

from campaign import SETTING_KEYS, CampaignSummary, TrialRecord, build_campaign, emit

# Settings a stored campaign may carry; output paths stay a CLI concern.
API_KEYS = tuple(key for key in SETTING_KEYS if key not in ("out", "dump_transcripts", "workers", "format"))


def campaign_values_from_json(data):
    """
	Picks the campaign settings out of a JSON request body.

    Unknown keys are ignored. A missing seed is drawn fresh so the stored run
    can always be reproduced.

    Args:
        data (dict): The request body.

    Returns:
        dict: Lower-case settings including ``seed``.
    """
    values = {key: data[key] for key in API_KEYS if data.get(key) is not None}
    if values.get("seed") is None:
        values["seed"] = secrets.randbits(64)
    return values


def build_campaign_from_values(values, enforce_quota=False):
    """
	Validates stored or requested settings against the app's configured defaults.

    New requests pass ``enforce_quota`` to apply MAX_TRIALS_PER_CAMPAIGN; runs that
    are already stored are rebuilt without it.

    Raises:
        ConfigurationError: With ``field`` naming the offending setting.
    """
    limit = current_app.config.get("MAX_TRIALS_PER_CAMPAIGN") if enforce_quota else None
    return build_campaign(values, current_app.config, trial_limit=limit)


def summary_from_run(campaign_run):
    """
	Rebuilds a CampaignSummary from a stored run and its trial rows.

    Args:
        campaign_run (CampaignRun): A completed run.

    Returns:
        CampaignSummary: Equal, field for field, to the one the task produced.
    """
    campaign = build_campaign_from_values(campaign_run.settings_dict())
    records = [
        TrialRecord(**row.to_row(), transcript=row.transcript_list())
        for row in campaign_run.trials
    ]
    return CampaignSummary(campaign, records, campaign_run.duration or 0.0)


def export_run(campaign_run, fmt):
    buffer = io.StringIO()
    emit(summary_from_run(campaign_run), fmt, buffer)
    return buffer.getvalue()


def error_payload(error):
    payload = {"error": str(error)}
    field = getattr(error, "field", None)
    if field:
        payload["field"] = field
    return payload