import json
import uuid
from flask import Blueprint, Response, current_app, jsonify, request
from campaign import FORMATS
from errors import ConfigurationError
from helpers import build_campaign_from_values, campaign_values_from_json, error_payload, export_run
from models import CampaignRun, TrialRecord, db
from predictions import predict

bp = Blueprint('campaign', __name__)

EXPORT_MIMETYPES = {"jsonl": "application/x-ndjson", "csv": "text/csv"}

@bp.route('/api/campaigns', methods=["POST"])
def create_campaign():
    """
	Validates, stores and queues a campaign.

    The body holds campaign settings (``protocol``, ``pairs``, ``check_fraction``,
    ``threshold``, ``noise_p``, ``attack``, ``trials``, ``seed``, ...). A missing
    seed is drawn and returned so the run can be repeated.

    Returns:
        flask.Response: ``{"status": "queued", "campaign_id", "seed"}`` with 202,
        or a 400 JSON error naming the offending ``field``.
    """
    data = request.get_json(silent=True) or {}
    values = campaign_values_from_json(data)
    try:
        campaign = build_campaign_from_values(values, enforce_quota=True)
    except ConfigurationError as e:
        return jsonify(error_payload(e)), 400

    task_id = str(uuid.uuid4())
    campaign_run = CampaignRun(
        task_id=task_id,
        status="pending",
        protocol=campaign.protocol.value,
        seed=str(campaign.config.seed),
        settings=json.dumps(values),
    )
    db.session.add(campaign_run)
    db.session.commit()
    campaign_run_id = campaign_run.id
    current_app.logger.info("Queued campaign %s (%s, %d trials)", campaign_run_id, campaign.protocol.value, campaign.trials)

    from tasks import run_campaign_task
    run_campaign_task.apply_async(args=[campaign_run_id], task_id=task_id)
    return jsonify({"status": "queued", "campaign_id": campaign_run_id, "seed": campaign.config.seed}), 202

@bp.route('/api/campaigns/<int:campaign_id>', methods=["GET"])
def get_campaign(campaign_id):
    campaign_run = CampaignRun.query.get_or_404(campaign_id)
    return jsonify(campaign_run.to_dict())

@bp.route('/api/campaigns/<int:campaign_id>/trials', methods=["GET"])
def get_trials(campaign_id):
    campaign_run = CampaignRun.query.get_or_404(campaign_id)
    return jsonify({"campaign_id": campaign_run.id, "trials": [row.to_row() for row in campaign_run.trials]})

@bp.route('/api/campaigns/<int:campaign_id>/trials/<int:trial_index>/transcript', methods=["GET"])
def get_transcript(campaign_id, trial_index):
    """
	Returns the classical-channel log of one trial.

    Args:
        campaign_id (int): The stored campaign.
        trial_index (int): Zero-based trial index.

    Returns:
        flask.Response: ``{"campaign_id", "trial", "transcript": [...]}`` or 404.
    """
    row = TrialRecord.query.filter_by(campaign_run_id=campaign_id, trial_index=trial_index).first()
    if not row:
        return jsonify({"error": "Trial not found."}), 404
    return jsonify({"campaign_id": campaign_id, "trial": trial_index, "transcript": row.transcript_list()})

@bp.route('/api/campaigns/<int:campaign_id>/export', methods=["GET"])
def export_campaign(campaign_id):
    """
	Serializes a finished campaign exactly as the command line would.

    Query Args:
        format (str): ``jsonl`` (default) or ``csv``.

    Returns:
        flask.Response: The serialized campaign, 400 on an unknown format, 409 if
        the campaign has not succeeded yet.
    """
    fmt = request.args.get("format", current_app.config.get("DEFAULT_FORMAT", "jsonl"))
    if fmt not in FORMATS:
        return jsonify({"error": f"Unknown format {fmt!r}.", "field": "format"}), 400
    campaign_run = CampaignRun.query.get_or_404(campaign_id)
    if campaign_run.status != "succeeded":
        return jsonify({"error": f"Campaign is {campaign_run.status}."}), 409
    return Response(export_run(campaign_run, fmt), mimetype=EXPORT_MIMETYPES[fmt])

@bp.route('/api/predict', methods=["POST"])
def predict_campaign():
    """
	Predicts the checking error rate and the abort probability of a configuration.

    Returns:
        flask.Response: The prediction dict, or a 400 JSON error.
    """
    data = request.get_json(silent=True) or {}
    try:
        campaign = build_campaign_from_values(campaign_values_from_json(data))
    except ConfigurationError as e:
        return jsonify(error_payload(e)), 400
    return jsonify(predict(campaign.protocol, campaign.config))
