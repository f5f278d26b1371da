from datetime import datetime
import json
from celery import Celery
from models import db, CampaignRun, TrialRecord
from campaign import run_campaign
from helpers import build_campaign_from_values
from app import app, socketio

celery_app = Celery(app.import_name,
                    broker=app.config['CELERY_BROKER_URL'],
                    backend=app.config['CELERY_RESULT_BACKEND'])
celery_app.conf.update(task_always_eager=app.config.get('CELERY_TASK_ALWAYS_EAGER', False))

class ContextTask(celery_app.Task):
    def __call__(self, *args, **kwargs):
        with app.app_context():
            return self.run(*args, **kwargs)
celery_app.Task = ContextTask

@celery_app.task(name="run_campaign_task")
def run_campaign_task(campaign_run_id):
    """
	Runs a stored campaign and stores one row per trial.

    The run moves from ``pending`` through ``running`` to ``succeeded`` or
    ``failed``; watchers of room ``campaign:<id>`` get ``campaign_completed``
    with the aggregate or ``campaign_error`` with the message.

    Args:
        campaign_run_id (int): The CampaignRun to execute.

    Returns:
        dict: ``{"success": True, "summary": ...}`` on success,
              ``{"status": "error", "error": "<error_message>"}`` otherwise.
    """
    room = f"campaign:{campaign_run_id}"
    campaign_run = db.session.get(CampaignRun, campaign_run_id)
    if not campaign_run:
        return {"status": "error", "error": "Campaign not found."}
    try:
        campaign_run.status = "running"
        db.session.commit()

        campaign = build_campaign_from_values(campaign_run.settings_dict())
        summary = run_campaign(campaign)
        for record in summary.records:
            db.session.add(TrialRecord.from_record(campaign_run.id, record))
        aggregate = summary.aggregate()
        campaign_run.summary = json.dumps(aggregate)
        campaign_run.duration = summary.duration
        campaign_run.status = "succeeded"
        campaign_run.completed_at = datetime.utcnow()
        db.session.commit()
        app.logger.info("Campaign %s finished in %.2fs", campaign_run_id, summary.duration)

        socketio.emit("campaign_completed", {"campaign_id": campaign_run_id, "summary": aggregate}, room=room)
        return {"success": True, "summary": aggregate}
    except Exception as e:
        db.session.rollback()
        campaign_run = db.session.get(CampaignRun, campaign_run_id)
        if campaign_run:
            campaign_run.status = "failed"
            campaign_run.error_message = str(e)
            db.session.commit()
        app.logger.error("Campaign %s failed: %s", campaign_run_id, e)
        socketio.emit("campaign_error", {"campaign_id": campaign_run_id, "error": str(e)}, room=room)
        return {"status": "error", "error": str(e)}
    finally:
        db.session.remove()
