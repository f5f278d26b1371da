import json
from datetime import datetime
from . import db

class CampaignRun(db.Model):
    id = db.Column(db.Integer, primary_key=True)
    task_id = db.Column(db.String(100), nullable=True)
    status = db.Column(db.String(20), nullable=False, default="pending")
    protocol = db.Column(db.String(20), nullable=False)
    # 64-bit unsigned seeds do not fit a signed SQL integer.
    seed = db.Column(db.String(20), nullable=False)
    settings = db.Column(db.Text, nullable=False)
    summary = db.Column(db.Text, nullable=True)
    duration = db.Column(db.Float, nullable=True)
    error_message = db.Column(db.Text, nullable=True)
    created_at = db.Column(db.DateTime, default=datetime.utcnow)
    completed_at = db.Column(db.DateTime, nullable=True)
    trials = db.relationship('TrialRecord', backref='campaign_run', lazy=True,
                             cascade="all, delete-orphan", order_by='TrialRecord.trial_index')

    def settings_dict(self):
        return json.loads(self.settings)

    def to_dict(self):
        return {
            "id": self.id,
            "task_id": self.task_id,
            "status": self.status,
            "protocol": self.protocol,
            "seed": int(self.seed),
            "settings": self.settings_dict(),
            "summary": json.loads(self.summary) if self.summary else None,
            "duration": self.duration,
            "error_message": self.error_message,
            "created_at": self.created_at.isoformat(),
            "completed_at": self.completed_at.isoformat() if self.completed_at else None,
        }

    def __repr__(self):
        return f"<CampaignRun {self.protocol} - {self.status}>"
