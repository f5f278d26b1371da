import json
from . import db

class TrialRecord(db.Model):
    id = db.Column(db.Integer, primary_key=True)
    campaign_run_id = db.Column(db.Integer, db.ForeignKey('campaign_run.id'), nullable=False)
    trial_index = db.Column(db.Integer, nullable=False)
    aborted = db.Column(db.Boolean, nullable=False)
    error_rate = db.Column(db.Float, nullable=False)
    fidelity_exact = db.Column(db.Boolean, nullable=True)
    eve_dibit_accuracy = db.Column(db.Float, nullable=True)
    attempts = db.Column(db.Integer, default=1)
    pairs_checked = db.Column(db.Integer, default=0)
    check_errors = db.Column(db.Integer, default=0)
    eve_interceptions = db.Column(db.Integer, default=0)
    eve_dibits_correct = db.Column(db.Integer, default=0)
    eve_dibits_total = db.Column(db.Integer, default=0)
    message_bits = db.Column(db.Integer, default=0)
    particle_transits = db.Column(db.Integer, default=0)
    transcript = db.Column(db.Text, nullable=True)

    __table_args__ = (db.UniqueConstraint('campaign_run_id', 'trial_index'),)

    @classmethod
    def from_record(cls, campaign_run_id, record):
        row = record.to_row()
        row["trial_index"] = row.pop("trial")
        return cls(campaign_run_id=campaign_run_id, transcript=json.dumps(record.transcript), **row)

    def to_row(self):
        return {
            "trial": self.trial_index,
            "aborted": self.aborted,
            "error_rate": self.error_rate,
            "fidelity_exact": self.fidelity_exact,
            "eve_dibit_accuracy": self.eve_dibit_accuracy,
            "attempts": self.attempts,
            "pairs_checked": self.pairs_checked,
            "check_errors": self.check_errors,
            "eve_interceptions": self.eve_interceptions,
            "eve_dibits_correct": self.eve_dibits_correct,
            "eve_dibits_total": self.eve_dibits_total,
            "message_bits": self.message_bits,
            "particle_transits": self.particle_transits,
        }

    def transcript_list(self):
        return json.loads(self.transcript) if self.transcript else []

    def __repr__(self):
        return f"<TrialRecord {self.campaign_run_id}:{self.trial_index}>"
