from flask_sqlalchemy import SQLAlchemy

db = SQLAlchemy()
from .CampaignRun import CampaignRun
from .TrialRecord import TrialRecord
