import os
env = os.environ.get('env')

SECRET_KEY = "FLASK_SECRET_KEY"
SQLALCHEMY_DATABASE_URI = "sqlite:///qsdc.db"
SQLALCHEMY_TRACK_MODIFICATIONS = False
CELERY_BROKER_URL = "redis://localhost:6379/0"
CELERY_RESULT_BACKEND = "redis://localhost:6379/0"
CELERY_TASK_ALWAYS_EAGER = False
SOCKETIO_MESSAGE_QUEUE = "redis://localhost:6379/1"

DEFAULT_PROTOCOL = "round_trip"
DEFAULT_PAIRS = 64
DEFAULT_CHECK_FRACTION = 0.25
DEFAULT_THRESHOLD = 0.0
DEFAULT_NOISE_P = 0.0
DEFAULT_ATTACK = "none"
DEFAULT_INITIAL_STATE = "PsiMinus"
DEFAULT_TRIALS = 100
DEFAULT_FORMAT = "jsonl"
DEFAULT_MAX_ATTEMPTS = 1
MAX_TRIALS_PER_CAMPAIGN = 100000
AUDIT_REGISTRY = False

if env == "development":
    AUDIT_REGISTRY = True
elif env == "testing":
    SQLALCHEMY_DATABASE_URI = "sqlite://"
    CELERY_TASK_ALWAYS_EAGER = True
    SOCKETIO_MESSAGE_QUEUE = None
    AUDIT_REGISTRY = True
    MAX_TRIALS_PER_CAMPAIGN = 500
