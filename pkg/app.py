import os
from flask import Flask, jsonify
from flask_socketio import SocketIO, join_room
from models import db

env = os.environ.get('env')
port = 80
if env == "development":
    port = 5000
app = Flask(__name__)
app.config.from_pyfile('config.py')

db.init_app(app)
socketio = SocketIO(app, cors_allowed_origins='*', async_mode='threading',
                    message_queue=app.config.get('SOCKETIO_MESSAGE_QUEUE'))

from api.campaign import bp as campaign_bp

app.register_blueprint(campaign_bp)

@socketio.on("watch_campaign")
def on_watch_campaign(data):
    """
	Subscribes the client to the updates of one stored campaign.

    Args:
        data (dict): ``{"campaign_id": <int>}``.

    Returns:
        dict: Acknowledgement naming the joined room, or an error.
    """
    campaign_id = (data or {}).get("campaign_id")
    if campaign_id is None:
        return {"error": "campaign_id is required."}
    room = f"campaign:{int(campaign_id)}"
    join_room(room)
    app.logger.info("Client joined %s", room)
    return {"room": room}

@app.errorhandler(404)
def not_found(e):
    return jsonify({"error": "Not found."}), 404

@app.errorhandler(500)
def internal_error(e):
    app.logger.error("Unhandled error: %s", e)
    return jsonify({"error": "Internal server error."}), 500

with app.app_context():
    db.create_all()

if __name__ == '__main__':
    socketio.run(app, debug=env == "development", host='0.0.0.0', port=port)
