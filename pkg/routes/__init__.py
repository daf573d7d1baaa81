"""
Routes Package - Initialize all route blueprints
"""

from .instance_routes import instance_bp
from .verification_routes import verification_bp

def register_blueprints(app):
    """Register all route blueprints with the Flask app."""
    app.register_blueprint(instance_bp)
    app.register_blueprint(verification_bp)
