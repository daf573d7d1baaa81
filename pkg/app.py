"""
Main Flask application entry point for the LP relaxation lab.

This module provides the application factory pattern for creating Flask app instances.
Routes are organized in separate blueprint modules in the routes package; the
click commands of cli.py are attached under `flask lab ...`.
"""

import logging

from flask import Flask

import config
from cli import cli
from database import init_database
from routes import register_blueprints


def create_app():
    """
    Application factory function to create and configure Flask app.

    Returns:
        Flask: Configured Flask application instance
    """
    app = Flask(__name__)
    logging.basicConfig(level=config.LOG_LEVEL, format='%(levelname)s %(name)s: %(message)s')

    # Initialize the database
    init_database()

    # Register all route blueprints
    register_blueprints(app)

    app.cli.add_command(cli, name='lab')

    return app


if __name__ == '__main__':
    app = create_app()
    app.run(debug=True, host='0.0.0.0', port=5000)
