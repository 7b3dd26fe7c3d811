#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Weighted-inequality lab - JSON web service
Exposes weight constants, Luxemburg norms and sharpness sweeps over HTTP
"""

from __future__ import annotations

import logging
import os
from datetime import datetime

from flask import Flask, jsonify

from lab_config import LabConfig, configure_logging
from lab_operations import LAB_VERSION
from lab_routes import register_lab_routes
from sharpness_lab import SWEEPS

logger = logging.getLogger(__name__)


def create_app(config: LabConfig | None = None) -> Flask:
    """Build the Flask application.

    Args:
        config: Service defaults; read from ``LAB_*`` variables when omitted,
            with ``INFO`` logging unless ``LAB_LOG_LEVEL`` says otherwise.
    """
    if config is None:
        config = LabConfig.from_env()
        if "LAB_LOG_LEVEL" not in os.environ:
            config = config.merged({"log_level": "INFO"})
    configure_logging(config.log_level)

    app = Flask(__name__)
    app.config["LAB_CONFIG"] = config
    register_lab_routes(app, config)

    @app.route('/health')
    @app.route('/api/health')
    def health_check():
        """Service health check endpoint for monitoring"""
        return jsonify({
            'status': 'healthy',
            'version': LAB_VERSION,
            'service': 'Weighted Inequality Lab',
            'timestamp': datetime.now().isoformat(),
            'defaults': {
                'dimension': config.dimension,
                'resolution': config.resolution,
                'tolerance': config.tolerance,
                'quad_tolerance': config.quad_tolerance
            },
            'sweeps': sorted(SWEEPS)
        }), 200

    logger.info("Application created", extra={"resolution": config.resolution})
    return app


app = create_app()


if __name__ == '__main__':
    port = int(os.environ.get('PORT', 5000))
    logger.info(f"Server starting on http://localhost:{port}")
    app.run(host='0.0.0.0', port=port, debug=False, use_reloader=False)
