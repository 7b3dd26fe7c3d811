"""JSON API routes exposing lab operations over HTTP.

This module registers REST endpoints for weight constants, Luxemburg norms
and the sharpness sweeps. Request bodies carry the same parameter names as
the CLI flags (underscored); global settings (``dimension``, ``resolution``,
``levels``, ...) may be sent alongside and override the service defaults.
"""

from __future__ import annotations

import logging
from typing import Any

from flask import jsonify, request

from lab_config import LabConfig
from lab_errors import LabError
from lab_operations import run_operation
from sharpness_lab import SWEEPS

# Logging setup
logger = logging.getLogger(__name__)

_CONFIG_KEYS = ("dimension", "resolution", "seed", "tolerance", "quad_tolerance", "levels")


def _split_body(data: dict[str, Any], base: LabConfig) -> tuple[LabConfig, dict[str, Any]]:
    overrides = {key: data[key] for key in _CONFIG_KEYS if key in data}
    params = {key: value for key, value in data.items() if key not in _CONFIG_KEYS}
    # the service never writes files on behalf of a client
    params.pop("output_path", None)
    return base.merged(overrides), params


def register_lab_routes(app, config: LabConfig | None = None) -> None:
    """Register lab routes to Flask app.

    Args:
        app: Flask application instance.
        config: Service-wide defaults; ``LabConfig.from_env()`` when omitted.

    Example:
        >>> from flask import Flask
        >>> app = Flask(__name__)
        >>> register_lab_routes(app)
    """
    base = config or LabConfig.from_env()

    def handle(operation: str, extra: dict[str, Any] | None = None):
        try:
            data = request.get_json(silent=True)
            if data is None:
                data = {}
            if not isinstance(data, dict):
                return jsonify({
                    'success': False,
                    'error': 'Request body must be a JSON object'
                }), 400

            resolved, params = _split_body(data, base)
            record = run_operation(operation, resolved, {**params, **(extra or {})})

            return jsonify({'success': True, **record}), 200

        except LabError as e:
            # Parameter, geometry or numerical failure
            logger.warning(f"Lab error: {e.message}, Context: {e.context}")
            return jsonify({
                'success': False,
                'error': e.message,
                'code': e.code
            }), e.status_code

        except Exception as e:
            # Unexpected error
            logger.critical(f"Unexpected error in {operation} endpoint: {e}", exc_info=True)
            return jsonify({
                'success': False,
                'error': 'An unexpected error occurred.'
            }), 500

    @app.route('/api/apq', methods=['POST'])
    def apq():
        """A_{p,q} lattice constant.

        Request Body:
            {"w": "power:-0.5", "p": 2, "q": 2, "resolution": 10}

        Returns:
            JSON record with ``results.constant`` and ``results.argmax_cube``.
        """
        return handle('apq')

    @app.route('/api/bump', methods=['POST'])
    def bump():
        """Two-weight bump constant.

        Request Body:
            {"u": "const:1", "v": "const:1", "A": "logbump:2:1.5",
             "B": "logbump:2:1.5", "p": 2}
        """
        return handle('bump')

    @app.route('/api/bmo', methods=['POST'])
    def bmo():
        """BMO lattice norm of ``b``."""
        return handle('bmo')

    @app.route('/api/luxemburg', methods=['POST'])
    def luxemburg():
        """Luxemburg norm of ``f`` with Young function ``young`` on the domain cube."""
        return handle('luxemburg')

    @app.route('/api/sweep/<name>', methods=['POST'])
    def sweep(name: str):
        """Run a sharpness sweep by name.

        Response:
            {
                "success": true,
                "results": {"rows": [...], "fit": {"slope": 0.5, ...}},
                ...
            }

        Returns:
            HTTP 200 with the sweep record, HTTP 404 for an unknown sweep name.
        """
        if name not in SWEEPS:
            return jsonify({
                'success': False,
                'error': f"Unknown sweep '{name}'",
                'available': sorted(SWEEPS)
            }), 404
        return handle('sweep', {'name': name})

    logger.info("Lab routes registered successfully")
