#!/usr/bin/env python3
"""
Tests for the JSON service routes
"""
import sys
import os

import pytest

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from app import create_app  # noqa: E402
from lab_config import LabConfig  # noqa: E402


@pytest.fixture
def client():
    app = create_app(LabConfig().merged({"resolution": 6, "log_level": "WARNING"}))
    app.config["TESTING"] = True
    return app.test_client()


def test_health_check(client):
    """Health reports the defaults and the available sweeps"""
    response = client.get('/api/health')
    assert response.status_code == 200
    data = response.get_json()
    assert data['status'] == 'healthy'
    assert data['defaults']['resolution'] == 6
    assert 'sobolev' in data['sweeps']
    assert client.get('/health').status_code == 200


def test_bmo_endpoint(client):
    """POST /api/bmo returns the lattice norm"""
    response = client.post('/api/bmo', json={'b': 'heaviside', 'domain': '-1:1'})
    assert response.status_code == 200
    data = response.get_json()
    assert data['success'] is True
    assert data['results']['constant'] == pytest.approx(0.5)
    assert data['provenance']['resolution'] == 6


def test_body_overrides_service_defaults(client):
    """Global settings in the body override the defaults for one request"""
    response = client.post('/api/bmo', json={'b': 'x', 'resolution': 4})
    assert response.get_json()['provenance']['resolution'] == 4


def test_lab_error_maps_to_400(client):
    """Lab errors come back with their code"""
    response = client.post('/api/bmo', json={'b': 'nosuch'})
    assert response.status_code == 400
    data = response.get_json()
    assert data['success'] is False
    assert data['code'] == 'UNKNOWN_FUNCTION'


def test_missing_parameter(client):
    """A missing function id is a parameter error"""
    response = client.post('/api/luxemburg', json={'f': 'x'})
    assert response.status_code == 400
    assert response.get_json()['code'] == 'PARAMETER_ERROR'


def test_body_must_be_an_object(client):
    """JSON arrays are refused"""
    response = client.post('/api/apq', json=[1, 2])
    assert response.status_code == 400
    assert response.get_json()['success'] is False


def test_apq_endpoint(client):
    """A constant weight has A_{p,q} constant 1"""
    response = client.post('/api/apq', json={'w': 'const:2', 'p': 2, 'q': 3})
    assert response.status_code == 200
    assert response.get_json()['results']['constant'] == pytest.approx(1.0)


def test_sweep_endpoint(client):
    """Sweeps run by name and never write files for a client"""
    response = client.post('/api/sweep/power-weight',
                           json={'p': 2, 'sweep_resolution': 6, 'output_path': '/tmp/never.csv'})
    assert response.status_code == 200
    results = response.get_json()['results']
    assert results['name'] == 'power-weight'
    assert results['csv_path'] is None
    assert len(results['rows']) == 4


def test_unknown_sweep(client):
    """Unknown sweep names list the available ones"""
    response = client.post('/api/sweep/nope', json={})
    assert response.status_code == 404
    data = response.get_json()
    assert 'sobolev' in data['available']
