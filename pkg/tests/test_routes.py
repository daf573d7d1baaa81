import pytest

from app import create_app


@pytest.fixture
def client(temp_db):
    app = create_app()
    app.config['TESTING'] = True
    return app.test_client()


def _create(client, generator, params=None):
    response = client.post('/api/instances', json={'generator': generator, 'params': params or {}})
    assert response.status_code == 201, response.get_json()
    return response.get_json()['id']

def test_create_and_fetch_instance(client):
    """Generated instances are stored and returned with their JSON payload."""
    instance_id = _create(client, 'cfl-proper', {'n': 3})
    response = client.get(f'/api/instances/{instance_id}')
    assert response.status_code == 200
    record = response.get_json()
    assert record['generator'] == 'cfl-proper'
    assert record['payload']['n_clients'] == 19

def test_create_instance_requires_generator(client):
    response = client.post('/api/instances', json={})
    assert response.status_code == 400
    assert 'required' in response.get_json()['error'].lower()

def test_create_instance_invalid_params(client):
    response = client.post('/api/instances', json={'generator': 'ls', 'params': {'n': 0}})
    assert response.status_code == 400

def test_list_instances(client):
    _create(client, 'example1')
    _create(client, 'cfl-proper', {'n': 3})
    payload = client.get('/api/instances').get_json()
    assert payload['count'] == 2
    assert [i['generator'] for i in payload['instances']] == ['example1', 'cfl-proper']

def test_missing_instance_404(client):
    assert client.get('/api/instances/99').status_code == 404
    assert client.get('/api/gap/99').status_code == 404

def test_gap_route_stores_report(client):
    instance_id = _create(client, 'cfl-proper', {'n': 3})
    response = client.get(f'/api/gap/{instance_id}')
    assert response.status_code == 200
    assert response.get_json()['gap']['exact'] == '9'
    reports = client.get(f'/api/reports?instance_id={instance_id}').get_json()
    assert reports['count'] == 1
    assert reports['reports'][0]['kind'] == 'gap'
    assert reports['reports'][0]['passed'] is True

def test_gap_route_rejects_unknown_relaxation(client):
    instance_id = _create(client, 'cfl-proper', {'n': 3})
    assert client.get(f'/api/gap/{instance_id}?relaxation=sa').status_code == 400

def test_ls_route_depth_zero(client):
    instance_id = _create(client, 'ls', {'n': 5, 'l': 10, 'H': '2'})
    response = client.get(f'/api/ls/{instance_id}?depth=0')
    assert response.status_code == 200
    assert response.get_json()['node_count'] == 1

def test_ls_route_bad_depth(client):
    instance_id = _create(client, 'ls', {'n': 5, 'l': 10, 'H': '2'})
    assert client.get(f'/api/ls/{instance_id}?depth=two').status_code == 400
    assert client.get(f'/api/ls/{instance_id}?depth=5').status_code == 400

def test_ls_route_wrong_instance(client):
    instance_id = _create(client, 'cfl-proper', {'n': 3})
    assert client.get(f'/api/ls/{instance_id}').status_code == 400

def test_psd_route(client):
    assert client.post('/api/psd', json={'y': ['1/2', '1/2']}).get_json() == {'psd': True}
    assert client.post('/api/psd', json={'y': ['3/2']}).status_code == 400
    assert client.post('/api/psd', json={'y': []}).status_code == 400
