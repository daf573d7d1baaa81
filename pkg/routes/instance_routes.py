"""
Instance Routes - generate, store and list instances
"""

from flask import Blueprint, jsonify, request
from database import get_all_instances, get_instance_by_id, insert_instance
from services.errors import LiftGapError
from services.instance_service import base_of, generate_instance, instance_to_json

instance_bp = Blueprint('instances', __name__, url_prefix='/api/instances')

@instance_bp.route('', methods=['POST'])
def create_instance():
    """
    Generate an instance from {"generator": ..., "params": {...}} and store it.
    Rational parameters are accepted as "p/q" strings.
    """
    body = request.get_json(silent=True) or {}
    generator = body.get('generator', '').strip()
    if not generator:
        return jsonify({'error': 'Generator is required'}), 400

    try:
        inst = generate_instance(generator, body.get('params'))
    except LiftGapError as exc:
        return jsonify({'error': str(exc)}), 400

    name = body.get('name') or generator
    instance_id = insert_instance(name, generator, instance_to_json(inst, name=name))
    base = base_of(inst)
    return jsonify({
        'id': instance_id,
        'name': name,
        'mode': base.mode,
        'n_facilities': base.n_facilities,
        'n_clients': base.n_clients,
    }), 201

@instance_bp.route('', methods=['GET'])
def list_instances():
    """List stored instances."""
    instances = get_all_instances()
    return jsonify({'instances': instances, 'count': len(instances)})

@instance_bp.route('/<int:instance_id>')
def get_instance(instance_id):
    """Return a stored instance as JSON."""
    record = get_instance_by_id(instance_id)
    if not record:
        return jsonify({'error': 'Instance not found'}), 404
    return jsonify(record)
