"""
Verification Routes - gap reports and hierarchy checks for stored instances
"""

from flask import Blueprint, jsonify, request
from database import get_instance_by_id, get_reports, insert_report
from services.errors import LiftGapError
from services.hierarchy_service import psd_restriction_check
from services.instance_service import instance_from_json
from services.proper_service import example1_verify
from services.rational import from_text
from services.relaxation_service import standard_lp, star_lp
from services.solver_service import integrality_gap
from services.witness_service import AllChildrenPerNode, build_tree, root_solution

verification_bp = Blueprint('verification', __name__, url_prefix='/api')

def _stored_instance(instance_id):
    record = get_instance_by_id(instance_id)
    if not record:
        return None
    return instance_from_json(record['payload'])

@verification_bp.route('/gap/<int:instance_id>')
def gap(instance_id):
    """
    Integrality gap of the classic (default) or star relaxation.
    Query parameter: relaxation=classic|star
    """
    relaxation = request.args.get('relaxation', 'classic')
    if relaxation not in ('classic', 'star'):
        return jsonify({'error': 'Relaxation must be classic or star'}), 400
    try:
        inst = _stored_instance(instance_id)
        if inst is None:
            return jsonify({'error': 'Instance not found'}), 404
        lp = standard_lp(inst, aggregate_clients=True) if relaxation == 'classic' else star_lp(inst)
        report = integrality_gap(inst, lp, relaxation)
    except LiftGapError as exc:
        return jsonify({'error': str(exc)}), 400

    payload = report.to_json()
    insert_report('gap', instance_id, payload, not report.integral_skipped)
    return jsonify(payload)

@verification_bp.route('/ls/<int:instance_id>')
def ls_verify(instance_id):
    """Verify the evolution tree of an ls instance down to ?depth= (default 1)."""
    try:
        depth = int(request.args.get('depth', 1))
    except ValueError:
        return jsonify({'error': 'Depth must be an integer'}), 400
    try:
        inst = _stored_instance(instance_id)
        if inst is None:
            return jsonify({'error': 'Instance not found'}), 404
        report = build_tree(root_solution(inst), depth, AllChildrenPerNode(), inst)
    except LiftGapError as exc:
        return jsonify({'error': str(exc)}), 400

    payload = report.to_json()
    insert_report('ls-verify', instance_id, {k: v for k, v in payload.items() if k != 'nodes'}, report.passed)
    return jsonify(payload)

@verification_bp.route('/example1')
def example1():
    """Star-feasible point that no complexity-3/4 class weighting projects onto."""
    report = example1_verify()
    payload = report.to_json()
    insert_report('example1', None, payload, report.passed)
    return jsonify(payload)

@verification_bp.route('/psd', methods=['POST'])
def psd():
    """PSD test of y y^T + Diag(y - y^2) for {"y": ["p/q", ...]}."""
    body = request.get_json(silent=True) or {}
    values = body.get('y')
    if not isinstance(values, list) or not values:
        return jsonify({'error': 'y must be a non-empty list'}), 400
    try:
        y = [from_text(str(v)) for v in values]
        return jsonify({'psd': psd_restriction_check(y)})
    except (LiftGapError, ValueError, ZeroDivisionError) as exc:
        return jsonify({'error': str(exc)}), 400

@verification_bp.route('/reports')
def reports():
    """Stored reports, optionally for ?instance_id=."""
    instance_id = request.args.get('instance_id', type=int)
    records = get_reports(instance_id)
    return jsonify({'reports': records, 'count': len(records)})
