"""
Database module for the LP relaxation lab
Stores generated instances and verification reports
"""

import json
import sqlite3
from datetime import datetime
from typing import Dict, List, Optional

import config


def get_db_connection():
    """Get a database connection."""
    conn = sqlite3.connect(config.DATABASE)
    conn.row_factory = sqlite3.Row  # This enables column access by name
    return conn

def init_database():
    """Initialize the database with required tables."""
    conn = get_db_connection()

    conn.execute('''
        CREATE TABLE IF NOT EXISTS instances (
            id INTEGER PRIMARY KEY AUTOINCREMENT,
            name TEXT NOT NULL,
            generator TEXT NOT NULL,
            payload TEXT NOT NULL,
            created_at TEXT NOT NULL
        )
    ''')

    conn.execute('''
        CREATE TABLE IF NOT EXISTS reports (
            id INTEGER PRIMARY KEY AUTOINCREMENT,
            kind TEXT NOT NULL,
            instance_id INTEGER,
            payload TEXT NOT NULL,
            passed INTEGER NOT NULL,
            created_at TEXT NOT NULL,
            FOREIGN KEY (instance_id) REFERENCES instances (id)
        )
    ''')

    conn.commit()
    conn.close()

# Helper Functions for Database Operations

def _instance_row(row) -> Dict:
    record = dict(row)
    record['payload'] = json.loads(record['payload'])
    return record

def insert_instance(name: str, generator: str, payload: Dict) -> int:
    """Insert an instance JSON document; returns its id."""
    conn = get_db_connection()
    cursor = conn.execute('''
        INSERT INTO instances (name, generator, payload, created_at)
        VALUES (?, ?, ?, ?)
    ''', (name, generator, json.dumps(payload), datetime.now().isoformat()))
    conn.commit()
    instance_id = cursor.lastrowid
    conn.close()
    return instance_id

def get_instance_by_id(instance_id: int) -> Optional[Dict]:
    """Get a stored instance by ID."""
    conn = get_db_connection()
    row = conn.execute('SELECT * FROM instances WHERE id = ?', (instance_id,)).fetchone()
    conn.close()
    return _instance_row(row) if row else None

def get_all_instances() -> List[Dict]:
    """List stored instances without their payloads."""
    conn = get_db_connection()
    rows = conn.execute('SELECT id, name, generator, created_at FROM instances ORDER BY id').fetchall()
    conn.close()
    return [dict(row) for row in rows]

def insert_report(kind: str, instance_id: Optional[int], payload: Dict, passed: bool) -> int:
    """Insert a verification or gap report; returns its id."""
    conn = get_db_connection()
    cursor = conn.execute('''
        INSERT INTO reports (kind, instance_id, payload, passed, created_at)
        VALUES (?, ?, ?, ?, ?)
    ''', (kind, instance_id, json.dumps(payload), int(passed), datetime.now().isoformat()))
    conn.commit()
    report_id = cursor.lastrowid
    conn.close()
    return report_id

def get_reports(instance_id: Optional[int] = None) -> List[Dict]:
    """Get reports, optionally only those for one instance."""
    conn = get_db_connection()
    if instance_id is None:
        rows = conn.execute('SELECT * FROM reports ORDER BY id').fetchall()
    else:
        rows = conn.execute('SELECT * FROM reports WHERE instance_id = ? ORDER BY id', (instance_id,)).fetchall()
    conn.close()
    records = []
    for row in rows:
        record = _instance_row(row)
        record['passed'] = bool(record['passed'])
        records.append(record)
    return records
