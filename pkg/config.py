"""
Configuration module for the LP relaxation lab.
Budgets and paths are module constants, overridable from the environment.
"""

import os

# Database configuration
DATABASE = os.environ.get('LIFTGAP_DB', 'liftgap.db')

# Memory cap in megabytes, checked before large enumerations
BUDGET_MB = int(os.environ.get('LIFTGAP_BUDGET_MB', '2048'))

# Enumeration budgets
STAR_BUDGET = int(os.environ.get('LIFTGAP_STAR_BUDGET', '20000'))
ORBIT_BUDGET = int(os.environ.get('LIFTGAP_ORBIT_BUDGET', '50000'))
SUBSET_BUDGET = int(os.environ.get('LIFTGAP_SUBSET_BUDGET', '4096'))
ENUM_BUDGET = int(os.environ.get('LIFTGAP_ENUM_BUDGET', '200000'))
TREE_BUDGET = int(os.environ.get('LIFTGAP_TREE_BUDGET', '100000'))
DENSE_BUDGET = int(os.environ.get('LIFTGAP_DENSE_BUDGET', '5000'))

# Membership oracle limits
ORACLE_MAX_VARIABLES = 12
ORACLE_MAX_NESTED_VARIABLES = 8
ORACLE_MAX_ROUNDS = 3

# Floating-point fast mode only; exact paths never read this
FLOAT_TOL = float(os.environ.get('LIFTGAP_FLOAT_TOL', '1e-9'))

LOG_LEVEL = os.environ.get('LIFTGAP_LOG_LEVEL', 'INFO')

# Rough bytes per stored rational, used for the memory estimate
BYTES_PER_RATIONAL = 120


def budgets() -> dict:
    """Effective budget snapshot embedded in every report."""
    return {
        'budget_mb': BUDGET_MB,
        'star_budget': STAR_BUDGET,
        'orbit_budget': ORBIT_BUDGET,
        'subset_budget': SUBSET_BUDGET,
        'enum_budget': ENUM_BUDGET,
        'tree_budget': TREE_BUDGET,
        'dense_budget': DENSE_BUDGET,
    }
