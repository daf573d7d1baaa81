"""Service layer: instances, LP models, the exact solver and the verification checks."""
