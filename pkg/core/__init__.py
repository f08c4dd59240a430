"""Core geometry modules for NullRig."""
