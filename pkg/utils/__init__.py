"""Utility modules for NullRig."""
