"""
NullRig

A numerical engine for the induced geometry of r-null submanifolds of
semi-Riemannian manifolds: adapted frames, riggings, the rigged metric and
connection, and residual checks of the identities relating them.
"""

__version__ = "0.1.0"
