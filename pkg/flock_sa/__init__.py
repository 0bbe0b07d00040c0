"""Deterministic multi-agent flocking with a ConfScore-based auxiliary controller."""

__version__ = '0.1.0'
