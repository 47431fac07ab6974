"""Graph-state network simulator for quantum conference key agreement."""

__version__ = "0.1.0"
