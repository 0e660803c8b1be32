"""Self-stabilizing NCA labeling and minimum spanning tree simulator."""

__version__ = "0.1.0"
