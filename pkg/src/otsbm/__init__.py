"""Cost-driven bound tightening for DC optimal transmission switching."""
__version__ = "0.1.0"
