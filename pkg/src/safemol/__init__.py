"""SAFE molecular line notation toolkit."""
__version__ = "0.1.0"
