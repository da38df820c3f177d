"""Market states from noise-suppressed correlation frames."""

__version__ = "0.1.0"
