"""Post-editing research platform: corpus handling, edit-session capture,
MT quality metrics, agreement statistics, and result tables."""

__version__ = "0.1.0"
